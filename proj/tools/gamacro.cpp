// gamacro: check, generate and verify a project described by a key-value file.
#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "gamacro/driver.hpp"

using namespace gamacro;

namespace {

std::shared_ptr<spdlog::logger> make_logger() {
  auto logger = spdlog::stderr_color_mt("gamacro");
  logger->set_pattern("[%l] %v");
  const char* env = std::getenv("GAMACRO_LOG");
  logger->set_level(env ? spdlog::level::from_str(env) : spdlog::level::warn);
  return logger;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Geometric-algebra macro compiler"};
  app.require_subcommand(1);
  std::string project = "gamacro.conf", dialect, mirror;
  bool strict = false, emit_zeros = false, do_verify = false;
  std::uint64_t seed = 0;
  int jobs = -1, samples = -1;
  bool seed_set = false;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--project", project, "project file")->capture_default_str();
    sub->add_option("--dialect", dialect, "neutral, c-like or csharp");
    sub->add_flag("--strict", strict, "unbound inputs and out-of-class outputs are errors");
    sub->add_flag("--emit-zeros", emit_zeros, "emit zero assignments for unbound output blades");
    sub->add_option("--seed", seed, "verification seed")->each([&](const std::string&) { seed_set = true; });
    sub->add_option("--jobs", jobs, "worker threads (default: logical cores)");
    sub->add_option("--mirror", mirror, "write generated files under this directory instead of in place");
  };
  auto* check = app.add_subcommand("check", "parse and compile the DSL files");
  auto* gen = app.add_subcommand("generate", "generate code at every binding point");
  auto* ver = app.add_subcommand("verify", "compare generated blocks against the numeric oracle");
  for (auto* s : {check, gen, ver}) add_common(s);
  gen->add_flag("--verify", do_verify, "verify after generating");
  for (auto* s : {gen, ver}) s->add_option("--samples", samples, "random samples per binding point");
  CLI11_PARSE(app, argc, argv);

  auto logger = make_logger();
  auto run = [&]() -> int {
    driver::Config config = driver::load_config(project);
    if (!dialect.empty()) config.dialect = dialect;
    if (!mirror.empty()) config.mirror = std::filesystem::absolute(mirror).string();
    config.strict = config.strict || strict;
    config.emit_zeros = config.emit_zeros || emit_zeros;
    config.verify = config.verify || do_verify;
    if (seed_set) config.seed = seed;
    if (jobs >= 0) config.jobs = jobs;
    if (samples > 0) config.samples = samples;
    config.log = [&](int level, const std::string& msg) {
      logger->log(level == 0 ? spdlog::level::debug : level == 1 ? spdlog::level::info : spdlog::level::warn, msg);
    };
    driver::RunResult r;
    if (check->parsed()) r = driver::check(config);
    else if (gen->parsed()) r = driver::generate(config);
    else r = driver::verify(config);
    for (const auto& d : r.diagnostics) std::cout << driver::json_line(d) << "\n";
    for (const auto& p : r.points) std::cout << driver::json_line(p) << "\n";
    if (!check->parsed()) std::cout << driver::json_line(r.stats, false) << "\n";
    if (!check->parsed())
      std::cerr << "binding points " << r.stats.points << ", assignments " << r.stats.assignments << ", temporaries "
              << r.stats.temporaries << ", cache hit rate " << r.stats.cache_hit_rate << ", wall " << r.stats.wall_ms
              << " ms\n";
    return r.has_errors() ? 1 : 0;
  };
  try {
    return run();
  } catch (const Error& e) {
    Diagnostic d = to_diagnostic(e);
    std::cout << driver::json_line(d) << "\n";
    // configuration and dialect problems are user errors; anything else is internal
    return e.code() == "ConfigError" || e.code() == "UnknownDialect" || e.code() == "IoError" ? 1 : 2;
  } catch (const std::exception& e) {
    logger->critical("internal error: {}", e.what());
    return 2;
  }
}
