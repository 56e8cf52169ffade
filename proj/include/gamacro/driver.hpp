#pragma once
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "gamacro/codegen.hpp"

namespace gamacro::driver {

// Key-value project file:
//   # comment
//   dsl_dir    = dsl
//   sources    = src/*.cs, src/**/*.c
//   dialect    = csharp
//   strict     = false
//   emit_zeros = false
//   verify     = true
//   samples    = 200
//   seed       = 1
//   tolerance  = 1e-9
//   jobs       = 4
//   mirror     = out
//   function.sqrt = Math.Sqrt
// Relative paths resolve against the directory holding the file.
struct Config {
  std::filesystem::path base = ".";
  std::string dsl_dir = "dsl";
  std::vector<std::string> sources;
  std::string dialect = "neutral";
  std::map<std::string, std::string> functions;
  bool strict = false;
  bool emit_zeros = false;
  bool verify = false;
  int samples = 200;
  std::uint64_t seed = 1;
  double tolerance = 1e-9;
  int jobs = 0;  // 0 means one per logical core
  std::string mirror;
  // level 0 debug, 1 info, 2 warn
  std::function<void(int, const std::string&)> log;
};

// Throws Error("ConfigError").
Config load_config(const std::string& path);
Config parse_config(const std::string& text, const std::filesystem::path& base);

// '*' and '?' stay within one path component, '**/' spans any number of them.
bool glob_match(const std::string& pattern, const std::string& path);
std::vector<std::filesystem::path> expand_sources(const Config& config);

codegen::Dialect dialect_of(const Config& config);

struct Stats {
  std::size_t files = 0, files_changed = 0, points = 0, assignments = 0, temporaries = 0;
  double cache_hit_rate = 0;
  double wall_ms = 0;
};

struct PointReport {
  std::string file, macro;
  int line = 0;
  bool pass = false;
  codegen::VerifyReport report;
};

struct RunResult {
  std::vector<Diagnostic> diagnostics;
  std::vector<PointReport> points;
  Stats stats;
  bool has_errors() const;
};

RunResult check(const Config& config);
RunResult generate(const Config& config);
RunResult verify(const Config& config);

std::string json_line(const Diagnostic& d);
std::string json_line(const PointReport& p);
std::string json_line(const Stats& s, bool with_time);

}  // namespace gamacro::driver
