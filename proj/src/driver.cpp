#include "gamacro/driver.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <fstream>
#include <json.hpp>
#include <regex>
#include <sstream>
#include <thread>

namespace gamacro::driver {

namespace fs = std::filesystem;

namespace {

std::string trim(const std::string& s) {
  auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

bool parse_bool(const std::string& key, const std::string& v, int line) {
  if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
  if (v == "false" || v == "no" || v == "off" || v == "0") return false;
  throw Error("ConfigError", "'" + key + "' expects true or false, found '" + v + "'", {"", line, 1});
}

template <class T>
T parse_number(const std::string& key, const std::string& v, int line) {
  std::istringstream in(v);
  T x{};
  in >> x;
  if (!in || !in.eof()) throw Error("ConfigError", "'" + key + "' expects a number, found '" + v + "'", {"", line, 1});
  return x;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error("IoError", "cannot read " + p.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error("IoError", "cannot write " + p.string());
  out << text;
}

void log(const Config& c, int level, const std::string& msg) {
  if (c.log) c.log(level, msg);
}

fs::path resolve(const Config& c, const std::string& p) {
  fs::path x(p);
  return x.is_absolute() ? x : c.base / x;
}

std::string display(const Config& c, const fs::path& p) { return fs::relative(p, c.base).generic_string(); }

struct Loaded {
  std::shared_ptr<const CompiledProject> project;
  std::vector<Diagnostic> diagnostics;
};

Loaded load_project(const Config& c) {
  fs::path dir = resolve(c, c.dsl_dir);
  if (!fs::is_directory(dir)) throw Error("ConfigError", "dsl_dir " + dir.string() + " is not a directory");
  log(c, 1, "compiling " + dir.string());
  auto r = compile_directory(dir.string());
  return {r.project, r.diagnostics};
}

int worker_count(const Config& c, std::size_t tasks) {
  int n = c.jobs > 0 ? c.jobs : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  return std::max(1, std::min<int>(n, static_cast<int>(tasks)));
}

// Runs fn(i) for i in [0, n) on a fixed pool of threads.
void parallel_for(const Config& c, std::size_t n, const std::function<void(std::size_t)>& fn) {
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i; (i = next++) < n;) fn(i);
  };
  int w = worker_count(c, n);
  std::vector<std::thread> pool;
  for (int i = 1; i < w; ++i) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
}

struct SourceFile {
  fs::path path;
  std::string text;
  codegen::ScanResult scan;
};

std::vector<SourceFile> read_sources(const Config& c, const codegen::Dialect& d, bool from_mirror) {
  std::vector<SourceFile> files;
  for (const auto& p : expand_sources(c)) {
    SourceFile f;
    f.path = p;
    fs::path from = p;
    if (from_mirror && !c.mirror.empty()) from = resolve(c, c.mirror) / fs::relative(p, c.base);
    f.text = read_file(from);
    f.scan = codegen::scan_source(f.text, d, display(c, p));
    files.push_back(std::move(f));
  }
  return files;
}

}  // namespace

bool RunResult::has_errors() const {
  return std::any_of(diagnostics.begin(), diagnostics.end(), [](const Diagnostic& d) { return d.severity == "error"; }) ||
         std::any_of(points.begin(), points.end(), [](const PointReport& p) { return !p.pass; });
}

Config parse_config(const std::string& text, const fs::path& base) {
  Config c;
  c.base = base;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string s = trim(raw);
    if (s.empty() || s[0] == '#') continue;
    auto eq = s.find('=');
    if (eq == std::string::npos) throw Error("ConfigError", "expected key = value", {"", line, 1});
    std::string key = trim(s.substr(0, eq)), value = trim(s.substr(eq + 1));
    if (key == "dsl_dir") c.dsl_dir = value;
    else if (key == "sources") {
      std::istringstream parts(value);
      std::string g;
      while (std::getline(parts, g, ','))
        if (!trim(g).empty()) c.sources.push_back(trim(g));
    } else if (key == "dialect") c.dialect = value;
    else if (key == "strict") c.strict = parse_bool(key, value, line);
    else if (key == "emit_zeros") c.emit_zeros = parse_bool(key, value, line);
    else if (key == "verify") c.verify = parse_bool(key, value, line);
    else if (key == "samples") c.samples = parse_number<int>(key, value, line);
    else if (key == "seed") c.seed = parse_number<std::uint64_t>(key, value, line);
    else if (key == "tolerance") c.tolerance = parse_number<double>(key, value, line);
    else if (key == "jobs") c.jobs = parse_number<int>(key, value, line);
    else if (key == "mirror") c.mirror = value;
    else if (key.rfind("function.", 0) == 0) c.functions[key.substr(9)] = value;
    else throw Error("ConfigError", "unknown key '" + key + "'", {"", line, 1});
  }
  return c;
}

Config load_config(const std::string& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const Error&) {
    throw Error("ConfigError", "cannot read project file " + path);
  }
  fs::path base = fs::absolute(path).parent_path();
  try {
    return parse_config(text, base);
  } catch (Error& e) {
    SourceLoc loc = e.loc();
    loc.file = path;
    throw Error(e.code(), e.what(), loc);
  }
}

bool glob_match(const std::string& pattern, const std::string& path) {
  std::string re;
  for (std::size_t i = 0; i < pattern.size(); ++i) {
    char ch = pattern[i];
    if (pattern.compare(i, 3, "**/") == 0) {
      re += "(.*/)?";
      i += 2;
    } else if (pattern.compare(i, 2, "**") == 0) {
      re += ".*";
      ++i;
    } else if (ch == '*') re += "[^/]*";
    else if (ch == '?') re += "[^/]";
    else if (std::isalnum(static_cast<unsigned char>(ch)) || ch == '/' || ch == '_' || ch == '-') re += ch;
    else {
      re += '\\';
      re += ch;
    }
  }
  return std::regex_match(path, std::regex(re));
}

std::vector<fs::path> expand_sources(const Config& c) {
  std::vector<fs::path> out;
  for (const auto& g : c.sources) {
    // walk from the longest wildcard-free directory prefix
    std::string prefix;
    std::size_t start = 0;
    for (std::size_t slash; (slash = g.find('/', start)) != std::string::npos; start = slash + 1) {
      std::string part = g.substr(start, slash - start);
      if (part.find_first_of("*?") != std::string::npos) break;
      prefix += part + "/";
    }
    fs::path root = c.base / prefix;
    if (g.find_first_of("*?") == std::string::npos) {
      if (fs::is_regular_file(c.base / g)) out.push_back(fs::weakly_canonical(c.base / g));
      continue;
    }
    if (!fs::is_directory(root)) continue;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
      if (!e.is_regular_file()) continue;
      std::string rel = fs::relative(e.path(), c.base).generic_string();
      if (glob_match(g, rel)) out.push_back(fs::weakly_canonical(e.path()));
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

codegen::Dialect dialect_of(const Config& c) {
  auto d = codegen::make_dialect(c.dialect);
  for (const auto& [k, v] : c.functions) d.functions[k] = v;
  return d;
}

RunResult check(const Config& c) {
  RunResult r;
  auto t0 = std::chrono::steady_clock::now();
  dialect_of(c);
  r.diagnostics = load_project(c).diagnostics;
  r.stats.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

RunResult generate(const Config& c) {
  RunResult r;
  auto t0 = std::chrono::steady_clock::now();
  auto loaded = load_project(c);
  r.diagnostics = loaded.diagnostics;
  if (r.has_errors()) return r;
  if (c.sources.empty()) throw Error("ConfigError", "no sources configured for generate");
  auto dialect = dialect_of(c);
  auto files = read_sources(c, dialect, false);
  std::vector<std::pair<std::size_t, std::size_t>> tasks;
  for (std::size_t f = 0; f < files.size(); ++f) {
    for (const auto& d : files[f].scan.diagnostics) r.diagnostics.push_back(d);
    for (std::size_t p = 0; p < files[f].scan.points.size(); ++p) tasks.emplace_back(f, p);
  }
  codegen::Options opt;
  opt.strict = c.strict;
  opt.emit_zeros = c.emit_zeros;
  std::vector<codegen::PointResult> results(tasks.size());
  std::vector<PointReport> reports(tasks.size());
  log(c, 1, std::to_string(tasks.size()) + " binding points in " + std::to_string(files.size()) + " files");
  parallel_for(c, tasks.size(), [&](std::size_t i) {
    const auto& bp = files[tasks[i].first].scan.points[tasks[i].second];
    results[i] = codegen::generate_point(*loaded.project, bp, dialect, opt);
    log(c, 0, bp.file + ":" + std::to_string(bp.loc.line) + " " + bp.macro + (results[i].ok ? " ok" : " failed"));
    if (c.verify && results[i].ok) {
      reports[i] = {bp.file, bp.macro, bp.loc.line, false, {}};
      reports[i].report = codegen::verify_point(*loaded.project, bp, results[i].sequence, c.samples, c.seed, c.tolerance);
      reports[i].pass = reports[i].report.pass();
    }
  });
  double hits = 0;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    for (const auto& d : results[i].diagnostics) r.diagnostics.push_back(d);
    if (!results[i].ok) continue;
    ++r.stats.points;
    r.stats.assignments += results[i].sequence.items.size();
    r.stats.temporaries += results[i].sequence.temporaries();
    hits += results[i].cache_hit_rate;
    if (c.verify) r.points.push_back(reports[i]);
  }
  if (r.stats.points) r.stats.cache_hit_rate = hits / static_cast<double>(r.stats.points);
  // splice and write, one file at a time
  std::size_t k = 0;
  for (auto& f : files) {
    std::vector<codegen::PointResult> mine;
    for (; k < tasks.size() && &files[tasks[k].first] == &f; ++k) mine.push_back(results[k]);
    std::string text = codegen::splice_all(f.text, mine);
    fs::path dest = c.mirror.empty() ? f.path : resolve(c, c.mirror) / fs::relative(f.path, c.base);
    ++r.stats.files;
    if (!c.mirror.empty() || text != f.text) {
      write_file(dest, text);
      if (text != f.text) ++r.stats.files_changed;
      log(c, 1, "wrote " + dest.string());
    }
  }
  r.stats.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

RunResult verify(const Config& c) {
  RunResult r;
  auto t0 = std::chrono::steady_clock::now();
  auto loaded = load_project(c);
  r.diagnostics = loaded.diagnostics;
  if (r.has_errors()) return r;
  auto dialect = dialect_of(c);
  auto files = read_sources(c, dialect, true);
  struct Task {
    const SourceFile* file;
    const codegen::BindingPoint* bp;
  };
  std::vector<Task> tasks;
  for (const auto& f : files) {
    for (const auto& d : f.scan.diagnostics) r.diagnostics.push_back(d);
    for (const auto& bp : f.scan.points) tasks.push_back({&f, &bp});
  }
  std::vector<PointReport> reports(tasks.size());
  parallel_for(c, tasks.size(), [&](std::size_t i) {
    const auto& bp = *tasks[i].bp;
    PointReport& p = reports[i];
    p.file = bp.file;
    p.macro = bp.macro;
    p.line = bp.loc.line;
    if (bp.block_end <= bp.block_begin) {
      p.report.message = "no generated block";
      return;
    }
    try {
      auto seq = codegen::parse_generated(tasks[i].file->text.substr(bp.block_begin, bp.block_end - bp.block_begin), dialect);
      p.report = codegen::verify_point(*loaded.project, bp, seq, c.samples, c.seed, c.tolerance);
      p.pass = p.report.pass();
    } catch (const Error& e) {
      p.report.message = e.code() + ": " + e.what();
    }
  });
  r.points = std::move(reports);
  r.stats.files = files.size();
  r.stats.points = tasks.size();
  r.stats.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

std::string json_line(const Diagnostic& d) {
  nlohmann::ordered_json j;
  j["file"] = d.span.file;
  j["line"] = d.span.line;
  j["col"] = d.span.col;
  j["end_line"] = d.span.end_line;
  j["end_col"] = d.span.end_col;
  j["severity"] = d.severity;
  j["code"] = d.code;
  j["message"] = d.message;
  return j.dump();
}

std::string json_line(const PointReport& p) {
  nlohmann::ordered_json j;
  j["file"] = p.file;
  j["line"] = p.line;
  j["macro"] = p.macro;
  j["status"] = p.pass ? "pass" : "fail";
  j["samples"] = p.report.samples;
  j["skipped"] = p.report.skipped;
  j["failures"] = p.report.failures;
  j["max_error"] = p.report.max_error;
  if (!p.report.message.empty()) j["message"] = p.report.message;
  return j.dump();
}

std::string json_line(const Stats& s, bool with_time) {
  nlohmann::ordered_json j;
  j["files"] = s.files;
  j["files_changed"] = s.files_changed;
  j["binding_points"] = s.points;
  j["assignments"] = s.assignments;
  j["temporaries"] = s.temporaries;
  j["cache_hit_rate"] = s.cache_hit_rate;
  if (with_time) j["wall_ms"] = s.wall_ms;
  nlohmann::ordered_json out;
  out["stats"] = j;
  return out.dump();
}

}  // namespace gamacro::driver
