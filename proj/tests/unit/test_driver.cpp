#include <doctest.h>

#include "gamacro/driver.hpp"

using namespace gamacro;
using namespace gamacro::driver;

TEST_CASE("glob patterns") {
  CHECK(glob_match("src/*.cs", "src/A.cs"));
  CHECK_FALSE(glob_match("src/*.cs", "src/sub/A.cs"));
  CHECK(glob_match("src/**/*.c", "src/a.c"));
  CHECK(glob_match("src/**/*.c", "src/x/y/a.c"));
  CHECK_FALSE(glob_match("src/**/*.c", "lib/a.c"));
  CHECK(glob_match("a?.h", "ab.h"));
  CHECK_FALSE(glob_match("a?.h", "a/.h"));
  CHECK(glob_match("a+b[1].txt", "a+b[1].txt"));
}

TEST_CASE("config keys") {
  auto c = parse_config("# demo\n dsl_dir = d \nsources = a/*.c, b/**/*.h\ndialect = csharp\nstrict = yes\n"
                        "emit_zeros = off\nverify = true\nsamples = 50\nseed = 99\ntolerance = 1e-10\njobs = 3\n"
                        "mirror = out\nfunction.sqrt = my_sqrt\n",
                        "/tmp/base");
  CHECK(c.dsl_dir == "d");
  CHECK(c.sources == std::vector<std::string>{"a/*.c", "b/**/*.h"});
  CHECK(c.dialect == "csharp");
  CHECK(c.strict);
  CHECK_FALSE(c.emit_zeros);
  CHECK(c.verify);
  CHECK(c.samples == 50);
  CHECK(c.seed == 99);
  CHECK(c.tolerance == 1e-10);
  CHECK(c.jobs == 3);
  CHECK(c.mirror == "out");
  CHECK(dialect_of(c).functions.at("sqrt") == "my_sqrt");
  CHECK(dialect_of(c).functions.at("cos") == "Math.Cos");
}

TEST_CASE("config errors name the line") {
  for (const char* text : {"strict = maybe\n", "\nsamples = ten\n", "colour = red\n", "no equals sign\n"}) {
    INFO(text);
    try {
      parse_config(text, ".");
      FAIL("expected ConfigError");
    } catch (const Error& e) {
      CHECK(e.code() == "ConfigError");
      CHECK(e.loc().line >= 1);
    }
  }
}

TEST_CASE("stdlib checks clean") {
  Config c;
  c.base = std::string(GAMACRO_SOURCE_DIR) + "/stdlib";
  c.dsl_dir = ".";
  auto r = check(c);
  CHECK(r.diagnostics.empty());
  CHECK_FALSE(r.has_errors());
}

TEST_CASE("json lines") {
  Diagnostic d{"error", "UnknownFrame", "unknown frame 'q'", {"a.gmac", 3, 4, 3, 5}};
  CHECK(json_line(d) == R"({"file":"a.gmac","line":3,"col":4,"end_line":3,"end_col":5,"severity":"error","code":"UnknownFrame","message":"unknown frame 'q'"})");
  Stats s;
  s.points = 2;
  CHECK(json_line(s, false).find("wall_ms") == std::string::npos);
  CHECK(json_line(s, true).find("wall_ms") != std::string::npos);
}
