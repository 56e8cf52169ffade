#pragma once
#include <stdexcept>
#include <string>

namespace gamacro {

struct SourceLoc {
  std::string file;
  int line = 0;
  int col = 0;
  int end_line = 0;
  int end_col = 0;
  // AST equality is structural; locations never participate.
  friend bool operator==(const SourceLoc&, const SourceLoc&) { return true; }
};

// Every library failure carries a stable code name (e.g. "FrameMismatch").
class Error : public std::runtime_error {
public:
  Error(std::string code, const std::string& message, SourceLoc loc = {})
      : std::runtime_error(message), code_(std::move(code)), loc_(std::move(loc)) {}
  const std::string& code() const { return code_; }
  const SourceLoc& loc() const { return loc_; }
  void set_loc_if_missing(const SourceLoc& loc) {
    if (loc_.line == 0) loc_ = loc;
  }

private:
  std::string code_;
  SourceLoc loc_;
};

}  // namespace gamacro

namespace gamacro {

struct Diagnostic {
  std::string severity = "error";  // error | warning
  std::string code;
  std::string message;
  SourceLoc span;
};

inline Diagnostic to_diagnostic(const Error& e) { return {"error", e.code(), e.what(), e.loc()}; }

}  // namespace gamacro
