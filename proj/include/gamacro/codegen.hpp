#pragma once
#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "gamacro/compiler.hpp"

namespace gamacro::codegen {

// ---------------------------------------------------------------- dialects

struct Dialect {
  std::string name;     // neutral, c-like, csharp
  bool c_like = false;  // declarations, terminators, pow() calls
  bool regions = false; // accepts #region GMac : name / #endregion
  std::string declare = "double";
  // canonical function name (and "pow", "pi") to target spelling
  std::map<std::string, std::string> functions;
};

// Throws UnknownDialect.
Dialect make_dialect(const std::string& name);

// ---------------------------------------------------------------- binding points

struct CoefBind {
  std::string mv, blade;  // "u", "e1^e2"; the scalar blade is "1"
  Expr target;            // expression over target-language variables
  SourceLoc loc;
};

struct ClassBind {
  std::string mv, binding, object;
  SourceLoc loc;
};

struct Assume {
  std::string var;
  Number value;
  bool min = true;
  SourceLoc loc;
};

struct BindingPoint {
  std::string macro;
  std::string file;
  SourceLoc loc;  // the opening marker
  std::vector<CoefBind> coefs;
  std::vector<ClassBind> classes;
  std::vector<Assume> assumes;
  // byte offsets into the scanned text
  std::size_t insert_at = 0;                  // start of the closing marker line
  std::size_t block_begin = 0, block_end = 0; // existing generated block, empty if none
  std::string indent;
  std::string newline = "\n";
};

struct ScanResult {
  std::vector<BindingPoint> points;
  std::vector<Diagnostic> diagnostics;  // MalformedBinding, OverlappingRegions, warnings
};

ScanResult scan_source(const std::string& text, const Dialect& dialect, const std::string& file = "");

// ---------------------------------------------------------------- sequences

struct Assignment {
  enum class Kind { Input, Temp, Output, Verbatim };
  Kind kind = Kind::Temp;
  std::string name;  // symbol, or the target lvalue for outputs
  Expr value;
  std::string mv;    // outputs
  BladeId blade = 0;
  std::vector<std::variant<std::string, Expr>> text;  // verbatim pieces
};

struct ExprSequence {
  std::vector<Assignment> items;
  std::size_t op_count() const;
  std::size_t count(Assignment::Kind k) const;
  std::size_t temporaries() const;  // Temp and Input items, both emitted as varNNNN
};

struct Options {
  bool strict = false;      // unbound inputs and out-of-class outputs are errors
  bool emit_zeros = false;  // also emit unbound output blades of the class
  bool optimize = true;
};

struct Evaluation {
  ExprSequence sequence;                           // unoptimized
  std::map<std::string, SymMultivector> outputs;   // final output values over sequence symbols
  std::vector<Diagnostic> warnings;
  sym::AssumptionSet assumptions;
};

// Symbolically evaluates the macro named by bp. Throws Error.
Evaluation evaluate_macro(const CompiledProject& project, const BindingPoint& bp, const Options& opt = {},
                          sym::SymbolicCache* cache = nullptr);

// Replaces temporaries and input aliases in e by their definitions.
Expr expand(const ExprSequence& seq, const Expr& e);

ExprSequence optimize(const ExprSequence& seq, const sym::AssumptionSet& assumptions = {});

// Throws UnmappedFunction.
std::string emit(const ExprSequence& seq, const Dialect& dialect, const std::string& indent = "",
                 const std::string& newline = "\n");

// Reads an emitted block back. Lines that are not assignments are skipped.
ExprSequence parse_generated(const std::string& text, const Dialect& dialect);

// Straight-line double execution; returns every assigned name. Throws UnboundVariable.
std::map<std::string, double> interpret(const ExprSequence& seq, const std::map<std::string, double>& env);

// Replaces or inserts the generated block of bp.
std::string splice(const std::string& text, const BindingPoint& bp, const std::string& generated_body);

inline constexpr const char* kBlockBegin = "// <auto-generated by gamacro>";
inline constexpr const char* kBlockEnd = "// </auto-generated>";

// ---------------------------------------------------------------- driver helpers

struct PointResult {
  BindingPoint point;
  bool ok = false;
  ExprSequence unoptimized, sequence;
  std::string body;  // emitted text without sentinels
  std::vector<Diagnostic> diagnostics;
  double cache_hit_rate = 0;
};

PointResult generate_point(const CompiledProject& project, const BindingPoint& bp, const Dialect& dialect,
                           const Options& opt = {});

struct FileResult {
  std::string text;
  std::vector<PointResult> points;
  std::vector<Diagnostic> diagnostics;
};

// Scans, generates each point, splices. Failed points leave their region untouched.
FileResult generate_file(const CompiledProject& project, const std::string& text, const std::string& file,
                         const Dialect& dialect, const Options& opt = {});

// Applies generated bodies to the scanned points of text, last to first.
std::string splice_all(const std::string& text, const std::vector<PointResult>& points);

// Binds every free input coefficient to the variable "<mv>.<blade>" and every output
// blade to "<mv>_<blade>". Blade names drop '^' joins for '_'; the scalar blade is "s".
BindingPoint bind_all(const CompiledProject& project, const std::string& macro);
std::string blade_suffix(const Frame& frame, BladeId blade);

// ---------------------------------------------------------------- verification

struct VerifyReport {
  int samples = 0, skipped = 0, failures = 0;
  double max_error = 0;  // relative to max(1, |oracle|)
  std::string message;
  bool pass() const { return failures == 0 && samples > skipped; }
};

// Interprets seq on random target-variable values and compares every bound output
// against the oracle executing the macro IR.
VerifyReport verify_point(const CompiledProject& project, const BindingPoint& bp, const ExprSequence& seq,
                          int samples, std::uint64_t seed, double tol = 1e-9);

}  // namespace gamacro::codegen
