#pragma once
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "gamacro/dsl.hpp"
#include "gamacro/multivector.hpp"

namespace gamacro {

// Scalar expressions inside the IR name multivector coefficients as "%<register>.<blade>".
std::string coef_var(int reg, BladeId blade);
std::optional<std::pair<int, BladeId>> parse_coef_var(const std::string& name);

struct Register {
  enum class Role { Input, Temp, Constant };
  std::string name;  // source name, versions and inlined callees are suffixed for display
  FramePtr frame;
  Role role = Role::Temp;
  std::shared_ptr<const MultivectorClass> cls;  // inputs
  std::optional<SymMultivector> value;          // constants
};

struct IrOp {
  enum class Kind {
    Construct, Product, Add, Sub, Transform, Reverse, GradeInv, CliffConj, Scale, DivByScalar,
    Norm, Norm2, QuasiNorm, QuasiNorm2, Diff, CastGrades, CastBlades, CastClass, Copy, Negate,
    Output, JoinOn, JoinOff
  };
  Kind kind = Kind::Copy;
  int dst = -1;
  std::vector<int> src;
  ProductKind product = ProductKind::gp;
  std::map<BladeId, Expr> coefs;  // Construct
  Expr scalar;                     // Scale, DivByScalar; the coefficient variable for Diff
  std::set<int> grades;
  std::set<BladeId> blades;
  std::shared_ptr<const MultivectorClass> cls;
  std::shared_ptr<const Outermorphism> transform;
  // Output: literal text interleaved with coefficient references
  std::vector<std::variant<std::string, std::pair<int, BladeId>>> pieces;
  SourceLoc loc;
};

struct MacroParam {
  std::string name;
  std::shared_ptr<const MultivectorClass> cls;
  int reg = -1;  // inputs: the input register; outputs: the final version
};

struct MacroIR {
  std::string name;
  std::vector<Register> regs;
  std::vector<MacroParam> inputs, outputs;
  std::vector<IrOp> ops;
  SourceLoc loc;
};

std::string to_string(const MacroIR& m);
const char* op_name(IrOp::Kind k);

struct CompiledBinding {
  std::string name;
  FramePtr frame;
  std::map<BladeId, Expr> binds;  // target expressions over object members
  std::vector<std::pair<std::string, Number>> mins, maxs;
  SourceLoc loc;
};

struct CompiledProject {
  std::map<std::string, FramePtr> frames;
  std::map<std::string, Matrix> declared_bcm;  // frames built by 'transform F by BCM'
  std::map<std::string, std::shared_ptr<const Outermorphism>> transforms;
  std::map<std::string, std::set<BladeId>> subspaces;                        // "frame.name"
  std::map<std::string, std::shared_ptr<const MultivectorClass>> classes;   // "frame.name"
  std::map<std::string, SymMultivector> constants;                           // "frame.name"
  std::map<std::string, CompiledBinding> bindings;
  std::map<std::string, std::shared_ptr<const MacroIR>> macros;

  FramePtr frame(const std::string& name) const;  // throws UnknownFrame
  const MacroIR& macro(const std::string& name) const;  // throws UnknownMacroName
};

struct CompileResult {
  std::shared_ptr<const CompiledProject> project;
  std::vector<Diagnostic> diagnostics;
  bool ok() const;
};

// Every definition is compiled independently; failures become diagnostics.
CompileResult compile(const dsl::Document& doc);

// Parses the role files in dir, then compiles.
CompileResult compile_directory(const std::string& dir);

}  // namespace gamacro
