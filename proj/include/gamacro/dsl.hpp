#pragma once
#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gamacro/error.hpp"
#include "gamacro/symbolic.hpp"

namespace gamacro::dsl {

enum class Role { frames, transforms, subspaces, multivectors, constants, bindings, macros };
inline constexpr std::array<Role, 7> kRoles = {Role::frames,    Role::transforms, Role::subspaces, Role::multivectors,
                                               Role::constants, Role::bindings,   Role::macros};
const char* role_file(Role r);  // "frames.gmac", ...

using Rows = std::vector<std::vector<sym::Expr>>;
using BladeValues = std::vector<std::pair<std::string, sym::Expr>>;

struct FrameDef {
  enum class Form { Euclidean, SubspaceOf, Orthogonalize, Ipm, TransformBcm };
  std::string name;
  std::vector<std::string> basis;
  Form form = Form::Euclidean;
  std::string source;  // SubspaceOf, Orthogonalize, TransformBcm
  Rows matrix;         // Ipm, TransformBcm
  SourceLoc loc;
  bool operator==(const FrameDef&) const = default;
};

struct TransformDef {
  enum class Form { Identity, AliasOf, InverseOf, TransposeOf, InverseTransposeOf, UsingBcm, UsingMatrix };
  std::string name, from, to;
  Form form = Form::Identity;
  std::string ref;  // transform name, or frame name for UsingBcm
  Rows matrix;
  SourceLoc loc;
  bool operator==(const TransformDef&) const = default;
};

struct SubspaceDef {
  std::string frame, name;
  bool span = false;  // ga_span of vectors, else an explicit blade basis
  std::vector<std::string> items;
  SourceLoc loc;
  bool operator==(const SubspaceDef&) const = default;
};

struct ClassDef {
  std::string frame, name;
  std::vector<std::string> subspaces;
  BladeValues constants;
  SourceLoc loc;
  bool operator==(const ClassDef&) const = default;
};

struct ConstantDef {
  std::string frame, name;
  BladeValues coefs;
  SourceLoc loc;
  bool operator==(const ConstantDef&) const = default;
};

struct BindingDef {
  std::string name, frame;
  BladeValues binds;  // blade -> target expression with <var> placeholders
  BladeValues mins, maxs;  // variable -> bound
  SourceLoc loc;
  bool operator==(const BindingDef&) const = default;
};

struct Param {
  std::string name, frame, cls;
  SourceLoc loc;
  bool operator==(const Param&) const = default;
};

struct Stmt {
  enum class Kind { Construct, Binary, Transform, Unary, Copy, Negate, Call, Output, JoinOn, JoinOff };
  Kind kind = Kind::Copy;
  std::string dst;
  std::string op;                     // product name, "+", "-", or unary operator
  std::vector<std::string> operands;  // multivector names, possibly frame-qualified constants
  std::string frame;                  // Construct
  BladeValues coefs;                  // Construct
  std::optional<sym::Expr> scalar;    // scale / div_by_scalar factor, diff variable
  std::vector<int> grades;            // cast_to_grades
  std::string target;                 // transform, subspace, class or macro name
  std::vector<std::pair<std::string, std::string>> call_map;  // callee name -> caller name
  std::string payload;                // Output, verbatim
  SourceLoc loc;
  bool operator==(const Stmt&) const = default;
};

struct MacroDef {
  std::string name;
  std::vector<Param> inputs, outputs;
  std::vector<Stmt> body;
  SourceLoc loc;
  bool operator==(const MacroDef&) const = default;
};

struct Document {
  std::vector<FrameDef> frames;
  std::vector<TransformDef> transforms;
  std::vector<SubspaceDef> subspaces;
  std::vector<ClassDef> classes;
  std::vector<ConstantDef> constants;
  std::vector<BindingDef> bindings;
  std::vector<MacroDef> macros;
  bool operator==(const Document&) const = default;
  void merge(Document other);
};

struct ParseResult {
  Document doc;
  std::vector<Diagnostic> diagnostics;
  bool ok() const;
};

// Parses one role file. Definitions of another role are reported; parsing resumes
// at the next 'define' after an error.
ParseResult parse(const std::string& text, const std::string& file, std::optional<Role> role = std::nullopt);

// Reads the seven role files present in dir.
ParseResult parse_directory(const std::string& dir);

std::string print(const Document& doc);
std::string print(const Document& doc, Role role);

const std::vector<std::string>& unary_operators();
const std::vector<std::string>& binary_operators();

}  // namespace gamacro::dsl
