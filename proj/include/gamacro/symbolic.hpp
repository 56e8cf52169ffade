#pragma once
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "gamacro/number.hpp"

namespace gamacro::sym {

// Node kinds of the canonical form. Neg, Div and Pow are folded into Mul
// (coefficient and integer exponents); Sum is Add.
enum class Kind { Const, Var, Func, Mul, Add };

class Expr;
struct Node;

struct Factor;

class Expr {
public:
  Expr();                     // constant 0
  Expr(Number n);             // NOLINT: implicit by intent
  Expr(int n) : Expr(Number(n)) {}  // NOLINT
  static Expr var(const std::string& name);
  // Known names: sin cos tan sqrt exp ln atan cosh sinh abs. Throws UnsupportedFunction.
  static Expr func(const std::string& name, std::vector<Expr> args);

  Kind kind() const;
  // Const value, Mul coefficient, or Add constant term.
  const Number& number() const;
  const std::string& name() const;          // Var, Func
  const std::vector<Expr>& args() const;    // Func arguments, Add terms
  const std::vector<Factor>& factors() const;  // Mul
  std::uint64_t key() const;
  std::size_t size() const;  // node count

  bool is_const() const { return kind() == Kind::Const; }
  bool is_zero() const { return is_const() && number().is_zero(); }
  bool is_one() const { return is_const() && number().is_one(); }
  bool is_var() const { return kind() == Kind::Var; }
  // Const, Var, or a rational multiple of a single Var.
  bool trivial() const;

  friend bool operator==(const Expr& a, const Expr& b);
  const Node* node() const { return n_.get(); }

private:
  explicit Expr(std::shared_ptr<const Node> n) : n_(std::move(n)) {}
  friend struct Builder;
  std::shared_ptr<const Node> n_;
};

struct Factor {
  Expr base;
  int exp = 1;
  friend bool operator==(const Factor& a, const Factor& b) { return a.exp == b.exp && a.base == b.base; }
};

// Total structural order used for canonical term and factor order.
int compare(const Expr& a, const Expr& b);
struct ExprLess {
  bool operator()(const Expr& a, const Expr& b) const { return compare(a, b) < 0; }
};
struct ExprHash {
  std::size_t operator()(const Expr& e) const { return static_cast<std::size_t>(e.key()); }
};

// Structural hash; equal trees give equal keys.
inline std::uint64_t canonical_key(const Expr& e) { return e.key(); }

Expr add(std::vector<Expr> terms);
Expr mul(std::vector<Expr> factors);
Expr pow(const Expr& base, int exp);
Expr div(const Expr& a, const Expr& b);  // throws DivisionByZeroConstant
Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);

// Products of sums are distributed while the expansion has at most this many terms.
inline constexpr std::size_t kExpansionBudget = 64;

struct Interval {
  std::optional<Number> lo, hi;
};

class AssumptionSet {
public:
  void assume_min(const std::string& var, const Number& lo);  // throws InvalidAssumption
  void assume_max(const std::string& var, const Number& hi);
  const Interval* find(const std::string& var) const;
  const std::map<std::string, Interval>& all() const { return vars_; }
  bool empty() const { return vars_.empty(); }

private:
  std::map<std::string, Interval> vars_;
};

bool known_nonnegative(const Expr& e, const AssumptionSet& a);

Expr simplify(const Expr& e);
Expr simplify(const Expr& e, const AssumptionSet& a);

// Simultaneous substitution of variables.
Expr substitute(const Expr& e, const std::map<std::string, Expr>& bindings);

// Derivative of a variable other than the target; nullopt means constant.
using DerivativeResolver = std::function<std::optional<Expr>(const std::string& var)>;
Expr differentiate(const Expr& e, const std::string& var, const DerivativeResolver& resolver = {});

using NumericEnv = std::function<std::optional<double>(const std::string&)>;
// Throws UnboundVariable, DomainError. Division by a zero value follows IEEE.
double eval_numeric(const Expr& e, const NumericEnv& env);
double eval_numeric(const Expr& e, const std::map<std::string, double>& env);

// Variables in first-occurrence order of a canonical traversal (excluding pi).
std::vector<std::string> free_vars(const Expr& e);

// Arithmetic operations a straightforward emission performs.
std::size_t op_count(const Expr& e);

struct PrintOptions {
  bool c_like = false;  // pow() calls, decimal literals
  // canonical function name (and "pow", "pi") to target spelling
  std::map<std::string, std::string> functions;
  std::function<std::string(const std::string&)> rename;  // variable spelling
};
std::string to_string(const Expr& e, const PrintOptions& opt = {});

struct ParseOptions {
  // target spelling to canonical function name, checked before the built-in names
  std::map<std::string, std::string> functions;
};
// Infix syntax: + - * / ^, f(args), names, <any text> names, pi. Throws SyntaxError.
Expr parse(const std::string& text, const ParseOptions& opt = {});

// Memoizes products of coefficient pairs; one instance per worker.
class SymbolicCache {
public:
  Expr mul(const Expr& a, const Expr& b);
  Expr simplify(const Expr& e, const AssumptionSet& a);
  std::size_t hits() const { return hits_; }
  std::size_t misses() const { return misses_; }
  double hit_rate() const { return hits_ + misses_ == 0 ? 0.0 : double(hits_) / double(hits_ + misses_); }

private:
  struct Entry {
    Expr a, b, result;
  };
  std::unordered_map<std::uint64_t, std::vector<Entry>> products_;
  std::unordered_map<std::uint64_t, std::vector<std::pair<Expr, Expr>>> simplified_;
  const AssumptionSet* assumptions_ = nullptr;
  std::size_t hits_ = 0, misses_ = 0;
};

}  // namespace gamacro::sym
