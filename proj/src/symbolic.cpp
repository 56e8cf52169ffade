#include "gamacro/symbolic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "gamacro/error.hpp"

namespace gamacro::sym {

struct Node {
  Kind kind = Kind::Const;
  Number num;
  std::string name;
  std::vector<Expr> args;
  std::vector<Factor> factors;
  std::uint64_t hash = 0;
  std::size_t size = 1;
};

namespace {

std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
  v *= 0xff51afd7ed558ccdULL;
  v ^= v >> 33;
  h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  return h;
}

std::uint64_t hash_str(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) h = (h ^ c) * 1099511628211ULL;
  return h;
}

const std::set<std::string>& known_functions() {
  static const std::set<std::string> f = {"sin", "cos", "tan", "sqrt", "exp", "ln", "atan", "cosh", "sinh", "abs"};
  return f;
}

const Number kOne(1);

}  // namespace

struct Builder {
  static Expr make(Node n) {
    std::uint64_t h = mix(0, static_cast<std::uint64_t>(n.kind) + 1);
    std::size_t size = 1;
    switch (n.kind) {
      case Kind::Const: h = mix(h, n.num.hash()); break;
      case Kind::Var: h = mix(h, hash_str(n.name)); break;
      case Kind::Func:
        h = mix(h, hash_str(n.name));
        for (const auto& a : n.args) { h = mix(h, a.key()); size += a.size(); }
        break;
      case Kind::Mul:
        h = mix(h, n.num.hash());
        for (const auto& f : n.factors) {
          h = mix(mix(h, f.base.key()), static_cast<std::uint64_t>(f.exp));
          size += f.base.size();
        }
        break;
      case Kind::Add:
        h = mix(h, n.num.hash());
        for (const auto& a : n.args) { h = mix(h, a.key()); size += a.size(); }
        break;
    }
    n.hash = h;
    n.size = size;
    return Expr(std::make_shared<const Node>(std::move(n)));
  }
  static Expr constant(const Number& v) {
    Node n;
    n.kind = Kind::Const;
    n.num = v;
    return make(std::move(n));
  }
};

namespace {

const Expr& zero_expr() {
  static const Expr z = Builder::constant(Number(0));
  return z;
}

}  // namespace

Expr::Expr() : Expr(zero_expr()) {}
Expr::Expr(Number n) : n_(n.is_zero() && n.exact() ? zero_expr().n_ : Builder::constant(n).n_) {}

Expr Expr::var(const std::string& name) {
  Node n;
  n.kind = Kind::Var;
  n.name = name;
  return Builder::make(std::move(n));
}

Kind Expr::kind() const { return n_->kind; }
const Number& Expr::number() const { return n_->num; }
const std::string& Expr::name() const { return n_->name; }
const std::vector<Expr>& Expr::args() const { return n_->args; }
const std::vector<Factor>& Expr::factors() const { return n_->factors; }
std::uint64_t Expr::key() const { return n_->hash; }
std::size_t Expr::size() const { return n_->size; }

bool Expr::trivial() const {
  switch (kind()) {
    case Kind::Const:
    case Kind::Var: return true;
    case Kind::Mul: return number().exact() && factors().size() == 1 && factors()[0].exp == 1 &&
                           factors()[0].base.is_var();
    default: return false;
  }
}

bool operator==(const Expr& a, const Expr& b) {
  if (a.n_ == b.n_) return true;
  if (a.key() != b.key() || a.size() != b.size()) return false;
  return compare(a, b) == 0;
}

// ---------------------------------------------------------------- ordering

namespace {

int kind_rank(Kind k) {
  switch (k) {
    case Kind::Const: return 0;
    case Kind::Var: return 1;
    case Kind::Func: return 2;
    case Kind::Add: return 3;
    case Kind::Mul: return 4;
  }
  return 5;
}

int compare_base(const Expr& a, const Expr& b);

int compare_factor_lists(const Factor* fa, std::size_t na, const Factor* fb, std::size_t nb) {
  for (std::size_t i = 0; i < na && i < nb; ++i) {
    int c = compare_base(fa[i].base, fb[i].base);
    if (c != 0) return c;
    if (fa[i].exp != fb[i].exp) return fa[i].exp < fb[i].exp ? -1 : 1;
  }
  if (na != nb) return na < nb ? -1 : 1;
  return 0;
}

// Non-Mul, non-Const operands.
int compare_base(const Expr& a, const Expr& b) {
  if (a.node() == b.node()) return 0;
  int ra = kind_rank(a.kind()), rb = kind_rank(b.kind());
  if (ra != rb) return ra < rb ? -1 : 1;
  switch (a.kind()) {
    case Kind::Const: return Number::compare(a.number(), b.number());
    case Kind::Var: return a.name().compare(b.name()) < 0 ? -1 : (a.name() == b.name() ? 0 : 1);
    case Kind::Func: {
      if (a.name() != b.name()) return a.name() < b.name() ? -1 : 1;
      [[fallthrough]];
    }
    case Kind::Add: {
      const auto &xa = a.args(), &xb = b.args();
      for (std::size_t i = 0; i < xa.size() && i < xb.size(); ++i) {
        int c = compare(xa[i], xb[i]);
        if (c != 0) return c;
      }
      if (xa.size() != xb.size()) return xa.size() < xb.size() ? -1 : 1;
      return Number::compare(a.number(), b.number());
    }
    case Kind::Mul: return compare(a, b);
  }
  return 0;
}

}  // namespace

int compare(const Expr& a, const Expr& b) {
  if (a.node() == b.node()) return 0;
  bool ca = a.is_const(), cb = b.is_const();
  if (ca || cb) {
    if (ca && cb) return Number::compare(a.number(), b.number());
    return ca ? -1 : 1;
  }
  Factor single_a{a, 1}, single_b{b, 1};
  const Factor* fa = &single_a;
  const Factor* fb = &single_b;
  std::size_t na = 1, nb = 1;
  const Number* coef_a = &kOne;
  const Number* coef_b = &kOne;
  if (a.kind() == Kind::Mul) { fa = a.factors().data(); na = a.factors().size(); coef_a = &a.number(); }
  if (b.kind() == Kind::Mul) { fb = b.factors().data(); nb = b.factors().size(); coef_b = &b.number(); }
  if (a.kind() != Kind::Mul && b.kind() != Kind::Mul) return compare_base(a, b);
  int c = compare_factor_lists(fa, na, fb, nb);
  if (c != 0) return c;
  return Number::compare(*coef_a, *coef_b);
}

// ---------------------------------------------------------------- construction

namespace {

// Splits a term into coefficient and coefficient-free monomial.
std::pair<Number, Expr> split_term(const Expr& t) {
  if (t.kind() == Kind::Mul && !t.number().is_one()) {
    const auto& fs = t.factors();
    if (fs.size() == 1 && fs[0].exp == 1) return {t.number(), fs[0].base};
    Node n;
    n.kind = Kind::Mul;
    n.num = Number(1);
    n.factors = fs;
    return {t.number(), Builder::make(std::move(n))};
  }
  return {Number(1), t};
}

Expr scale_monomial(const Expr& m, const Number& c) {
  if (c.is_one()) return m;
  Node n;
  n.kind = Kind::Mul;
  n.num = c;
  if (m.kind() == Kind::Mul) n.factors = m.factors();
  else n.factors = {Factor{m, 1}};
  return Builder::make(std::move(n));
}

bool negative_leading(const Expr& e) {
  switch (e.kind()) {
    case Kind::Const: return e.number().negative();
    case Kind::Mul: return e.number().negative();
    case Kind::Add: return !e.args().empty() && negative_leading(e.args()[0]);
    default: return false;
  }
}

Expr build_add(Number c0, std::vector<std::pair<Expr, Number>> terms);

// Replaces c*m*sin(t)^2 + c*m*cos(t)^2 by c*m. Returns true if anything changed.
bool pythagorean(std::vector<std::pair<Expr, Number>>& terms, Number& c0, std::vector<Expr>& extra) {
  auto trig_factor = [](const Expr& m, const char* fname, std::size_t& idx) {
    const Factor* fs = nullptr;
    std::size_t n = 0;
    if (m.kind() == Kind::Mul) { fs = m.factors().data(); n = m.factors().size(); }
    for (std::size_t i = 0; i < n; ++i)
      if (fs[i].exp == 2 && fs[i].base.kind() == Kind::Func && fs[i].base.name() == fname) {
        idx = i;
        return true;
      }
    return false;
  };
  for (std::size_t i = 0; i < terms.size(); ++i) {
    std::size_t si = 0;
    const Expr& m = terms[i].first;
    if (!trig_factor(m, "sin", si)) continue;
    const Expr& arg = m.factors()[si].base.args()[0];
    std::vector<Expr> rest;
    for (std::size_t k = 0; k < m.factors().size(); ++k)
      if (k != si) rest.push_back(pow(m.factors()[k].base, m.factors()[k].exp));
    std::vector<Expr> partner_factors = rest;
    partner_factors.push_back(pow(Expr::func("cos", {arg}), 2));
    Expr partner = mul(partner_factors);
    for (std::size_t j = 0; j < terms.size(); ++j) {
      if (j == i || !(terms[j].first == partner) || !(terms[j].second == terms[i].second)) continue;
      Number c = terms[i].second;
      Expr r = mul(rest);
      std::size_t hi = std::max(i, j), lo = std::min(i, j);
      terms.erase(terms.begin() + static_cast<long>(hi));
      terms.erase(terms.begin() + static_cast<long>(lo));
      if (r.is_const()) c0 += c * r.number();
      else extra.push_back(scale_monomial(r, c));
      return true;
    }
  }
  return false;
}

Expr build_add(Number c0, std::vector<std::pair<Expr, Number>> terms) {
  std::sort(terms.begin(), terms.end(), [](const auto& x, const auto& y) { return compare(x.first, y.first) < 0; });
  std::vector<std::pair<Expr, Number>> merged;
  for (auto& t : terms) {
    if (!merged.empty() && merged.back().first == t.first) merged.back().second += t.second;
    else merged.push_back(std::move(t));
  }
  std::erase_if(merged, [](const auto& t) { return t.second.is_zero(); });
  std::vector<Expr> extra;
  if (pythagorean(merged, c0, extra)) {
    std::vector<Expr> all;
    if (!c0.is_zero()) all.emplace_back(c0);
    for (auto& [m, c] : merged) all.push_back(scale_monomial(m, c));
    for (auto& e : extra) all.push_back(e);
    return add(std::move(all));
  }
  if (merged.empty()) return Expr(c0);
  if (merged.size() == 1 && c0.is_zero()) return scale_monomial(merged[0].first, merged[0].second);
  Node n;
  n.kind = Kind::Add;
  n.num = c0;
  for (auto& [m, c] : merged) n.args.push_back(scale_monomial(m, c));
  return Builder::make(std::move(n));
}

Expr build_mul(Number coef, std::vector<Factor> fs) {
  if (coef.is_zero()) return Expr(coef);
  std::sort(fs.begin(), fs.end(), [](const Factor& x, const Factor& y) { return compare_base(x.base, y.base) < 0; });
  std::vector<Factor> merged;
  for (auto& f : fs) {
    if (!merged.empty() && merged.back().base == f.base) merged.back().exp += f.exp;
    else merged.push_back(std::move(f));
  }
  std::erase_if(merged, [](const Factor& f) { return f.exp == 0; });
  // Distribute over sums raised to positive powers when small enough.
  std::size_t expanded = 1;
  bool has_sum = false;
  for (const auto& f : merged)
    if (f.base.kind() == Kind::Add && f.exp > 0) {
      has_sum = true;
      std::size_t k = f.base.args().size() + (f.base.number().is_zero() ? 0 : 1);
      for (int e = 0; e < f.exp && expanded <= kExpansionBudget; ++e) expanded *= k;
    }
  bool lone_sum = merged.size() == 1 && merged[0].exp == 1 && merged[0].base.kind() == Kind::Add;
  if (has_sum && (expanded <= kExpansionBudget || lone_sum)) {
    std::vector<Factor> others;
    std::vector<Expr> sums;
    for (const auto& f : merged) {
      if (f.base.kind() == Kind::Add && f.exp > 0 && (expanded <= kExpansionBudget || lone_sum))
        for (int e = 0; e < f.exp; ++e) sums.push_back(f.base);
      else others.push_back(f);
    }
    std::vector<Expr> acc;
    acc.push_back(build_mul(coef, others));
    for (const auto& s : sums) {
      std::vector<Expr> parts;
      if (!s.number().is_zero()) parts.emplace_back(s.number());
      for (const auto& t : s.args()) parts.push_back(t);
      std::vector<Expr> next;
      next.reserve(acc.size() * parts.size());
      for (const auto& a : acc)
        for (const auto& p : parts) next.push_back(mul({a, p}));
      acc = std::move(next);
    }
    return add(std::move(acc));
  }
  if (merged.empty()) return Expr(coef);
  if (coef.is_one() && merged.size() == 1 && merged[0].exp == 1) return merged[0].base;
  Node n;
  n.kind = Kind::Mul;
  n.num = coef;
  n.factors = std::move(merged);
  return Builder::make(std::move(n));
}

// Appends e^exp to (coef, factors).
void absorb(const Expr& e, int exp, Number& coef, std::vector<Factor>& fs) {
  switch (e.kind()) {
    case Kind::Const:
      if (exp < 0 && e.number().is_zero())
        throw Error("DivisionByZeroConstant", "division by the constant 0");
      coef = coef * e.number().pow(exp);
      break;
    case Kind::Mul:
      if (exp < 0 && e.number().is_zero()) throw Error("DivisionByZeroConstant", "division by the constant 0");
      coef = coef * e.number().pow(exp);
      for (const auto& f : e.factors()) fs.push_back({f.base, f.exp * exp});
      break;
    default: fs.push_back({e, exp});
  }
}

}  // namespace

Expr add(std::vector<Expr> items) {
  Number c0(0);
  std::vector<std::pair<Expr, Number>> terms;
  terms.reserve(items.size());
  for (const auto& e : items) {
    switch (e.kind()) {
      case Kind::Const: c0 += e.number(); break;
      case Kind::Add:
        c0 += e.number();
        for (const auto& t : e.args()) {
          auto [c, m] = split_term(t);
          terms.emplace_back(m, c);
        }
        break;
      default: {
        auto [c, m] = split_term(e);
        terms.emplace_back(m, c);
      }
    }
  }
  if (terms.empty()) return Expr(c0);
  return build_add(c0, std::move(terms));
}

Expr mul(std::vector<Expr> items) {
  Number coef(1);
  std::vector<Factor> fs;
  for (const auto& e : items) {
    absorb(e, 1, coef, fs);
    if (coef.is_zero()) return Expr(coef);
  }
  return build_mul(coef, std::move(fs));
}

Expr pow(const Expr& base, int exp) {
  if (exp == 0) {
    if (base.is_zero()) return Expr(1);
    return Expr(1);
  }
  if (exp == 1) return base;
  Number coef(1);
  std::vector<Factor> fs;
  absorb(base, exp, coef, fs);
  return build_mul(coef, std::move(fs));
}

Expr div(const Expr& a, const Expr& b) {
  if (b.is_zero()) throw Error("DivisionByZeroConstant", "division by the constant 0");
  return mul({a, pow(b, -1)});
}

Expr operator+(const Expr& a, const Expr& b) { return add({a, b}); }
Expr operator-(const Expr& a, const Expr& b) { return add({a, -b}); }
Expr operator*(const Expr& a, const Expr& b) { return mul({a, b}); }
Expr operator/(const Expr& a, const Expr& b) { return div(a, b); }
Expr operator-(const Expr& a) { return mul({Expr(-1), a}); }

Expr Expr::func(const std::string& name, std::vector<Expr> args) {
  if (!known_functions().count(name))
    throw Error("UnsupportedFunction", "unknown function '" + name + "'");
  if (args.size() != 1)
    throw Error("UnsupportedFunction", "function '" + name + "' takes exactly one argument");
  const Expr& x = args[0];
  if (x.is_const()) {
    const Number& v = x.number();
    if (v.exact()) {
      if (v.is_zero()) {
        if (name == "cos" || name == "exp" || name == "cosh") return Expr(1);
        if (name != "ln") return Expr(0);
      }
      if (name == "ln" && v.is_one()) return Expr(0);
      if (name == "abs") return Expr(v.abs());
      if (name == "sqrt" && !v.negative()) {
        auto isqrt = [](std::int64_t n) -> std::optional<std::int64_t> {
          auto r = static_cast<std::int64_t>(std::llround(std::sqrt(static_cast<double>(n))));
          for (std::int64_t c = std::max<std::int64_t>(0, r - 1); c <= r + 1; ++c)
            if (c * c == n) return c;
          return std::nullopt;
        };
        auto p = isqrt(v.num()), q = isqrt(v.den());
        if (p && q) return Expr(Number::rational(*p, *q));
      }
    } else {
      double d = v.value();
      if ((name == "sqrt" && d < 0) || (name == "ln" && d <= 0))
        throw Error("DomainError", name + " of " + v.str());
      double r = 0;
      if (name == "sin") r = std::sin(d);
      else if (name == "cos") r = std::cos(d);
      else if (name == "tan") r = std::tan(d);
      else if (name == "sqrt") r = std::sqrt(d);
      else if (name == "exp") r = std::exp(d);
      else if (name == "ln") r = std::log(d);
      else if (name == "atan") r = std::atan(d);
      else if (name == "cosh") r = std::cosh(d);
      else if (name == "sinh") r = std::sinh(d);
      else r = std::abs(d);
      return Expr(Number::real(r));
    }
    if ((name == "sqrt" || name == "ln") && v.negative())
      throw Error("DomainError", name + " of " + v.str());
  }
  bool odd = name == "sin" || name == "tan" || name == "atan" || name == "sinh";
  bool even = name == "cos" || name == "cosh" || name == "abs";
  if ((odd || even) && negative_leading(x)) {
    Expr f = func(name, {-x});
    return odd ? -f : f;
  }
  if (name == "abs") {
    if (x.kind() == Kind::Func && (x.name() == "abs" || x.name() == "sqrt" || x.name() == "exp" || x.name() == "cosh"))
      return x;
    if (x.kind() == Kind::Mul && x.number().exact() && !x.number().negative()) {
      bool all_even = std::all_of(x.factors().begin(), x.factors().end(), [](const Factor& f) { return f.exp % 2 == 0; });
      if (all_even) return x;
    }
  }
  if (name == "sqrt" && x.kind() == Kind::Mul && x.number().is_one() && x.factors().size() == 1 &&
      x.factors()[0].exp == 2)
    return func("abs", {x.factors()[0].base});
  Node n;
  n.kind = Kind::Func;
  n.name = name;
  n.args = std::move(args);
  return Builder::make(std::move(n));
}

// ---------------------------------------------------------------- assumptions

void AssumptionSet::assume_min(const std::string& var, const Number& lo) {
  auto& iv = vars_[var];
  if (!iv.lo || Number::compare(lo, *iv.lo) > 0) iv.lo = lo;
  if (iv.hi && Number::compare(*iv.lo, *iv.hi) > 0)
    throw Error("InvalidAssumption", "min of '" + var + "' exceeds its max");
}

void AssumptionSet::assume_max(const std::string& var, const Number& hi) {
  auto& iv = vars_[var];
  if (!iv.hi || Number::compare(hi, *iv.hi) < 0) iv.hi = hi;
  if (iv.lo && Number::compare(*iv.lo, *iv.hi) > 0)
    throw Error("InvalidAssumption", "min of '" + var + "' exceeds its max");
}

const Interval* AssumptionSet::find(const std::string& var) const {
  auto it = vars_.find(var);
  return it == vars_.end() ? nullptr : &it->second;
}

namespace {

bool known_nonpositive(const Expr& e, const AssumptionSet& a) {
  if (e.is_const()) return !(e.number().sign() > 0);
  if (e.is_var()) {
    const Interval* iv = a.find(e.name());
    return iv && iv->hi && iv->hi->sign() <= 0;
  }
  if (e.kind() == Kind::Mul && e.number().negative()) return known_nonnegative(-e, a);
  return false;
}

}  // namespace

bool known_nonnegative(const Expr& e, const AssumptionSet& a) {
  switch (e.kind()) {
    case Kind::Const: return e.number().sign() >= 0;
    case Kind::Var: {
      if (e.name() == "pi") return true;
      const Interval* iv = a.find(e.name());
      return iv && iv->lo && iv->lo->sign() >= 0;
    }
    case Kind::Func:
      return e.name() == "sqrt" || e.name() == "exp" || e.name() == "cosh" || e.name() == "abs";
    case Kind::Mul: {
      if (e.number().negative()) {
        // product of a negative coefficient and one nonpositive odd factor
        return false;
      }
      for (const auto& f : e.factors())
        if (f.exp % 2 != 0 && !known_nonnegative(f.base, a)) return false;
      return true;
    }
    case Kind::Add: {
      if (e.number().negative()) return false;
      for (const auto& t : e.args())
        if (!known_nonnegative(t, a)) return false;
      return true;
    }
  }
  return false;
}

namespace {

Expr rebuild(const Expr& e, const AssumptionSet* a) {
  switch (e.kind()) {
    case Kind::Const:
    case Kind::Var: return e;
    case Kind::Func: {
      std::vector<Expr> args;
      for (const auto& x : e.args()) args.push_back(rebuild(x, a));
      if (a && e.name() == "abs") {
        if (known_nonnegative(args[0], *a)) return args[0];
        if (known_nonpositive(args[0], *a)) return -args[0];
      }
      Expr r = Expr::func(e.name(), std::move(args));
      if (a && r.kind() == Kind::Func && r.name() == "abs" && known_nonnegative(r.args()[0], *a)) return r.args()[0];
      return r;
    }
    case Kind::Mul: {
      std::vector<Expr> items{Expr(e.number())};
      for (const auto& f : e.factors()) items.push_back(pow(rebuild(f.base, a), f.exp));
      return mul(std::move(items));
    }
    case Kind::Add: {
      std::vector<Expr> items{Expr(e.number())};
      for (const auto& t : e.args()) items.push_back(rebuild(t, a));
      return add(std::move(items));
    }
  }
  return e;
}

}  // namespace

Expr simplify(const Expr& e) { return rebuild(e, nullptr); }
Expr simplify(const Expr& e, const AssumptionSet& a) { return rebuild(e, a.empty() ? nullptr : &a); }

// ---------------------------------------------------------------- substitution, calculus

namespace {

Expr subst(const Expr& e, const std::map<std::string, Expr>& b, std::unordered_map<const Node*, Expr>& memo) {
  if (e.is_const()) return e;
  auto it = memo.find(e.node());
  if (it != memo.end()) return it->second;
  Expr r;
  switch (e.kind()) {
    case Kind::Var: {
      auto f = e.name() == "pi" ? b.end() : b.find(e.name());
      r = f == b.end() ? e : f->second;
      break;
    }
    case Kind::Func: {
      std::vector<Expr> args;
      for (const auto& x : e.args()) args.push_back(subst(x, b, memo));
      r = Expr::func(e.name(), std::move(args));
      break;
    }
    case Kind::Mul: {
      std::vector<Expr> items{Expr(e.number())};
      for (const auto& f : e.factors()) items.push_back(pow(subst(f.base, b, memo), f.exp));
      r = mul(std::move(items));
      break;
    }
    case Kind::Add: {
      std::vector<Expr> items{Expr(e.number())};
      for (const auto& t : e.args()) items.push_back(subst(t, b, memo));
      r = add(std::move(items));
      break;
    }
    default: r = e;
  }
  memo.emplace(e.node(), r);
  return r;
}

}  // namespace

Expr substitute(const Expr& e, const std::map<std::string, Expr>& bindings) {
  if (bindings.empty()) return e;
  std::unordered_map<const Node*, Expr> memo;
  return subst(e, bindings, memo);
}

Expr differentiate(const Expr& e, const std::string& v, const DerivativeResolver& resolver) {
  switch (e.kind()) {
    case Kind::Const: return Expr(0);
    case Kind::Var:
      if (e.name() == v) return Expr(1);
      if (e.name() == "pi") return Expr(0);
      if (resolver) {
        if (auto d = resolver(e.name())) return *d;
      }
      return Expr(0);
    case Kind::Add: {
      std::vector<Expr> terms;
      for (const auto& t : e.args()) terms.push_back(differentiate(t, v, resolver));
      return add(std::move(terms));
    }
    case Kind::Mul: {
      const auto& fs = e.factors();
      std::vector<Expr> terms;
      for (std::size_t i = 0; i < fs.size(); ++i) {
        Expr d = differentiate(fs[i].base, v, resolver);
        if (d.is_zero()) continue;
        std::vector<Expr> items{Expr(e.number()), Expr(fs[i].exp), pow(fs[i].base, fs[i].exp - 1), d};
        for (std::size_t j = 0; j < fs.size(); ++j)
          if (j != i) items.push_back(pow(fs[j].base, fs[j].exp));
        terms.push_back(mul(std::move(items)));
      }
      return add(std::move(terms));
    }
    case Kind::Func: {
      const Expr& x = e.args()[0];
      const std::string& f = e.name();
      if (f == "abs") throw Error("UnsupportedFunction", "derivative of abs is not supported");
      Expr dx = differentiate(x, v, resolver);
      if (dx.is_zero()) return Expr(0);
      Expr outer;
      if (f == "sin") outer = Expr::func("cos", {x});
      else if (f == "cos") outer = -Expr::func("sin", {x});
      else if (f == "tan") outer = Expr(1) + pow(Expr::func("tan", {x}), 2);
      else if (f == "sqrt") outer = div(Expr(Number::rational(1, 2)), e);
      else if (f == "exp") outer = e;
      else if (f == "ln") outer = pow(x, -1);
      else if (f == "atan") outer = pow(Expr(1) + pow(x, 2), -1);
      else if (f == "cosh") outer = Expr::func("sinh", {x});
      else if (f == "sinh") outer = Expr::func("cosh", {x});
      else throw Error("UnsupportedFunction", "derivative of " + f + " is not supported");
      return outer * dx;
    }
  }
  return Expr(0);
}

// ---------------------------------------------------------------- numeric evaluation

namespace {

double apply_function(const std::string& f, double x) {
  if (f == "sin") return std::sin(x);
  if (f == "cos") return std::cos(x);
  if (f == "tan") return std::tan(x);
  if (f == "sqrt") {
    if (x < 0) throw Error("DomainError", "sqrt of negative value " + format_double(x));
    return std::sqrt(x);
  }
  if (f == "exp") return std::exp(x);
  if (f == "ln") {
    if (x <= 0) throw Error("DomainError", "ln of non-positive value " + format_double(x));
    return std::log(x);
  }
  if (f == "atan") return std::atan(x);
  if (f == "cosh") return std::cosh(x);
  if (f == "sinh") return std::sinh(x);
  if (f == "abs") return std::abs(x);
  throw Error("UnsupportedFunction", "unknown function '" + f + "'");
}

double ipow(double b, int e) {
  if (e < 0) return 1.0 / ipow(b, -e);
  double r = 1.0;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

}  // namespace

double eval_numeric(const Expr& e, const NumericEnv& env) {
  switch (e.kind()) {
    case Kind::Const: return e.number().value();
    case Kind::Var: {
      if (e.name() == "pi") return std::numbers::pi;
      auto v = env(e.name());
      if (!v) throw Error("UnboundVariable", "variable '" + e.name() + "' has no value");
      return *v;
    }
    case Kind::Func: return apply_function(e.name(), eval_numeric(e.args()[0], env));
    case Kind::Mul: {
      double r = e.number().value();
      for (const auto& f : e.factors()) r *= ipow(eval_numeric(f.base, env), f.exp);
      return r;
    }
    case Kind::Add: {
      double r = 0.0;
      for (const auto& t : e.args()) r += eval_numeric(t, env);
      return r + e.number().value();
    }
  }
  return 0.0;
}

double eval_numeric(const Expr& e, const std::map<std::string, double>& env) {
  return eval_numeric(e, [&](const std::string& n) -> std::optional<double> {
    auto it = env.find(n);
    if (it == env.end()) return std::nullopt;
    return it->second;
  });
}

namespace {

void collect_vars(const Expr& e, std::vector<std::string>& out, std::set<std::string>& seen) {
  switch (e.kind()) {
    case Kind::Const: return;
    case Kind::Var:
      if (e.name() != "pi" && seen.insert(e.name()).second) out.push_back(e.name());
      return;
    case Kind::Func:
    case Kind::Add:
      for (const auto& a : e.args()) collect_vars(a, out, seen);
      return;
    case Kind::Mul:
      for (const auto& f : e.factors()) collect_vars(f.base, out, seen);
      return;
  }
}

}  // namespace

std::vector<std::string> free_vars(const Expr& e) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  collect_vars(e, out, seen);
  return out;
}

std::size_t op_count(const Expr& e) {
  switch (e.kind()) {
    case Kind::Const:
    case Kind::Var: return 0;
    case Kind::Func: return 1 + op_count(e.args()[0]);
    case Kind::Add: {
      std::size_t n = e.args().size() + (e.number().is_zero() ? 0 : 1) - 1;
      for (const auto& t : e.args()) {
        // a leading minus folds into the subtraction
        if (t.kind() == Kind::Mul && t.number().is_minus_one()) n += op_count(t) - 1;
        else n += op_count(t);
      }
      return n;
    }
    case Kind::Mul: {
      const Number& c = e.number();
      std::size_t operands = e.factors().size();
      std::size_t n = 0;
      if (!c.is_one() && !c.is_minus_one()) {
        if (c.exact() && c.den() != 1) operands += (c.num() == 1 || c.num() == -1) ? 1 : 2;
        else operands += 1;
      }
      if (c.negative()) n += 1;
      for (const auto& f : e.factors()) {
        if (f.exp > 1 || f.exp < -1) n += 1;
        n += op_count(f.base);
      }
      return n + (operands > 0 ? operands - 1 : 0);
    }
  }
  return 0;
}

// ---------------------------------------------------------------- printing

namespace {

bool plain_name(const std::string& s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  for (char c : s)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.')) return false;
  return true;
}

struct Printer {
  const PrintOptions& opt;

  std::string fname(const std::string& f) const {
    auto it = opt.functions.find(f);
    return it == opt.functions.end() ? f : it->second;
  }

  std::string number(const Number& n) const {
    if (!n.exact()) return format_double(n.value());
    if (n.den() == 1) return std::to_string(n.num());
    if (opt.c_like) {
      // terminating decimals print exactly, others as a quotient of doubles
      std::int64_t d = n.den();
      while (d % 2 == 0) d /= 2;
      while (d % 5 == 0) d /= 5;
      if (d == 1) return format_double(n.value());
      return "(" + std::to_string(n.num()) + ".0/" + std::to_string(n.den()) + ".0)";
    }
    return std::to_string(n.num()) + "/" + std::to_string(n.den());
  }

  std::string var(const std::string& v) const {
    if (v == "pi") return fname("pi");
    if (opt.rename) return opt.rename(v);
    return plain_name(v) ? v : "<" + v + ">";
  }

  // prec: 0 sum context, 1 product context, 2 power base / unary operand
  std::string print(const Expr& e, int prec) const {
    switch (e.kind()) {
      case Kind::Const: {
        std::string s = number(e.number());
        bool compound = e.number().negative() || (e.number().exact() && e.number().den() != 1 && !opt.c_like);
        return compound && prec > 0 ? "(" + s + ")" : s;
      }
      case Kind::Var: return var(e.name());
      case Kind::Func: return fname(e.name()) + "(" + print(e.args()[0], 0) + ")";
      case Kind::Add: {
        std::string s;
        bool first = true;
        for (const auto& t : e.args()) {
          if (first) s += print(t, 0);
          else if (negative_leading(t)) s += " - " + print(-t, 1);
          else s += " + " + print(t, 0);
          first = false;
        }
        const Number& c = e.number();
        if (!c.is_zero()) s += c.negative() ? " - " + number(c.abs()) : " + " + number(c);
        return prec > 0 ? "(" + s + ")" : s;
      }
      case Kind::Mul: {
        const Number& c = e.number();
        std::vector<std::string> num, den;
        Number mag = c.abs();
        if (mag.exact()) {
          if (mag.num() != 1) num.push_back(std::to_string(mag.num()));
          if (mag.den() != 1) den.push_back(std::to_string(mag.den()));
        } else {
          num.push_back(format_double(mag.value()));
        }
        for (const auto& f : e.factors()) {
          int k = f.exp < 0 ? -f.exp : f.exp;
          std::string b = k == 1 ? print(f.base, 1) : power(f.base, k);
          (f.exp < 0 ? den : num).push_back(b);
        }
        std::string s;
        if (num.empty()) s = "1";
        for (std::size_t i = 0; i < num.size(); ++i) s += (i ? "*" : "") + num[i];
        if (!den.empty()) {
          if (den.size() == 1) s += "/" + den[0];
          else {
            s += "/(";
            for (std::size_t i = 0; i < den.size(); ++i) s += (i ? "*" : "") + den[i];
            s += ")";
          }
        }
        if (c.negative()) {
          s = "-" + s;
          if (prec > 0) s = "(" + s + ")";
        }
        return s;
      }
    }
    return "?";
  }

  std::string power(const Expr& base, int k) const {
    if (opt.c_like) return fname("pow") + "(" + print(base, 0) + ", " + std::to_string(k) + ")";
    return print(base, 2) + "^" + std::to_string(k);
  }
};

}  // namespace

std::string to_string(const Expr& e, const PrintOptions& opt) {
  return Printer{opt}.print(e, 0);
}

// ---------------------------------------------------------------- parsing

namespace {

struct Parser {
  const std::string& s;
  const ParseOptions& opt;
  std::size_t i = 0;

  [[noreturn]] void fail(const std::string& msg) const {
    SourceLoc loc;
    loc.line = 1;
    loc.col = static_cast<int>(i) + 1;
    throw Error("SyntaxError", msg + " at column " + std::to_string(i + 1), loc);
  }

  void skip() {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
  }
  bool eat(char c) {
    skip();
    if (i < s.size() && s[i] == c) { ++i; return true; }
    return false;
  }

  Expr expr() {
    Expr r = term();
    while (true) {
      if (eat('+')) r = r + term();
      else if (eat('-')) r = r - term();
      else return r;
    }
  }
  Expr term() {
    Expr r = unary();
    while (true) {
      if (eat('*')) r = r * unary();
      else if (eat('/')) {
        Expr d = unary();
        if (d.is_zero()) fail("division by the constant 0");
        r = r / d;
      } else return r;
    }
  }
  Expr unary() {
    if (eat('-')) return -unary();
    if (eat('+')) return unary();
    return power();
  }
  int integer_exponent(const Expr& e) {
    if (!e.is_const() || !e.number().is_integer() || std::abs(e.number().num()) > 1000000)
      fail("exponent must be an integer constant");
    return static_cast<int>(e.number().num());
  }
  Expr power() {
    Expr b = primary();
    if (eat('^')) {
      int k = integer_exponent(unary());
      if (b.is_zero() && k < 0) fail("division by the constant 0");
      return pow(b, k);
    }
    return b;
  }
  std::string ident() {
    std::size_t st = i;
    while (i < s.size() && (std::isalnum(static_cast<unsigned char>(s[i])) || s[i] == '_' || s[i] == '.')) ++i;
    return s.substr(st, i - st);
  }
  Expr call(const std::string& raw) {
    std::vector<Expr> args;
    if (!eat(')')) {
      do args.push_back(expr());
      while (eat(','));
      if (!eat(')')) fail("expected ')'");
    }
    std::string f = raw;
    auto it = opt.functions.find(raw);
    if (it != opt.functions.end()) f = it->second;
    else {
      std::transform(f.begin(), f.end(), f.begin(), [](unsigned char c) { return std::tolower(c); });
      if (f == "log") f = "ln";
      if (f == "fabs") f = "abs";
    }
    if (f == "pow") {
      if (args.size() != 2) fail("pow takes two arguments");
      if (!args[1].is_const() || !args[1].number().is_integer()) fail("exponent must be an integer constant");
      if (args[0].is_zero() && args[1].number().negative()) fail("division by the constant 0");
      return pow(args[0], static_cast<int>(args[1].number().num()));
    }
    if (!known_functions().count(f)) fail("unknown function '" + raw + "'");
    if (args.size() != 1) fail("function '" + raw + "' takes one argument");
    return Expr::func(f, std::move(args));
  }
  Expr primary() {
    skip();
    if (i >= s.size()) fail("unexpected end of expression");
    char c = s[i];
    if (c == '(') {
      ++i;
      Expr e = expr();
      if (!eat(')')) fail("expected ')'");
      return e;
    }
    if (c == '<') {
      std::size_t close = s.find('>', i + 1);
      if (close == std::string::npos) fail("unterminated '<' reference");
      std::string name = s.substr(i + 1, close - i - 1);
      auto a = name.find_first_not_of(" \t");
      auto b = name.find_last_not_of(" \t");
      if (a == std::string::npos) fail("empty '<>' reference");
      name = name.substr(a, b - a + 1);
      i = close + 1;
      return Expr::var(name);
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t st = i;
      while (i < s.size() && (std::isdigit(static_cast<unsigned char>(s[i])) || s[i] == '.')) ++i;
      if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
        std::size_t save = i++;
        if (i < s.size() && (s[i] == '+' || s[i] == '-')) ++i;
        if (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) {
          while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
        } else {
          i = save;
        }
      }
      std::string text = s.substr(st, i - st);
      if (text == "." || std::count(text.begin(), text.end(), '.') > 1) fail("malformed number");
      return Expr(Number::parse_decimal(text));
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::string name = ident();
      if (eat('(')) return call(name);
      if (name == "pi" || name == "Pi" || name == "PI") return Expr::var("pi");
      if (name.back() == '.') fail("name cannot end with '.'");
      return Expr::var(name);
    }
    fail(std::string("unexpected character '") + c + "'");
  }
};

}  // namespace

Expr parse(const std::string& text, const ParseOptions& opt) {
  Parser p{text, opt};
  Expr e = p.expr();
  p.skip();
  if (p.i != text.size()) p.fail("unexpected trailing input");
  return e;
}

// ---------------------------------------------------------------- cache

Expr SymbolicCache::mul(const Expr& a, const Expr& b) {
  std::uint64_t k = mix(a.key(), b.key());
  auto& bucket = products_[k];
  for (const auto& en : bucket)
    if (en.a == a && en.b == b) {
      ++hits_;
      return en.result;
    }
  ++misses_;
  Expr r = a * b;
  bucket.push_back({a, b, r});
  return r;
}

Expr SymbolicCache::simplify(const Expr& e, const AssumptionSet& a) {
  if (a.empty()) return e;
  if (&a != assumptions_) {
    simplified_.clear();
    assumptions_ = &a;
  }
  auto& bucket = simplified_[e.key()];
  for (const auto& [in, out] : bucket)
    if (in == e) {
      ++hits_;
      return out;
    }
  ++misses_;
  Expr r = sym::simplify(e, a);
  bucket.emplace_back(e, r);
  return r;
}

}  // namespace gamacro::sym
