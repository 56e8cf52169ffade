#include "gamacro/multivector.hpp"

#include <sstream>

#include "gamacro/error.hpp"

namespace gamacro {

SymMultivector::SymMultivector(FramePtr frame, const std::map<BladeId, Expr>& terms) : frame_(std::move(frame)) {
  for (const auto& [b, e] : terms) set(b, e);
}

SymMultivector SymMultivector::scalar(FramePtr frame, const Expr& s) {
  SymMultivector m(std::move(frame));
  m.set(0, s);
  return m;
}

Expr SymMultivector::coef(BladeId b) const {
  auto it = terms_.find(b);
  return it == terms_.end() ? Expr(0) : it->second;
}

void SymMultivector::set(BladeId b, const Expr& e) {
  if (b >= frame_->blade_count())
    throw Error("UnknownBlade", "blade id " + std::to_string(b) + " outside frame '" + frame_->name() + "'");
  if (e.is_zero()) terms_.erase(b);
  else terms_.insert_or_assign(b, e);
}

std::set<int> SymMultivector::grades() const {
  std::set<int> g;
  for (const auto& [b, e] : terms_) g.insert(grade(b));
  return g;
}

std::string SymMultivector::str() const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& [b, e] : terms_) {
    if (!first) os << " + ";
    first = false;
    os << "(" << sym::to_string(e) << ")";
    if (b != 0) os << "*" << frame_->blade_name(b);
  }
  return os.str();
}

namespace {

void same_frame(const SymMultivector& a, const SymMultivector& b) {
  if (a.frame() != b.frame())
    throw Error("FrameMismatch", "operands belong to frames '" + a.frame()->name() + "' and '" + b.frame()->name() + "'");
}

SymMultivector collect(const FramePtr& f, std::map<BladeId, std::vector<Expr>>& acc) {
  SymMultivector r(f);
  for (auto& [b, parts] : acc) r.set(b, sym::add(std::move(parts)));
  return r;
}

template <class F>
SymMultivector map_blades(const SymMultivector& a, F&& f) {
  SymMultivector r(a.frame());
  for (const auto& [b, e] : a.terms()) r.set(b, f(b, e));
  return r;
}

}  // namespace

SymMultivector product(ProductKind k, const SymMultivector& a, const SymMultivector& b, sym::SymbolicCache* cache) {
  same_frame(a, b);
  std::map<BladeId, std::vector<Expr>> acc;
  std::vector<BladeTerm> terms;
  for (const auto& [ba, ea] : a.terms())
    for (const auto& [bb, eb] : b.terms()) {
      a.frame()->terms(k, ba, bb, terms);
      if (terms.empty()) continue;
      Expr ab = cache ? cache->mul(ea, eb) : ea * eb;
      for (const auto& t : terms) acc[t.blade].push_back(t.coef.is_one() ? ab : Expr(t.coef) * ab);
    }
  return collect(a.frame(), acc);
}

SymMultivector add(const SymMultivector& a, const SymMultivector& b) {
  same_frame(a, b);
  std::map<BladeId, std::vector<Expr>> acc;
  for (const auto& [bl, e] : a.terms()) acc[bl].push_back(e);
  for (const auto& [bl, e] : b.terms()) acc[bl].push_back(e);
  return collect(a.frame(), acc);
}

SymMultivector sub(const SymMultivector& a, const SymMultivector& b) { return add(a, negate(b)); }

SymMultivector negate(const SymMultivector& a) {
  return map_blades(a, [](BladeId, const Expr& e) { return -e; });
}

SymMultivector scale(const SymMultivector& a, const Expr& s) {
  return map_blades(a, [&](BladeId, const Expr& e) { return e * s; });
}

SymMultivector div_by_scalar(const SymMultivector& a, const Expr& s) {
  if (s.is_zero()) throw Error("DivisionByZeroConstant", "division of a multivector by the constant 0");
  Expr inv = sym::pow(s, -1);
  return map_blades(a, [&](BladeId, const Expr& e) { return e * inv; });
}

SymMultivector reverse(const SymMultivector& a) {
  return map_blades(a, [](BladeId b, const Expr& e) {
    int k = grade(b);
    return ((k * (k - 1) / 2) % 2) ? -e : e;
  });
}

SymMultivector grade_involution(const SymMultivector& a) {
  return map_blades(a, [](BladeId b, const Expr& e) { return grade(b) % 2 ? -e : e; });
}

SymMultivector clifford_conjugate(const SymMultivector& a) {
  return map_blades(a, [](BladeId b, const Expr& e) {
    int k = grade(b);
    return ((k * (k + 1) / 2) % 2) ? -e : e;
  });
}

SymMultivector grade_part(const SymMultivector& a, int k) { return cast_to_grades(a, {k}); }

SymMultivector cast_to_grades(const SymMultivector& a, const std::set<int>& grades) {
  SymMultivector r(a.frame());
  for (const auto& [b, e] : a.terms())
    if (grades.count(grade(b))) r.set(b, e);
  return r;
}

SymMultivector cast_to_blades(const SymMultivector& a, const std::set<BladeId>& blades) {
  SymMultivector r(a.frame());
  for (const auto& [b, e] : a.terms())
    if (blades.count(b)) r.set(b, e);
  return r;
}

SymMultivector cast_to_class(const SymMultivector& a, const MultivectorClass& cls, bool strict,
                             std::vector<std::string>* warnings) {
  if (a.frame() != cls.frame)
    throw Error("FrameMismatch", "class '" + cls.name + "' belongs to frame '" + cls.frame->name() +
                                     "', operand to '" + a.frame()->name() + "'");
  SymMultivector r(a.frame());
  for (const auto& [b, e] : a.terms()) {
    if (cls.blades.count(b)) {
      r.set(b, e);
      continue;
    }
    std::string msg = "nonzero coefficient of " + a.frame()->blade_name(b) + " lies outside class '" + cls.name + "'";
    if (strict) throw Error("BladeOutsideClass", msg);
    if (warnings) warnings->push_back(msg + "; dropped");
  }
  for (const auto& [b, e] : cls.constants) r.set(b, e);
  return r;
}

Expr quasi_norm2(const SymMultivector& a, sym::SymbolicCache* cache) {
  return product(ProductKind::sp, a, reverse(a), cache).coef(0);
}

Expr quasi_norm(const SymMultivector& a, sym::SymbolicCache* cache) {
  return Expr::func("sqrt", {Expr::func("abs", {quasi_norm2(a, cache)})});
}

Expr norm2(const SymMultivector& a, sym::SymbolicCache* cache) {
  std::vector<Expr> parts;
  for (int k : a.grades()) {
    SymMultivector ak = grade_part(a, k);
    parts.push_back(Expr::func("abs", {quasi_norm2(ak, cache)}));
  }
  return sym::add(std::move(parts));
}

Expr norm(const SymMultivector& a, sym::SymbolicCache* cache) { return Expr::func("sqrt", {norm2(a, cache)}); }

SymMultivector versor_inverse(const SymMultivector& v) {
  Expr n = quasi_norm2(v);
  if (n.is_zero()) throw Error("NullVersor", "versor has zero quasi-norm; no inverse");
  return div_by_scalar(reverse(v), n);
}

SymMultivector dual(const SymMultivector& a, const SymMultivector& b) {
  return product(ProductKind::lcp, a, versor_inverse(b));
}

SymMultivector undual(const SymMultivector& a, const SymMultivector& b) { return product(ProductKind::lcp, a, b); }

SymMultivector project(const SymMultivector& a, const SymMultivector& b) {
  return product(ProductKind::lcp, product(ProductKind::lcp, a, versor_inverse(b)), b);
}

Outermorphism::Outermorphism(FramePtr src, FramePtr dst, Matrix m)
    : src_(std::move(src)), dst_(std::move(dst)), m_(std::move(m)) {
  const auto ns = static_cast<std::size_t>(src_->dim()), nd = static_cast<std::size_t>(dst_->dim());
  if (m_.size() != nd)
    throw Error("TransformDomainMismatch", "matrix has " + std::to_string(m_.size()) + " rows; frame '" +
                                               dst_->name() + "' needs " + std::to_string(nd));
  for (const auto& row : m_)
    if (row.size() != ns)
      throw Error("TransformDomainMismatch", "matrix columns do not match frame '" + src_->name() + "'");
  images_ = outermorphism_images(m_, src_->dim(), dst_->dim());
}

SymMultivector apply_outermorphism(const Outermorphism& l, const SymMultivector& a) {
  if (a.frame() != l.source())
    throw Error("FrameMismatch", "transform expects frame '" + l.source()->name() + "', got '" +
                                     a.frame()->name() + "'");
  std::map<BladeId, std::vector<Expr>> acc;
  for (const auto& [b, e] : a.terms())
    for (const auto& [ib, c] : l.image(b)) acc[ib].push_back(Expr(c) * e);
  return collect(l.destination(), acc);
}

SymMultivector differentiate_mv(const SymMultivector& a, const std::string& var, const sym::DerivativeResolver& r) {
  return map_blades(a, [&](BladeId, const Expr& e) { return sym::differentiate(e, var, r); });
}

Matrix matrix_identity(int n) {
  Matrix m(static_cast<std::size_t>(n), std::vector<Number>(static_cast<std::size_t>(n), Number(0)));
  for (int i = 0; i < n; ++i) m[i][i] = Number(1);
  return m;
}

Matrix matrix_transpose(const Matrix& m) {
  if (m.empty()) return m;
  Matrix t(m[0].size(), std::vector<Number>(m.size()));
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < m[i].size(); ++j) t[j][i] = m[i][j];
  return t;
}

Matrix matrix_multiply(const Matrix& a, const Matrix& b) {
  Matrix r(a.size(), std::vector<Number>(b.empty() ? 0 : b[0].size(), Number(0)));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t k = 0; k < b.size(); ++k)
      for (std::size_t j = 0; j < r[i].size(); ++j) r[i][j] += a[i][k] * b[k][j];
  return r;
}

Matrix matrix_inverse(const Matrix& m) {
  const std::size_t n = m.size();
  Matrix a = m, inv = matrix_identity(static_cast<int>(n));
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = n;
    double best = 0;
    for (std::size_t r = c; r < n; ++r) {
      double v = std::abs(a[r][c].value());
      bool exact_nonzero = a[r][c].exact() && !a[r][c].is_zero();
      if ((exact_nonzero && piv == n) || v > best + 1e-300) {
        if (v > best || piv == n) { best = v; piv = r; }
      }
    }
    if (piv == n || best < 1e-12)
      throw Error("SingularTransform", "transform matrix is singular");
    std::swap(a[c], a[piv]);
    std::swap(inv[c], inv[piv]);
    Number p = a[c][c];
    for (std::size_t j = 0; j < n; ++j) {
      a[c][j] = a[c][j] / p;
      inv[c][j] = inv[c][j] / p;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c || a[r][c].is_zero()) continue;
      Number f = a[r][c];
      for (std::size_t j = 0; j < n; ++j) {
        a[r][j] = a[r][j] - f * a[c][j];
        inv[r][j] = inv[r][j] - f * inv[c][j];
      }
    }
  }
  return inv;
}

}  // namespace gamacro
