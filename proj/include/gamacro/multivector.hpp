#pragma once
#include <map>
#include <set>
#include <string>
#include <vector>

#include "gamacro/blades.hpp"
#include "gamacro/symbolic.hpp"

namespace gamacro {

using sym::Expr;

// Sparse symbolic multivector; zero coefficients are never stored.
class SymMultivector {
public:
  explicit SymMultivector(FramePtr frame) : frame_(std::move(frame)) {}
  SymMultivector(FramePtr frame, const std::map<BladeId, Expr>& terms);
  static SymMultivector scalar(FramePtr frame, const Expr& s);

  const FramePtr& frame() const { return frame_; }
  const std::map<BladeId, Expr>& terms() const { return terms_; }
  Expr coef(BladeId b) const;
  void set(BladeId b, const Expr& e);
  bool is_zero() const { return terms_.empty(); }
  std::set<int> grades() const;
  std::string str() const;

  friend bool operator==(const SymMultivector& a, const SymMultivector& b) {
    return a.frame_ == b.frame_ && a.terms_ == b.terms_;
  }

private:
  FramePtr frame_;
  std::map<BladeId, Expr> terms_;
};

// Throws FrameMismatch.
SymMultivector product(ProductKind k, const SymMultivector& a, const SymMultivector& b,
                       sym::SymbolicCache* cache = nullptr);
SymMultivector add(const SymMultivector& a, const SymMultivector& b);
SymMultivector sub(const SymMultivector& a, const SymMultivector& b);
SymMultivector negate(const SymMultivector& a);
SymMultivector scale(const SymMultivector& a, const Expr& s);
SymMultivector div_by_scalar(const SymMultivector& a, const Expr& s);  // throws DivisionByZeroConstant

SymMultivector reverse(const SymMultivector& a);
SymMultivector grade_involution(const SymMultivector& a);
SymMultivector clifford_conjugate(const SymMultivector& a);
SymMultivector grade_part(const SymMultivector& a, int k);
SymMultivector cast_to_grades(const SymMultivector& a, const std::set<int>& grades);
SymMultivector cast_to_blades(const SymMultivector& a, const std::set<BladeId>& blades);

struct MultivectorClass {
  std::string name;
  FramePtr frame;
  std::set<BladeId> blades;
  std::map<BladeId, Expr> constants;  // pinned coefficients, a subset of blades
};

// Strict mode throws BladeOutsideClass; permissive mode drops and records a warning.
SymMultivector cast_to_class(const SymMultivector& a, const MultivectorClass& cls, bool strict,
                             std::vector<std::string>* warnings = nullptr);

Expr quasi_norm2(const SymMultivector& a, sym::SymbolicCache* cache = nullptr);
Expr quasi_norm(const SymMultivector& a, sym::SymbolicCache* cache = nullptr);
Expr norm2(const SymMultivector& a, sym::SymbolicCache* cache = nullptr);
Expr norm(const SymMultivector& a, sym::SymbolicCache* cache = nullptr);

SymMultivector versor_inverse(const SymMultivector& v);  // throws NullVersor
SymMultivector dual(const SymMultivector& a, const SymMultivector& b);
SymMultivector undual(const SymMultivector& a, const SymMultivector& b);
SymMultivector project(const SymMultivector& a, const SymMultivector& b);

// Linear map given by vector images (column j is the image of source basis vector j).
class Outermorphism {
public:
  // Throws TransformDomainMismatch when the matrix shape does not fit the frames.
  Outermorphism(FramePtr src, FramePtr dst, Matrix m);
  const FramePtr& source() const { return src_; }
  const FramePtr& destination() const { return dst_; }
  const Matrix& matrix() const { return m_; }
  const std::map<BladeId, Number>& image(BladeId b) const { return images_[b]; }

private:
  FramePtr src_, dst_;
  Matrix m_;
  std::vector<std::map<BladeId, Number>> images_;
};

SymMultivector apply_outermorphism(const Outermorphism& l, const SymMultivector& a);

SymMultivector differentiate_mv(const SymMultivector& a, const std::string& var,
                                const sym::DerivativeResolver& resolver = {});

// Exact matrix helpers for outermorphism algebra.
Matrix matrix_identity(int n);
Matrix matrix_transpose(const Matrix& m);
Matrix matrix_multiply(const Matrix& a, const Matrix& b);
// Throws SingularTransform.
Matrix matrix_inverse(const Matrix& m);

}  // namespace gamacro
