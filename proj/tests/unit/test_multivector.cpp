#include <doctest.h>

#include <random>

#include "gamacro/error.hpp"
#include "gamacro/multivector.hpp"

using namespace gamacro;

namespace {

FramePtr e4d() {
  static auto f = Frame::euclidean("e4d", {"e1", "e2", "e3", "e4"});
  return f;
}
FramePtr e3d() {
  static auto f = Frame::euclidean("e3d", {"e1", "e2", "e3"});
  return f;
}

SymMultivector mv(const FramePtr& f, std::map<std::string, std::string> t) {
  SymMultivector m(f);
  for (const auto& [b, e] : t) m.set(f->parse_blade(b), sym::parse(e));
  return m;
}

SymMultivector general(const FramePtr& f, const std::string& prefix) {
  SymMultivector m(f);
  for (BladeId b = 0; b < f->blade_count(); ++b) m.set(b, Expr::var(prefix + std::to_string(b)));
  return m;
}

}  // namespace

TEST_CASE("golden 4D products") {
  auto f = e4d();
  auto A = mv(f, {{"1", "5"}, {"e1", "1"}, {"e1^e3", "-3"}});
  auto B = mv(f, {{"e1^e4", "2"}, {"e2^e3^e4", "1"}});
  auto AB = product(ProductKind::gp, A, B);
  auto BA = product(ProductKind::gp, B, A);
  CHECK(AB == mv(f, {{"e4", "2"}, {"e1^e4", "10"}, {"e3^e4", "6"}, {"e1^e2^e4", "3"}, {"e2^e3^e4", "5"},
                     {"e1^e2^e3^e4", "1"}}));
  CHECK(BA == mv(f, {{"e4", "-2"}, {"e1^e4", "10"}, {"e3^e4", "-6"}, {"e1^e2^e4", "-3"}, {"e2^e3^e4", "5"},
                     {"e1^e2^e3^e4", "-1"}}));
  CHECK(grade_part(AB, 2) == mv(f, {{"e1^e4", "10"}, {"e3^e4", "6"}}));
}

TEST_CASE("inverse of unit pseudoscalar") {
  auto I = mv(e3d(), {{"e1^e2^e3", "1"}});
  CHECK(versor_inverse(I) == mv(e3d(), {{"e1^e2^e3", "-1"}}));
  SymMultivector z(e3d());
  CHECK_THROWS_AS(versor_inverse(z), Error);
}

TEST_CASE("frame mismatch") {
  auto a = mv(e3d(), {{"e1", "1"}});
  auto b = mv(e4d(), {{"e1", "1"}});
  try {
    product(ProductKind::gp, a, b);
    FAIL("expected FrameMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == "FrameMismatch");
  }
}

TEST_CASE("involution laws on symbolic multivectors") {
  auto f = e3d();
  auto A = general(f, "a"), B = general(f, "b");
  auto AB = product(ProductKind::gp, A, B);
  CHECK(reverse(AB) == product(ProductKind::gp, reverse(B), reverse(A)));
  CHECK(grade_involution(AB) == product(ProductKind::gp, grade_involution(A), grade_involution(B)));
  CHECK(clifford_conjugate(AB) == product(ProductKind::gp, clifford_conjugate(B), clifford_conjugate(A)));
  // sp symmetric
  CHECK(product(ProductKind::sp, A, B) == product(ProductKind::sp, B, A));
  // grade projection is linear
  CHECK(grade_part(add(A, B), 2) == add(grade_part(A, 2), grade_part(B, 2)));
}

TEST_CASE("vector anticommutator is scalar") {
  auto f = e4d();
  SymMultivector a(f), b(f);
  for (int i = 0; i < 4; ++i) {
    a.set(1u << i, Expr::var("a" + std::to_string(i)));
    b.set(1u << i, Expr::var("b" + std::to_string(i)));
  }
  auto s = add(product(ProductKind::gp, a, b), product(ProductKind::gp, b, a));
  CHECK(s.grades() == std::set<int>{0});
}

TEST_CASE("pseudoscalar is central in odd dimensions") {
  auto f = e3d();
  auto I = mv(f, {{"e1^e2^e3", "1"}});
  auto A = general(f, "a");
  CHECK(product(ProductKind::gp, I, A) == product(ProductKind::gp, A, I));
}

TEST_CASE("cast to class") {
  auto f = e3d();
  MultivectorClass cls{"Point", f, {0b001, 0b010}, {{0b010, Expr(1)}}};
  auto A = mv(f, {{"e1", "x"}, {"e2", "y"}, {"e3", "z"}});
  std::vector<std::string> warn;
  auto r = cast_to_class(A, cls, false, &warn);
  CHECK(r == mv(f, {{"e1", "x"}, {"e2", "1"}}));
  CHECK(warn.size() == 1);
  CHECK_THROWS_AS(cast_to_class(A, cls, true), Error);
}

TEST_CASE("norms, dual and projection") {
  auto f = e3d();
  auto v = mv(f, {{"e1", "3"}, {"e2", "4"}});
  CHECK(quasi_norm2(v) == Expr(25));
  CHECK(norm(v) == Expr(5));
  auto B = mv(f, {{"e1^e2", "1"}});
  auto a = mv(f, {{"e1", "x"}, {"e2", "y"}, {"e3", "z"}});
  CHECK(project(a, B) == mv(f, {{"e1", "x"}, {"e2", "y"}}));
  auto I = mv(f, {{"e1^e2^e3", "1"}});
  CHECK(undual(dual(a, I), I) == a);
}

TEST_CASE("outermorphism") {
  auto f = e3d();
  // rotation by 90 degrees in the e1 e2 plane
  Matrix m = {{Number(0), Number(-1), Number(0)}, {Number(1), Number(0), Number(0)}, {Number(0), Number(0), Number(1)}};
  Outermorphism L(f, f, m);
  CHECK(apply_outermorphism(L, mv(f, {{"e1", "1"}})) == mv(f, {{"e2", "1"}}));
  CHECK(apply_outermorphism(L, mv(f, {{"e1^e3", "1"}})) == mv(f, {{"e2^e3", "1"}}));
  auto inv = matrix_inverse(m);
  CHECK(matrix_multiply(inv, m) == matrix_identity(3));
  Matrix s = {{Number(1), Number(2)}, {Number(2), Number(4)}};
  CHECK_THROWS_AS(matrix_inverse(s), Error);
}

TEST_CASE("differentiate multivector") {
  auto f = e3d();
  auto a = mv(f, {{"e1", "cos(t)"}, {"e2", "sin(t)"}});
  CHECK(differentiate_mv(a, "t") == mv(f, {{"e1", "-sin(t)"}, {"e2", "cos(t)"}}));
}
