#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "gamacro/blades.hpp"
#include "gamacro/error.hpp"
#include "gamacro/oracle.hpp"

using namespace gamacro;

namespace {

FramePtr cga5d() {
  Matrix m(5, std::vector<Number>(5, Number(0)));
  for (int i = 1; i < 4; ++i) m[i][i] = 1;
  m[0][4] = m[4][0] = -1;
  return Frame::from_ipm("cga5d", {"e0", "e1", "e2", "e3", "einf"}, m);
}

std::vector<BladeTerm> terms(const Frame& f, ProductKind k, BladeId a, BladeId b) {
  std::vector<BladeTerm> out;
  f.terms(k, a, b, out);
  return out;
}

}  // namespace

TEST_CASE("grade counts blades") {
  int count = 0;
  for (BladeId b = 0; b < 16; ++b) count += grade(b) == 2;
  CHECK(count == 6);
  CHECK(grade(0b10110) == 3);
}

TEST_CASE("reorder sign of worked example") {
  // (e1 e3)(e1 e4) = -e3 e4 in a Euclidean metric
  auto f = Frame::euclidean("e4d", {"e1", "e2", "e3", "e4"});
  auto t = terms(*f, ProductKind::gp, 0b0101, 0b1001);
  REQUIRE(t.size() == 1);
  CHECK(t[0].blade == 0b1100);
  CHECK(t[0].coef == Number(-1));
}

TEST_CASE("gp of bivector and trivector") {
  auto f = Frame::euclidean("e3d", {"e1", "e2", "e3"});
  auto t = terms(*f, ProductKind::gp, 0b011, 0b111);
  REQUIRE(t.size() == 1);
  CHECK(t[0].blade == 0b100);
  CHECK(t[0].coef == Number(-1));
}

TEST_CASE("orthogonal_gp with null vector") {
  std::vector<Number> sig = {Number(1), Number(0)};
  CHECK(orthogonal_gp(0b10, 0b10, sig).coef.is_zero());
  CHECK(orthogonal_gp(0b01, 0b01, sig).coef == Number(1));
}

TEST_CASE("conformal frame e0 einf") {
  auto f = cga5d();
  CHECK_FALSE(f->diagonal());
  auto t = terms(*f, ProductKind::gp, 0b00001, 0b10000);
  REQUIRE(t.size() == 2);
  CHECK(t[0].blade == 0);
  CHECK(t[0].coef == Number(-1));
  CHECK(t[1].blade == 0b10001);
  CHECK(t[1].coef == Number(1));
  auto sig = f->signature();
  int pos = 0, neg = 0;
  for (int s : sig) (s > 0 ? pos : neg)++;
  CHECK(pos == 4);
  CHECK(neg == 1);
}

TEST_CASE("non-symmetric IPM rejected") {
  Matrix m = {{Number(1), Number(2)}, {Number(0), Number(1)}};
  CHECK_THROWS_WITH_AS(Frame::from_ipm("bad", {"a", "b"}, m), doctest::Contains("symmetric"), Error);
}

TEST_CASE("reciprocal frame") {
  auto f = cga5d();
  auto r = f->reciprocal_frame();
  // reciprocal of e0 is -einf
  CHECK(r[4][0] == doctest::Approx(-1.0));
  CHECK(std::abs(r[0][0]) < 1e-12);
  // e^i . e_j = delta_ij
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) {
      double s = 0;
      for (int k = 0; k < 5; ++k) s += r[k][i] * f->ipm()[k][j].value();
      CHECK(s == doctest::Approx(i == j ? 1.0 : 0.0));
    }
  Matrix deg = {{Number(1), Number(0)}, {Number(0), Number(0)}};
  auto d = Frame::from_ipm("deg", {"a", "b"}, deg);
  try {
    d->reciprocal_frame();
    FAIL("expected DegenerateMetric");
  } catch (const Error& e) {
    CHECK(e.code() == "DegenerateMetric");
  }
}

TEST_CASE("reciprocal frame matches wedge formula") {
  // e^k = (-1)^(k-1) (e1 ^ .. ^ e_k-omitted ^ .. ^ en) I^-1 for a general symmetric metric
  Matrix m = {{Number(2), Number(1), Number(0)}, {Number(1), Number(3), Number(1)}, {Number(0), Number(1), Number(1)}};
  auto f = Frame::from_ipm("g3", {"a", "b", "c"}, m);
  auto r = f->reciprocal_frame();
  std::vector<std::vector<double>> form(3, std::vector<double>(3));
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) form[i][j] = m[i][j].value();
  auto nf = std::make_shared<oracle::NumFrame>(form);
  oracle::NumMultivector I(nf);
  I[0b111] = 1;
  auto Iinv = oracle::versor_inverse(I);
  for (int k = 0; k < 3; ++k) {
    oracle::NumMultivector w(nf);
    w[0b111 & ~(1u << k)] = (k % 2 ? -1.0 : 1.0);
    auto ek = oracle::product(oracle::Product::gp, w, Iinv);
    for (int i = 0; i < 3; ++i) CHECK(ek[1u << i] == doctest::Approx(r[i][k]).epsilon(1e-12));
  }
}

TEST_CASE("table agreement with oracle on every blade pair") {
  std::vector<FramePtr> frames = {Frame::euclidean("e2d", {"e1", "e2"}), Frame::euclidean("e3d", {"e1", "e2", "e3"}),
                                  Frame::euclidean("p4d", {"e1", "e2", "e3", "eo"}), cga5d()};
  for (const auto& f : frames) {
    std::vector<std::vector<double>> form(f->dim(), std::vector<double>(f->dim()));
    for (int i = 0; i < f->dim(); ++i)
      for (int j = 0; j < f->dim(); ++j) form[i][j] = f->ipm()[i][j].value();
    auto nf = std::make_shared<oracle::NumFrame>(form);
    for (auto k : kAllProducts)
      for (BladeId a = 0; a < f->blade_count(); ++a)
        for (BladeId b = 0; b < f->blade_count(); ++b) {
          oracle::NumMultivector x(nf), y(nf);
          x[a] = 1;
          y[b] = 1;
          auto z = oracle::product(static_cast<oracle::Product>(k), x, y);
          std::vector<double> mine(f->blade_count(), 0.0);
          for (const auto& t : terms(*f, k, a, b)) {
            CHECK(t.coef.exact());
            mine[t.blade] = t.coef.value();
          }
          for (BladeId c = 0; c < f->blade_count(); ++c) CHECK(mine[c] == z[c]);
        }
  }
}

TEST_CASE("gp associativity exhaustive up to five dimensions") {
  for (int n = 1; n <= 5; ++n) {
    Matrix m(n, std::vector<Number>(n, Number(0)));
    for (int i = 0; i < n; ++i) m[i][i] = Number(i % 3 == 2 ? -1 : (i % 3 == 1 ? 0 : 1));
    if (n >= 2) m[0][1] = m[1][0] = Number::rational(1, 2);
    std::vector<std::string> names;
    for (int i = 0; i < n; ++i) names.push_back("v" + std::to_string(i));
    auto f = Frame::from_ipm("g", names, m);
    const BladeId N = f->blade_count();
    auto mul = [&](const std::map<BladeId, Number>& x, BladeId b) {
      std::map<BladeId, Number> r;
      std::vector<BladeTerm> ts;
      for (const auto& [a, c] : x) {
        f->terms(ProductKind::gp, a, b, ts);
        for (const auto& t : ts) r[t.blade] += c * t.coef;
      }
      std::erase_if(r, [](const auto& p) { return p.second.is_zero(); });
      return r;
    };
    auto lmul = [&](BladeId a, const std::map<BladeId, Number>& y) {
      std::map<BladeId, Number> r;
      std::vector<BladeTerm> ts;
      for (const auto& [b, c] : y) {
        f->terms(ProductKind::gp, a, b, ts);
        for (const auto& t : ts) r[t.blade] += c * t.coef;
      }
      std::erase_if(r, [](const auto& p) { return p.second.is_zero(); });
      return r;
    };
    bool ok = true;
    for (BladeId a = 0; a < N && ok; ++a)
      for (BladeId b = 0; b < N && ok; ++b)
        for (BladeId c = 0; c < N && ok; ++c) {
          auto ab_c = mul(mul({{a, Number(1)}}, b), c);
          auto a_bc = lmul(a, mul({{b, Number(1)}}, c));
          if (ab_c.size() != a_bc.size()) ok = false;
          for (const auto& [bl, v] : ab_c) {
            auto it = a_bc.find(bl);
            if (it == a_bc.end() || std::abs((it->second - v).value()) > 1e-12) ok = false;
          }
        }
    CHECK_MESSAGE(ok, "associativity fails for n=" << n);
  }
}

TEST_CASE("derived products are grade selections of gp") {
  auto f = cga5d();
  for (BladeId a = 0; a < 32; ++a)
    for (BladeId b = 0; b < 32; ++b) {
      auto g = terms(*f, ProductKind::gp, a, b);
      for (auto k : {ProductKind::op, ProductKind::sp, ProductKind::lcp, ProductKind::rcp, ProductKind::fdp,
                     ProductKind::hip}) {
        auto t = terms(*f, k, a, b);
        std::size_t expect = 0;
        for (const auto& x : g) expect += keeps_grade(k, grade(a), grade(b), grade(x.blade));
        CHECK(t.size() == expect);
      }
    }
}

TEST_CASE("reciprocal identity e_i (e^i lcp A_k) = k A_k") {
  auto f = cga5d();
  auto r = f->reciprocal_frame();
  std::vector<std::vector<double>> form(5, std::vector<double>(5));
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) form[i][j] = f->ipm()[i][j].value();
  auto nf = std::make_shared<oracle::NumFrame>(form);
  for (BladeId a = 0; a < 32; ++a) {
    oracle::NumMultivector A(nf), sum(nf);
    A[a] = 1;
    for (int i = 0; i < 5; ++i) {
      oracle::NumMultivector ei(nf), eri(nf);
      ei[1u << i] = 1;
      for (int j = 0; j < 5; ++j) eri[1u << j] = r[j][i];
      sum = sum + oracle::product(oracle::Product::gp, ei, oracle::product(oracle::Product::lcp, eri, A));
    }
    for (BladeId c = 0; c < 32; ++c) CHECK(sum[c] == doctest::Approx(grade(a) * A[c]));
  }
}

TEST_CASE("blade names parse and print") {
  auto f = Frame::euclidean("e3d", {"e1", "e2", "e3"});
  CHECK(f->parse_blade("e1^e3") == 0b101);
  CHECK(f->parse_blade("1") == 0);
  CHECK(f->blade_name(0b110) == "e2^e3");
  CHECK_THROWS_AS(f->parse_blade("e3^e1"), Error);
  CHECK_THROWS_AS(f->parse_blade("e4"), Error);
}
