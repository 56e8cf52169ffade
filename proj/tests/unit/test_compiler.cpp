#include <doctest.h>

#include <random>

#include "gamacro/compiler.hpp"
#include "gamacro/oracle_run.hpp"

using namespace gamacro;

namespace {

const char* kBase = R"(
define frame e3d as basis: {e1; e2; e3} Euclidean end frame
define frame e2d as basis: {e1; e2} Euclidean end frame
define subspace e3d.Vectors as basis {e1; e2; e3} end subspace
define subspace e3d.Plane as ga_span {e1; e2} end subspace
define subspace e2d.Vectors as basis {e1; e2} end subspace
define multivector class e3d.Vector as Vectors end multivector class
define multivector class e2d.Vector as Vectors end multivector class
define constant e3d.Ii as multivector {e1^e2^e3 : -1} end constant
)";

CompileResult build(const std::string& extra) {
  auto parsed = dsl::parse(std::string(kBase) + extra, "t.gmac");
  for (const auto& d : parsed.diagnostics) INFO(d.code << " " << d.message);
  REQUIRE(parsed.ok());
  return compile(parsed.doc);
}

std::string first_code(const CompileResult& r) { return r.diagnostics.empty() ? "" : r.diagnostics[0].code; }

oracle::NumMultivector random_mv(const FramePtr& f, std::mt19937_64& g) {
  oracle::NumMultivector m(oracle::num_frame(f));
  std::uniform_real_distribution<double> u(-2, 2);
  for (BladeId b = 0; b < f->blade_count(); ++b) m[b] = u(g);
  return m;
}

double max_diff(const oracle::NumMultivector& a, const oracle::NumMultivector& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.coefs().size(); ++i) m = std::max(m, std::fabs(a.coefs()[i] - b.coefs()[i]));
  return m;
}

}  // namespace

TEST_CASE("ga_span expands to every blade of the listed vectors") {
  auto r = build("");
  REQUIRE(r.ok());
  auto f = r.project->frame("e3d");
  std::set<BladeId> want = {0, f->parse_blade("e1"), f->parse_blade("e2"), f->parse_blade("e1^e2")};
  CHECK(r.project->subspaces.at("e3d.Plane") == want);
  CHECK(r.project->subspaces.at("e3d.Vectors").size() == 3);
}

TEST_CASE("inverse pseudoscalar constant") {
  auto r = build("");
  REQUIRE(r.ok());
  const auto& ii = r.project->constants.at("e3d.Ii");
  auto f = r.project->frame("e3d");
  REQUIRE(ii.terms().size() == 1);
  CHECK(ii.coef(f->parse_blade("e1^e2^e3")) == Expr(-1));
  // Ii times the pseudoscalar is one
  SymMultivector i3(f);
  i3.set(7, Expr(1));
  auto one = product(ProductKind::gp, i3, ii);
  CHECK(one == SymMultivector::scalar(f, Expr(1)));
}

TEST_CASE("class constants stay inside the class blade set") {
  auto r = build("define multivector class e3d.Lifted as Vectors; 1 : 1 end multivector class\n");
  REQUIRE(r.ok());
  for (const auto& [name, cls] : r.project->classes)
    for (const auto& [b, e] : cls->constants) CHECK(cls->blades.count(b) == 1);
}

TEST_CASE("semantic errors carry codes") {
  struct Case {
    const char* text;
    const char* code;
  };
  Case cases[] = {
      {"define subspace nope.V as basis {e1} end subspace", "UnknownFrame"},
      {"define multivector class e3d.X as Missing end multivector class", "UnknownSubspace"},
      {"define macro M as inputs: {u as e3d.Nope} outputs: {} performs: end macro", "UnknownClass"},
      {"define macro M as inputs: {u as e3d.Vector; v as e2d.Vector} outputs: {w as e3d.Vector}\n"
       " performs: w = u gp v; end macro",
       "FrameMismatch"},
      {"define transform T : e3d -> e2d as outermorphism using {{1,0},{0,1}} end transform", "TransformDomainMismatch"},
      {"define transform T : e3d -> e3d as outermorphism using {{1,0,0},{0,1,0},{0,0,0}} end transform\n"
       "define transform Ti : e3d -> e3d as inverse of T end transform",
       "SingularTransform"},
      {"define transform T : e3d -> e3d as inverse of Missing end transform", "UnknownTransform"},
      {"define macro M as inputs: {u as e3d.Vector} outputs: {w as e3d.Vector} performs:\n"
       " call M {u : u; w : w} end macro",
       "CyclicMacroCall"},
      {"define macro A as inputs: {u as e3d.Vector} outputs: {w as e3d.Vector} performs: call B {u : u; w : w} end macro\n"
       "define macro B as inputs: {u as e3d.Vector} outputs: {w as e3d.Vector} performs: call A {u : u; w : w} end macro",
       "CyclicMacroCall"},
      {"define macro C as inputs: {u as e3d.Vector; v as e3d.Vector} outputs: {w as e3d.Vector} performs: w = u + v; end macro\n"
       "define macro M as inputs: {u as e3d.Vector} outputs: {w as e3d.Vector} performs: call C {u : u; w : w} end macro",
       "UnboundCalleeInput"},
      {"define macro C as inputs: {u as e3d.Vector} outputs: {w as e3d.Vector} performs: w = u; end macro\n"
       "define macro M as inputs: {u as e2d.Vector} outputs: {w as e3d.Vector} performs: call C {u : u; w : w} end macro",
       "ClassMismatch"},
      {"define macro M as inputs: {u as e3d.Vector} outputs: {w as e3d.Vector} performs: w = u gp nothing; end macro",
       "UndefinedMultivector"},
      {"define macro M as inputs: {u as e3d.Vector} outputs: {w as e3d.Vector} performs: x = u; end macro",
       "UnassignedOutput"},
      {"define macro M as inputs: {u as e3d.Vector} outputs: {w as e3d.Vector} performs: w = div_by_scalar(u, 0); end macro",
       "DivisionByZeroConstant"},
      {"define macro M as inputs: {u as e3d.Vector} outputs: {w as e3d.Vector} performs: w = u gp e3d.Missing; end macro",
       "UnknownConstant"},
  };
  for (const auto& c : cases) {
    INFO(c.text);
    auto r = build(c.text);
    CHECK(!r.ok());
    CHECK(first_code(r) == c.code);
    CHECK(r.diagnostics[0].span.line >= 1);
  }
}

TEST_CASE("a failing definition does not hide the others") {
  auto r = build("define macro Bad as inputs: {u as e3d.Nope} outputs: {} performs: end macro\n"
                 "define macro Good as inputs: {u as e3d.Vector} outputs: {w as e3d.Vector} performs: w = u; end macro\n");
  CHECK(!r.ok());
  CHECK(r.project->macros.count("Good") == 1);
}

TEST_CASE("nested calls flatten and match a hand-inlined macro") {
  auto r = build(R"(
define macro Wedge as inputs: {a as e3d.Vector; b as e3d.Vector} outputs: {c as e3d.Multivector}
  performs: t = a op b; c = t; end macro
define macro Normal as inputs: {a as e3d.Vector; b as e3d.Vector} outputs: {n as e3d.Vector}
  performs: call Wedge {a : a; b : b; c : t} n = t lcp e3d.Ii; end macro
define macro Twice as inputs: {u as e3d.Vector; v as e3d.Vector} outputs: {w as e3d.Vector}
  performs: t = u; call Normal {a : u; b : v; n : m} w = m + t; end macro
define macro Flat as inputs: {u as e3d.Vector; v as e3d.Vector} outputs: {w as e3d.Vector}
  performs: t = u op v; m = t lcp e3d.Ii; w = m + u; end macro
)");
  for (const auto& d : r.diagnostics) INFO(d.code << " " << d.message);
  REQUIRE(r.ok());
  const auto& nested = r.project->macro("Twice");
  const auto& flat = r.project->macro("Flat");
  std::mt19937_64 g(5);
  auto f = r.project->frame("e3d");
  for (int i = 0; i < 50; ++i) {
    std::map<std::string, oracle::NumMultivector> in = {{"u", random_mv(f, g)}, {"v", random_mv(f, g)}};
    auto a = oracle::run_macro(nested, in), b = oracle::run_macro(flat, in);
    CHECK(max_diff(a.at("w"), b.at("w")) < 1e-12);
  }
  // the caller's own t survives the callee's t
  CHECK(to_string(nested).find("call") == std::string::npos);
}

TEST_CASE("print, reparse and recompile keeps behaviour") {
  const char* extra = R"(
define macro Rot as inputs: {u as e3d.Vector; v as e3d.Vector} outputs: {w as e3d.Vector}
  performs:
    r = u gp v;
    s = reverse(r);
    x = r gp u;
    y = x gp s;
    w = cast_to_class(y, e3d.Vector);
end macro
)";
  auto parsed = dsl::parse(std::string(kBase) + extra, "t.gmac");
  REQUIRE(parsed.ok());
  auto again = dsl::parse(dsl::print(parsed.doc), "printed.gmac");
  REQUIRE(again.ok());
  auto a = compile(parsed.doc), b = compile(again.doc);
  REQUIRE(a.ok());
  REQUIRE(b.ok());
  std::mt19937_64 g(6);
  auto f = a.project->frame("e3d");
  for (int i = 0; i < 50; ++i) {
    std::map<std::string, oracle::NumMultivector> in = {{"u", random_mv(f, g)}, {"v", random_mv(f, g)}};
    auto x = oracle::run_macro(a.project->macro("Rot"), in);
    auto y = oracle::run_macro(b.project->macro("Rot"), in);
    CHECK(max_diff(x.at("w"), y.at("w")) == 0.0);
  }
}

TEST_CASE("subspace frames embed into their parent") {
  auto r = build(R"(
define frame cga as basis: {e0; e1; e2; e3; einf}
  IPM = {{0,0,0,0,-1},{0,1,0,0,0},{0,0,1,0,0},{0,0,0,1,0},{-1,0,0,0,0}} end frame
define frame nul as basis: {e0; einf} subspace of cga end frame
)");
  REQUIRE(r.ok());
  auto parent = r.project->frame("cga"), sub = r.project->frame("nul");
  auto lift = [&](BladeId b) {
    BladeId out = 0;
    if (b & 1) out |= parent->parse_blade("e0");
    if (b & 2) out |= parent->parse_blade("einf");
    return out;
  };
  std::vector<BladeTerm> a, c;
  for (auto k : kAllProducts)
    for (BladeId x = 0; x < sub->blade_count(); ++x)
      for (BladeId y = 0; y < sub->blade_count(); ++y) {
        a.clear();
        c.clear();
        sub->terms(k, x, y, a);
        parent->terms(k, lift(x), lift(y), c);
        std::map<BladeId, double> sa, sc;
        for (const auto& t : a) sa[lift(t.blade)] += t.coef.value();
        for (const auto& t : c) sc[t.blade] += t.coef.value();
        CHECK(sa == sc);
      }
}

TEST_CASE("BCM columns are the new basis on the source basis") {
  auto r = build("define frame skew as basis: {s1; s2; s3} transform e3d by BCM = {{1,1,0},{0,1,0},{0,0,1}} end frame\n");
  REQUIRE(r.ok());
  auto f = r.project->frame("skew");
  // s1 = e1, s2 = e1 + e2
  CHECK(f->ipm()[0][0] == Number(1));
  CHECK(f->ipm()[0][1] == Number(1));
  CHECK(f->ipm()[1][1] == Number(2));
  CHECK(f->ipm()[2][2] == Number(1));
}

TEST_CASE("transform forms") {
  auto r = build(R"(
define transform T : e3d -> e3d as outermorphism using {{0,-1,0},{1,0,0},{0,0,2}} end transform
define transform Ti : e3d -> e3d as inverse of T end transform
define transform Tt : e3d -> e3d as transpose of T end transform
define transform Tit : e3d -> e3d as inverse transpose of T end transform
define transform Ta : e3d -> e3d as alias of T end transform
define transform Id : e3d -> e3d as identity end transform
)");
  REQUIRE(r.ok());
  const auto& t = r.project->transforms;
  auto prod = matrix_multiply(t.at("T")->matrix(), t.at("Ti")->matrix());
  CHECK(prod == matrix_identity(3));
  CHECK(t.at("Tt")->matrix() == matrix_transpose(t.at("T")->matrix()));
  CHECK(t.at("Tit")->matrix() == matrix_transpose(t.at("Ti")->matrix()));
  CHECK(t.at("Ta")->matrix() == t.at("T")->matrix());
  CHECK(t.at("Id")->matrix() == matrix_identity(3));
}

TEST_CASE("reassignment is versioned") {
  auto r = build(R"(
define macro M as inputs: {u as e3d.Vector} outputs: {w as e3d.Vector}
  performs: x = u; x = x + u; x = x + u; w = x; end macro
)");
  REQUIRE(r.ok());
  std::mt19937_64 g(8);
  auto f = r.project->frame("e3d");
  auto u = random_mv(f, g);
  auto out = oracle::run_macro(r.project->macro("M"), {{"u", u}});
  for (BladeId b : {1u, 2u, 4u}) CHECK(out.at("w")[b] == doctest::Approx(3 * u[b]));
}
