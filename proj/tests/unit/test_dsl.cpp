#include <doctest.h>

#include <random>

#include "gamacro/dsl.hpp"

using namespace gamacro;
using namespace gamacro::dsl;

namespace {

const char* kProject = R"(// frames
define frame e3d as
  basis: {e1; e2; e3}
  Euclidean
end frame

define frame cga as
  basis: {e0, e1, e2, e3, einf}
  IPM = {{0,0,0,0,-1},{0,1,0,0,0},{0,0,1,0,0},{0,0,0,1,0},{-1,0,0,0,0}}
end frame

define frame cgo as
  basis: {a; b; c; d; f}
  orthogonalize cga
end frame

define frame skew as
  basis: {s1; s2; s3}
  transform e3d by BCM = {{1,1,0},{0,1,0},{0,0,1}}
end frame

define transform T : e3d -> e3d as
  outermorphism using {{0,-1,0},{1,0,0},{0,0,1}}
end transform

define transform Ti : e3d -> e3d as inverse of T end transform
define transform Tt : e3d -> e3d as inverse transpose of T end transform
define transform Tb : e3d -> skew as outermorphism using skew.BCM end transform

define subspace e3d.Vectors as basis {e1; e2; e3} end subspace
define subspace e3d.Plane as ga_span {e1; e2} end subspace

define multivector class e3d.Vector as Vectors end multivector class
define multivector class cga.Point as Vectors; e0 : 1 end multivector class

define constant e3d.Ii as multivector {e1^e2^e3 : -1} end constant

define binding Vector3D as
  use frame e3d
  bind {e1 : <x>; e2 : <y>; e3 : <z>}
  min {x : -10}
  max {x : 10; y : 1/2}
end binding

define macro Cross as
  inputs: {u as e3d.Vector; v : e3d.Vector}
  outputs: {w as e3d.Vector}
  performs:
    t1 = u op v;
    w = t1 lcp e3d.Ii;
end macro

define macro Everything as
  inputs: {u as e3d.Vector}
  outputs: {w as e3d.Vector}
  performs:
    join on
    a = e3d.multivector {1 : sin(<u.e1>); e1^e2 : u.e2 * 2}
    b = T[a]
    c = reverse(b)
    d = scale(c, 2*u.e3)
    e = div_by_scalar(d, 3)
    f = diff(e, u.e1)
    g = cast_to_grades(f, {0; 2})
    h = cast_to_subspace(g, Plane)
    k = cast_to_class(h, e3d.Vector)
    m = -k
    n = m
    p = n + u
    q = p - n
    join off
    call Cross {u : q; v : u; w : w}
    output { if (<w.e1> != 0.0) { x = 1; } }
end macro
)";

}  // namespace

TEST_CASE("dsl parses every definition form") {
  auto r = parse(kProject, "p.gmac");
  for (const auto& d : r.diagnostics) INFO(d.code << " " << d.message << " @" << d.span.line << ":" << d.span.col);
  REQUIRE(r.ok());
  const Document& d = r.doc;
  CHECK(d.frames.size() == 4);
  CHECK(d.frames[0].form == FrameDef::Form::Euclidean);
  CHECK(d.frames[0].basis == std::vector<std::string>{"e1", "e2", "e3"});
  CHECK(d.frames[1].form == FrameDef::Form::Ipm);
  CHECK(d.frames[1].matrix.size() == 5);
  CHECK(d.frames[2].form == FrameDef::Form::Orthogonalize);
  CHECK(d.frames[3].form == FrameDef::Form::TransformBcm);
  CHECK(d.transforms.size() == 4);
  CHECK(d.transforms[1].form == TransformDef::Form::InverseOf);
  CHECK(d.transforms[2].form == TransformDef::Form::InverseTransposeOf);
  CHECK(d.transforms[3].form == TransformDef::Form::UsingBcm);
  CHECK(d.subspaces[1].span);
  CHECK(d.classes[1].constants.size() == 1);
  CHECK(d.constants[0].coefs[0].first == "e1^e2^e3");
  CHECK(d.bindings[0].maxs.size() == 2);
  REQUIRE(d.macros.size() == 2);
  CHECK(d.macros[0].inputs.size() == 2);
  CHECK(d.macros[0].inputs[1].cls == "Vector");
}

TEST_CASE("cross-product listing parses to op then lcp") {
  auto r = parse(R"(define macro GetNormalToVectors as
  inputs: {
    u as e3d.Multivector;
    v as e3d.Multivector
  }
  outputs: {
    w as e3d.Multivector
  }
  performs:
    t1 = u op v;
    w = t1 lcp e3d.Ii;
end macro)",
                 "macros.gmac", Role::macros);
  REQUIRE(r.ok());
  const auto& body = r.doc.macros.at(0).body;
  REQUIRE(body.size() == 2);
  CHECK(body[0].kind == Stmt::Kind::Binary);
  CHECK(body[0].op == "op");
  CHECK(body[1].op == "lcp");
  CHECK(body[1].operands == std::vector<std::string>{"t1", "e3d.Ii"});
}

TEST_CASE("statement kinds") {
  auto r = parse(kProject, "p.gmac");
  REQUIRE(r.ok());
  const auto& b = r.doc.macros[1].body;
  std::vector<Stmt::Kind> kinds;
  for (const auto& s : b) kinds.push_back(s.kind);
  using K = Stmt::Kind;
  std::vector<K> expect = {K::JoinOn, K::Construct, K::Transform, K::Unary, K::Unary,  K::Unary,  K::Unary,
                           K::Unary,  K::Unary,     K::Unary,     K::Negate, K::Copy, K::Binary, K::Binary,
                           K::JoinOff, K::Call,     K::Output};
  CHECK(kinds == expect);
  CHECK(b[1].coefs[0].first == "1");
  CHECK(sym::to_string(b[1].coefs[1].second) == sym::to_string(sym::Expr::var("u.e2") * 2));
  CHECK(b[4].scalar.has_value());
  CHECK(b[6].scalar->name() == "u.e1");
  CHECK(b[7].grades == std::vector<int>{0, 2});
  CHECK(b[8].target == "Plane");
  CHECK(b[9].target == "e3d.Vector");
  CHECK(b[15].call_map.size() == 3);
  CHECK(b[16].payload == " if (<w.e1> != 0.0) { x = 1; } ");
}

TEST_CASE("output payload is verbatim") {
  auto r = parse("define macro M as inputs: {} outputs: {} performs:\n output {//This line is generated by GMac};\nend macro",
                 "m.gmac");
  REQUIRE(r.ok());
  CHECK(r.doc.macros[0].body[0].payload == "//This line is generated by GMac");
}

TEST_CASE("print then parse round trips") {
  auto r = parse(kProject, "p.gmac");
  REQUIRE(r.ok());
  std::string text = print(r.doc);
  auto again = parse(text, "printed.gmac");
  for (const auto& d : again.diagnostics) INFO(d.message << " @" << d.span.line << ":" << d.span.col);
  REQUIRE(again.ok());
  CHECK(again.doc == r.doc);
  CHECK(print(again.doc) == text);
  for (Role role : kRoles) {
    auto one = parse(print(r.doc, role), role_file(role), role);
    CHECK(one.ok());
  }
}

TEST_CASE("diagnostics carry codes and spans") {
  struct Case {
    const char* text;
    const char* code;
    int line;
  };
  Case cases[] = {
      {"define frame f as\n  basis: {e1}\n  Hyperbolic\nend frame", "UnknownDefinitionForm", 3},
      {"define widget w as end widget", "UnknownDefinitionForm", 1},
      {"define macro M as inputs: {} outputs: {} performs:\n  x = a xor b\nend macro", "UnknownOperator", 2},
      {"define macro M as inputs: {} outputs: {} performs:\n  x = spin(a)\nend macro", "UnknownOperator", 2},
      {"define macro M as inputs: {} outputs: {} performs:\n  output { a { b }\nend macro", "MalformedOutputBlock", 2},
      {"define macro M as inputs: {} outputs: {} performs:\n  output { <w> }\nend macro", "MalformedOutputBlock", 2},
      {"define frame f as\n  basis: {e1 e2}\n  Euclidean\nend frame", "SyntaxError", 2},
      {"define constant f.K as multivector {e1 : 1 +} end constant", "SyntaxError", 1},
      {"stray tokens", "SyntaxError", 1},
  };
  for (const auto& c : cases) {
    auto r = parse(c.text, "x.gmac");
    INFO(c.text);
    REQUIRE(!r.ok());
    CHECK(r.diagnostics[0].code == c.code);
    CHECK(r.diagnostics[0].span.line == c.line);
    CHECK(r.diagnostics[0].span.col >= 1);
    CHECK(r.diagnostics[0].span.file == "x.gmac");
  }
}

TEST_CASE("scalar syntax errors point into the expression") {
  auto r = parse("define constant f.K as\n  multivector {e1 : 2 * * 3}\nend constant", "k.gmac");
  REQUIRE(!r.ok());
  CHECK(r.diagnostics[0].span.line == 2);
  CHECK(r.diagnostics[0].span.col > 20);
}

TEST_CASE("recovery resumes at the next definition") {
  auto r = parse("define frame a as basis: {e1} Bogus end frame\n"
                 "define frame b as basis: {e1} Euclidean end frame\n"
                 "define frame c as basis: {e1 Euclidean end frame\n"
                 "define frame d as basis: {e1} Euclidean end frame\n",
                 "f.gmac");
  CHECK(r.diagnostics.size() == 2);
  REQUIRE(r.doc.frames.size() == 2);
  CHECK(r.doc.frames[0].name == "b");
  CHECK(r.doc.frames[1].name == "d");
}

TEST_CASE("role files reject foreign definitions") {
  auto r = parse("define constant e3d.K as multivector {1 : 1} end constant", "frames.gmac", Role::frames);
  CHECK(!r.ok());
}

TEST_CASE("random bytes never crash the parser") {
  std::mt19937_64 rng(7);
  std::string alphabet = "define frame macro as end {};:,.()<>[]^=+-*/ e1 e2 x 0 1 2.5 \n\t//output join on off call";
  for (int it = 0; it < 3000; ++it) {
    std::string s;
    int len = static_cast<int>(rng() % 200);
    for (int i = 0; i < len; ++i) {
      if (rng() % 4 == 0) s += static_cast<char>(rng() % 256);
      else s += alphabet[rng() % alphabet.size()];
    }
    ParseResult r;
    CHECK_NOTHROW(r = parse(s, "fuzz.gmac"));
    for (const auto& d : r.diagnostics) CHECK(d.span.line >= 1);
  }
  // mutations of a valid project
  std::string base = kProject;
  for (int it = 0; it < 1500; ++it) {
    std::string s = base;
    for (int k = 0; k < 3; ++k) {
      std::size_t p = rng() % s.size();
      switch (rng() % 3) {
        case 0: s.erase(p, 1 + rng() % 5); break;
        case 1: s.insert(p, 1, alphabet[rng() % alphabet.size()]); break;
        default: s[p] = static_cast<char>(rng() % 128);
      }
    }
    ParseResult r;
    CHECK_NOTHROW(r = parse(s, "fuzz.gmac"));
    for (const auto& d : r.diagnostics) CHECK(d.span.line >= 1);
  }
}

TEST_CASE("duplicate names are reported") {
  auto r = parse("define frame a as basis: {e1} Euclidean end frame\n"
                 "define frame a as basis: {e2} Euclidean end frame\n"
                 "define macro M as inputs: {u as a.V} outputs: {u as a.V} performs: end macro\n",
                 "d.gmac");
  REQUIRE(r.diagnostics.size() == 2);
  CHECK(r.diagnostics[0].code == "DuplicateName");
  CHECK(r.diagnostics[0].span.line == 2);
  CHECK(r.diagnostics[1].code == "DuplicateName");
  CHECK(r.diagnostics[1].span.line == 3);
}
