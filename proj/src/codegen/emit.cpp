#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <sstream>

#include "gamacro/codegen.hpp"
#include "gamacro/oracle_run.hpp"

namespace gamacro::codegen {

namespace {

using Kind = Assignment::Kind;

void used_functions(const Expr& e, std::set<std::string>& out) {
  switch (e.kind()) {
    case sym::Kind::Func:
      out.insert(e.name());
      used_functions(e.args()[0], out);
      return;
    case sym::Kind::Var:
      if (e.name() == "pi") out.insert("pi");
      return;
    case sym::Kind::Mul:
      for (const auto& f : e.factors()) {
        if (f.exp > 1 || f.exp < -1) out.insert("pow");
        used_functions(f.base, out);
      }
      return;
    case sym::Kind::Add:
      for (const auto& t : e.args()) used_functions(t, out);
      return;
    default: return;
  }
}

std::string trim(const std::string& s) {
  auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace

std::string emit(const ExprSequence& seq, const Dialect& d, const std::string& indent, const std::string& nl) {
  sym::PrintOptions po;
  po.c_like = d.c_like;
  po.functions = d.functions;
  if (d.c_like) {
    std::set<std::string> used;
    for (const auto& a : seq.items) {
      if (a.kind == Kind::Verbatim) {
        for (const auto& p : a.text)
          if (const auto* e = std::get_if<Expr>(&p)) used_functions(*e, used);
      } else {
        used_functions(a.value, used);
      }
    }
    for (const auto& f : used) {
      auto it = d.functions.find(f);
      if (it == d.functions.end() || it->second.empty())
        throw Error("UnmappedFunction", "dialect '" + d.name + "' has no spelling for '" + f + "'");
    }
  }
  std::string out;
  std::string end = d.c_like ? ";" : "";
  for (const auto& a : seq.items) {
    out += indent;
    switch (a.kind) {
      case Kind::Verbatim:
        for (const auto& p : a.text) {
          if (const auto* s = std::get_if<std::string>(&p)) out += *s;
          else out += sym::to_string(std::get<Expr>(p), po);
        }
        break;
      case Kind::Input:
      case Kind::Temp:
        if (d.c_like) out += d.declare + " ";
        out += a.name + " = " + sym::to_string(a.value, po) + end;
        break;
      case Kind::Output: out += a.name + " = " + sym::to_string(a.value, po) + end; break;
    }
    out += nl;
  }
  return out;
}

ExprSequence parse_generated(const std::string& text, const Dialect& d) {
  sym::ParseOptions po;
  for (const auto& [canon, spelled] : d.functions)
    if (canon != "pi") po.functions[spelled] = canon;
  std::string pi;
  if (auto it = d.functions.find("pi"); it != d.functions.end()) pi = it->second;
  ExprSequence seq;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::string t = trim(line);
    if (t.empty() || t.rfind("//", 0) == 0) continue;
    bool declared = false;
    if (d.c_like && t.rfind(d.declare + " ", 0) == 0) {
      declared = true;
      t = trim(t.substr(d.declare.size() + 1));
    }
    auto eq = t.find('=');
    if (eq == std::string::npos || eq == 0 || (eq + 1 < t.size() && t[eq + 1] == '=')) continue;
    std::string lhs = trim(t.substr(0, eq));
    std::string rhs = trim(t.substr(eq + 1));
    if (!rhs.empty() && rhs.back() == ';') rhs = trim(rhs.substr(0, rhs.size() - 1));
    bool name_ok = !lhs.empty() && (std::isalpha(static_cast<unsigned char>(lhs[0])) || lhs[0] == '_');
    for (char c : lhs) name_ok = name_ok && (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.');
    if (!name_ok) continue;
    Assignment a;
    a.name = lhs;
    a.value = sym::parse(rhs, po);
    if (!pi.empty()) a.value = sym::substitute(a.value, {{pi, Expr::var("pi")}});
    bool temp_name = lhs.size() == 7 && lhs.rfind("var", 0) == 0 &&
                     std::all_of(lhs.begin() + 3, lhs.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
    a.kind = declared || (!d.c_like && temp_name) ? Kind::Temp : Kind::Output;
    seq.items.push_back(std::move(a));
  }
  return seq;
}

std::map<std::string, double> interpret(const ExprSequence& seq, const std::map<std::string, double>& env) {
  std::map<std::string, double> vals = env;
  std::map<std::string, double> out;
  for (const auto& a : seq.items) {
    if (a.kind == Kind::Verbatim) continue;
    double v = sym::eval_numeric(a.value, vals);
    vals[a.name] = v;
    out[a.name] = v;
  }
  return out;
}

PointResult generate_point(const CompiledProject& project, const BindingPoint& bp, const Dialect& dialect,
                           const Options& opt) {
  PointResult r;
  r.point = bp;
  sym::SymbolicCache cache;
  try {
    Evaluation ev = evaluate_macro(project, bp, opt, &cache);
    r.diagnostics = ev.warnings;
    r.unoptimized = ev.sequence;
    r.sequence = opt.optimize ? optimize(ev.sequence, ev.assumptions) : ev.sequence;
    r.body = emit(r.sequence, dialect, "", "\n");
    r.cache_hit_rate = cache.hit_rate();
    r.ok = true;
  } catch (const Error& e) {
    Diagnostic d = to_diagnostic(e);
    if (d.span.line == 0 || d.span.file.empty()) d.span = bp.loc;
    r.diagnostics.push_back(d);
  }
  return r;
}

FileResult generate_file(const CompiledProject& project, const std::string& text, const std::string& file,
                         const Dialect& dialect, const Options& opt) {
  FileResult fr;
  ScanResult scan = scan_source(text, dialect, file);
  fr.diagnostics = scan.diagnostics;
  for (const auto& bp : scan.points) {
    fr.points.push_back(generate_point(project, bp, dialect, opt));
    for (const auto& d : fr.points.back().diagnostics) fr.diagnostics.push_back(d);
  }
  fr.text = splice_all(text, fr.points);
  return fr;
}

std::string blade_suffix(const Frame& frame, BladeId blade) {
  if (blade == 0) return "s";
  std::string n = frame.blade_name(blade);
  std::replace(n.begin(), n.end(), '^', '_');
  return n;
}

BindingPoint bind_all(const CompiledProject& project, const std::string& macro) {
  const MacroIR& m = project.macro(macro);
  BindingPoint bp;
  bp.macro = macro;
  bp.loc = m.loc;
  for (const auto& prm : m.inputs)
    for (BladeId b : prm.cls->blades) {
      if (prm.cls->constants.count(b)) continue;
      const Frame& f = *prm.cls->frame;
      bp.coefs.push_back({prm.name, f.blade_name(b), Expr::var(prm.name + "." + blade_suffix(f, b)), m.loc});
    }
  for (const auto& prm : m.outputs)
    for (BladeId b : prm.cls->blades) {
      const Frame& f = *prm.cls->frame;
      bp.coefs.push_back({prm.name, f.blade_name(b), Expr::var(prm.name + "_" + blade_suffix(f, b)), m.loc});
    }
  return bp;
}

VerifyReport verify_point(const CompiledProject& project, const BindingPoint& bp, const ExprSequence& seq,
                          int samples, std::uint64_t seed, double tol) {
  VerifyReport rep;
  const MacroIR& m = project.macro(bp.macro);
  // Evaluation of the bindings alone gives the input/output coefficient map.
  Options opt;
  Evaluation ev = evaluate_macro(project, bp, opt);
  std::vector<const Assignment*> outputs;
  for (const auto& a : ev.sequence.items)
    if (a.kind == Kind::Output) outputs.push_back(&a);
  std::set<std::string> targets;
  for (const auto& c : bp.coefs)
    for (const auto& v : sym::free_vars(c.target)) targets.insert(v);
  for (const auto& c : bp.classes) {
    auto it = project.bindings.find(c.binding);
    if (it == project.bindings.end()) continue;
    for (const auto& [b, e] : it->second.binds)
      for (const auto& v : sym::free_vars(e)) targets.insert(c.object + "." + v);
  }
  for (const auto* o : outputs) targets.erase(o->name);

  for (const auto& prm : m.inputs)
    if (prm.cls->frame->dim() > oracle::NumFrame::kMaxDim) {
      rep.message = "frame " + prm.cls->frame->name() + " exceeds the oracle dimension limit";
      rep.samples = samples;
      rep.skipped = samples;
      return rep;
    }

  // bound input coefficient expressions
  std::map<std::string, std::map<BladeId, Expr>> bound;
  for (const auto& c : bp.coefs)
    for (const auto& prm : m.inputs)
      if (prm.name == c.mv) bound[c.mv][prm.cls->frame->parse_blade(c.blade)] = c.target;
  for (const auto& c : bp.classes) {
    auto it = project.bindings.find(c.binding);
    for (const auto& prm : m.inputs) {
      if (prm.name != c.mv || it == project.bindings.end()) continue;
      for (const auto& [b, e] : it->second.binds) {
        std::map<std::string, Expr> ren;
        for (const auto& v : sym::free_vars(e)) ren[v] = Expr::var(c.object + "." + v);
        bound[c.mv][b] = sym::substitute(e, ren);
      }
    }
  }

  std::mt19937_64 rng(seed);
  for (int s = 0; s < samples; ++s) {
    ++rep.samples;
    std::map<std::string, double> env;
    for (const auto& v : targets) {
      double lo = -2, hi = 2;
      if (const sym::Interval* iv = ev.assumptions.find(v)) {
        if (iv->lo && iv->hi) {
          lo = iv->lo->value();
          hi = iv->hi->value();
        } else if (iv->lo) {
          lo = iv->lo->value();
          hi = lo + 4;
        } else if (iv->hi) {
          hi = iv->hi->value();
          lo = hi - 4;
        }
      }
      env[v] = std::uniform_real_distribution<double>(lo, hi)(rng);
    }
    std::map<std::string, oracle::NumMultivector> in;
    std::map<std::string, double> got;
    std::map<std::string, oracle::NumMultivector> want;
    try {
      for (const auto& prm : m.inputs) {
        oracle::NumMultivector x(oracle::num_frame(prm.cls->frame));
        auto it = bound.find(prm.name);
        if (it != bound.end())
          for (const auto& [b, e] : it->second) x[b] = sym::eval_numeric(e, env);
        in.emplace(prm.name, x);
      }
      want = oracle::run_macro(m, in);
      got = interpret(seq, env);
    } catch (const Error& e) {
      if (e.code() == "NullVersor" || e.code() == "DomainError") {
        ++rep.skipped;
        continue;
      }
      throw;
    }
    for (const auto* o : outputs) {
      double w = want.at(o->mv)[o->blade];
      auto g = got.find(o->name);
      double err;
      if (g == got.end()) err = std::numeric_limits<double>::infinity();
      else err = std::fabs(g->second - w) / std::max(1.0, std::fabs(w));
      if (!std::isfinite(w) && g != got.end() && !std::isfinite(g->second)) err = 0;
      if (std::isnan(err)) {
        ++rep.skipped;
        continue;
      }
      rep.max_error = std::max(rep.max_error, err);
      if (err > tol) {
        if (rep.failures == 0) {
          std::ostringstream msg;
          msg << o->name << " = " << (g == got.end() ? std::string("<missing>") : format_double(g->second))
              << " but the oracle gives " << format_double(w);
          rep.message = msg.str();
        }
        ++rep.failures;
        break;
      }
    }
  }
  return rep;
}

}  // namespace gamacro::codegen
