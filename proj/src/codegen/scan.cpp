#include <algorithm>
#include <cctype>

#include "gamacro/codegen.hpp"

namespace gamacro::codegen {

Dialect make_dialect(const std::string& name) {
  Dialect d;
  d.name = name;
  static const char* kFuncs[] = {"sin", "cos", "tan", "sqrt", "exp", "atan", "cosh", "sinh"};
  if (name == "neutral") return d;
  if (name == "c-like") {
    d.c_like = true;
    for (const char* f : kFuncs) d.functions[f] = f;
    d.functions["ln"] = "log";
    d.functions["abs"] = "fabs";
    d.functions["pow"] = "pow";
    d.functions["pi"] = "M_PI";
    return d;
  }
  if (name == "csharp") {
    d.c_like = true;
    d.regions = true;
    for (const char* f : kFuncs) {
      std::string s = f;
      s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
      d.functions[f] = "Math." + s;
    }
    d.functions["ln"] = "Math.Log";
    d.functions["abs"] = "Math.Abs";
    d.functions["pow"] = "Math.Pow";
    d.functions["pi"] = "Math.PI";
    return d;
  }
  throw Error("UnknownDialect", "unknown dialect '" + name + "' (expected neutral, c-like or csharp)");
}

namespace {

std::string trim(const std::string& s) {
  auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

bool starts_with(const std::string& s, const std::string& p) { return s.compare(0, p.size(), p) == 0; }

// Text after "//" with surrounding blanks removed, or nullopt for non-comment lines.
std::optional<std::string> comment_body(const std::string& line) {
  std::string t = trim(line);
  if (!starts_with(t, "//")) return std::nullopt;
  return trim(t.substr(2));
}

struct Arg {
  std::string text;
  bool quoted = false;
};

// Parses `Name(args)` with optional trailing ';'. Returns nullopt when the shape is wrong.
std::optional<std::vector<Arg>> call_args(const std::string& body, const std::string& name) {
  if (!starts_with(body, name)) return std::nullopt;
  std::string rest = trim(body.substr(name.size()));
  if (rest.empty() || rest[0] != '(') return std::nullopt;
  if (!rest.empty() && rest.back() == ';') rest = trim(rest.substr(0, rest.size() - 1));
  if (rest.back() != ')') return std::nullopt;
  std::string inner = rest.substr(1, rest.size() - 2);
  std::vector<Arg> args;
  std::size_t i = 0;
  while (true) {
    while (i < inner.size() && std::isspace(static_cast<unsigned char>(inner[i]))) ++i;
    if (i >= inner.size()) {
      if (!args.empty()) return std::nullopt;  // trailing comma
      break;
    }
    Arg a;
    if (inner[i] == '"') {
      a.quoted = true;
      ++i;
      while (i < inner.size() && inner[i] != '"') {
        if (inner[i] == '\\' && i + 1 < inner.size()) ++i;
        a.text += inner[i++];
      }
      if (i >= inner.size()) return std::nullopt;
      ++i;
    } else {
      while (i < inner.size() && inner[i] != ',') a.text += inner[i++];
      a.text = trim(a.text);
      if (a.text.empty()) return std::nullopt;
    }
    args.push_back(a);
    while (i < inner.size() && std::isspace(static_cast<unsigned char>(inner[i]))) ++i;
    if (i >= inner.size()) break;
    if (inner[i] != ',') return std::nullopt;
    ++i;
  }
  return args;
}

sym::ParseOptions reverse_functions(const Dialect& d) {
  sym::ParseOptions po;
  for (const auto& [canon, spelled] : d.functions)
    if (canon != "pi" && canon != "pow") po.functions[spelled] = canon;
  return po;
}

Expr target_expr(const Arg& a, const Dialect& d) {
  if (!a.quoted) return Expr::var(a.text);
  Expr e = sym::parse(a.text, reverse_functions(d));
  auto pi = d.functions.find("pi");
  if (pi != d.functions.end()) e = sym::substitute(e, {{pi->second, Expr::var("pi")}});
  return e;
}

std::string strip_angles(const std::string& s) {
  std::string t = trim(s);
  if (t.size() >= 2 && t.front() == '<' && t.back() == '>') return trim(t.substr(1, t.size() - 2));
  return t;
}

}  // namespace

ScanResult scan_source(const std::string& text, const Dialect& dialect, const std::string& file) {
  ScanResult res;
  std::string newline = text.find("\r\n") != std::string::npos ? "\r\n" : "\n";

  struct Line {
    std::size_t begin, end;  // end includes the newline
    std::string s;
  };
  std::vector<Line> lines;
  for (std::size_t p = 0; p < text.size();) {
    std::size_t nl = text.find('\n', p);
    std::size_t e = nl == std::string::npos ? text.size() : nl + 1;
    std::string s = text.substr(p, (nl == std::string::npos ? text.size() : nl) - p);
    if (!s.empty() && s.back() == '\r') s.pop_back();
    lines.push_back({p, e, s});
    p = e;
  }

  auto loc_at = [&](std::size_t i) {
    SourceLoc l;
    l.file = file;
    l.line = l.end_line = static_cast<int>(i) + 1;
    l.col = static_cast<int>(lines[i].s.find_first_not_of(" \t")) + 1;
    if (l.col <= 0) l.col = 1;
    l.end_col = static_cast<int>(lines[i].s.size()) + 1;
    return l;
  };
  auto diag = [&](const std::string& code, const std::string& msg, std::size_t i, const char* sev = "error") {
    res.diagnostics.push_back({sev, code, msg, loc_at(i)});
  };

  auto open_marker = [&](const std::string& line) -> std::optional<std::pair<std::string, bool>> {
    std::string t = trim(line);
    bool region = false;
    std::string body;
    if (auto c = comment_body(line)) body = *c;
    else if (dialect.regions && starts_with(t, "#region")) {
      body = trim(t.substr(7));
      region = true;
    } else return std::nullopt;
    if (!starts_with(body, "GMac")) return std::nullopt;
    std::string rest = trim(body.substr(4));
    if (rest.empty() || rest[0] != ':') return std::nullopt;
    return std::pair{trim(rest.substr(1)), region};
  };
  auto is_close = [&](const std::string& line, bool region) {
    std::string t = trim(line);
    if (region) return starts_with(t, "#endregion");
    auto c = comment_body(line);
    return c && (*c == "GMac end" || (c->size() > 8 && starts_with(*c, "GMac end") && std::isspace(static_cast<unsigned char>((*c)[8]))));
  };

  for (std::size_t i = 0; i < lines.size(); ++i) {
    auto open = open_marker(lines[i].s);
    if (!open) continue;
    BindingPoint bp;
    bp.macro = open->first;
    bp.file = file;
    bp.loc = loc_at(i);
    bp.newline = newline;
    bp.indent = lines[i].s.substr(0, lines[i].s.find_first_not_of(" \t") == std::string::npos
                                         ? 0
                                         : lines[i].s.find_first_not_of(" \t"));
    bool region = open->second;
    bool bad = false;
    bool closed = false;
    bool in_block = false;
    std::size_t block_begin = 0;
    bool have_block = false;
    if (bp.macro.empty() || !std::all_of(bp.macro.begin(), bp.macro.end(), [](char c) {
          return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
        })) {
      diag("MalformedBinding", "expected a macro name after 'GMac :'", i);
      bad = true;
    }
    std::size_t j = i + 1;
    for (; j < lines.size(); ++j) {
      const std::string& s = lines[j].s;
      std::string t = trim(s);
      if (in_block) {
        if (t == kBlockEnd) {
          in_block = false;
          have_block = true;
          bp.block_begin = block_begin;
          bp.block_end = lines[j].end;
        }
        continue;
      }
      if (t == kBlockBegin) {
        if (have_block) {
          diag("MalformedBinding", "region holds more than one generated block", j);
          bad = true;
        }
        in_block = true;
        block_begin = lines[j].begin;
        continue;
      }
      if (t == kBlockEnd) {
        diag("MalformedBinding", "generated block end without a start", j);
        bad = true;
        continue;
      }
      if (is_close(s, region)) {
        closed = true;
        bp.insert_at = lines[j].begin;
        break;
      }
      if (open_marker(s)) {
        diag("OverlappingRegions", "binding region opened inside the region started at line " +
                                       std::to_string(i + 1),
             j);
        bad = true;
        break;
      }
      auto c = comment_body(s);
      if (!c || !starts_with(*c, "GMac.")) continue;
      try {
        if (auto args = call_args(*c, "GMac.Bind")) {
          if (args->size() == 2) {
            std::string ref = (*args)[0].text;
            auto dot = ref.find('.');
            if (dot == std::string::npos || dot == 0 || dot + 1 == ref.size())
              throw Error("MalformedBinding", "expected \"<multivector>.<blade>\", found \"" + ref + "\"");
            bp.coefs.push_back({ref.substr(0, dot), ref.substr(dot + 1), target_expr((*args)[1], dialect), loc_at(j)});
          } else if (args->size() == 3) {
            bp.classes.push_back({(*args)[0].text, (*args)[1].text, (*args)[2].text, loc_at(j)});
          } else {
            throw Error("MalformedBinding", "GMac.Bind takes two or three arguments");
          }
        } else if (auto amin = call_args(*c, "GMac.AssumeMin"), amax = call_args(*c, "GMac.AssumeMax"); amin || amax) {
          auto& args = amin ? *amin : *amax;
          if (args.size() != 2) throw Error("MalformedBinding", "assumptions take a variable and a value");
          Expr v = sym::simplify(target_expr(args[1], dialect));
          if (!sym::free_vars(v).empty()) throw Error("MalformedBinding", "assumption bound must be a constant");
          Number n = v.is_const() ? v.number() : Number::snap(sym::eval_numeric(v, std::map<std::string, double>{}));
          bp.assumes.push_back({strip_angles(args[0].text), n, static_cast<bool>(amin), loc_at(j)});
        } else {
          throw Error("MalformedBinding", "unrecognized directive '" + *c + "'");
        }
      } catch (const Error& e) {
        std::string code = e.code() == "MalformedBinding" ? e.code() : "MalformedBinding";
        diag(code, e.what(), j);
        bad = true;
      }
    }
    if (!closed) {
      if (j >= lines.size()) {
        diag("MalformedBinding", std::string("binding region has no closing ") + (region ? "#endregion" : "// GMac end"),
             i);
      }
      bad = true;
    }
    if (in_block) {
      diag("MalformedBinding", "generated block is not terminated", i);
      bad = true;
    }
    if (!bad) {
      if (!have_block) bp.block_begin = bp.block_end = bp.insert_at;
      if (bp.coefs.empty() && bp.classes.empty())
        diag("EmptyBinding", "binding point for '" + bp.macro + "' binds nothing; all inputs default to 0", i,
             "warning");
      res.points.push_back(std::move(bp));
    }
    i = closed ? j : i;
  }
  return res;
}

std::string splice(const std::string& text, const BindingPoint& bp, const std::string& body) {
  std::string block = bp.indent + kBlockBegin + bp.newline;
  std::size_t p = 0;
  while (p < body.size()) {
    std::size_t nl = body.find('\n', p);
    std::string line = body.substr(p, nl == std::string::npos ? std::string::npos : nl - p);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    block += (line.empty() ? "" : bp.indent) + line + bp.newline;
    if (nl == std::string::npos) break;
    p = nl + 1;
  }
  block += bp.indent + kBlockEnd + bp.newline;
  return text.substr(0, bp.block_begin) + block + text.substr(bp.block_end);
}

std::string splice_all(const std::string& text, const std::vector<PointResult>& points) {
  std::vector<const PointResult*> order;
  for (const auto& p : points)
    if (p.ok) order.push_back(&p);
  std::sort(order.begin(), order.end(),
            [](const PointResult* a, const PointResult* b) { return a->point.block_begin > b->point.block_begin; });
  std::string out = text;
  for (const auto* p : order) out = splice(out, p->point, p->body);
  return out;
}

}  // namespace gamacro::codegen
