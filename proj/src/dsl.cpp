#include "gamacro/dsl.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace gamacro::dsl {

const char* role_file(Role r) {
  switch (r) {
    case Role::frames: return "frames.gmac";
    case Role::transforms: return "transforms.gmac";
    case Role::subspaces: return "subspaces.gmac";
    case Role::multivectors: return "multivectors.gmac";
    case Role::constants: return "constants.gmac";
    case Role::bindings: return "bindings.gmac";
    case Role::macros: return "macros.gmac";
  }
  return "";
}

const std::vector<std::string>& unary_operators() {
  static const std::vector<std::string> ops = {"grade_inv", "cliff_conj",      "reverse",        "scale",
                                               "div_by_scalar", "norm",      "norm2",          "quasi_norm",
                                               "quasi_norm2",   "diff",      "cast_to_grades", "cast_to_subspace",
                                               "cast_to_class"};
  return ops;
}

const std::vector<std::string>& binary_operators() {
  static const std::vector<std::string> ops = {"gp", "op", "sp", "lcp", "rcp", "fdp", "hip", "cp", "acp", "+", "-"};
  return ops;
}

void Document::merge(Document o) {
  auto app = [](auto& a, auto& b) { a.insert(a.end(), std::make_move_iterator(b.begin()), std::make_move_iterator(b.end())); };
  app(frames, o.frames);
  app(transforms, o.transforms);
  app(subspaces, o.subspaces);
  app(classes, o.classes);
  app(constants, o.constants);
  app(bindings, o.bindings);
  app(macros, o.macros);
}

bool ParseResult::ok() const {
  return std::none_of(diagnostics.begin(), diagnostics.end(), [](const Diagnostic& d) { return d.severity == "error"; });
}

namespace {

bool one_arg_unary(const std::string& op) {
  return op == "grade_inv" || op == "cliff_conj" || op == "reverse" || op == "norm" || op == "norm2" ||
         op == "quasi_norm" || op == "quasi_norm2";
}

struct Tok {
  enum Kind { Ident, Num, Punct, End } kind = End;
  std::string text;
  std::size_t pos = 0;
  int line = 1, col = 1;
};

class Parser {
public:
  Parser(const std::string& text, std::string file, std::optional<Role> role)
      : s_(text), file_(std::move(file)), role_(role) {}

  ParseResult run() {
    ParseResult res;
    while (true) {
      skip_ws();
      if (i_ >= s_.size()) break;
      std::size_t start = i_;
      try {
        Tok t = next();
        if (!(t.kind == Tok::Ident && t.text == "define")) fail(t, "expected 'define'");
        definition(res.doc, t);
      } catch (const Error& e) {
        res.diagnostics.push_back(to_diagnostic(e));
        recover(start);
      }
    }
    return res;
  }

private:
  const std::string& s_;
  std::string file_;
  std::optional<Role> role_;
  std::size_t i_ = 0;
  int line_ = 1, col_ = 1;

  // ---- scanning

  void advance() {
    if (s_[i_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++i_;
  }

  void skip_ws() {
    while (i_ < s_.size()) {
      if (std::isspace(static_cast<unsigned char>(s_[i_]))) advance();
      else if (s_.compare(i_, 2, "//") == 0)
        while (i_ < s_.size() && s_[i_] != '\n') advance();
      else break;
    }
  }

  SourceLoc here() const {
    SourceLoc l;
    l.file = file_;
    l.line = l.end_line = line_;
    l.col = l.end_col = col_;
    return l;
  }

  SourceLoc loc_of(const Tok& t) const {
    SourceLoc l;
    l.file = file_;
    l.line = t.line;
    l.col = t.col;
    l.end_line = t.line;
    l.end_col = t.col + static_cast<int>(t.text.size());
    return l;
  }

  void close(SourceLoc& l) const {
    l.end_line = line_;
    l.end_col = col_;
  }

  [[noreturn]] void fail(const Tok& t, const std::string& msg, const std::string& code = "SyntaxError") const {
    std::string got = t.kind == Tok::End ? "end of file" : "'" + t.text + "'";
    throw Error(code, msg + " (found " + got + ")", loc_of(t));
  }

  Tok next() {
    skip_ws();
    Tok t;
    t.pos = i_;
    t.line = line_;
    t.col = col_;
    if (i_ >= s_.size()) return t;
    char c = s_[i_];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      t.kind = Tok::Ident;
      while (i_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[i_])) || s_[i_] == '_')) {
        t.text += s_[i_];
        advance();
      }
      return t;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      t.kind = Tok::Num;
      while (i_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[i_])) || s_[i_] == '.')) {
        t.text += s_[i_];
        advance();
      }
      return t;
    }
    t.kind = Tok::Punct;
    if (s_.compare(i_, 2, "->") == 0) {
      t.text = "->";
      advance();
      advance();
      return t;
    }
    t.text = std::string(1, c);
    advance();
    return t;
  }

  Tok peek() {
    std::size_t si = i_;
    int sl = line_, sc = col_;
    Tok t = next();
    i_ = si;
    line_ = sl;
    col_ = sc;
    return t;
  }

  Tok peek2() {
    std::size_t si = i_;
    int sl = line_, sc = col_;
    next();
    Tok t = next();
    i_ = si;
    line_ = sl;
    col_ = sc;
    return t;
  }

  bool is(const Tok& t, const char* text) const { return t.kind != Tok::End && t.text == text; }

  Tok expect(const char* text) {
    Tok t = next();
    if (!is(t, text)) fail(t, std::string("expected '") + text + "'");
    return t;
  }

  bool accept(const char* text) {
    if (is(peek(), text)) {
      next();
      return true;
    }
    return false;
  }

  std::string ident(const char* what) {
    Tok t = next();
    if (t.kind != Tok::Ident) fail(t, std::string("expected ") + what);
    return t.text;
  }

  // blade := '1' | IDENT ('^' IDENT)*
  std::string blade() {
    Tok t = next();
    if (t.kind == Tok::Num && t.text == "1") return "1";
    if (t.kind != Tok::Ident) fail(t, "expected a blade name");
    std::string b = t.text;
    while (is(peek(), "^")) {
      next();
      b += "^" + ident("basis vector name after '^'");
    }
    return b;
  }

  // Dotted reference: IDENT ('.' IDENT)?
  std::string qualified(const char* what) {
    std::string n = ident(what);
    if (is(peek(), ".")) {
      next();
      n += "." + ident(what);
    }
    return n;
  }

  // Raw scalar text up to a depth-0 terminator; parsed by the scalar grammar.
  sym::Expr scalar(const std::string& stops) {
    skip_ws();
    std::size_t start = i_;
    int sl = line_, sc = col_;
    int depth = 0;
    while (i_ < s_.size()) {
      char c = s_[i_];
      if (depth == 0 && stops.find(c) != std::string::npos) break;
      if (c == '<') {
        while (i_ < s_.size() && s_[i_] != '>' && s_[i_] != '\n') advance();
        if (i_ < s_.size() && s_[i_] == '>') advance();
        continue;
      }
      if (c == '(') ++depth;
      if (c == ')') --depth;
      // a bare 'end' keyword closes the enclosing definition
      if (depth == 0 && i_ > start && std::isspace(static_cast<unsigned char>(s_[i_ - 1])) &&
          s_.compare(i_, 3, "end") == 0 &&
          (i_ + 3 >= s_.size() || !(std::isalnum(static_cast<unsigned char>(s_[i_ + 3])) || s_[i_ + 3] == '_')))
        break;
      advance();
    }
    std::string text = s_.substr(start, i_ - start);
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.pop_back();
    SourceLoc l;
    l.file = file_;
    l.line = sl;
    l.col = sc;
    l.end_line = line_;
    l.end_col = col_;
    if (text.empty()) throw Error("SyntaxError", "expected a scalar expression", l);
    try {
      return sym::parse(text);
    } catch (const Error& e) {
      if (e.loc().col > 0 && e.loc().line == 1) l.col = sc + e.loc().col - 1;
      throw Error(e.code(), e.what(), l);
    }
  }

  template <class F>
  void braced_list(F&& item) {
    expect("{");
    if (accept("}")) return;
    while (true) {
      item();
      Tok t = next();
      if (is(t, "}")) return;
      if (!is(t, ";") && !is(t, ",")) fail(t, "expected ';' or '}'");
      if (accept("}")) return;
    }
  }

  BladeValues blade_values(const std::string& what) {
    BladeValues out;
    braced_list([&] {
      std::string b = what == "var" ? ident("variable name") : blade();
      expect(":");
      out.emplace_back(b, scalar(";}"));
    });
    return out;
  }

  Rows matrix() {
    Rows rows;
    expect("{");
    do {
      std::vector<sym::Expr> row;
      expect("{");
      do row.push_back(scalar(",;}"));
      while (accept(",") || accept(";"));
      expect("}");
      rows.push_back(std::move(row));
    } while (accept(","));
    expect("}");
    return rows;
  }

  void recover(std::size_t start) {
    if (i_ <= start) advance();
    // resume at the next 'define' that starts a line
    while (i_ < s_.size()) {
      skip_ws();
      if (i_ >= s_.size()) break;
      std::size_t ls = s_.rfind('\n', i_ == 0 ? 0 : i_ - 1);
      bool line_start = i_ == 0 || ls == std::string::npos
                            ? s_.find_first_not_of(" \t") == i_
                            : s_.find_first_not_of(" \t", ls + 1) == i_;
      if (line_start && s_.compare(i_, 6, "define") == 0 &&
          (i_ + 6 >= s_.size() || !std::isalnum(static_cast<unsigned char>(s_[i_ + 6])))) break;
      advance();
    }
  }

  void check_role(const Tok& kw, Role r) {
    if (role_ && *role_ != r)
      throw Error("SyntaxError", std::string("'") + kw.text + "' definitions belong in " + role_file(r), loc_of(kw));
  }

  void end(const char* a, const char* b = nullptr) {
    expect("end");
    expect(a);
    if (b) expect(b);
  }

  // ---- definitions

  void definition(Document& doc, const Tok& def) {
    Tok kw = next();
    SourceLoc loc = loc_of(def);
    if (is(kw, "frame")) {
      check_role(kw, Role::frames);
      doc.frames.push_back(frame(loc));
    } else if (is(kw, "transform")) {
      check_role(kw, Role::transforms);
      doc.transforms.push_back(transform(loc));
    } else if (is(kw, "subspace")) {
      check_role(kw, Role::subspaces);
      doc.subspaces.push_back(subspace(loc));
    } else if (is(kw, "multivector")) {
      check_role(kw, Role::multivectors);
      expect("class");
      doc.classes.push_back(mv_class(loc));
    } else if (is(kw, "constant")) {
      check_role(kw, Role::constants);
      doc.constants.push_back(constant(loc));
    } else if (is(kw, "binding")) {
      check_role(kw, Role::bindings);
      doc.bindings.push_back(binding(loc));
    } else if (is(kw, "macro")) {
      check_role(kw, Role::macros);
      doc.macros.push_back(macro(loc));
    } else {
      fail(kw, "unknown definition kind", "UnknownDefinitionForm");
    }
  }

  FrameDef frame(SourceLoc loc) {
    FrameDef f;
    f.name = ident("frame name");
    expect("as");
    expect("basis");
    expect(":");
    braced_list([&] { f.basis.push_back(ident("basis vector name")); });
    Tok t = next();
    if (is(t, "Euclidean")) {
      f.form = FrameDef::Form::Euclidean;
    } else if (is(t, "subspace")) {
      expect("of");
      f.form = FrameDef::Form::SubspaceOf;
      f.source = ident("frame name");
    } else if (is(t, "orthogonalize")) {
      f.form = FrameDef::Form::Orthogonalize;
      f.source = ident("frame name");
    } else if (is(t, "IPM")) {
      expect("=");
      f.form = FrameDef::Form::Ipm;
      f.matrix = matrix();
    } else if (is(t, "transform")) {
      f.form = FrameDef::Form::TransformBcm;
      f.source = ident("frame name");
      expect("by");
      expect("BCM");
      expect("=");
      f.matrix = matrix();
    } else {
      fail(t, "unknown frame definition form", "UnknownDefinitionForm");
    }
    end("frame");
    close(loc);
    f.loc = loc;
    return f;
  }

  TransformDef transform(SourceLoc loc) {
    TransformDef d;
    d.name = ident("transform name");
    expect(":");
    d.from = ident("frame name");
    expect("->");
    d.to = ident("frame name");
    expect("as");
    Tok t = next();
    if (is(t, "identity")) {
      d.form = TransformDef::Form::Identity;
    } else if (is(t, "alias")) {
      expect("of");
      d.form = TransformDef::Form::AliasOf;
      d.ref = ident("transform name");
    } else if (is(t, "inverse")) {
      if (accept("transpose")) d.form = TransformDef::Form::InverseTransposeOf;
      else d.form = TransformDef::Form::InverseOf;
      expect("of");
      d.ref = ident("transform name");
    } else if (is(t, "transpose")) {
      expect("of");
      d.form = TransformDef::Form::TransposeOf;
      d.ref = ident("transform name");
    } else if (is(t, "outermorphism")) {
      expect("using");
      if (is(peek(), "{")) {
        d.form = TransformDef::Form::UsingMatrix;
        d.matrix = matrix();
      } else {
        d.form = TransformDef::Form::UsingBcm;
        d.ref = ident("frame name");
        expect(".");
        expect("BCM");
      }
    } else {
      fail(t, "unknown transform definition form", "UnknownDefinitionForm");
    }
    end("transform");
    close(loc);
    d.loc = loc;
    return d;
  }

  SubspaceDef subspace(SourceLoc loc) {
    SubspaceDef d;
    d.frame = ident("frame name");
    expect(".");
    d.name = ident("subspace name");
    expect("as");
    Tok t = next();
    if (is(t, "basis")) d.span = false;
    else if (is(t, "ga_span")) d.span = true;
    else fail(t, "expected 'basis' or 'ga_span'", "UnknownDefinitionForm");
    accept(":");
    braced_list([&] { d.items.push_back(blade()); });
    end("subspace");
    close(loc);
    d.loc = loc;
    return d;
  }

  ClassDef mv_class(SourceLoc loc) {
    ClassDef d;
    d.frame = ident("frame name");
    expect(".");
    d.name = ident("class name");
    expect("as");
    do {
      if (is(peek(), "end")) break;
      Tok t = peek();
      if (t.kind == Tok::Ident && !is(peek2(), "^") && !is(peek2(), ":")) {
        d.subspaces.push_back(ident("subspace name"));
      } else {
        std::string b = blade();
        expect(":");
        d.constants.emplace_back(b, scalar(";\n"));
      }
    } while (accept(";"));
    if (d.subspaces.empty() && d.constants.empty())
      fail(peek(), "class needs at least one subspace", "UnknownDefinitionForm");
    end("multivector", "class");
    close(loc);
    d.loc = loc;
    return d;
  }

  ConstantDef constant(SourceLoc loc) {
    ConstantDef d;
    d.frame = ident("frame name");
    expect(".");
    d.name = ident("constant name");
    expect("as");
    Tok t = next();
    if (!is(t, "multivector")) fail(t, "expected 'multivector'", "UnknownDefinitionForm");
    d.coefs = blade_values("blade");
    end("constant");
    close(loc);
    d.loc = loc;
    return d;
  }

  BindingDef binding(SourceLoc loc) {
    BindingDef d;
    d.name = ident("binding name");
    expect("as");
    expect("use");
    expect("frame");
    d.frame = ident("frame name");
    expect("bind");
    d.binds = blade_values("blade");
    if (accept("min")) d.mins = blade_values("var");
    if (accept("max")) d.maxs = blade_values("var");
    end("binding");
    close(loc);
    d.loc = loc;
    return d;
  }

  std::vector<Param> params() {
    std::vector<Param> out;
    braced_list([&] {
      Tok t = peek();
      Param p;
      p.loc = loc_of(t);
      p.name = ident("parameter name");
      Tok sep = next();
      if (!is(sep, "as") && !is(sep, ":")) fail(sep, "expected 'as' or ':'");
      p.frame = ident("frame name");
      expect(".");
      p.cls = ident("class name");
      close(p.loc);
      out.push_back(std::move(p));
    });
    return out;
  }

  MacroDef macro(SourceLoc loc) {
    MacroDef m;
    m.name = ident("macro name");
    expect("as");
    expect("inputs");
    expect(":");
    m.inputs = params();
    expect("outputs");
    expect(":");
    m.outputs = params();
    expect("performs");
    expect(":");
    while (!is(peek(), "end")) {
      if (peek().kind == Tok::End) fail(peek(), "expected 'end macro'");
      m.body.push_back(statement());
      while (accept(";")) {
      }
    }
    end("macro");
    close(loc);
    m.loc = loc;
    return m;
  }

  std::string payload(const Tok& open) {
    // raw text between balanced braces; comment markers are payload
    std::size_t start = i_;
    int depth = 1;
    while (i_ < s_.size()) {
      char c = s_[i_];
      if (c == '{') ++depth;
      if (c == '}' && --depth == 0) break;
      advance();
    }
    if (depth != 0) throw Error("MalformedOutputBlock", "unbalanced braces in output block", loc_of(open));
    std::string text = s_.substr(start, i_ - start);
    advance();
    // every <...> placeholder must name mv.blade
    for (std::size_t p = text.find('<'); p != std::string::npos; p = text.find('<', p + 1)) {
      std::size_t q = text.find('>', p);
      if (q == std::string::npos)
        throw Error("MalformedOutputBlock", "unterminated '<' placeholder in output block", loc_of(open));
      std::string ref = text.substr(p + 1, q - p - 1);
      std::size_t dot = ref.find('.');
      if (dot == std::string::npos || dot == 0 || dot + 1 == ref.size())
        throw Error("MalformedOutputBlock", "placeholder <" + ref + "> must have the form <multivector.blade>",
                    loc_of(open));
    }
    return text;
  }

  std::string operand() { return qualified("multivector name"); }

  Stmt statement() {
    Tok first = next();
    Stmt st;
    st.loc = loc_of(first);
    if (is(first, "join")) {
      Tok t = next();
      if (is(t, "on")) st.kind = Stmt::Kind::JoinOn;
      else if (is(t, "off")) st.kind = Stmt::Kind::JoinOff;
      else fail(t, "expected 'on' or 'off'");
    } else if (is(first, "call")) {
      st.kind = Stmt::Kind::Call;
      st.target = ident("macro name");
      braced_list([&] {
        std::string callee = ident("callee parameter");
        expect(":");
        st.call_map.emplace_back(callee, ident("caller multivector"));
      });
    } else if (is(first, "output")) {
      st.kind = Stmt::Kind::Output;
      Tok open = expect("{");
      st.payload = payload(open);
    } else if (first.kind == Tok::Ident) {
      st.dst = first.text;
      expect("=");
      rhs(st);
    } else {
      fail(first, "expected a statement");
    }
    close(st.loc);
    return st;
  }

  void rhs(Stmt& st) {
    Tok t = peek();
    if (is(t, "-")) {
      next();
      st.kind = Stmt::Kind::Negate;
      st.operands.push_back(operand());
      return;
    }
    if (t.kind != Tok::Ident) fail(t, "expected an operand");
    Tok t2 = peek2();
    if (is(t2, "(")) {
      std::string op = ident("operator");
      if (std::find(unary_operators().begin(), unary_operators().end(), op) == unary_operators().end())
        fail(t, "unknown operator '" + op + "'", "UnknownOperator");
      next();
      st.kind = Stmt::Kind::Unary;
      st.op = op;
      st.operands.push_back(operand());
      if (!one_arg_unary(op)) {
        expect(",");
        if (op == "scale" || op == "div_by_scalar" || op == "diff") {
          st.scalar = scalar(")");
          if (op == "diff" && !st.scalar->is_var())
            throw Error("SyntaxError", "diff needs a coefficient name such as t.1", st.loc);
        } else if (op == "cast_to_grades") {
          auto grade_tok = [&] {
            Tok g = next();
            if (g.kind != Tok::Num || g.text.find_first_not_of("0123456789") != std::string::npos)
              fail(g, "expected a grade");
            st.grades.push_back(std::stoi(g.text));
          };
          if (is(peek(), "{")) braced_list(grade_tok);
          else grade_tok();
        } else {
          st.target = qualified("name");
        }
      }
      expect(")");
      return;
    }
    if (is(t2, "[")) {
      st.kind = Stmt::Kind::Transform;
      st.target = ident("transform name");
      expect("[");
      st.operands.push_back(operand());
      expect("]");
      return;
    }
    std::string a = ident("operand");
    if (is(peek(), ".")) {
      next();
      std::string b = ident("name");
      if (b == "multivector" && is(peek(), "{")) {
        st.kind = Stmt::Kind::Construct;
        st.frame = a;
        st.coefs = blade_values("blade");
        return;
      }
      a += "." + b;
    }
    st.operands.push_back(a);
    Tok op = peek();
    bool ends = op.kind == Tok::End || is(op, ";") || is(op, "end") ||
                (op.kind == Tok::Ident && (is(peek2(), "=") || op.text == "join" || op.text == "call" || op.text == "output"));
    if (ends) {
      st.kind = Stmt::Kind::Copy;
      return;
    }
    next();
    if (std::find(binary_operators().begin(), binary_operators().end(), op.text) == binary_operators().end())
      fail(op, "unknown operator '" + op.text + "'", "UnknownOperator");
    st.kind = Stmt::Kind::Binary;
    st.op = op.text;
    st.operands.push_back(operand());
  }
};

void check_duplicates(ParseResult& r) {
  auto scan = [&](const auto& defs, const char* what, auto key) {
    std::map<std::string, SourceLoc> seen;
    for (const auto& d : defs) {
      auto [it, fresh] = seen.emplace(key(d), d.loc);
      if (!fresh)
        r.diagnostics.push_back({"error", "DuplicateName",
                                 std::string(what) + " '" + key(d) + "' is already defined at line " +
                                     std::to_string(it->second.line),
                                 d.loc});
    }
  };
  auto plain = [](const auto& d) { return d.name; };
  auto scoped = [](const auto& d) { return d.frame + "." + d.name; };
  scan(r.doc.frames, "frame", plain);
  scan(r.doc.transforms, "transform", plain);
  scan(r.doc.subspaces, "subspace", scoped);
  scan(r.doc.classes, "multivector class", scoped);
  scan(r.doc.constants, "constant", scoped);
  scan(r.doc.bindings, "binding", plain);
  scan(r.doc.macros, "macro", plain);
  for (const auto& m : r.doc.macros) {
    std::set<std::string> params;
    for (const auto* list : {&m.inputs, &m.outputs})
      for (const auto& p : *list)
        if (!params.insert(p.name).second)
          r.diagnostics.push_back(
              {"error", "DuplicateName", "parameter '" + p.name + "' repeated in macro '" + m.name + "'", p.loc});
  }
}

}  // namespace

ParseResult parse(const std::string& text, const std::string& file, std::optional<Role> role) {
  ParseResult r = Parser(text, file, role).run();
  check_duplicates(r);
  return r;
}

ParseResult parse_directory(const std::string& dir) {
  ParseResult all;
  for (Role r : kRoles) {
    std::filesystem::path p = std::filesystem::path(dir) / role_file(r);
    if (!std::filesystem::exists(p)) continue;
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    ParseResult one = Parser(ss.str(), p.string(), r).run();
    all.doc.merge(std::move(one.doc));
    all.diagnostics.insert(all.diagnostics.end(), one.diagnostics.begin(), one.diagnostics.end());
  }
  check_duplicates(all);
  return all;
}

// ---------------------------------------------------------------- printing

namespace {

std::string ex(const sym::Expr& e) { return sym::to_string(e); }

std::string rows(const Rows& m) {
  std::string s = "{";
  for (std::size_t i = 0; i < m.size(); ++i) {
    s += i ? ", {" : "{";
    for (std::size_t j = 0; j < m[i].size(); ++j) s += (j ? ", " : "") + ex(m[i][j]);
    s += "}";
  }
  return s + "}";
}

std::string values(const BladeValues& v) {
  std::string s = "{";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "; " : "") + v[i].first + " : " + ex(v[i].second);
  return s + "}";
}

std::string params(const std::vector<Param>& ps) {
  std::string s = "{";
  for (std::size_t i = 0; i < ps.size(); ++i) s += (i ? "; " : "") + ps[i].name + " as " + ps[i].frame + "." + ps[i].cls;
  return s + "}";
}

void print_stmt(std::ostream& o, const Stmt& st) {
  o << "    ";
  switch (st.kind) {
    case Stmt::Kind::JoinOn: o << "join on"; break;
    case Stmt::Kind::JoinOff: o << "join off"; break;
    case Stmt::Kind::Call: {
      o << "call " << st.target << " {";
      for (std::size_t i = 0; i < st.call_map.size(); ++i)
        o << (i ? "; " : "") << st.call_map[i].first << " : " << st.call_map[i].second;
      o << "}";
      break;
    }
    case Stmt::Kind::Output: o << "output {" << st.payload << "}"; break;
    case Stmt::Kind::Construct: o << st.dst << " = " << st.frame << ".multivector " << values(st.coefs); break;
    case Stmt::Kind::Binary: o << st.dst << " = " << st.operands[0] << " " << st.op << " " << st.operands[1]; break;
    case Stmt::Kind::Transform: o << st.dst << " = " << st.target << "[" << st.operands[0] << "]"; break;
    case Stmt::Kind::Copy: o << st.dst << " = " << st.operands[0]; break;
    case Stmt::Kind::Negate: o << st.dst << " = -" << st.operands[0]; break;
    case Stmt::Kind::Unary: {
      o << st.dst << " = " << st.op << "(" << st.operands[0];
      if (st.scalar) o << ", " << ex(*st.scalar);
      else if (st.op == "cast_to_grades") {
        o << ", {";
        for (std::size_t i = 0; i < st.grades.size(); ++i) o << (i ? "; " : "") << st.grades[i];
        o << "}";
      } else if (!st.target.empty()) o << ", " << st.target;
      o << ")";
      break;
    }
  }
  o << ";\n";
}

void print_role(std::ostream& o, const Document& d, Role r) {
  switch (r) {
    case Role::frames:
      for (const auto& f : d.frames) {
        o << "define frame " << f.name << " as\n  basis: {";
        for (std::size_t i = 0; i < f.basis.size(); ++i) o << (i ? "; " : "") << f.basis[i];
        o << "}\n  ";
        switch (f.form) {
          case FrameDef::Form::Euclidean: o << "Euclidean"; break;
          case FrameDef::Form::SubspaceOf: o << "subspace of " << f.source; break;
          case FrameDef::Form::Orthogonalize: o << "orthogonalize " << f.source; break;
          case FrameDef::Form::Ipm: o << "IPM = " << rows(f.matrix); break;
          case FrameDef::Form::TransformBcm: o << "transform " << f.source << " by BCM = " << rows(f.matrix); break;
        }
        o << "\nend frame\n\n";
      }
      break;
    case Role::transforms:
      for (const auto& t : d.transforms) {
        o << "define transform " << t.name << " : " << t.from << " -> " << t.to << " as\n  ";
        switch (t.form) {
          case TransformDef::Form::Identity: o << "identity"; break;
          case TransformDef::Form::AliasOf: o << "alias of " << t.ref; break;
          case TransformDef::Form::InverseOf: o << "inverse of " << t.ref; break;
          case TransformDef::Form::TransposeOf: o << "transpose of " << t.ref; break;
          case TransformDef::Form::InverseTransposeOf: o << "inverse transpose of " << t.ref; break;
          case TransformDef::Form::UsingBcm: o << "outermorphism using " << t.ref << ".BCM"; break;
          case TransformDef::Form::UsingMatrix: o << "outermorphism using " << rows(t.matrix); break;
        }
        o << "\nend transform\n\n";
      }
      break;
    case Role::subspaces:
      for (const auto& s : d.subspaces) {
        o << "define subspace " << s.frame << "." << s.name << " as\n  " << (s.span ? "ga_span" : "basis") << " {";
        for (std::size_t i = 0; i < s.items.size(); ++i) o << (i ? "; " : "") << s.items[i];
        o << "}\nend subspace\n\n";
      }
      break;
    case Role::multivectors:
      for (const auto& c : d.classes) {
        o << "define multivector class " << c.frame << "." << c.name << " as\n  ";
        bool first = true;
        for (const auto& s : c.subspaces) {
          o << (first ? "" : "; ") << s;
          first = false;
        }
        for (const auto& [b, e] : c.constants) {
          o << (first ? "" : "; ") << b << " : " << ex(e);
          first = false;
        }
        o << "\nend multivector class\n\n";
      }
      break;
    case Role::constants:
      for (const auto& c : d.constants)
        o << "define constant " << c.frame << "." << c.name << " as\n  multivector " << values(c.coefs)
          << "\nend constant\n\n";
      break;
    case Role::bindings:
      for (const auto& b : d.bindings) {
        o << "define binding " << b.name << " as\n  use frame " << b.frame << "\n  bind " << values(b.binds) << "\n";
        if (!b.mins.empty()) o << "  min " << values(b.mins) << "\n";
        if (!b.maxs.empty()) o << "  max " << values(b.maxs) << "\n";
        o << "end binding\n\n";
      }
      break;
    case Role::macros:
      for (const auto& m : d.macros) {
        o << "define macro " << m.name << " as\n  inputs: " << params(m.inputs) << "\n  outputs: " << params(m.outputs)
          << "\n  performs:\n";
        for (const auto& st : m.body) print_stmt(o, st);
        o << "end macro\n\n";
      }
      break;
  }
}

}  // namespace

std::string print(const Document& doc, Role role) {
  std::ostringstream o;
  print_role(o, doc, role);
  return o.str();
}

std::string print(const Document& doc) {
  std::ostringstream o;
  for (Role r : kRoles) print_role(o, doc, r);
  return o.str();
}

}  // namespace gamacro::dsl
