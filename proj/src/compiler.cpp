#include "gamacro/compiler.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

namespace gamacro {

std::string coef_var(int reg, BladeId blade) { return "%" + std::to_string(reg) + "." + std::to_string(blade); }

std::optional<std::pair<int, BladeId>> parse_coef_var(const std::string& name) {
  if (name.size() < 4 || name[0] != '%') return std::nullopt;
  auto dot = name.find('.');
  if (dot == std::string::npos) return std::nullopt;
  try {
    return std::pair<int, BladeId>{std::stoi(name.substr(1, dot - 1)),
                                   static_cast<BladeId>(std::stoull(name.substr(dot + 1)))};
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

const char* op_name(IrOp::Kind k) {
  using K = IrOp::Kind;
  switch (k) {
    case K::Construct: return "multivector";
    case K::Product: return "product";
    case K::Add: return "+";
    case K::Sub: return "-";
    case K::Transform: return "transform";
    case K::Reverse: return "reverse";
    case K::GradeInv: return "grade_inv";
    case K::CliffConj: return "cliff_conj";
    case K::Scale: return "scale";
    case K::DivByScalar: return "div_by_scalar";
    case K::Norm: return "norm";
    case K::Norm2: return "norm2";
    case K::QuasiNorm: return "quasi_norm";
    case K::QuasiNorm2: return "quasi_norm2";
    case K::Diff: return "diff";
    case K::CastGrades: return "cast_to_grades";
    case K::CastBlades: return "cast_to_subspace";
    case K::CastClass: return "cast_to_class";
    case K::Copy: return "copy";
    case K::Negate: return "negate";
    case K::Output: return "output";
    case K::JoinOn: return "join on";
    case K::JoinOff: return "join off";
  }
  return "?";
}

std::string to_string(const MacroIR& m) {
  std::ostringstream o;
  auto rn = [&](int r) { return m.regs[r].name; };
  sym::PrintOptions po;
  po.rename = [&](const std::string& v) {
    auto c = parse_coef_var(v);
    if (!c) return v;
    return "<" + rn(c->first) + "." + m.regs[c->first].frame->blade_name(c->second) + ">";
  };
  o << "macro " << m.name << "\n";
  for (const auto& p : m.inputs) o << "  in " << rn(p.reg) << " : " << p.cls->name << "\n";
  for (const auto& op : m.ops) {
    o << "  ";
    if (op.dst >= 0) o << rn(op.dst) << " = ";
    if (op.kind == IrOp::Kind::Product) o << product_name(op.product);
    else o << op_name(op.kind);
    for (int s : op.src) o << " " << rn(s);
    if (op.kind == IrOp::Kind::Construct)
      for (const auto& [b, e] : op.coefs) o << " " << m.regs[op.dst].frame->blade_name(b) << ":" << sym::to_string(e, po);
    if (op.kind == IrOp::Kind::Scale || op.kind == IrOp::Kind::DivByScalar || op.kind == IrOp::Kind::Diff)
      o << " " << sym::to_string(op.scalar, po);
    o << "\n";
  }
  for (const auto& p : m.outputs) o << "  out " << p.name << " <- " << rn(p.reg) << "\n";
  return o.str();
}

FramePtr CompiledProject::frame(const std::string& name) const {
  auto it = frames.find(name);
  if (it == frames.end()) throw Error("UnknownFrame", "unknown frame '" + name + "'");
  return it->second;
}

const MacroIR& CompiledProject::macro(const std::string& name) const {
  auto it = macros.find(name);
  if (it == macros.end()) throw Error("UnknownMacroName", "unknown macro '" + name + "'");
  return *it->second;
}

bool CompileResult::ok() const {
  return project && std::none_of(diagnostics.begin(), diagnostics.end(),
                                 [](const Diagnostic& d) { return d.severity == "error"; });
}

namespace {

Number const_number(const Expr& e, const SourceLoc& loc) {
  Expr s = sym::simplify(e);
  if (s.is_const()) return s.number();
  if (!sym::free_vars(s).empty())
    throw Error("NonConstantExpression", "expected a constant, found '" + sym::to_string(s) + "'", loc);
  return Number::snap(sym::eval_numeric(s, std::map<std::string, double>{}));
}

Matrix const_matrix(const dsl::Rows& rows, const SourceLoc& loc) {
  Matrix m;
  for (const auto& r : rows) {
    m.emplace_back();
    for (const auto& e : r) m.back().push_back(const_number(e, loc));
  }
  for (const auto& r : m)
    if (r.size() != m.size()) throw Error("DimensionMismatch", "matrix must be square", loc);
  return m;
}

Expr const_expr(const Expr& e, const SourceLoc& loc) {
  Expr s = sym::simplify(e);
  if (!sym::free_vars(s).empty())
    throw Error("NonConstantExpression", "expected a constant, found '" + sym::to_string(s) + "'", loc);
  return s;
}

std::pair<std::string, std::string> split_dot(const std::string& s) {
  auto d = s.find('.');
  if (d == std::string::npos) return {"", s};
  return {s.substr(0, d), s.substr(d + 1)};
}

class Compiler {
public:
  explicit Compiler(const dsl::Document& doc) : doc_(doc), p_(std::make_shared<CompiledProject>()) {}

  CompileResult run() {
    for (const auto& f : doc_.frames) guard(f.loc, [&] { frame(f); });
    for (const auto& t : doc_.transforms) guard(t.loc, [&] { transform(t); });
    for (const auto& s : doc_.subspaces) guard(s.loc, [&] { subspace(s); });
    // every frame has an implicit class covering all blades
    for (const auto& [name, f] : p_->frames) {
      auto c = std::make_shared<MultivectorClass>();
      c->name = name + ".Multivector";
      c->frame = f;
      for (BladeId b = 0; b < f->blade_count(); ++b) c->blades.insert(b);
      p_->classes[c->name] = c;
    }
    for (const auto& c : doc_.classes) guard(c.loc, [&] { mv_class(c); });
    for (const auto& c : doc_.constants) guard(c.loc, [&] { constant(c); });
    for (const auto& b : doc_.bindings) guard(b.loc, [&] { binding(b); });
    for (const auto& m : doc_.macros) {
      macro_defs_[m.name] = &m;
    }
    for (const auto& m : doc_.macros) guard(m.loc, [&] { build_macro(m.name, m.loc); });
    CompileResult r;
    r.project = p_;
    r.diagnostics = std::move(diags_);
    return r;
  }

private:
  const dsl::Document& doc_;
  std::shared_ptr<CompiledProject> p_;
  std::vector<Diagnostic> diags_;
  std::map<std::string, const dsl::MacroDef*> macro_defs_;
  std::set<std::string> failed_macros_;
  std::vector<std::string> stack_;

  template <class F>
  void guard(const SourceLoc& loc, F&& f) {
    try {
      f();
    } catch (const Error& e) {
      Diagnostic d = to_diagnostic(e);
      if (d.span.line == 0) d.span = loc;
      diags_.push_back(d);
    }
  }

  FramePtr frame_ref(const std::string& name, const SourceLoc& loc) {
    auto it = p_->frames.find(name);
    if (it == p_->frames.end()) throw Error("UnknownFrame", "unknown frame '" + name + "'", loc);
    return it->second;
  }

  // ---- frames

  void frame(const dsl::FrameDef& f) {
    using F = dsl::FrameDef::Form;
    FramePtr built;
    int n = static_cast<int>(f.basis.size());
    try {
      switch (f.form) {
        case F::Euclidean: built = Frame::euclidean(f.name, f.basis); break;
        case F::Ipm: {
          Matrix m = const_matrix(f.matrix, f.loc);
          if (static_cast<int>(m.size()) != n)
            throw Error("DimensionMismatch", "IPM size does not match the basis count", f.loc);
          built = Frame::from_ipm(f.name, f.basis, m);
          break;
        }
        case F::SubspaceOf: {
          FramePtr src = frame_ref(f.source, f.loc);
          std::vector<int> idx;
          for (const auto& b : f.basis) {
            auto i = src->basis_index(b);
            if (!i) throw Error("UnknownBlade", "'" + b + "' is not a basis vector of frame '" + f.source + "'", f.loc);
            idx.push_back(*i);
          }
          Matrix m(n, std::vector<Number>(n));
          for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) m[i][j] = src->ipm()[idx[i]][idx[j]];
          built = Frame::from_ipm(f.name, f.basis, m);
          break;
        }
        case F::Orthogonalize: {
          FramePtr src = frame_ref(f.source, f.loc);
          if (src->dim() != n)
            throw Error("DimensionMismatch", "orthogonalized frame needs " + std::to_string(src->dim()) + " basis vectors",
                        f.loc);
          Matrix m(n, std::vector<Number>(n, Number(0)));
          for (int i = 0; i < n; ++i) m[i][i] = Number(src->signature()[i]);
          built = Frame::from_ipm(f.name, f.basis, m);
          break;
        }
        case F::TransformBcm: {
          FramePtr src = frame_ref(f.source, f.loc);
          Matrix b = const_matrix(f.matrix, f.loc);
          if (src->dim() != n || static_cast<int>(b.size()) != n)
            throw Error("DimensionMismatch", "BCM size does not match the basis count", f.loc);
          // columns of the BCM are the new basis vectors on the source basis
          Matrix g = matrix_multiply(matrix_multiply(matrix_transpose(b), src->ipm()), b);
          built = Frame::from_ipm(f.name, f.basis, g);
          p_->declared_bcm[f.name] = b;
          break;
        }
      }
    } catch (Error& e) {
      e.set_loc_if_missing(f.loc);
      throw;
    }
    if (p_->frames.count(f.name)) throw Error("DuplicateName", "frame '" + f.name + "' is already defined", f.loc);
    p_->frames[f.name] = built;
  }

  // ---- transforms

  std::shared_ptr<const Outermorphism> transform_ref(const std::string& name, const SourceLoc& loc) {
    auto it = p_->transforms.find(name);
    if (it == p_->transforms.end()) throw Error("UnknownTransform", "unknown transform '" + name + "'", loc);
    return it->second;
  }

  void transform(const dsl::TransformDef& t) {
    using F = dsl::TransformDef::Form;
    FramePtr src = frame_ref(t.from, t.loc), dst = frame_ref(t.to, t.loc);
    if (src->dim() != dst->dim())
      throw Error("TransformDomainMismatch", "transform '" + t.name + "' joins frames of different dimension", t.loc);
    Matrix m;
    try {
      switch (t.form) {
        case F::Identity: m = matrix_identity(src->dim()); break;
        case F::AliasOf: m = transform_ref(t.ref, t.loc)->matrix(); break;
        case F::InverseOf: m = matrix_inverse(transform_ref(t.ref, t.loc)->matrix()); break;
        case F::TransposeOf: m = matrix_transpose(transform_ref(t.ref, t.loc)->matrix()); break;
        case F::InverseTransposeOf: m = matrix_transpose(matrix_inverse(transform_ref(t.ref, t.loc)->matrix())); break;
        case F::UsingMatrix: m = const_matrix(t.matrix, t.loc); break;
        case F::UsingBcm: {
          FramePtr f = frame_ref(t.ref, t.loc);
          auto it = p_->declared_bcm.find(t.ref);
          if (it != p_->declared_bcm.end()) {
            m = it->second;
          } else {
            for (const auto& row : f->bcm()) {
              m.emplace_back();
              for (double v : row) m.back().push_back(Number::snap(v));
            }
          }
          break;
        }
      }
      if (t.form == F::AliasOf && transform_ref(t.ref, t.loc)->source() == src &&
          transform_ref(t.ref, t.loc)->destination() == dst) {
        p_->transforms[t.name] = transform_ref(t.ref, t.loc);
        return;
      }
      p_->transforms[t.name] = std::make_shared<Outermorphism>(src, dst, m);
    } catch (Error& e) {
      e.set_loc_if_missing(t.loc);
      throw;
    }
  }

  // ---- subspaces, classes, constants, bindings

  BladeId blade_ref(const FramePtr& f, const std::string& name, const SourceLoc& loc) {
    try {
      return f->parse_blade(name);
    } catch (Error& e) {
      e.set_loc_if_missing(loc);
      throw;
    }
  }

  void subspace(const dsl::SubspaceDef& s) {
    FramePtr f = frame_ref(s.frame, s.loc);
    std::set<BladeId> blades;
    if (s.span) {
      BladeId mask = 0;
      for (const auto& v : s.items) {
        BladeId b = blade_ref(f, v, s.loc);
        if (grade(b) != 1) throw Error("SyntaxError", "ga_span takes basis vectors, found '" + v + "'", s.loc);
        mask |= b;
      }
      // every subset of the spanning vectors
      for (BladeId sub = mask;; sub = (sub - 1) & mask) {
        blades.insert(sub);
        if (sub == 0) break;
      }
    } else {
      for (const auto& b : s.items) blades.insert(blade_ref(f, b, s.loc));
    }
    p_->subspaces[s.frame + "." + s.name] = std::move(blades);
  }

  const std::set<BladeId>& subspace_ref(const std::string& frame, const std::string& name, const SourceLoc& loc) {
    auto it = p_->subspaces.find(frame + "." + name);
    if (it == p_->subspaces.end())
      throw Error("UnknownSubspace", "unknown subspace '" + name + "' in frame '" + frame + "'", loc);
    return it->second;
  }

  void mv_class(const dsl::ClassDef& c) {
    auto cls = std::make_shared<MultivectorClass>();
    cls->name = c.frame + "." + c.name;
    cls->frame = frame_ref(c.frame, c.loc);
    for (const auto& s : c.subspaces) {
      const auto& bl = subspace_ref(c.frame, s, c.loc);
      cls->blades.insert(bl.begin(), bl.end());
    }
    for (const auto& [b, e] : c.constants) {
      BladeId id = blade_ref(cls->frame, b, c.loc);
      cls->blades.insert(id);
      cls->constants[id] = const_expr(e, c.loc);
    }
    p_->classes[cls->name] = cls;
  }

  void constant(const dsl::ConstantDef& c) {
    FramePtr f = frame_ref(c.frame, c.loc);
    SymMultivector mv(f);
    for (const auto& [b, e] : c.coefs) {
      BladeId id = blade_ref(f, b, c.loc);
      mv.set(id, sym::simplify(mv.coef(id) + const_expr(e, c.loc)));
    }
    p_->constants.insert_or_assign(c.frame + "." + c.name, mv);
  }

  void binding(const dsl::BindingDef& b) {
    CompiledBinding cb;
    cb.name = b.name;
    cb.frame = frame_ref(b.frame, b.loc);
    cb.loc = b.loc;
    for (const auto& [blade, e] : b.binds) cb.binds[blade_ref(cb.frame, blade, b.loc)] = e;
    for (const auto& [v, e] : b.mins) cb.mins.emplace_back(v, const_number(e, b.loc));
    for (const auto& [v, e] : b.maxs) cb.maxs.emplace_back(v, const_number(e, b.loc));
    p_->bindings[b.name] = std::move(cb);
  }

  std::shared_ptr<const MultivectorClass> class_ref(const std::string& qualified, const SourceLoc& loc) {
    auto it = p_->classes.find(qualified);
    if (it == p_->classes.end()) throw Error("UnknownClass", "unknown multivector class '" + qualified + "'", loc);
    return it->second;
  }

  // ---- macros

  struct Builder {
    MacroIR ir;
    std::map<std::string, int> current;  // source name -> register holding its latest value
    std::map<std::string, int> versions;
    std::map<std::string, int> constant_regs;
    bool join = false;

    int new_reg(const std::string& name, FramePtr f, Register::Role role = Register::Role::Temp) {
      int v = ++versions[name];
      Register r;
      r.name = v == 1 ? name : name + "~" + std::to_string(v);
      r.frame = std::move(f);
      r.role = role;
      ir.regs.push_back(std::move(r));
      return static_cast<int>(ir.regs.size()) - 1;
    }
  };

  const MacroIR& build_macro(const std::string& name, const SourceLoc& use) {
    auto done = p_->macros.find(name);
    if (done != p_->macros.end()) return *done->second;
    auto def = macro_defs_.find(name);
    if (def == macro_defs_.end()) throw Error("UnknownMacroName", "unknown macro '" + name + "'", use);
    if (std::find(stack_.begin(), stack_.end(), name) != stack_.end()) {
      std::string chain;
      for (const auto& s : stack_) chain += s + " -> ";
      throw Error("CyclicMacroCall", "cyclic macro call " + chain + name, use);
    }
    if (failed_macros_.count(name))
      throw Error("UnknownMacroName", "macro '" + name + "' failed to compile", use);
    stack_.push_back(name);
    try {
      auto ir = std::make_shared<MacroIR>(compile_macro(*def->second));
      stack_.pop_back();
      p_->macros[name] = ir;
      return *ir;
    } catch (...) {
      stack_.pop_back();
      if (stack_.empty()) failed_macros_.insert(name);
      throw;
    }
  }

  int operand(Builder& b, const std::string& name, const SourceLoc& loc) {
    auto it = b.current.find(name);
    if (it != b.current.end()) return it->second;
    auto [frame, cname] = split_dot(name);
    if (!frame.empty()) {
      auto c = p_->constants.find(name);
      if (c == p_->constants.end()) throw Error("UnknownConstant", "unknown constant '" + name + "'", loc);
      auto cr = b.constant_regs.find(name);
      if (cr != b.constant_regs.end()) return cr->second;
      int r = b.new_reg(name, c->second.frame(), Register::Role::Constant);
      b.ir.regs[r].value = c->second;
      b.constant_regs[name] = r;
      return r;
    }
    throw Error("UndefinedMultivector", "multivector '" + name + "' is read before it is assigned", loc);
  }

  // Rewrites coefficient references such as u.e2 into register coefficient variables.
  Expr resolve_scalar(Builder& b, const Expr& e, const SourceLoc& loc) {
    std::map<std::string, Expr> m;
    for (const auto& v : sym::free_vars(e)) m[v] = Expr::var(resolve_coef(b, v, loc));
    return sym::simplify(sym::substitute(e, m));
  }

  std::string resolve_coef(Builder& b, const std::string& ref, const SourceLoc& loc) {
    auto dot = ref.find('.');
    if (dot == std::string::npos || dot == 0 || dot + 1 == ref.size())
      throw Error("UnknownCoefficient", "'" + ref + "' is not a multivector coefficient (write <name>.<blade>)", loc);
    std::string mv = ref.substr(0, dot), blade = ref.substr(dot + 1);
    int r;
    auto it = b.current.find(mv);
    if (it != b.current.end()) {
      r = it->second;
    } else {
      // frame-qualified constant coefficient, e.g. e3d.Ii.e1^e2^e3
      auto dot2 = blade.find('.');
      if (dot2 == std::string::npos)
        throw Error("UnknownCoefficient", "unknown multivector '" + mv + "' in '" + ref + "'", loc);
      r = operand(b, mv + "." + blade.substr(0, dot2), loc);
      blade = blade.substr(dot2 + 1);
    }
    return coef_var(r, blade_ref(b.ir.regs[r].frame, blade, loc));
  }

  void same_frame(const Builder& b, int x, int y, const SourceLoc& loc) {
    if (b.ir.regs[x].frame != b.ir.regs[y].frame)
      throw Error("FrameMismatch",
                  "'" + b.ir.regs[x].name + "' is in frame " + b.ir.regs[x].frame->name() + " but '" + b.ir.regs[y].name +
                      "' is in frame " + b.ir.regs[y].frame->name(),
                  loc);
  }

  MacroIR compile_macro(const dsl::MacroDef& def) {
    Builder b;
    b.ir.name = def.name;
    b.ir.loc = def.loc;
    for (const auto& p : def.inputs) {
      auto cls = class_ref(p.frame + "." + p.cls, p.loc);
      int r = b.new_reg(p.name, cls->frame, Register::Role::Input);
      b.ir.regs[r].cls = cls;
      b.current[p.name] = r;
      b.ir.inputs.push_back({p.name, cls, r});
    }
    std::vector<std::shared_ptr<const MultivectorClass>> out_cls;
    for (const auto& p : def.outputs) out_cls.push_back(class_ref(p.frame + "." + p.cls, p.loc));

    for (const auto& st : def.body) {
      try {
        statement(b, st);
      } catch (Error& e) {
        e.set_loc_if_missing(st.loc);
        throw;
      }
    }
    for (std::size_t i = 0; i < def.outputs.size(); ++i) {
      const auto& p = def.outputs[i];
      auto it = b.current.find(p.name);
      if (it == b.current.end())
        throw Error("UnassignedOutput", "output '" + p.name + "' of macro '" + def.name + "' is never assigned", p.loc);
      if (b.ir.regs[it->second].frame != out_cls[i]->frame)
        throw Error("FrameMismatch", "output '" + p.name + "' is computed in frame " +
                                         b.ir.regs[it->second].frame->name() + " but declared in " +
                                         out_cls[i]->frame->name(),
                    p.loc);
      b.ir.outputs.push_back({p.name, out_cls[i], it->second});
    }
    return std::move(b.ir);
  }

  void assign(Builder& b, IrOp op, const std::string& dst, FramePtr frame) {
    op.dst = b.new_reg(dst, std::move(frame));
    b.ir.ops.push_back(std::move(op));
    b.current[dst] = b.ir.ops.back().dst;
  }

  void statement(Builder& b, const dsl::Stmt& st) {
    using S = dsl::Stmt::Kind;
    using K = IrOp::Kind;
    IrOp op;
    op.loc = st.loc;
    switch (st.kind) {
      case S::JoinOn:
      case S::JoinOff:
        op.kind = st.kind == S::JoinOn ? K::JoinOn : K::JoinOff;
        b.join = st.kind == S::JoinOn;
        b.ir.ops.push_back(op);
        return;
      case S::Output: {
        op.kind = K::Output;
        const std::string& t = st.payload;
        std::size_t pos = 0;
        while (true) {
          std::size_t lt = t.find('<', pos);
          if (lt == std::string::npos) break;
          std::size_t gt = t.find('>', lt);
          op.pieces.emplace_back(t.substr(pos, lt - pos));
          auto c = parse_coef_var(resolve_coef(b, t.substr(lt + 1, gt - lt - 1), st.loc));
          op.pieces.emplace_back(*c);
          pos = gt + 1;
        }
        op.pieces.emplace_back(t.substr(pos));
        b.ir.ops.push_back(op);
        return;
      }
      case S::Construct: {
        FramePtr f = frame_ref(st.frame, st.loc);
        op.kind = K::Construct;
        for (const auto& [blade, e] : st.coefs) {
          BladeId id = blade_ref(f, blade, st.loc);
          Expr v = resolve_scalar(b, e, st.loc);
          auto it = op.coefs.find(id);
          op.coefs[id] = it == op.coefs.end() ? v : sym::simplify(it->second + v);
        }
        assign(b, op, st.dst, f);
        return;
      }
      case S::Binary: {
        int x = operand(b, st.operands[0], st.loc), y = operand(b, st.operands[1], st.loc);
        same_frame(b, x, y, st.loc);
        if (st.op == "+") op.kind = K::Add;
        else if (st.op == "-") op.kind = K::Sub;
        else {
          op.kind = K::Product;
          op.product = *parse_product(st.op);
        }
        op.src = {x, y};
        assign(b, op, st.dst, b.ir.regs[x].frame);
        return;
      }
      case S::Transform: {
        int x = operand(b, st.operands[0], st.loc);
        auto t = transform_ref(st.target, st.loc);
        if (t->source() != b.ir.regs[x].frame)
          throw Error("TransformDomainMismatch",
                      "transform '" + st.target + "' maps from frame " + t->source()->name() + " but '" +
                          st.operands[0] + "' is in frame " + b.ir.regs[x].frame->name(),
                      st.loc);
        op.kind = K::Transform;
        op.transform = t;
        op.src = {x};
        assign(b, op, st.dst, t->destination());
        return;
      }
      case S::Copy:
      case S::Negate: {
        int x = operand(b, st.operands[0], st.loc);
        op.kind = st.kind == S::Copy ? K::Copy : K::Negate;
        op.src = {x};
        assign(b, op, st.dst, b.ir.regs[x].frame);
        return;
      }
      case S::Unary: {
        int x = operand(b, st.operands[0], st.loc);
        FramePtr f = b.ir.regs[x].frame;
        op.src = {x};
        const std::string& u = st.op;
        if (u == "reverse") op.kind = K::Reverse;
        else if (u == "grade_inv") op.kind = K::GradeInv;
        else if (u == "cliff_conj") op.kind = K::CliffConj;
        else if (u == "norm") op.kind = K::Norm;
        else if (u == "norm2") op.kind = K::Norm2;
        else if (u == "quasi_norm") op.kind = K::QuasiNorm;
        else if (u == "quasi_norm2") op.kind = K::QuasiNorm2;
        else if (u == "scale" || u == "div_by_scalar") {
          op.kind = u == "scale" ? K::Scale : K::DivByScalar;
          op.scalar = resolve_scalar(b, *st.scalar, st.loc);
          if (op.kind == K::DivByScalar && op.scalar.is_zero())
            throw Error("DivisionByZeroConstant", "division of a multivector by the constant 0", st.loc);
        } else if (u == "diff") {
          op.kind = K::Diff;
          op.scalar = Expr::var(resolve_coef(b, st.scalar->name(), st.loc));
        } else if (u == "cast_to_grades") {
          op.kind = K::CastGrades;
          for (int g : st.grades) {
            if (g < 0 || g > f->dim())
              throw Error("SyntaxError", "grade " + std::to_string(g) + " does not exist in frame " + f->name(), st.loc);
            op.grades.insert(g);
          }
        } else if (u == "cast_to_subspace") {
          op.kind = K::CastBlades;
          auto [fr, name] = split_dot(st.target);
          if (!fr.empty() && fr != f->name())
            throw Error("FrameMismatch", "subspace '" + st.target + "' is not in frame " + f->name(), st.loc);
          op.blades = subspace_ref(f->name(), name, st.loc);
        } else if (u == "cast_to_class") {
          op.kind = K::CastClass;
          std::string q = st.target.find('.') == std::string::npos ? f->name() + "." + st.target : st.target;
          op.cls = class_ref(q, st.loc);
          if (op.cls->frame != f)
            throw Error("FrameMismatch", "class '" + q + "' is not in frame " + f->name(), st.loc);
        } else {
          throw Error("UnknownOperator", "unknown operator '" + u + "'", st.loc);
        }
        assign(b, op, st.dst, f);
        return;
      }
      case S::Call: {
        inline_call(b, st);
        return;
      }
    }
  }

  void inline_call(Builder& b, const dsl::Stmt& st) {
    const MacroIR& callee = build_macro(st.target, st.loc);
    std::map<std::string, std::string> binds;
    for (const auto& [callee_name, caller_name] : st.call_map) {
      bool known = std::any_of(callee.inputs.begin(), callee.inputs.end(), [&](auto& p) { return p.name == callee_name; }) ||
                   std::any_of(callee.outputs.begin(), callee.outputs.end(), [&](auto& p) { return p.name == callee_name; });
      if (!known)
        throw Error("UnknownCoefficient", "macro '" + callee.name + "' has no parameter '" + callee_name + "'", st.loc);
      binds[callee_name] = caller_name;
    }
    std::vector<int> remap(callee.regs.size(), -1);
    for (const auto& p : callee.inputs) {
      auto it = binds.find(p.name);
      if (it == binds.end())
        throw Error("UnboundCalleeInput", "input '" + p.name + "' of macro '" + callee.name + "' is not bound", st.loc);
      int r = operand(b, it->second, st.loc);
      if (b.ir.regs[r].frame != p.cls->frame)
        throw Error("ClassMismatch",
                    "'" + it->second + "' is in frame " + b.ir.regs[r].frame->name() + " but input '" + p.name +
                        "' of macro '" + callee.name + "' has class " + p.cls->name,
                    st.loc);
      remap[p.reg] = r;
    }
    for (std::size_t i = 0; i < callee.regs.size(); ++i) {
      if (remap[i] >= 0) continue;
      const Register& cr = callee.regs[i];
      if (cr.role == Register::Role::Constant) {
        auto it = b.constant_regs.find(cr.name);
        if (it != b.constant_regs.end()) {
          remap[i] = it->second;
          continue;
        }
        int r = b.new_reg(cr.name, cr.frame, Register::Role::Constant);
        b.ir.regs[r].value = cr.value;
        b.constant_regs[cr.name] = r;
        remap[i] = r;
        continue;
      }
      int r = b.new_reg(callee.name + "/" + cr.name, cr.frame);
      remap[i] = r;
    }
    std::map<std::string, Expr> rename;
    auto remap_expr = [&](const Expr& e) {
      rename.clear();
      for (const auto& v : sym::free_vars(e))
        if (auto c = parse_coef_var(v)) rename[v] = Expr::var(coef_var(remap[c->first], c->second));
      return sym::substitute(e, rename);
    };
    bool join = b.join;
    for (IrOp op : callee.ops) {
      if (op.dst >= 0) op.dst = remap[op.dst];
      for (int& s : op.src) s = remap[s];
      for (auto& [blade, e] : op.coefs) e = remap_expr(e);
      op.scalar = remap_expr(op.scalar);
      for (auto& piece : op.pieces)
        if (auto* ref = std::get_if<std::pair<int, BladeId>>(&piece)) ref->first = remap[ref->first];
      if (op.kind == IrOp::Kind::JoinOn) join = true;
      if (op.kind == IrOp::Kind::JoinOff) join = false;
      b.ir.ops.push_back(std::move(op));
    }
    if (join != b.join) {
      IrOp restore;
      restore.kind = b.join ? IrOp::Kind::JoinOn : IrOp::Kind::JoinOff;
      restore.loc = st.loc;
      b.ir.ops.push_back(restore);
    }
    for (const auto& p : callee.outputs) {
      auto it = binds.find(p.name);
      if (it == binds.end()) continue;
      auto cur = b.current.find(it->second);
      if (cur != b.current.end() && b.ir.regs[cur->second].frame != p.cls->frame)
        throw Error("ClassMismatch", "'" + it->second + "' is in frame " + b.ir.regs[cur->second].frame->name() +
                                         " but output '" + p.name + "' of macro '" + callee.name + "' has class " +
                                         p.cls->name,
                    st.loc);
      IrOp copy;
      copy.kind = IrOp::Kind::Copy;
      copy.src = {remap[p.reg]};
      copy.loc = st.loc;
      assign(b, copy, it->second, p.cls->frame);
    }
  }
};

}  // namespace

CompileResult compile(const dsl::Document& doc) { return Compiler(doc).run(); }

CompileResult compile_directory(const std::string& dir) {
  dsl::ParseResult parsed = dsl::parse_directory(dir);
  if (!parsed.ok()) {
    CompileResult r;
    r.diagnostics = std::move(parsed.diagnostics);
    return r;
  }
  CompileResult r = compile(parsed.doc);
  r.diagnostics.insert(r.diagnostics.begin(), parsed.diagnostics.begin(), parsed.diagnostics.end());
  return r;
}

}  // namespace gamacro
