#include <algorithm>
#include <functional>
#include <set>

#include "gamacro/codegen.hpp"

namespace gamacro::codegen {

std::size_t ExprSequence::op_count() const {
  std::size_t n = 0;
  for (const auto& a : items) {
    if (a.kind == Assignment::Kind::Verbatim) continue;
    n += sym::op_count(a.value);
  }
  return n;
}

std::size_t ExprSequence::count(Assignment::Kind k) const {
  return static_cast<std::size_t>(
      std::count_if(items.begin(), items.end(), [k](const Assignment& a) { return a.kind == k; }));
}

std::size_t ExprSequence::temporaries() const { return count(Assignment::Kind::Temp) + count(Assignment::Kind::Input); }

Expr expand(const ExprSequence& seq, const Expr& e) {
  std::map<std::string, Expr> defs;
  for (const auto& a : seq.items)
    if (a.kind == Assignment::Kind::Temp || a.kind == Assignment::Kind::Input)
      defs[a.name] = sym::substitute(a.value, defs);
  return sym::substitute(e, defs);
}

namespace {

using Kind = Assignment::Kind;

class Evaluator {
public:
  Evaluator(const CompiledProject& p, const BindingPoint& bp, const Options& opt, sym::SymbolicCache* cache)
      : p_(p), bp_(bp), opt_(opt), cache_(cache), m_(p.macro(bp.macro)) {}

  Evaluation run() {
    values_.resize(m_.regs.size());
    collect_bindings();
    for (const auto& a : bp_.assumes) {
      try {
        if (a.min) ev_.assumptions.assume_min(a.var, a.value);
        else ev_.assumptions.assume_max(a.var, a.value);
      } catch (Error& e) {
        e.set_loc_if_missing(a.loc);
        throw;
      }
    }
    materialize_inputs();
    for (std::size_t r = 0; r < m_.regs.size(); ++r)
      if (m_.regs[r].role == Register::Role::Constant) values_[r] = *m_.regs[r].value;
    for (const auto& op : m_.ops) {
      try {
        step(op);
      } catch (Error& e) {
        e.set_loc_if_missing(op.loc);
        throw;
      }
    }
    finish_outputs();
    return std::move(ev_);
  }

private:
  const CompiledProject& p_;
  const BindingPoint& bp_;
  const Options& opt_;
  sym::SymbolicCache* cache_;
  const MacroIR& m_;
  Evaluation ev_;
  std::vector<std::optional<SymMultivector>> values_;
  bool join_ = false;
  int counter_ = 0;
  std::set<std::string> reserved_;  // target-language names
  std::map<std::string, std::map<BladeId, Expr>> in_binds_;
  std::map<std::string, std::map<BladeId, std::string>> out_binds_;
  std::set<std::string> temp_names_;
  std::map<std::string, Expr> temp_defs_;
  std::map<std::pair<std::string, std::string>, std::optional<Expr>> deriv_memo_;

  const MacroParam* param(const std::string& name, bool& is_input) const {
    for (const auto& p : m_.inputs)
      if (p.name == name) {
        is_input = true;
        return &p;
      }
    for (const auto& p : m_.outputs)
      if (p.name == name) {
        is_input = false;
        return &p;
      }
    return nullptr;
  }

  void warn(const std::string& code, const std::string& msg, const SourceLoc& loc) {
    ev_.warnings.push_back({"warning", code, msg, loc});
  }

  void bind_blade(const MacroParam& prm, bool is_input, BladeId b, const Expr& target, const SourceLoc& loc) {
    if (!prm.cls->blades.count(b))
      throw Error("BladeOutsideClass",
                  "blade " + prm.cls->frame->blade_name(b) + " is not in class " + prm.cls->name + " of '" + prm.name + "'",
                  loc);
    for (const auto& v : sym::free_vars(target)) reserved_.insert(v);
    if (is_input) {
      if (prm.cls->constants.count(b)) {
        warn("ConstantCoefficientBound",
             "'" + prm.name + "." + prm.cls->frame->blade_name(b) + "' is a class constant; the binding is ignored", loc);
        return;
      }
      in_binds_[prm.name][b] = target;
    } else {
      if (!target.is_var())
        throw Error("MalformedBinding",
                    "output '" + prm.name + "." + prm.cls->frame->blade_name(b) + "' must bind to a single variable", loc);
      out_binds_[prm.name][b] = target.name();
    }
  }

  void collect_bindings() {
    for (const auto& c : bp_.coefs) {
      bool is_input = false;
      const MacroParam* prm = param(c.mv, is_input);
      if (!prm)
        throw Error("MalformedBinding", "macro '" + m_.name + "' has no input or output named '" + c.mv + "'", c.loc);
      BladeId b;
      try {
        b = prm->cls->frame->parse_blade(c.blade);
      } catch (Error& e) {
        e.set_loc_if_missing(c.loc);
        throw;
      }
      bind_blade(*prm, is_input, b, c.target, c.loc);
    }
    for (const auto& c : bp_.classes) {
      bool is_input = false;
      const MacroParam* prm = param(c.mv, is_input);
      if (!prm)
        throw Error("MalformedBinding", "macro '" + m_.name + "' has no input or output named '" + c.mv + "'", c.loc);
      auto it = p_.bindings.find(c.binding);
      if (it == p_.bindings.end()) throw Error("UnknownBinding", "unknown class binding '" + c.binding + "'", c.loc);
      const CompiledBinding& cb = it->second;
      if (cb.frame != prm->cls->frame)
        throw Error("ClassMismatch",
                    "binding '" + c.binding + "' is in frame " + cb.frame->name() + " but '" + c.mv + "' has class " +
                        prm->cls->name,
                    c.loc);
      auto prefixed = [&](const std::string& v) { return c.object + "." + v; };
      for (const auto& [b, e] : cb.binds) {
        std::map<std::string, Expr> ren;
        for (const auto& v : sym::free_vars(e)) ren[v] = Expr::var(prefixed(v));
        bind_blade(*prm, is_input, b, sym::substitute(e, ren), c.loc);
      }
      for (const auto& [v, n] : cb.mins) ev_.assumptions.assume_min(prefixed(v), n);
      for (const auto& [v, n] : cb.maxs) ev_.assumptions.assume_max(prefixed(v), n);
    }
  }

  std::string fresh() {
    std::string name;
    do {
      std::string num = std::to_string(++counter_);
      name = "var" + std::string(num.size() < 4 ? 4 - num.size() : 0, '0') + num;
    } while (reserved_.count(name));
    return name;
  }

  Expr add_temp(Kind kind, const Expr& value) {
    std::string n = fresh();
    Assignment a;
    a.kind = kind;
    a.name = n;
    a.value = value;
    ev_.sequence.items.push_back(a);
    temp_names_.insert(n);
    if (kind == Kind::Temp) temp_defs_[n] = value;
    return Expr::var(n);
  }

  void materialize_inputs() {
    std::map<std::uint64_t, std::vector<std::pair<Expr, Expr>>> aliases;
    for (const auto& prm : m_.inputs) {
      SymMultivector mv(prm.cls->frame);
      auto binds = in_binds_.find(prm.name);
      for (BladeId b : prm.cls->blades) {
        auto c = prm.cls->constants.find(b);
        if (c != prm.cls->constants.end()) {
          mv.set(b, c->second);
          continue;
        }
        std::optional<Expr> target;
        if (binds != in_binds_.end()) {
          auto t = binds->second.find(b);
          if (t != binds->second.end()) target = sym::simplify(t->second, ev_.assumptions);
        }
        if (!target) {
          if (opt_.strict)
            throw Error("UnboundInputCoefficient",
                        "input coefficient '" + prm.name + "." + prm.cls->frame->blade_name(b) + "' is not bound",
                        bp_.loc);
          continue;
        }
        if (target->is_var() || target->is_const()) {
          mv.set(b, *target);
          continue;
        }
        // non-trivial binding expressions become shared input aliases
        auto& bucket = aliases[target->key()];
        auto hit = std::find_if(bucket.begin(), bucket.end(), [&](auto& pr) { return pr.first == *target; });
        if (hit != bucket.end()) {
          mv.set(b, hit->second);
        } else {
          Expr v = add_temp(Kind::Input, *target);
          bucket.emplace_back(*target, v);
          mv.set(b, v);
        }
      }
      values_[prm.reg] = mv;
    }
  }

  const SymMultivector& get(int r) const {
    if (!values_[r]) throw Error("UndefinedMultivector", "'" + m_.regs[r].name + "' has no value");
    return *values_[r];
  }

  Expr scalar(const Expr& e) {
    std::map<std::string, Expr> m;
    for (const auto& v : sym::free_vars(e)) {
      auto c = parse_coef_var(v);
      if (!c) continue;
      m[v] = get(c->first).coef(c->second);
    }
    return sym::simplify(sym::substitute(e, m), ev_.assumptions);
  }

  SymMultivector scalar_mv(const FramePtr& f, const Expr& s) { return SymMultivector::scalar(f, sym::simplify(s)); }

  // Join-off regions name every non-trivial coefficient.
  void settle(int dst, SymMultivector v) {
    if (!join_) {
      SymMultivector named(v.frame());
      for (const auto& [b, e] : v.terms()) {
        Expr s = sym::simplify(e, ev_.assumptions);
        named.set(b, s.trivial() ? s : add_temp(Kind::Temp, s));
      }
      v = named;
    }
    values_[dst] = std::move(v);
  }

  std::optional<Expr> derivative_of(const std::string& name, const std::string& var) {
    auto def = temp_defs_.find(name);
    if (def == temp_defs_.end()) return std::nullopt;  // inputs and aliases are independent
    auto key = std::make_pair(name, var);
    auto memo = deriv_memo_.find(key);
    if (memo != deriv_memo_.end()) return memo->second;
    Expr d = sym::simplify(sym::differentiate(def->second, var, resolver(var)), ev_.assumptions);
    std::optional<Expr> out;
    if (!d.is_zero()) out = (d.trivial() || join_) ? d : add_temp(Kind::Temp, d);
    deriv_memo_[key] = out;
    return out;
  }

  sym::DerivativeResolver resolver(const std::string& var) {
    return [this, var](const std::string& name) { return derivative_of(name, var); };
  }

  void step(const IrOp& op) {
    using K = IrOp::Kind;
    switch (op.kind) {
      case K::JoinOn: join_ = true; return;
      case K::JoinOff: join_ = false; return;
      case K::Output: {
        Assignment a;
        a.kind = Kind::Verbatim;
        for (const auto& piece : op.pieces) {
          if (const auto* s = std::get_if<std::string>(&piece)) a.text.emplace_back(*s);
          else {
            auto [r, b] = std::get<std::pair<int, BladeId>>(piece);
            Expr c = get(r).coef(b);
            if (!c.trivial()) c = add_temp(Kind::Temp, c);
            a.text.emplace_back(c);
          }
        }
        ev_.sequence.items.push_back(a);
        return;
      }
      case K::Construct: {
        SymMultivector v(m_.regs[op.dst].frame);
        for (const auto& [b, e] : op.coefs) v.set(b, scalar(e));
        settle(op.dst, v);
        return;
      }
      case K::Product: settle(op.dst, product(op.product, get(op.src[0]), get(op.src[1]), cache_)); return;
      case K::Add: settle(op.dst, add(get(op.src[0]), get(op.src[1]))); return;
      case K::Sub: settle(op.dst, sub(get(op.src[0]), get(op.src[1]))); return;
      case K::Transform: settle(op.dst, apply_outermorphism(*op.transform, get(op.src[0]))); return;
      case K::Reverse: settle(op.dst, reverse(get(op.src[0]))); return;
      case K::GradeInv: settle(op.dst, grade_involution(get(op.src[0]))); return;
      case K::CliffConj: settle(op.dst, clifford_conjugate(get(op.src[0]))); return;
      case K::Scale: settle(op.dst, scale(get(op.src[0]), scalar(op.scalar))); return;
      case K::DivByScalar: settle(op.dst, div_by_scalar(get(op.src[0]), scalar(op.scalar))); return;
      case K::Norm: settle(op.dst, scalar_mv(m_.regs[op.dst].frame, norm(get(op.src[0]), cache_))); return;
      case K::Norm2: settle(op.dst, scalar_mv(m_.regs[op.dst].frame, norm2(get(op.src[0]), cache_))); return;
      case K::QuasiNorm: settle(op.dst, scalar_mv(m_.regs[op.dst].frame, quasi_norm(get(op.src[0]), cache_))); return;
      case K::QuasiNorm2:
        settle(op.dst, scalar_mv(m_.regs[op.dst].frame, quasi_norm2(get(op.src[0]), cache_)));
        return;
      case K::Diff: {
        Expr v = scalar(op.scalar);
        if (!v.is_var() || temp_defs_.count(v.name()))
          throw Error("InvalidDiffVariable",
                      "diff needs an input coefficient bound to a variable, found '" + sym::to_string(v) + "'", op.loc);
        settle(op.dst, differentiate_mv(get(op.src[0]), v.name(), resolver(v.name())));
        return;
      }
      case K::CastGrades: settle(op.dst, cast_to_grades(get(op.src[0]), op.grades)); return;
      case K::CastBlades: settle(op.dst, cast_to_blades(get(op.src[0]), op.blades)); return;
      case K::CastClass: {
        std::vector<std::string> warnings;
        SymMultivector v = cast_to_class(get(op.src[0]), *op.cls, opt_.strict, &warnings);
        for (const auto& w : warnings) warn("BladeOutsideClass", w, op.loc);
        settle(op.dst, v);
        return;
      }
      case K::Copy: values_[op.dst] = get(op.src[0]); return;
      case K::Negate: settle(op.dst, negate(get(op.src[0]))); return;
    }
  }

  void finish_outputs() {
    std::vector<Assignment> outs;
    for (const auto& prm : m_.outputs) {
      const SymMultivector& v = get(prm.reg);
      SymMultivector kept(v.frame());
      for (const auto& [b, e] : v.terms()) {
        if (prm.cls->blades.count(b)) {
          kept.set(b, e);
          continue;
        }
        std::string msg = "output '" + prm.name + "' has a nonzero " + v.frame()->blade_name(b) +
                          " coefficient outside class " + prm.cls->name;
        if (opt_.strict) throw Error("BladeOutsideClass", msg, m_.loc);
        warn("BladeOutsideClass", msg + "; dropped", bp_.loc);
      }
      ev_.outputs.emplace(prm.name, kept);
      auto binds = out_binds_.find(prm.name);
      if (binds == out_binds_.end() && !opt_.emit_zeros) {
        warn("UnboundOutput", "output '" + prm.name + "' is not bound; nothing is emitted for it", bp_.loc);
        continue;
      }
      for (BladeId b : prm.cls->blades) {
        Assignment a;
        a.kind = Kind::Output;
        a.mv = prm.name;
        a.blade = b;
        a.value = kept.coef(b);
        if (binds != out_binds_.end() && binds->second.count(b)) {
          a.name = binds->second.at(b);
        } else if (opt_.emit_zeros) {
          a.name = prm.name + "_" + blade_suffix(*v.frame(), b);
        } else {
          if (!a.value.is_zero())
            warn("UnboundOutput", "output coefficient '" + prm.name + "." + v.frame()->blade_name(b) + "' is not bound",
                 bp_.loc);
          continue;
        }
        outs.push_back(a);
      }
    }
    std::stable_sort(outs.begin(), outs.end(), [](const Assignment& a, const Assignment& b) {
      return std::tie(a.mv, a.blade) < std::tie(b.mv, b.blade);
    });
    // an output must not read a variable an earlier output already overwrote
    std::set<std::string> written;
    for (auto& a : outs) {
      bool clash = false;
      for (const auto& v : sym::free_vars(a.value)) clash = clash || written.count(v);
      if (clash) a.value = add_temp(Kind::Temp, a.value);
      written.insert(a.name);
    }
    for (auto& a : outs) ev_.sequence.items.push_back(std::move(a));
  }
};

}  // namespace

Evaluation evaluate_macro(const CompiledProject& project, const BindingPoint& bp, const Options& opt,
                          sym::SymbolicCache* cache) {
  return Evaluator(project, bp, opt, cache).run();
}

}  // namespace gamacro::codegen
