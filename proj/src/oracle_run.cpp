#include "gamacro/oracle_run.hpp"

#include <cmath>
#include <mutex>
#include <numbers>

namespace gamacro::oracle {

NumFramePtr num_frame(const FramePtr& f) {
  static std::mutex mu;
  static std::map<const Frame*, std::pair<FramePtr, NumFramePtr>> cache;
  std::lock_guard lock(mu);
  auto it = cache.find(f.get());
  if (it != cache.end()) return it->second.second;
  std::vector<std::vector<double>> form;
  for (const auto& row : f->ipm()) {
    form.emplace_back();
    for (const auto& x : row) form.back().push_back(x.value());
  }
  auto nf = std::make_shared<const NumFrame>(form);
  cache[f.get()] = {f, nf};
  return nf;
}

namespace {

// Value plus first derivatives with respect to the tracked input coefficients.
struct Dual {
  double v = 0;
  std::vector<double> d;
};

Dual constant(double v, std::size_t n) { return {v, std::vector<double>(n, 0.0)}; }

Dual chain(const Dual& x, double value, double slope) {
  Dual r{value, x.d};
  for (double& g : r.d) g *= slope;
  return r;
}

Dual mul(const Dual& a, const Dual& b) {
  Dual r{a.v * b.v, a.d};
  for (std::size_t i = 0; i < r.d.size(); ++i) r.d[i] = a.d[i] * b.v + a.v * b.d[i];
  return r;
}

Dual ipow(const Dual& x, int e) {
  double p = std::pow(x.v, e);
  return chain(x, p, e * std::pow(x.v, e - 1));
}

Dual apply_func(const std::string& f, const Dual& x) {
  double v = x.v;
  if (f == "sin") return chain(x, std::sin(v), std::cos(v));
  if (f == "cos") return chain(x, std::cos(v), -std::sin(v));
  if (f == "tan") return chain(x, std::tan(v), 1.0 / (std::cos(v) * std::cos(v)));
  if (f == "sqrt") {
    if (v < 0) throw Error("DomainError", "sqrt of a negative value");
    double s = std::sqrt(v);
    return chain(x, s, 0.5 / s);
  }
  if (f == "exp") return chain(x, std::exp(v), std::exp(v));
  if (f == "ln") {
    if (v <= 0) throw Error("DomainError", "ln of a non-positive value");
    return chain(x, std::log(v), 1.0 / v);
  }
  if (f == "atan") return chain(x, std::atan(v), 1.0 / (1.0 + v * v));
  if (f == "cosh") return chain(x, std::cosh(v), std::sinh(v));
  if (f == "sinh") return chain(x, std::sinh(v), std::cosh(v));
  if (f == "abs") return chain(x, std::fabs(v), v < 0 ? -1.0 : 1.0);
  throw Error("UnsupportedFunction", "unknown function '" + f + "'");
}

// A dense multivector of duals: the value and one tangent multivector per tracked variable.
struct DualMv {
  NumMultivector v;
  std::vector<NumMultivector> d;
};

class Runner {
public:
  Runner(const MacroIR& m) : m_(m), vals_(m.regs.size()) {
    for (const auto& op : m.ops)
      if (op.kind == IrOp::Kind::Diff) {
        auto c = parse_coef_var(op.scalar.name());
        if (index_.emplace(*c, tracked_.size()).second) tracked_.push_back(*c);
      }
  }

  std::map<std::string, NumMultivector> run(const std::map<std::string, NumMultivector>& inputs) {
    for (const auto& p : m_.inputs) {
      auto it = inputs.find(p.name);
      NumFramePtr f = num_frame(p.cls->frame);
      DualMv x{NumMultivector(f), {}};
      for (BladeId b : p.cls->blades) {
        auto c = p.cls->constants.find(b);
        if (c != p.cls->constants.end()) x.v[b] = sym::eval_numeric(c->second, std::map<std::string, double>{});
        else if (it != inputs.end()) x.v[b] = it->second[b];
      }
      for (std::size_t k = 0; k < tracked_.size(); ++k) {
        NumMultivector t(f);
        if (tracked_[k].first == p.reg && !p.cls->constants.count(tracked_[k].second)) t[tracked_[k].second] = 1.0;
        x.d.push_back(t);
      }
      vals_[p.reg] = std::move(x);
    }
    for (std::size_t r = 0; r < m_.regs.size(); ++r) {
      const Register& reg = m_.regs[r];
      if (reg.role != Register::Role::Constant) continue;
      NumFramePtr f = num_frame(reg.frame);
      DualMv x{NumMultivector(f), std::vector<NumMultivector>(tracked_.size(), NumMultivector(f))};
      for (const auto& [b, e] : reg.value->terms()) x.v[b] = sym::eval_numeric(e, std::map<std::string, double>{});
      vals_[r] = std::move(x);
    }
    for (const auto& op : m_.ops) {
      try {
        step(op);
      } catch (Error& e) {
        e.set_loc_if_missing(op.loc);
        throw;
      }
    }
    std::map<std::string, NumMultivector> out;
    for (const auto& p : m_.outputs) {
      const NumMultivector& v = vals_[p.reg]->v;
      NumMultivector o(v.frame());
      for (BladeId b : p.cls->blades) o[b] = v[b];
      out.emplace(p.name, o);
    }
    return out;
  }

private:
  const MacroIR& m_;
  std::vector<std::optional<DualMv>> vals_;
  std::vector<std::pair<int, BladeId>> tracked_;
  std::map<std::pair<int, BladeId>, std::size_t> index_;

  const DualMv& get(int r) const {
    if (!vals_[r]) throw Error("UndefinedMultivector", "register " + m_.regs[r].name + " has no value");
    return *vals_[r];
  }

  Dual coef(int r, BladeId b) const {
    const DualMv& x = get(r);
    Dual d{x.v[b], {}};
    for (const auto& t : x.d) d.d.push_back(t[b]);
    return d;
  }

  Dual eval(const Expr& e) const {
    std::size_t n = tracked_.size();
    switch (e.kind()) {
      case sym::Kind::Const: return constant(e.number().value(), n);
      case sym::Kind::Var: {
        if (e.name() == "pi") return constant(std::numbers::pi, n);
        auto c = parse_coef_var(e.name());
        if (!c) throw Error("UnboundVariable", "unbound variable '" + e.name() + "'");
        return coef(c->first, c->second);
      }
      case sym::Kind::Func: return apply_func(e.name(), eval(e.args()[0]));
      case sym::Kind::Mul: {
        Dual r = constant(e.number().value(), n);
        for (const auto& f : e.factors()) r = mul(r, ipow(eval(f.base), f.exp));
        return r;
      }
      case sym::Kind::Add: {
        Dual r = constant(e.number().value(), n);
        for (const auto& t : e.args()) {
          Dual x = eval(t);
          r.v += x.v;
          for (std::size_t i = 0; i < n; ++i) r.d[i] += x.d[i];
        }
        return r;
      }
    }
    return constant(0, n);
  }

  template <class F>
  DualMv linear(const DualMv& a, F&& f) const {
    DualMv r{f(a.v), {}};
    for (const auto& t : a.d) r.d.push_back(f(t));
    return r;
  }

  DualMv bilinear(const DualMv& a, const DualMv& b, Product k) const {
    DualMv r{product(k, a.v, b.v), {}};
    for (std::size_t i = 0; i < a.d.size(); ++i) r.d.push_back(product(k, a.d[i], b.v) + product(k, a.v, b.d[i]));
    return r;
  }

  DualMv scalar_mv(const NumFramePtr& f, const Dual& s) const {
    DualMv r{NumMultivector(f), {}};
    r.v[0] = s.v;
    for (double g : s.d) {
      NumMultivector t(f);
      t[0] = g;
      r.d.push_back(t);
    }
    return r;
  }

  DualMv scaled(const DualMv& a, const Dual& s) const {
    DualMv r{s.v * a.v, {}};
    for (std::size_t i = 0; i < a.d.size(); ++i) r.d.push_back(s.v * a.d[i] + s.d[i] * a.v);
    return r;
  }

  Dual quasi2(const DualMv& a) const {
    // <A ~A>_0, differentiated by the product rule
    Dual r{quasi_norm2(a.v), {}};
    NumMultivector rev = reverse(a.v);
    for (const auto& t : a.d) r.d.push_back(2.0 * product(Product::sp, t, rev)[0]);
    return r;
  }

  Dual norm2_of(const DualMv& a) const {
    std::size_t n = tracked_.size();
    Dual total = constant(0, n);
    int dim = a.v.frame()->dim();
    for (int k = 0; k <= dim; ++k) {
      DualMv part = linear(a, [k](const NumMultivector& x) { return grade_part(x, k); });
      Dual q = quasi2(part);
      double s = q.v < 0 ? -1.0 : 1.0;
      total.v += s * q.v;
      for (std::size_t i = 0; i < n; ++i) total.d[i] += s * q.d[i];
    }
    return total;
  }

  static Dual sqrt_abs(const Dual& q) {
    double a = std::fabs(q.v);
    double s = std::sqrt(a);
    double slope = s > 0 ? (q.v < 0 ? -0.5 : 0.5) / s : 0.0;
    return chain(q, s, slope);
  }

  void step(const IrOp& op) {
    using K = IrOp::Kind;
    auto frame = [&] { return num_frame(m_.regs[op.dst].frame); };
    switch (op.kind) {
      case K::Output:
      case K::JoinOn:
      case K::JoinOff: return;
      case K::Construct: {
        NumFramePtr f = frame();
        DualMv r{NumMultivector(f), std::vector<NumMultivector>(tracked_.size(), NumMultivector(f))};
        for (const auto& [b, e] : op.coefs) {
          Dual x = eval(e);
          r.v[b] = x.v;
          for (std::size_t i = 0; i < x.d.size(); ++i) r.d[i][b] = x.d[i];
        }
        vals_[op.dst] = std::move(r);
        return;
      }
      case K::Product:
        vals_[op.dst] = bilinear(get(op.src[0]), get(op.src[1]), static_cast<Product>(op.product));
        return;
      case K::Add:
      case K::Sub: {
        const DualMv &a = get(op.src[0]), &b = get(op.src[1]);
        bool add = op.kind == K::Add;
        DualMv r{add ? a.v + b.v : a.v - b.v, {}};
        for (std::size_t i = 0; i < a.d.size(); ++i) r.d.push_back(add ? a.d[i] + b.d[i] : a.d[i] - b.d[i]);
        vals_[op.dst] = std::move(r);
        return;
      }
      case K::Transform: {
        const Matrix& m = op.transform->matrix();
        NumFramePtr src = num_frame(op.transform->source()), dst = num_frame(op.transform->destination());
        int n = src->dim();
        // blade images by wedging vector images in ascending order
        std::vector<NumMultivector> images(src->size(), NumMultivector(dst));
        images[0][0] = 1.0;
        for (std::uint32_t b = 1; b < src->size(); ++b) {
          int low = 0;
          while (!((b >> low) & 1u)) ++low;
          NumMultivector v(dst);
          for (int i = 0; i < n; ++i) v[1u << i] = m[i][low].value();
          images[b] = product(Product::op, v, images[b & (b - 1)]);
        }
        auto map = [&](const NumMultivector& x) {
          NumMultivector r(dst);
          for (std::uint32_t b = 0; b < src->size(); ++b)
            if (x[b] != 0.0) r = r + x[b] * images[b];
          return r;
        };
        vals_[op.dst] = linear(get(op.src[0]), map);
        return;
      }
      case K::Reverse: vals_[op.dst] = linear(get(op.src[0]), [](const NumMultivector& x) { return reverse(x); }); return;
      case K::GradeInv:
        vals_[op.dst] = linear(get(op.src[0]), [](const NumMultivector& x) { return grade_involution(x); });
        return;
      case K::CliffConj:
        vals_[op.dst] = linear(get(op.src[0]), [](const NumMultivector& x) { return clifford_conjugate(x); });
        return;
      case K::Copy: vals_[op.dst] = get(op.src[0]); return;
      case K::Negate: vals_[op.dst] = linear(get(op.src[0]), [](const NumMultivector& x) { return -1.0 * x; }); return;
      case K::Scale: vals_[op.dst] = scaled(get(op.src[0]), eval(op.scalar)); return;
      case K::DivByScalar: {
        Dual s = eval(op.scalar);
        if (std::fabs(s.v) < 1e-14) throw Error("NullVersor", "division by a scalar below 1e-14 in magnitude");
        Dual inv = chain(s, 1.0 / s.v, -1.0 / (s.v * s.v));
        vals_[op.dst] = scaled(get(op.src[0]), inv);
        return;
      }
      case K::QuasiNorm2: vals_[op.dst] = scalar_mv(frame(), quasi2(get(op.src[0]))); return;
      case K::QuasiNorm: vals_[op.dst] = scalar_mv(frame(), sqrt_abs(quasi2(get(op.src[0])))); return;
      case K::Norm2: vals_[op.dst] = scalar_mv(frame(), norm2_of(get(op.src[0]))); return;
      case K::Norm: vals_[op.dst] = scalar_mv(frame(), sqrt_abs(norm2_of(get(op.src[0])))); return;
      case K::Diff: {
        std::size_t k = index_.at(*parse_coef_var(op.scalar.name()));
        const DualMv& a = get(op.src[0]);
        DualMv r{a.d[k], {}};
        // second derivatives are not tracked
        for (std::size_t i = 0; i < a.d.size(); ++i) {
          NumMultivector t(a.v.frame());
          for (std::uint32_t b = 0; b < t.frame()->size(); ++b) t[b] = std::nan("");
          r.d.push_back(t);
        }
        vals_[op.dst] = std::move(r);
        return;
      }
      case K::CastGrades:
        vals_[op.dst] = linear(get(op.src[0]), [&](const NumMultivector& x) {
          NumMultivector r(x.frame());
          for (std::uint32_t b = 0; b < x.frame()->size(); ++b)
            if (op.grades.count(bit_count(b))) r[b] = x[b];
          return r;
        });
        return;
      case K::CastBlades:
      case K::CastClass: {
        const std::set<BladeId>& keep = op.kind == K::CastBlades ? op.blades : op.cls->blades;
        DualMv r = linear(get(op.src[0]), [&](const NumMultivector& x) {
          NumMultivector y(x.frame());
          for (BladeId b : keep) y[b] = x[b];
          return y;
        });
        if (op.kind == K::CastClass)
          for (const auto& [b, e] : op.cls->constants) {
            r.v[b] = sym::eval_numeric(e, std::map<std::string, double>{});
            for (auto& t : r.d) t[b] = 0.0;
          }
        vals_[op.dst] = std::move(r);
        return;
      }
    }
  }
};

}  // namespace

std::map<std::string, NumMultivector> run_macro(const MacroIR& m, const std::map<std::string, NumMultivector>& inputs) {
  return Runner(m).run(inputs);
}

}  // namespace gamacro::oracle
