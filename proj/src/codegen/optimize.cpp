#include <algorithm>
#include <functional>
#include <set>
#include <unordered_map>

#include "gamacro/codegen.hpp"

namespace gamacro::codegen {

namespace {

using Kind = Assignment::Kind;

bool is_symbol(const Assignment& a) { return a.kind == Kind::Temp || a.kind == Kind::Input; }

void count_uses(const Expr& e, std::map<std::string, int>& uses) {
  switch (e.kind()) {
    case sym::Kind::Const: return;
    case sym::Kind::Var: ++uses[e.name()]; return;
    case sym::Kind::Func: count_uses(e.args()[0], uses); return;
    case sym::Kind::Mul:
      for (const auto& f : e.factors()) count_uses(f.base, uses);
      return;
    case sym::Kind::Add:
      for (const auto& t : e.args()) count_uses(t, uses);
      return;
  }
}

template <class F>
void each_expr(Assignment& a, F&& f) {
  if (a.kind == Kind::Verbatim) {
    for (auto& piece : a.text)
      if (auto* e = std::get_if<Expr>(&piece)) f(*e);
  } else {
    f(a.value);
  }
}

template <class F>
void each_expr(const Assignment& a, F&& f) {
  each_expr(const_cast<Assignment&>(a), [&](Expr& e) { f(static_cast<const Expr&>(e)); });
}

std::map<std::string, int> uses_of(const std::vector<Assignment>& items) {
  std::map<std::string, int> uses;
  for (const auto& a : items) each_expr(a, [&](const Expr& e) { count_uses(e, uses); });
  return uses;
}

std::size_t total_ops(const std::vector<Assignment>& items) {
  std::size_t n = 0;
  for (const auto& a : items)
    if (a.kind != Kind::Verbatim) n += sym::op_count(a.value);
  return n;
}

// True when no output between positions (from, to) overwrites a variable read by e.
bool movable(const std::vector<Assignment>& items, std::size_t from, std::size_t to, const Expr& e) {
  std::vector<std::string> vars = sym::free_vars(e);
  for (std::size_t k = from + 1; k < to; ++k)
    if (items[k].kind == Kind::Output && std::find(vars.begin(), vars.end(), items[k].name) != vars.end())
      return false;
  return true;
}

struct Pass {
  const sym::AssumptionSet& a;

  bool fold(std::vector<Assignment>& items) {
    bool changed = false;
    for (auto& it : items)
      each_expr(it, [&](Expr& e) {
        Expr s = sym::simplify(e, a);
        if (!(s == e)) {
          e = s;
          changed = true;
        }
      });
    return changed;
  }

  bool dead_code(std::vector<Assignment>& items) {
    std::set<std::string> live;
    std::vector<bool> keep(items.size(), false);
    for (std::size_t k = items.size(); k-- > 0;) {
      const Assignment& it = items[k];
      if (is_symbol(it) && !live.count(it.name)) continue;
      keep[k] = true;
      each_expr(it, [&](const Expr& e) {
        for (const auto& v : sym::free_vars(e)) live.insert(v);
      });
    }
    std::vector<Assignment> out;
    for (std::size_t k = 0; k < items.size(); ++k)
      if (keep[k]) out.push_back(std::move(items[k]));
    bool changed = out.size() != items.size();
    items = std::move(out);
    return changed;
  }

  // Substitutes definition k into all later readers when allowed.
  bool substitute_at(std::vector<Assignment>& items, std::size_t k) {
    const std::string name = items[k].name;
    const Expr value = items[k].value;
    std::map<std::string, Expr> m{{name, value}};
    std::vector<Assignment> trial = items;
    for (std::size_t j = k + 1; j < trial.size(); ++j) {
      bool reads = false;
      each_expr(trial[j], [&](const Expr& e) {
        auto fv = sym::free_vars(e);
        reads = reads || std::find(fv.begin(), fv.end(), name) != fv.end();
      });
      if (!reads) continue;
      if (!movable(trial, k, j, value)) return false;
      each_expr(trial[j], [&](Expr& e) { e = sym::simplify(sym::substitute(e, m), a); });
    }
    trial.erase(trial.begin() + static_cast<std::ptrdiff_t>(k));
    if (total_ops(trial) > total_ops(items)) return false;
    items = std::move(trial);
    return true;
  }

  bool copy_propagate(std::vector<Assignment>& items) {
    bool changed = false;
    for (std::size_t k = 0; k < items.size();) {
      if (is_symbol(items[k]) && items[k].value.trivial() && substitute_at(items, k)) {
        changed = true;
        continue;
      }
      ++k;
    }
    return changed;
  }

  bool inline_single_use(std::vector<Assignment>& items) {
    bool changed = false;
    auto uses = uses_of(items);
    for (std::size_t k = 0; k < items.size();) {
      if (is_symbol(items[k]) && uses[items[k].name] == 1) {
        std::string name = items[k].name;
        if (substitute_at(items, k)) {
          changed = true;
          uses = uses_of(items);
          continue;
        }
      }
      ++k;
    }
    return changed;
  }

  // ---- common subexpressions

  struct Cand {
    Expr norm;
    int count = 0;
    bool collided = false;
    std::string name;
  };

  static Number leading(const Expr& e) {
    if (e.kind() == sym::Kind::Mul) return e.number();
    return Number(1);
  }

  // Returns the sign- or coefficient-free form of a candidate node and the factor taken out.
  static std::optional<std::pair<Expr, Number>> normalize(const Expr& e) {
    switch (e.kind()) {
      case sym::Kind::Func: return std::pair{e, Number(1)};
      case sym::Kind::Mul: {
        if (e.number().is_one()) {
          if (sym::op_count(e) == 0) return std::nullopt;
          return std::pair{e, Number(1)};
        }
        std::vector<Expr> fs;
        for (const auto& f : e.factors()) fs.push_back(sym::pow(f.base, f.exp));
        Expr mono = sym::mul(fs);
        if (sym::op_count(mono) == 0 || mono.kind() != sym::Kind::Mul) return std::nullopt;
        return std::pair{mono, e.number()};
      }
      case sym::Kind::Add: {
        const auto& t = e.args();
        Number lead = t.empty() ? e.number() : leading(t[0]);
        if (lead.negative()) return std::pair{-e, Number(-1)};
        return std::pair{e, Number(1)};
      }
      default: return std::nullopt;
    }
  }

  void count_nodes(const Expr& e, std::unordered_map<std::uint64_t, Cand>& cands) {
    if (auto n = normalize(e)) {
      Cand& c = cands[n->first.key()];
      if (c.count == 0) c.norm = n->first;
      else if (!(c.norm == n->first)) c.collided = true;
      ++c.count;
    }
    switch (e.kind()) {
      case sym::Kind::Func: count_nodes(e.args()[0], cands); break;
      case sym::Kind::Mul:
        for (const auto& f : e.factors()) count_nodes(f.base, cands);
        break;
      case sym::Kind::Add:
        for (const auto& t : e.args()) count_nodes(t, cands);
        break;
      default: break;
    }
  }

  Expr replace(const Expr& e, const std::unordered_map<std::uint64_t, Cand>& chosen, const Cand* self) {
    if (auto n = normalize(e)) {
      auto it = chosen.find(n->first.key());
      if (it != chosen.end() && &it->second != self && it->second.norm == n->first)
        return Expr(n->second) * Expr::var(it->second.name);
    }
    switch (e.kind()) {
      case sym::Kind::Func: {
        Expr x = replace(e.args()[0], chosen, self);
        return x == e.args()[0] ? e : Expr::func(e.name(), {x});
      }
      case sym::Kind::Mul: {
        std::vector<Expr> fs{Expr(e.number())};
        bool changed = false;
        for (const auto& f : e.factors()) {
          Expr b = replace(f.base, chosen, self);
          changed = changed || !(b == f.base);
          fs.push_back(sym::pow(b, f.exp));
        }
        return changed ? sym::mul(fs) : e;
      }
      case sym::Kind::Add: {
        std::vector<Expr> ts{Expr(e.number())};
        bool changed = false;
        for (const auto& t : e.args()) {
          Expr b = replace(t, chosen, self);
          changed = changed || !(b == t);
          ts.push_back(b);
        }
        return changed ? sym::add(ts) : e;
      }
      default: return e;
    }
  }

  bool cse(std::vector<Assignment>& items, std::function<std::string()> fresh) {
    std::unordered_map<std::uint64_t, Cand> cands;
    for (const auto& it : items) each_expr(it, [&](const Expr& e) { count_nodes(e, cands); });
    std::unordered_map<std::uint64_t, Cand> chosen;
    for (auto& [k, c] : cands)
      if (c.count >= 2 && !c.collided) chosen.emplace(k, c);
    if (chosen.empty()) return false;
    // deterministic naming in canonical order
    std::vector<Cand*> order;
    for (auto& [k, c] : chosen) order.push_back(&c);
    std::sort(order.begin(), order.end(), [](const Cand* x, const Cand* y) { return sym::compare(x->norm, y->norm) < 0; });
    for (Cand* c : order) c->name = fresh();

    std::vector<Assignment> body = items;
    for (auto& it : body) each_expr(it, [&](Expr& e) { e = replace(e, chosen, nullptr); });
    std::map<std::string, Assignment> defs;
    for (Cand* c : order) {
      Assignment d;
      d.kind = Kind::Temp;
      d.name = c->name;
      d.value = replace(c->norm, chosen, c);
      defs[c->name] = d;
    }
    // place each new definition before its first reader, dependencies first
    std::vector<Assignment> out;
    std::set<std::string> placed;
    std::function<void(const Expr&)> place = [&](const Expr& e) {
      for (const auto& v : sym::free_vars(e)) {
        auto d = defs.find(v);
        if (d == defs.end() || placed.count(v)) continue;
        placed.insert(v);
        place(d->second.value);
        out.push_back(d->second);
      }
    };
    for (auto& it : body) {
      each_expr(it, [&](const Expr& e) { place(e); });
      out.push_back(std::move(it));
    }
    dead_code(out);
    if (total_ops(out) >= total_ops(items)) return false;
    items = std::move(out);
    return true;
  }
};

}  // namespace

ExprSequence optimize(const ExprSequence& seq, const sym::AssumptionSet& assumptions) {
  std::vector<Assignment> items = seq.items;
  std::set<std::string> names;
  for (const auto& it : items) {
    names.insert(it.name);
    each_expr(it, [&](const Expr& e) {
      for (const auto& v : sym::free_vars(e)) names.insert(v);
    });
  }
  int counter = 0;
  auto fresh = [&] {
    std::string n;
    do n = "cse" + std::to_string(++counter);
    while (names.count(n));
    names.insert(n);
    return n;
  };
  Pass p{assumptions};
  auto guarded = [&](auto&& pass) {
    std::vector<Assignment> before = items;
    std::size_t ops = total_ops(items);
    bool changed = pass(items);
    if (total_ops(items) > ops) {
      items = std::move(before);
      return false;
    }
    return changed;
  };
  for (int round = 0; round < 12; ++round) {
    bool changed = false;
    changed |= guarded([&](auto& v) { return p.fold(v); });
    changed |= guarded([&](auto& v) { return p.dead_code(v); });
    changed |= guarded([&](auto& v) { return p.copy_propagate(v); });
    changed |= guarded([&](auto& v) { return p.inline_single_use(v); });
    changed |= guarded([&](auto& v) { return p.cse(v, fresh); });
    if (!changed) break;
  }

  // renumber symbols in definition order
  std::set<std::string> reserved;
  for (const auto& it : items) {
    if (it.kind == Kind::Output) reserved.insert(it.name);
    each_expr(it, [&](const Expr& e) {
      for (const auto& v : sym::free_vars(e)) reserved.insert(v);
    });
  }
  std::set<std::string> symbols;
  for (const auto& it : items)
    if (is_symbol(it)) symbols.insert(it.name);
  for (const auto& s : symbols) reserved.erase(s);
  std::map<std::string, Expr> ren;
  int n = 0;
  for (auto& it : items) {
    if (!is_symbol(it)) continue;
    std::string name;
    do {
      std::string num = std::to_string(++n);
      name = "var" + std::string(num.size() < 4 ? 4 - num.size() : 0, '0') + num;
    } while (reserved.count(name));
    ren[it.name] = Expr::var(name);
    it.name = name;
  }
  for (auto& it : items) each_expr(it, [&](Expr& e) { e = sym::substitute(e, ren); });
  ExprSequence out;
  out.items = std::move(items);
  return out;
}

}  // namespace gamacro::codegen
