#include "loopsum/expr.hpp"

#include <algorithm>
#include <functional>
#include <sstream>
#include <unordered_map>

namespace loopsum {

namespace {

std::size_t mix(std::size_t seed, std::size_t v) {
  return seed ^ (v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
}

int cmp_int(Int a, Int b) { return a < b ? -1 : (a > b ? 1 : 0); }

int degree(const std::vector<Factor>& mono) {
  int d = 0;
  for (const auto& f : mono) d += f.power;
  return d;
}

int compare_mono(const std::vector<Factor>& a, const std::vector<Factor>& b) {
  if (int c = cmp_int(degree(a), degree(b)); c != 0) return c;
  std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (int c = compare(a[i].atom, b[i].atom); c != 0) return c;
    if (int c = cmp_int(a[i].power, b[i].power); c != 0) return c;
  }
  return cmp_int(static_cast<Int>(a.size()), static_cast<Int>(b.size()));
}

std::shared_ptr<Node> make_node(Kind kind) {
  auto n = std::make_shared<Node>();
  n->kind = kind;
  return n;
}

Expr finish(std::shared_ptr<Node> n) {
  std::size_t h = std::hash<int>{}(static_cast<int>(n->kind));
  h = mix(h, std::hash<Int>{}(n->value));
  if (n->kind == Kind::Sym) {
    h = mix(h, static_cast<std::size_t>(n->sym.kind));
    h = mix(h, std::hash<std::string>{}(n->sym.name));
  }
  for (const auto& t : n->terms) {
    h = mix(h, std::hash<Int>{}(t.coef));
    for (const auto& f : t.mono) {
      h = mix(h, f.atom->hash);
      h = mix(h, static_cast<std::size_t>(f.power));
    }
  }
  for (const auto& a : n->args) h = mix(h, a->hash);
  if (n->fn) h = mix(h, std::hash<std::string>{}(n->fn->name()));
  n->hash = h;
  return n;
}

std::vector<Factor> mono_mul(const std::vector<Factor>& a, const std::vector<Factor>& b) {
  std::vector<Factor> out;
  out.reserve(a.size() + b.size());
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && compare(a[i].atom, b[j].atom) < 0)) {
      out.push_back(a[i++]);
    } else if (i == a.size() || compare(b[j].atom, a[i].atom) < 0) {
      out.push_back(b[j++]);
    } else {
      out.push_back({a[i].atom, a[i].power + b[j].power});
      ++i;
      ++j;
    }
  }
  return out;
}

Expr make_cmp(Kind kind, const Expr& operand) {
  std::vector<Term> ts = terms_of(operand);
  Int c = 0;
  std::vector<Term> lin;
  for (auto& t : ts) {
    if (t.mono.empty()) {
      c = t.coef;
    } else {
      lin.push_back(std::move(t));
    }
  }
  if (lin.empty()) {
    bool v = kind == Kind::Ge ? c >= 0 : (kind == Kind::Eq ? c == 0 : c != 0);
    return truth(v);
  }
  Int g = 0;
  for (const auto& t : lin) g = arith::gcd(g, t.coef);
  if (kind == Kind::Ge) {
    for (auto& t : lin) t.coef /= g;
    c = arith::floor_div(c, g);
  } else {
    if (c % g != 0) return truth(kind == Kind::Ne);
    for (auto& t : lin) t.coef /= g;
    c /= g;
    // Sign of an (in)equality is arbitrary; fix the leading coefficient positive.
    std::sort(lin.begin(), lin.end(),
              [](const Term& x, const Term& y) { return compare_mono(x.mono, y.mono) < 0; });
    if (lin.front().coef < 0) {
      for (auto& t : lin) t.coef = arith::neg(t.coef);
      c = arith::neg(c);
    }
  }
  if (c != 0) lin.push_back(Term{c, {}});
  auto n = make_node(kind);
  n->args.push_back(from_terms(std::move(lin)));
  return finish(std::move(n));
}

Expr make_nary(Kind kind, std::vector<Expr> ops) {
  std::vector<Expr> flat;
  for (auto& o : ops) {
    if (o->kind == kind) {
      flat.insert(flat.end(), o->args.begin(), o->args.end());
    } else {
      flat.push_back(std::move(o));
    }
  }
  std::sort(flat.begin(), flat.end(), ExprLess{});
  flat.erase(std::unique(flat.begin(), flat.end(), [](const Expr& a, const Expr& b) { return equal(a, b); }),
             flat.end());
  if (flat.size() == 1) return flat.front();
  auto n = make_node(kind);
  n->args = std::move(flat);
  return finish(std::move(n));
}

Expr minmax(Kind kind, std::vector<Expr> ops) {
  if (ops.empty()) throw std::invalid_argument("min/max of nothing");
  std::vector<Expr> rest;
  std::optional<Int> folded;
  std::vector<Expr> flat;
  for (auto& o : ops) {
    if (o->kind == kind) {
      flat.insert(flat.end(), o->args.begin(), o->args.end());
    } else {
      flat.push_back(o);
    }
  }
  for (auto& o : flat) {
    if (o->is_const()) {
      if (!folded) {
        folded = o->value;
      } else {
        folded = kind == Kind::Min ? std::min(*folded, o->value) : std::max(*folded, o->value);
      }
    } else {
      rest.push_back(o);
    }
  }
  if (folded) rest.push_back(constant(*folded));
  return make_nary(kind, std::move(rest));
}

}  // namespace

std::string to_string(const SymKey& key) {
  switch (key.kind) {
    case SymKind::Var:
      return key.name;
    case SymKind::Pre:
      return key.name + "_0";
    case SymKind::Iter:
      return key.name;
    case SymKind::Aux:
      return "%" + key.name;
  }
  return key.name;
}

int compare(const Expr& a, const Expr& b) {
  if (a.get() == b.get()) return 0;
  if (int c = cmp_int(static_cast<int>(a->kind), static_cast<int>(b->kind)); c != 0) return c;
  switch (a->kind) {
    case Kind::Const:
    case Kind::BoolConst:
      return cmp_int(a->value, b->value);
    case Kind::Sym:
      if (a->sym < b->sym) return -1;
      if (b->sym < a->sym) return 1;
      return 0;
    case Kind::Poly: {
      std::size_t n = std::min(a->terms.size(), b->terms.size());
      for (std::size_t i = 0; i < n; ++i) {
        if (int c = compare_mono(a->terms[i].mono, b->terms[i].mono); c != 0) return c;
        if (int c = cmp_int(a->terms[i].coef, b->terms[i].coef); c != 0) return c;
      }
      return cmp_int(static_cast<Int>(a->terms.size()), static_cast<Int>(b->terms.size()));
    }
    case Kind::Call:
      if (int c = a->fn->name().compare(b->fn->name()); c != 0) return c < 0 ? -1 : 1;
      break;
    case Kind::FloorDiv:
    case Kind::Mod:
      if (int c = cmp_int(a->value, b->value); c != 0) return c;
      break;
    default:
      break;
  }
  if (int c = cmp_int(static_cast<Int>(a->args.size()), static_cast<Int>(b->args.size())); c != 0) return c;
  for (std::size_t i = 0; i < a->args.size(); ++i) {
    if (int c = compare(a->args[i], b->args[i]); c != 0) return c;
  }
  return 0;
}

bool equal(const Expr& a, const Expr& b) {
  if (a.get() == b.get()) return true;
  if (a->hash != b->hash) return false;
  return compare(a, b) == 0;
}

// ---- integer builders -------------------------------------------------------

Expr constant(Int v) {
  auto n = make_node(Kind::Const);
  n->value = v;
  return finish(std::move(n));
}

Expr symbol(SymKey key) {
  auto n = make_node(Kind::Sym);
  n->sym = std::move(key);
  return finish(std::move(n));
}

Expr var(const std::string& name) { return symbol({SymKind::Var, name}); }
Expr pre(const std::string& name) { return symbol({SymKind::Pre, name}); }
Expr iter(const std::string& name) { return symbol({SymKind::Iter, name}); }
Expr aux(const std::string& name) { return symbol({SymKind::Aux, name}); }

std::vector<Term> terms_of(const Expr& e) {
  if (e->is_bool()) throw std::invalid_argument("boolean used as integer: " + to_string(e));
  if (e->kind == Kind::Const) {
    if (e->value == 0) return {};
    return {Term{e->value, {}}};
  }
  if (e->kind == Kind::Poly) return e->terms;
  return {Term{1, {Factor{e, 1}}}};
}

Expr from_terms(std::vector<Term> terms) {
  std::sort(terms.begin(), terms.end(),
            [](const Term& x, const Term& y) { return compare_mono(x.mono, y.mono) < 0; });
  std::vector<Term> merged;
  for (auto& t : terms) {
    if (!merged.empty() && compare_mono(merged.back().mono, t.mono) == 0) {
      merged.back().coef = arith::add(merged.back().coef, t.coef);
    } else {
      merged.push_back(std::move(t));
    }
  }
  std::erase_if(merged, [](const Term& t) { return t.coef == 0; });
  if (merged.empty()) return constant(0);
  if (merged.size() == 1) {
    const Term& t = merged.front();
    if (t.mono.empty()) return constant(t.coef);
    if (t.coef == 1 && t.mono.size() == 1 && t.mono.front().power == 1) return t.mono.front().atom;
  }
  auto n = make_node(Kind::Poly);
  n->terms = std::move(merged);
  return finish(std::move(n));
}

Expr operator+(const Expr& a, const Expr& b) {
  if (a->is_const() && b->is_const()) return constant(arith::add(a->value, b->value));
  auto ts = terms_of(a);
  auto tb = terms_of(b);
  ts.insert(ts.end(), tb.begin(), tb.end());
  return from_terms(std::move(ts));
}

Expr operator-(const Expr& a) {
  if (a->is_const()) return constant(arith::neg(a->value));
  auto ts = terms_of(a);
  for (auto& t : ts) t.coef = arith::neg(t.coef);
  return from_terms(std::move(ts));
}

Expr operator-(const Expr& a, const Expr& b) { return a + (-b); }

Expr operator*(const Expr& a, const Expr& b) {
  if (a->is_const() && b->is_const()) return constant(arith::mul(a->value, b->value));
  auto ta = terms_of(a);
  auto tb = terms_of(b);
  std::vector<Term> out;
  out.reserve(ta.size() * tb.size());
  for (const auto& x : ta) {
    for (const auto& y : tb) out.push_back(Term{arith::mul(x.coef, y.coef), mono_mul(x.mono, y.mono)});
  }
  return from_terms(std::move(out));
}

Expr operator+(const Expr& a, Int b) { return a + constant(b); }
Expr operator-(const Expr& a, Int b) { return a - constant(b); }
Expr operator*(Int a, const Expr& b) { return constant(a) * b; }

Expr floor_div(const Expr& e, Int k) {
  if (k == 0) throw DivisionByZero();
  if (k < 0) return floor_div(-e, arith::neg(k));
  if (k == 1) return e;
  if (e->is_const()) return constant(arith::floor_div(e->value, k));
  std::vector<Term> outside;
  std::vector<Term> inside;
  for (auto& t : terms_of(e)) {
    if (t.mono.empty()) {
      Int q = arith::floor_div(t.coef, k);
      Int r = arith::floor_mod(t.coef, k);
      if (q != 0) outside.push_back(Term{q, {}});
      if (r != 0) inside.push_back(Term{r, {}});
    } else if (t.coef % k == 0) {
      outside.push_back(Term{t.coef / k, t.mono});
    } else {
      inside.push_back(std::move(t));
    }
  }
  Expr out = from_terms(std::move(outside));
  if (inside.empty()) return out;
  Int g = 0;
  for (const auto& t : inside) g = arith::gcd(g, t.coef);
  g = arith::gcd(g, k);
  if (g > 1) {
    for (auto& t : inside) t.coef /= g;
    k /= g;
  }
  if (k == 1) return out + from_terms(std::move(inside));
  auto n = make_node(Kind::FloorDiv);
  n->value = k;
  n->args.push_back(from_terms(std::move(inside)));
  return out + finish(std::move(n));
}

Expr mod(const Expr& e, Int k) {
  if (k == 0) throw DivisionByZero();
  if (k < 0) return -mod(-e, arith::neg(k));
  if (k == 1) return constant(0);
  if (e->is_const()) return constant(arith::floor_mod(e->value, k));
  std::vector<Term> inside;
  for (auto& t : terms_of(e)) {
    Int r = arith::floor_mod(t.coef, k);
    if (r != 0) inside.push_back(Term{r, t.mono});
  }
  if (inside.empty()) return constant(0);
  if (inside.size() == 1 && inside.front().mono.empty()) return constant(inside.front().coef);
  Int g = 0;
  for (const auto& t : inside) g = arith::gcd(g, t.coef);
  g = arith::gcd(g, k);
  Int scale = 1;
  if (g > 1) {
    for (auto& t : inside) t.coef /= g;
    k /= g;
    scale = g;
  }
  Expr inner = from_terms(std::move(inside));
  if (k == 1) return constant(0);
  Expr m;
  if (inner->is_const()) {
    m = constant(arith::floor_mod(inner->value, k));
  } else {
    auto n = make_node(Kind::Mod);
    n->value = k;
    n->args.push_back(std::move(inner));
    m = finish(std::move(n));
  }
  return scale == 1 ? m : constant(scale) * m;
}

Expr pow(const Expr& base, const Expr& exponent) {
  if (exponent->is_const()) {
    if (exponent->value < 0) throw std::domain_error("negative exponent");
    if (base->is_const()) return constant(arith::ipow(base->value, exponent->value));
    if (exponent->value == 0) return constant(1);
    Expr r = base;
    for (Int i = 1; i < exponent->value; ++i) r = r * base;
    return r;
  }
  if (base->is_const() && base->value == 1) return constant(1);
  auto n = make_node(Kind::Pow);
  n->args = {base, exponent};
  return finish(std::move(n));
}

Expr min(std::vector<Expr> operands) { return minmax(Kind::Min, std::move(operands)); }
Expr max(std::vector<Expr> operands) { return minmax(Kind::Max, std::move(operands)); }

Expr ite(const Expr& cond, const Expr& then_e, const Expr& else_e) {
  if (!cond->is_bool()) throw std::invalid_argument("ite condition must be boolean");
  if (cond->is_true()) return then_e;
  if (cond->is_false()) return else_e;
  if (equal(then_e, else_e)) return then_e;
  auto n = make_node(Kind::Ite);
  n->args = {cond, then_e, else_e};
  return finish(std::move(n));
}

Expr call(std::shared_ptr<const Function> fn, std::vector<Expr> args) {
  auto n = make_node(Kind::Call);
  n->fn = std::move(fn);
  n->args = std::move(args);
  return finish(std::move(n));
}

// ---- boolean builders -------------------------------------------------------

Expr truth(bool b) {
  static const Expr t = [] {
    auto n = make_node(Kind::BoolConst);
    n->value = 1;
    return finish(std::move(n));
  }();
  static const Expr f = [] {
    auto n = make_node(Kind::BoolConst);
    n->value = 0;
    return finish(std::move(n));
  }();
  return b ? t : f;
}

Expr ge(const Expr& a, const Expr& b) { return make_cmp(Kind::Ge, a - b); }
Expr gt(const Expr& a, const Expr& b) { return make_cmp(Kind::Ge, a - b - constant(1)); }
Expr le(const Expr& a, const Expr& b) { return ge(b, a); }
Expr lt(const Expr& a, const Expr& b) { return gt(b, a); }
Expr eq(const Expr& a, const Expr& b) { return make_cmp(Kind::Eq, a - b); }
Expr ne(const Expr& a, const Expr& b) { return make_cmp(Kind::Ne, a - b); }

Expr land(std::vector<Expr> operands) {
  std::vector<Expr> kept;
  for (auto& o : operands) {
    if (!o->is_bool()) throw std::invalid_argument("conjunction of non-boolean");
    if (o->is_false()) return truth(false);
    if (o->is_true()) continue;
    kept.push_back(std::move(o));
  }
  if (kept.empty()) return truth(true);
  return make_nary(Kind::And, std::move(kept));
}

Expr lor(std::vector<Expr> operands) {
  std::vector<Expr> kept;
  for (auto& o : operands) {
    if (!o->is_bool()) throw std::invalid_argument("disjunction of non-boolean");
    if (o->is_true()) return truth(true);
    if (o->is_false()) continue;
    kept.push_back(std::move(o));
  }
  if (kept.empty()) return truth(false);
  return make_nary(Kind::Or, std::move(kept));
}

Expr land(const Expr& a, const Expr& b) { return land(std::vector<Expr>{a, b}); }
Expr lor(const Expr& a, const Expr& b) { return lor(std::vector<Expr>{a, b}); }

Expr lnot(const Expr& e) {
  switch (e->kind) {
    case Kind::BoolConst:
      return truth(e->value == 0);
    case Kind::Ge:
      return make_cmp(Kind::Ge, -e->args[0] - constant(1));
    case Kind::Eq:
      return make_cmp(Kind::Ne, e->args[0]);
    case Kind::Ne:
      return make_cmp(Kind::Eq, e->args[0]);
    case Kind::And: {
      std::vector<Expr> ops;
      for (const auto& a : e->args) ops.push_back(lnot(a));
      return lor(std::move(ops));
    }
    case Kind::Or: {
      std::vector<Expr> ops;
      for (const auto& a : e->args) ops.push_back(lnot(a));
      return land(std::move(ops));
    }
    default:
      throw std::invalid_argument("negation of non-boolean: " + to_string(e));
  }
}

Expr nonzero(const Expr& e) { return ne(e, constant(0)); }

const Expr& atom_operand(const Expr& atom) {
  if (atom->kind != Kind::Ge && atom->kind != Kind::Eq && atom->kind != Kind::Ne) {
    throw std::invalid_argument("not a comparison atom");
  }
  return atom->args[0];
}

std::optional<LinearSplit> split_linear(const Expr& e, const SymKey& x) {
  std::vector<Term> coef;
  std::vector<Term> rest;
  for (const auto& t : terms_of(e)) {
    int hits = 0;
    std::vector<Factor> others;
    for (const auto& f : t.mono) {
      if (f.atom->kind == Kind::Sym && f.atom->sym == x) {
        if (f.power != 1) return std::nullopt;
        ++hits;
      } else {
        if (mentions(f.atom, x)) return std::nullopt;
        others.push_back(f);
      }
    }
    if (hits == 0) {
      rest.push_back(t);
    } else {
      coef.push_back(Term{t.coef, std::move(others)});
    }
  }
  return LinearSplit{from_terms(std::move(coef)), from_terms(std::move(rest))};
}

// ---- traversal --------------------------------------------------------------

namespace {

Expr rebuild(const Expr& e, const std::function<std::optional<Expr>(const SymKey&)>& mapping,
             std::unordered_map<const Node*, Expr>& memo) {
  if (auto it = memo.find(e.get()); it != memo.end()) return it->second;
  auto sub = [&](const Expr& x) { return rebuild(x, mapping, memo); };
  Expr out;
  switch (e->kind) {
    case Kind::Const:
    case Kind::BoolConst:
      out = e;
      break;
    case Kind::Sym:
      if (auto m = mapping(e->sym)) {
        out = *m;
      } else {
        out = e;
      }
      break;
    case Kind::Poly: {
      Expr acc = constant(0);
      for (const auto& t : e->terms) {
        Expr prod = constant(t.coef);
        for (const auto& f : t.mono) {
          Expr a = sub(f.atom);
          for (int i = 0; i < f.power; ++i) prod = prod * a;
        }
        acc = acc + prod;
      }
      out = acc;
      break;
    }
    case Kind::FloorDiv:
      out = floor_div(sub(e->args[0]), e->value);
      break;
    case Kind::Mod:
      out = mod(sub(e->args[0]), e->value);
      break;
    case Kind::Pow:
      out = pow(sub(e->args[0]), sub(e->args[1]));
      break;
    case Kind::Min:
    case Kind::Max: {
      std::vector<Expr> ops;
      for (const auto& a : e->args) ops.push_back(sub(a));
      out = e->kind == Kind::Min ? min(std::move(ops)) : max(std::move(ops));
      break;
    }
    case Kind::Ite:
      out = ite(sub(e->args[0]), sub(e->args[1]), sub(e->args[2]));
      break;
    case Kind::Call: {
      std::vector<Expr> ops;
      for (const auto& a : e->args) ops.push_back(sub(a));
      out = call(e->fn, std::move(ops));
      break;
    }
    case Kind::Ge:
    case Kind::Eq:
    case Kind::Ne:
      out = make_cmp(e->kind, sub(e->args[0]));
      break;
    case Kind::And:
    case Kind::Or: {
      std::vector<Expr> ops;
      for (const auto& a : e->args) ops.push_back(sub(a));
      out = e->kind == Kind::And ? land(std::move(ops)) : lor(std::move(ops));
      break;
    }
  }
  memo.emplace(e.get(), out);
  return out;
}

}  // namespace

Expr substitute(const Expr& e, const std::function<std::optional<Expr>(const SymKey&)>& mapping) {
  std::unordered_map<const Node*, Expr> memo;
  return rebuild(e, mapping, memo);
}

Expr substitute(const Expr& e, const SymMap& mapping) {
  if (mapping.empty()) return e;
  return substitute(e, [&](const SymKey& k) -> std::optional<Expr> {
    auto it = mapping.find(k);
    if (it == mapping.end()) return std::nullopt;
    return it->second;
  });
}

void visit(const Expr& e, const std::function<void(const Expr&)>& fn) {
  for (const auto& t : e->terms) {
    for (const auto& f : t.mono) visit(f.atom, fn);
  }
  for (const auto& a : e->args) visit(a, fn);
  fn(e);
}

std::set<SymKey> free_symbols(const Expr& e) {
  std::set<SymKey> out;
  visit(e, [&](const Expr& n) {
    if (n->kind == Kind::Sym) out.insert(n->sym);
  });
  return out;
}

bool mentions(const Expr& e, const SymKey& key) {
  if (e->kind == Kind::Sym) return e->sym == key;
  for (const auto& t : e->terms) {
    for (const auto& f : t.mono) {
      if (mentions(f.atom, key)) return true;
    }
  }
  for (const auto& a : e->args) {
    if (mentions(a, key)) return true;
  }
  return false;
}

// ---- evaluation -------------------------------------------------------------

UnboundSymbol::UnboundSymbol(const SymKey& key) : std::runtime_error("unbound symbol " + to_string(key)) {}

Int eval_int(const Expr& e, const Valuation& env) {
  switch (e->kind) {
    case Kind::Const:
      return e->value;
    case Kind::Sym: {
      auto it = env.find(e->sym);
      if (it == env.end()) throw UnboundSymbol(e->sym);
      return it->second;
    }
    case Kind::Poly: {
      Int acc = 0;
      for (const auto& t : e->terms) {
        Int prod = t.coef;
        for (const auto& f : t.mono) {
          Int a = eval_int(f.atom, env);
          for (int i = 0; i < f.power; ++i) prod = arith::mul(prod, a);
        }
        acc = arith::add(acc, prod);
      }
      return acc;
    }
    case Kind::FloorDiv:
      return arith::floor_div(eval_int(e->args[0], env), e->value);
    case Kind::Mod:
      return arith::floor_mod(eval_int(e->args[0], env), e->value);
    case Kind::Pow:
      return arith::ipow(eval_int(e->args[0], env), eval_int(e->args[1], env));
    case Kind::Min:
    case Kind::Max: {
      Int best = eval_int(e->args[0], env);
      for (std::size_t i = 1; i < e->args.size(); ++i) {
        Int v = eval_int(e->args[i], env);
        best = e->kind == Kind::Min ? std::min(best, v) : std::max(best, v);
      }
      return best;
    }
    case Kind::Ite:
      return eval_bool(e->args[0], env) ? eval_int(e->args[1], env) : eval_int(e->args[2], env);
    case Kind::Call: {
      std::vector<Int> vals;
      vals.reserve(e->args.size());
      for (const auto& a : e->args) vals.push_back(eval_int(a, env));
      return e->fn->apply(vals);
    }
    default:
      throw std::invalid_argument("boolean evaluated as integer: " + to_string(e));
  }
}

bool eval_bool(const Expr& e, const Valuation& env) {
  switch (e->kind) {
    case Kind::BoolConst:
      return e->value != 0;
    case Kind::Ge:
      return eval_int(e->args[0], env) >= 0;
    case Kind::Eq:
      return eval_int(e->args[0], env) == 0;
    case Kind::Ne:
      return eval_int(e->args[0], env) != 0;
    case Kind::And:
      for (const auto& a : e->args) {
        if (!eval_bool(a, env)) return false;
      }
      return true;
    case Kind::Or:
      for (const auto& a : e->args) {
        if (eval_bool(a, env)) return true;
      }
      return false;
    default:
      throw std::invalid_argument("integer evaluated as boolean: " + to_string(e));
  }
}

// ---- classification ---------------------------------------------------------

std::string to_string(Tier t) {
  switch (t) {
    case Tier::Linear:
      return "LINEAR";
    case Tier::Polynomial:
      return "POLYNOMIAL";
    case Tier::Opaque:
      return "OPAQUE";
  }
  return "?";
}

Tier tier_of(const Expr& e) {
  Tier t = Tier::Linear;
  visit(e, [&](const Expr& n) {
    switch (n->kind) {
      case Kind::FloorDiv:
      case Kind::Mod:
      case Kind::Pow:
      case Kind::Min:
      case Kind::Max:
      case Kind::Ite:
      case Kind::Call:
        if (!free_symbols(n).empty()) t = Tier::Opaque;
        break;
      case Kind::Poly:
        for (const auto& term : n->terms) {
          if (degree(term.mono) > 1 && t == Tier::Linear) t = Tier::Polynomial;
        }
        break;
      default:
        break;
    }
  });
  return t;
}

// ---- printing ---------------------------------------------------------------

namespace {

std::string print_atom(const Expr& e);

std::string print_mono(const std::vector<Factor>& mono) {
  std::string out;
  for (std::size_t i = 0; i < mono.size(); ++i) {
    if (i) out += "*";
    std::string a = print_atom(mono[i].atom);
    if (mono[i].atom->kind == Kind::Mod) a = "(" + a + ")";
    out += a;
    if (mono[i].power != 1) out += "^" + std::to_string(mono[i].power);
  }
  return out;
}

// Non-constant terms in canonical order followed by the constant.
std::string print_terms(const std::vector<Term>& terms) {
  std::vector<const Term*> order;
  const Term* konst = nullptr;
  for (const auto& t : terms) {
    if (t.mono.empty()) {
      konst = &t;
    } else {
      order.push_back(&t);
    }
  }
  if (konst) order.push_back(konst);
  if (order.empty()) return "0";
  std::string out;
  bool first = true;
  for (const Term* t : order) {
    Int c = t->coef;
    bool negative = c < 0;
    Int mag = negative ? arith::neg(c) : c;
    if (first) {
      if (negative) out += "-";
    } else {
      out += negative ? " - " : " + ";
    }
    first = false;
    if (t->mono.empty()) {
      out += std::to_string(mag);
    } else {
      if (mag != 1) out += std::to_string(mag) + "*";
      out += print_mono(t->mono);
    }
  }
  return out;
}

std::string wrap(const Expr& e) {
  std::string s = to_string(e);
  if (e->kind == Kind::Poly || (e->kind == Kind::Const && e->value < 0)) return "(" + s + ")";
  return s;
}

std::string print_cmp(const Expr& atom) {
  std::vector<Term> lin;
  Int c = 0;
  for (const auto& t : terms_of(atom->args[0])) {
    if (t.mono.empty()) {
      c = t.coef;
    } else {
      lin.push_back(t);
    }
  }
  std::string op;
  bool flip = !lin.empty() && lin.front().coef < 0;
  if (flip) {
    for (auto& t : lin) t.coef = arith::neg(t.coef);
    c = arith::neg(c);
  }
  switch (atom->kind) {
    case Kind::Ge:
      op = flip ? " <= " : " >= ";
      break;
    case Kind::Eq:
      op = " == ";
      break;
    default:
      op = " != ";
      break;
  }
  return print_terms(lin) + op + std::to_string(arith::neg(c));
}

std::string join_args(const std::vector<Expr>& args) {
  std::string out;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i) out += ", ";
    out += to_string(args[i]);
  }
  return out;
}

std::string print_atom(const Expr& e) {
  switch (e->kind) {
    case Kind::Sym:
      return to_string(e->sym);
    case Kind::FloorDiv:
      return "floor(" + wrap(e->args[0]) + "/" + std::to_string(e->value) + ")";
    case Kind::Mod:
      return wrap(e->args[0]) + " mod " + std::to_string(e->value);
    case Kind::Pow:
      return "pow(" + to_string(e->args[0]) + ", " + to_string(e->args[1]) + ")";
    case Kind::Min:
      return "min(" + join_args(e->args) + ")";
    case Kind::Max:
      return "max(" + join_args(e->args) + ")";
    case Kind::Ite:
      return "ite(" + join_args(e->args) + ")";
    case Kind::Call:
      return e->fn->name() + "(" + join_args(e->args) + ")";
    default:
      return to_string(e);
  }
}

}  // namespace

std::string to_string(const Expr& e) {
  switch (e->kind) {
    case Kind::Const:
      return std::to_string(e->value);
    case Kind::BoolConst:
      return e->value ? "true" : "false";
    case Kind::Poly:
      return print_terms(e->terms);
    case Kind::Ge:
    case Kind::Eq:
    case Kind::Ne:
      return print_cmp(e);
    case Kind::And:
    case Kind::Or: {
      std::string sep = e->kind == Kind::And ? " && " : " || ";
      std::string out;
      for (std::size_t i = 0; i < e->args.size(); ++i) {
        if (i) out += sep;
        bool paren = e->args[i]->kind == Kind::And || e->args[i]->kind == Kind::Or;
        out += paren ? "(" + to_string(e->args[i]) + ")" : to_string(e->args[i]);
      }
      return out;
    }
    default:
      return print_atom(e);
  }
}

}  // namespace loopsum
