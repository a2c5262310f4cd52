#include "loopsum/solver.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <unistd.h>

namespace loopsum {

std::set<SymKey> ConstraintSet::symbols() const {
  std::set<SymKey> out;
  for (const auto& c : constraints) {
    auto s = free_symbols(c);
    out.insert(s.begin(), s.end());
  }
  return out;
}

Tier ConstraintSet::tier() const {
  Tier t = Tier::Linear;
  for (const auto& c : constraints) t = std::max(t, tier_of(c));
  return t;
}

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Sat:
      return "SAT";
    case SolveStatus::Unsat:
      return "UNSAT";
    case SolveStatus::Unknown:
      return "UNKNOWN";
  }
  return "?";
}

namespace {

using Clock = std::chrono::steady_clock;

/// sum(a[i] * x[i]) + c >= 0
struct Lin {
  std::vector<Int> a;
  Int c = 0;

  bool operator<(const Lin& o) const { return std::tie(a, c) < std::tie(o.a, o.c); }
  bool operator==(const Lin& o) const = default;
};

struct Overflow {};

Int narrow(__int128 v) {
  if (v > std::numeric_limits<Int>::max() || v < std::numeric_limits<Int>::min()) throw Overflow{};
  return static_cast<Int>(v);
}

Int floor_div128(__int128 a, __int128 b) {
  __int128 q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return narrow(q);
}

// Divides by the gcd of the variable coefficients and tightens the constant,
// which is sound over the integers.
void tighten(Lin& l) {
  Int g = 0;
  for (Int v : l.a) g = std::gcd(g, v < 0 ? -v : v);
  if (g > 1) {
    for (Int& v : l.a) v /= g;
    l.c = floor_div128(l.c, g);
  }
}

bool is_constant(const Lin& l) {
  return std::all_of(l.a.begin(), l.a.end(), [](Int v) { return v == 0; });
}

/// Linear relaxation of a conjunction of atoms.
class Relaxation {
 public:
  explicit Relaxation(std::vector<SymKey> vars) : vars_(std::move(vars)) {
    for (std::size_t i = 0; i < vars_.size(); ++i) index_[vars_[i]] = static_cast<int>(i);
  }

  std::size_t search_vars() const { return vars_.size(); }
  std::size_t total_vars() const { return vars_.size() + aux_count_; }
  std::vector<Lin>& system() { return system_; }
  bool exact() const { return exact_; }

  // False when the atom is certainly unsatisfiable on its own.
  bool add_atom(const Expr& atom) {
    switch (atom->kind) {
      case Kind::Ge: {
        auto l = linearize(atom_operand(atom));
        if (!l) return true;
        push(*l);
        return true;
      }
      case Kind::Eq: {
        auto l = linearize(atom_operand(atom));
        if (!l) return true;
        Int g = 0;
        for (Int v : l->a) g = std::gcd(g, v < 0 ? -v : v);
        if (g == 0) return l->c == 0;
        if (l->c % g != 0 && !has_aux(*l)) return false;
        Lin neg = *l;
        for (Int& v : neg.a) v = narrow(-static_cast<__int128>(v));
        neg.c = narrow(-static_cast<__int128>(neg.c));
        push(*l);
        push(neg);
        return true;
      }
      default:
        // `!=` and boolean constants are left to the exact check.
        return true;
    }
  }

  void add_bound(const SymKey& s, Int lo, Int hi) {
    auto it = index_.find(s);
    if (it == index_.end()) return;
    Lin l;
    l.a.assign(total_vars(), 0);
    l.a[static_cast<std::size_t>(it->second)] = 1;
    l.c = narrow(-static_cast<__int128>(lo));
    push(l);
    Lin u;
    u.a.assign(total_vars(), 0);
    u.a[static_cast<std::size_t>(it->second)] = -1;
    u.c = hi;
    push(u);
  }

  void finalize() {
    for (auto& l : system_) l.a.resize(total_vars(), 0);
  }

 private:
  bool has_aux(const Lin& l) const {
    for (std::size_t i = vars_.size(); i < l.a.size(); ++i) {
      if (l.a[i] != 0) return true;
    }
    return false;
  }

  void push(Lin l) {
    l.a.resize(total_vars(), 0);
    tighten(l);
    system_.push_back(std::move(l));
  }

  int new_aux() {
    ++aux_count_;
    return static_cast<int>(total_vars() - 1);
  }

  std::optional<Lin> linearize(const Expr& p) {
    Lin out;
    out.a.assign(total_vars(), 0);
    for (const auto& t : terms_of(p)) {
      if (t.mono.empty()) {
        out.c = narrow(static_cast<__int128>(out.c) + t.coef);
        continue;
      }
      if (t.mono.size() != 1 || t.mono[0].power != 1) {
        exact_ = false;
        return std::nullopt;
      }
      auto form = atom_form(t.mono[0].atom);
      if (!form) {
        exact_ = false;
        return std::nullopt;
      }
      out.a.resize(std::max(out.a.size(), form->a.size()), 0);
      for (std::size_t i = 0; i < form->a.size(); ++i) {
        out.a[i] = narrow(static_cast<__int128>(out.a[i]) + static_cast<__int128>(t.coef) * form->a[i]);
      }
      out.c = narrow(static_cast<__int128>(out.c) + static_cast<__int128>(t.coef) * form->c);
    }
    out.a.resize(total_vars(), 0);
    return out;
  }

  // Linear form equal to the atom, introducing auxiliaries for floor/mod.
  std::optional<Lin> atom_form(const Expr& atom) {
    Lin out;
    out.a.assign(total_vars(), 0);
    switch (atom->kind) {
      case Kind::Sym: {
        auto it = index_.find(atom->sym);
        if (it == index_.end()) return std::nullopt;
        out.a[static_cast<std::size_t>(it->second)] = 1;
        return out;
      }
      case Kind::FloorDiv:
      case Kind::Mod: {
        Int k = atom->value;
        auto inner = linearize(atom->args[0]);
        if (!inner) return std::nullopt;
        int q = quotient(atom->args[0], *inner, k);
        inner->a.resize(total_vars(), 0);
        if (atom->kind == Kind::FloorDiv) {
          out.a.assign(total_vars(), 0);
          out.a[static_cast<std::size_t>(q)] = 1;
          return out;
        }
        out = *inner;
        out.a[static_cast<std::size_t>(q)] = narrow(static_cast<__int128>(out.a[static_cast<std::size_t>(q)]) - k);
        return out;
      }
      case Kind::Min:
      case Kind::Max: {
        int m = new_aux();
        for (const auto& arg : atom->args) {
          auto l = linearize(arg);
          if (!l) continue;
          l->a.resize(total_vars(), 0);
          // min: arg - m >= 0; max: m - arg >= 0
          Lin b = *l;
          if (atom->kind == Kind::Min) {
            b.a[static_cast<std::size_t>(m)] = narrow(static_cast<__int128>(b.a[static_cast<std::size_t>(m)]) - 1);
          } else {
            for (Int& v : b.a) v = narrow(-static_cast<__int128>(v));
            b.c = narrow(-static_cast<__int128>(b.c));
            b.a[static_cast<std::size_t>(m)] = narrow(static_cast<__int128>(b.a[static_cast<std::size_t>(m)]) + 1);
          }
          push(b);
        }
        exact_ = false;
        out.a.assign(total_vars(), 0);
        out.a[static_cast<std::size_t>(m)] = 1;
        return out;
      }
      case Kind::Ite:
      case Kind::Pow:
      case Kind::Call: {
        // one unconstrained auxiliary per distinct atom
        exact_ = false;
        auto it = opaque_.find(atom);
        int m = it != opaque_.end() ? it->second : (opaque_[atom] = new_aux());
        out.a.assign(total_vars(), 0);
        out.a[static_cast<std::size_t>(m)] = 1;
        return out;
      }
      default:
        return std::nullopt;
    }
  }

  // Auxiliary q = floor(e / k): k*q <= e <= k*q + k - 1.
  int quotient(const Expr& e, Lin inner, Int k) {
    auto key = floor_div(e, k);
    auto it = quotients_.find(key);
    if (it != quotients_.end()) return it->second;
    int q = new_aux();
    quotients_[key] = q;
    inner.a.resize(total_vars(), 0);
    Lin lower = inner;
    lower.a[static_cast<std::size_t>(q)] = narrow(static_cast<__int128>(lower.a[static_cast<std::size_t>(q)]) - k);
    push(lower);
    Lin upper;
    upper.a.assign(total_vars(), 0);
    for (std::size_t i = 0; i < inner.a.size(); ++i) upper.a[i] = narrow(-static_cast<__int128>(inner.a[i]));
    upper.c = narrow(static_cast<__int128>(k) - 1 - inner.c);
    upper.a[static_cast<std::size_t>(q)] = narrow(static_cast<__int128>(upper.a[static_cast<std::size_t>(q)]) + k);
    push(upper);
    return q;
  }

  std::vector<SymKey> vars_;
  std::map<SymKey, int> index_;
  std::size_t aux_count_ = 0;
  std::vector<Lin> system_;
  std::map<Expr, int, ExprLess> quotients_;
  std::map<Expr, int, ExprLess> opaque_;
  bool exact_ = true;
};

constexpr std::size_t kMaxFmRows = 4000;

/// Eliminates variable j. Returns false when a constant row is violated.
/// Sets `truncated` when rows had to be dropped (the result is then weaker).
bool eliminate(std::vector<Lin>& sys, std::size_t j, bool& truncated) {
  std::vector<Lin> pos, neg, rest;
  for (auto& l : sys) {
    if (l.a[j] > 0) {
      pos.push_back(std::move(l));
    } else if (l.a[j] < 0) {
      neg.push_back(std::move(l));
    } else {
      rest.push_back(std::move(l));
    }
  }
  std::set<Lin> seen(rest.begin(), rest.end());
  for (const auto& p : pos) {
    for (const auto& n : neg) {
      if (seen.size() > kMaxFmRows) {
        truncated = true;
        break;
      }
      __int128 ap = p.a[j];
      __int128 an = -static_cast<__int128>(n.a[j]);
      Lin r;
      r.a.resize(p.a.size());
      try {
        for (std::size_t i = 0; i < p.a.size(); ++i) r.a[i] = narrow(an * p.a[i] + ap * n.a[i]);
        r.c = narrow(an * p.c + ap * n.c);
      } catch (const Overflow&) {
        truncated = true;
        continue;
      }
      r.a[j] = 0;
      tighten(r);
      if (is_constant(r)) {
        if (r.c < 0) return false;
        continue;
      }
      seen.insert(std::move(r));
    }
  }
  sys.assign(seen.begin(), seen.end());
  return true;
}

struct Bounds {
  Int lo = std::numeric_limits<Int>::min();
  Int hi = std::numeric_limits<Int>::max();
  bool finite() const { return lo != std::numeric_limits<Int>::min() && hi != std::numeric_limits<Int>::max(); }
};

/// Rational projection of `sys` onto variable k, eliminating every other
/// variable listed in `live`.
std::optional<Bounds> project(std::vector<Lin> sys, std::size_t k, const std::vector<std::size_t>& live,
                              bool& truncated) {
  for (const auto& l : sys) {
    if (is_constant(l) && l.c < 0) return std::nullopt;
  }
  for (std::size_t j : live) {
    if (j == k) continue;
    if (!eliminate(sys, j, truncated)) return std::nullopt;
  }
  Bounds b;
  for (const auto& l : sys) {
    Int a = l.a[k];
    if (a == 0) {
      if (l.c < 0) return std::nullopt;
      continue;
    }
    // a*x + c >= 0
    if (a > 0) {
      Int lo = narrow(-static_cast<__int128>(floor_div128(l.c, a)));
      b.lo = std::max(b.lo, lo);
    } else {
      Int hi = floor_div128(l.c, -static_cast<__int128>(a));
      b.hi = std::min(b.hi, hi);
    }
  }
  if (b.lo > b.hi) return std::nullopt;
  return b;
}

std::vector<Lin> substitute_value(const std::vector<Lin>& sys, std::size_t k, Int v) {
  std::vector<Lin> out;
  out.reserve(sys.size());
  for (const auto& l : sys) {
    Lin r = l;
    r.c = narrow(static_cast<__int128>(r.c) + static_cast<__int128>(r.a[k]) * v);
    r.a[k] = 0;
    out.push_back(std::move(r));
  }
  return out;
}

/// Candidate order within [lo, hi]: 0, 1, -1, 2, ... clipped to the range,
/// or outward from the bound nearest to zero.
class Candidates {
 public:
  explicit Candidates(Bounds b) : b_(b) {
    if (b.lo > 0) {
      mode_ = Mode::Up;
      cur_ = b.lo;
    } else if (b.hi < 0) {
      mode_ = Mode::Down;
      cur_ = b.hi;
    } else {
      mode_ = Mode::Zigzag;
    }
  }

  std::optional<Int> next() {
    switch (mode_) {
      case Mode::Up:
        if (done_) return std::nullopt;
        if (cur_ == b_.hi) done_ = true;
        return cur_++;
      case Mode::Down:
        if (done_) return std::nullopt;
        if (cur_ == b_.lo) done_ = true;
        return cur_--;
      case Mode::Zigzag:
        for (;;) {
          bool up_ok = step_ <= 0 || (b_.hi - 0 >= step_);
          bool down_ok = step_ <= 0 || (b_.lo <= -step_);
          if (!up_ok && !down_ok) return std::nullopt;
          if (step_ == 0) {
            step_ = 1;
            positive_ = true;
            return 0;
          }
          if (positive_) {
            positive_ = false;
            if (up_ok) return step_;
          } else {
            positive_ = true;
            Int s = step_++;
            if (down_ok) return -s;
          }
        }
    }
    return std::nullopt;
  }

 private:
  enum class Mode { Up, Down, Zigzag } mode_;
  Bounds b_;
  Int cur_ = 0;
  Int step_ = 0;
  bool positive_ = true;
  bool done_ = false;
};

struct Budget {
  long remaining;
  Clock::time_point deadline;
  bool exhausted = false;
  long ticks = 0;

  bool spend() {
    if (exhausted) return false;
    if (--remaining < 0 || ((++ticks & 255) == 0 && Clock::now() > deadline)) {
      exhausted = true;
      return false;
    }
    return true;
  }
};

struct ConjResult {
  SolveStatus status = SolveStatus::Unknown;
  Valuation model;
};

/// Exact search over one conjunction of atoms.
class ConjSearch {
 public:
  ConjSearch(const std::vector<Expr>& atoms, const std::map<SymKey, std::pair<Int, Int>>& domains, Budget& budget)
      : budget_(budget) {
    std::set<SymKey> syms;
    for (const auto& a : atoms) {
      auto s = free_symbols(a);
      syms.insert(s.begin(), s.end());
    }
    vars_.assign(syms.begin(), syms.end());
    std::map<SymKey, std::size_t> index;
    for (std::size_t i = 0; i < vars_.size(); ++i) index[vars_[i]] = i;
    // Each atom is checked as soon as its last symbol is assigned.
    checks_.resize(vars_.size());
    for (const auto& a : atoms) {
      auto s = free_symbols(a);
      if (s.empty()) {
        constant_atoms_.push_back(a);
        continue;
      }
      std::size_t last = 0;
      for (const auto& k : s) last = std::max(last, index[k]);
      checks_[last].push_back(a);
    }
    relax_ = std::make_unique<Relaxation>(vars_);
    for (const auto& a : atoms) {
      try {
        if (!relax_->add_atom(a)) infeasible_ = true;
      } catch (const Overflow&) {
        incomplete_ = true;
      }
    }
    for (const auto& [s, d] : domains) {
      if (index.count(s)) relax_->add_bound(s, d.first, d.second);
    }
    relax_->finalize();
  }

  ConjResult run() {
    ConjResult r;
    for (const auto& a : constant_atoms_) {
      if (!safe_eval(a)) {
        r.status = SolveStatus::Unsat;
        return r;
      }
    }
    if (infeasible_) {
      r.status = SolveStatus::Unsat;
      return r;
    }
    live_.clear();
    for (std::size_t i = 0; i < relax_->total_vars(); ++i) live_.push_back(i);
    bool found = false;
    try {
      found = search(0, relax_->system());
    } catch (const Overflow&) {
      incomplete_ = true;
    }
    if (found) {
      r.status = SolveStatus::Sat;
      r.model = env_;
    } else {
      r.status = (incomplete_ || budget_.exhausted) ? SolveStatus::Unknown : SolveStatus::Unsat;
    }
    return r;
  }

 private:
  bool safe_eval(const Expr& a) {
    try {
      return eval_bool(a, env_);
    } catch (const OverflowError&) {
      incomplete_ = true;
      return false;
    } catch (const DivisionByZero&) {
      return false;
    } catch (const std::runtime_error&) {
      // partial function outside its domain
      incomplete_ = true;
      return false;
    }
  }

  bool search(std::size_t level, const std::vector<Lin>& sys) {
    if (level == vars_.size()) return true;
    if (!budget_.spend()) return false;
    bool truncated = false;
    std::vector<std::size_t> live(live_.begin() + static_cast<std::ptrdiff_t>(level), live_.end());
    auto b = project(sys, level, live, truncated);
    if (truncated) incomplete_ = true;
    if (!b) return false;
    Candidates cand(*b);
    while (auto v = cand.next()) {
      if (!budget_.spend()) return false;
      env_[vars_[level]] = *v;
      bool ok = true;
      for (const auto& a : checks_[level]) {
        if (!safe_eval(a)) {
          ok = false;
          break;
        }
      }
      if (!ok) continue;
      if (level + 1 == vars_.size()) return true;
      std::vector<Lin> next;
      try {
        next = substitute_value(sys, level, *v);
      } catch (const Overflow&) {
        incomplete_ = true;
        continue;
      }
      if (search(level + 1, next)) return true;
      if (budget_.exhausted) return false;
    }
    env_.erase(vars_[level]);
    // An infinite range never runs dry, so failure there is budget exhaustion.
    return false;
  }

  Budget& budget_;
  std::vector<SymKey> vars_;
  std::vector<std::vector<Expr>> checks_;
  std::vector<Expr> constant_atoms_;
  std::unique_ptr<Relaxation> relax_;
  std::vector<std::size_t> live_;
  Valuation env_;
  bool infeasible_ = false;
  bool incomplete_ = false;
};

/// Splits the constraints into conjunctions of atoms on demand (DPLL-style
/// case split on the first disjunction found).
class Dnf {
 public:
  Dnf(const std::map<SymKey, std::pair<Int, Int>>& domains, Budget& budget) : domains_(domains), budget_(budget) {}

  ConjResult solve(std::vector<Expr> pending, std::vector<Expr> atoms) {
    while (!pending.empty()) {
      Expr e = pending.back();
      pending.pop_back();
      switch (e->kind) {
        case Kind::BoolConst:
          if (e->is_false()) return {SolveStatus::Unsat, {}};
          break;
        case Kind::And:
          for (const auto& c : e->args) pending.push_back(c);
          break;
        case Kind::Or: {
          bool unknown = false;
          for (const auto& d : e->args) {
            if (budget_.exhausted) return {SolveStatus::Unknown, {}};
            auto p = pending;
            p.push_back(d);
            auto r = solve(std::move(p), atoms);
            if (r.status == SolveStatus::Sat) return r;
            if (r.status == SolveStatus::Unknown) unknown = true;
          }
          return {unknown ? SolveStatus::Unknown : SolveStatus::Unsat, {}};
        }
        default:
          atoms.push_back(e);
      }
    }
    ConjSearch search(atoms, domains_, budget_);
    return search.run();
  }

 private:
  const std::map<SymKey, std::pair<Int, Int>>& domains_;
  Budget& budget_;
};

std::string cache_key(const ConstraintSet& c, const std::map<SymKey, std::pair<Int, Int>>& domains) {
  std::vector<std::string> parts;
  for (const auto& e : c.constraints) parts.push_back(to_string(e));
  std::sort(parts.begin(), parts.end());
  std::string key;
  for (const auto& p : parts) key += p + ";";
  auto syms = c.symbols();
  for (const auto& [s, d] : domains) {
    if (!syms.count(s)) continue;
    key += "|" + to_string(s) + "=" + std::to_string(d.first) + ".." + std::to_string(d.second);
  }
  return key;
}

bool validate(const ConstraintSet& c, const Valuation& model) {
  try {
    for (const auto& e : c.constraints) {
      if (!eval_bool(e, model)) return false;
    }
    return true;
  } catch (const std::exception&) {
    return false;
  }
}

// ---- SMT-LIB2 ---------------------------------------------------------------

std::string smt_name(const SymKey& s) { return "|" + to_string(s) + "|"; }

std::string smt_int(Int v) {
  if (v < 0) {
    if (v == std::numeric_limits<Int>::min()) return "(- 9223372036854775808)";
    return "(- " + std::to_string(-v) + ")";
  }
  return std::to_string(v);
}

struct SmtUnsupported {};

std::string smt_expr(const Expr& e);

std::string smt_atom(const Expr& a) {
  switch (a->kind) {
    case Kind::Sym:
      return smt_name(a->sym);
    case Kind::FloorDiv:
      return "(div " + smt_expr(a->args[0]) + " " + smt_int(a->value) + ")";
    case Kind::Mod:
      return "(mod " + smt_expr(a->args[0]) + " " + smt_int(a->value) + ")";
    case Kind::Min:
    case Kind::Max: {
      std::string acc = smt_expr(a->args[0]);
      const char* cmp = a->kind == Kind::Min ? "<=" : ">=";
      for (std::size_t i = 1; i < a->args.size(); ++i) {
        std::string b = smt_expr(a->args[i]);
        acc = "(ite (" + std::string(cmp) + " " + acc + " " + b + ") " + acc + " " + b + ")";
      }
      return acc;
    }
    case Kind::Ite:
      return "(ite " + smt_expr(a->args[0]) + " " + smt_expr(a->args[1]) + " " + smt_expr(a->args[2]) + ")";
    case Kind::Pow: {
      if (!a->args[1]->is_const() || a->args[1]->value < 0 || a->args[1]->value > 16) throw SmtUnsupported{};
      std::string base = smt_expr(a->args[0]);
      if (a->args[1]->value == 0) return "1";
      std::string out = "(*";
      for (Int i = 0; i < a->args[1]->value; ++i) out += " " + base;
      return out + ")";
    }
    default:
      throw SmtUnsupported{};
  }
}

std::string smt_expr(const Expr& e) {
  switch (e->kind) {
    case Kind::Const:
      return smt_int(e->value);
    case Kind::BoolConst:
      return e->value ? "true" : "false";
    case Kind::Ge:
      return "(>= " + smt_expr(atom_operand(e)) + " 0)";
    case Kind::Eq:
      return "(= " + smt_expr(atom_operand(e)) + " 0)";
    case Kind::Ne:
      return "(not (= " + smt_expr(atom_operand(e)) + " 0))";
    case Kind::And:
    case Kind::Or: {
      std::string out = e->kind == Kind::And ? "(and" : "(or";
      for (const auto& a : e->args) out += " " + smt_expr(a);
      return out + ")";
    }
    case Kind::Poly: {
      std::string out = "(+";
      for (const auto& t : e->terms) {
        std::string term = smt_int(t.coef);
        if (!t.mono.empty()) {
          term = "(* " + term;
          for (const auto& f : t.mono) {
            for (int p = 0; p < f.power; ++p) term += " " + smt_atom(f.atom);
          }
          term += ")";
        }
        out += " " + term;
      }
      return out + " 0)";
    }
    default:
      return smt_atom(e);
  }
}

struct Sexp {
  std::string atom;
  std::vector<Sexp> list;
  bool is_list = false;
};

Sexp parse_sexp(const std::string& s, std::size_t& i) {
  while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
  Sexp out;
  if (i < s.size() && s[i] == '(') {
    out.is_list = true;
    ++i;
    for (;;) {
      while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
      if (i >= s.size()) break;
      if (s[i] == ')') {
        ++i;
        break;
      }
      out.list.push_back(parse_sexp(s, i));
    }
    return out;
  }
  if (i < s.size() && s[i] == '|') {
    std::size_t end = s.find('|', i + 1);
    out.atom = s.substr(i, end - i + 1);
    i = end + 1;
    return out;
  }
  std::size_t start = i;
  while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i])) && s[i] != '(' && s[i] != ')') ++i;
  out.atom = s.substr(start, i - start);
  return out;
}

std::optional<Int> sexp_int(const Sexp& s) {
  try {
    if (!s.is_list) return static_cast<Int>(std::stoll(s.atom));
    if (s.list.size() == 2 && s.list[0].atom == "-") {
      auto v = sexp_int(s.list[1]);
      if (v) return -*v;
    }
  } catch (const std::exception&) {
  }
  return std::nullopt;
}

}  // namespace

std::optional<std::string> to_smtlib(const ConstraintSet& c, const std::map<SymKey, std::pair<Int, Int>>& domains) {
  std::ostringstream os;
  auto syms = c.symbols();
  try {
    for (const auto& s : syms) os << "(declare-const " << smt_name(s) << " Int)\n";
    for (const auto& s : syms) {
      auto d = domains.find(s);
      if (d == domains.end()) continue;
      os << "(assert (<= " << smt_int(d->second.first) << " " << smt_name(s) << " " << smt_int(d->second.second)
         << "))\n";
    }
    for (const auto& e : c.constraints) os << "(assert " << smt_expr(e) << ")\n";
  } catch (const SmtUnsupported&) {
    return std::nullopt;
  }
  os << "(check-sat)\n";
  if (!syms.empty()) {
    os << "(get-value (";
    bool first = true;
    for (const auto& s : syms) {
      os << (first ? "" : " ") << smt_name(s);
      first = false;
    }
    os << "))\n";
  }
  return os.str();
}

Solver::Solver(SolverConfig config) : config_(std::move(config)) {}

SolveResult Solver::check(const ConstraintSet& c, const std::map<SymKey, std::pair<Int, Int>>& domains) {
  std::string key = cache_key(c, domains);
  {
    std::lock_guard<std::mutex> lock(mutex_);
    ++queries_;
    auto it = cache_.find(key);
    if (it != cache_.end()) {
      ++cache_hits_;
      return it->second;
    }
  }
  auto start = Clock::now();
  SolveResult r = check_uncached(c, domains);
  r.seconds = std::chrono::duration<double>(Clock::now() - start).count();
  if (r.status == SolveStatus::Sat && !validate(c, r.model)) {
    r.status = SolveStatus::Unknown;
    r.model.clear();
    r.note = "model failed validation";
  }
  std::lock_guard<std::mutex> lock(mutex_);
  cache_.emplace(key, r);
  return r;
}

SolveResult Solver::check_uncached(const ConstraintSet& c, const std::map<SymKey, std::pair<Int, Int>>& domains) {
  if (config_.backend == Backend::Smt && !config_.smt_cmd.empty()) {
    auto r = check_smt(c, domains);
    if (r.status != SolveStatus::Unknown) return r;
  }
  Budget budget{config_.search_budget, Clock::now() + std::chrono::milliseconds(config_.timeout_ms)};
  Dnf dnf(domains, budget);
  auto conj = dnf.solve(c.constraints, {});
  SolveResult r;
  r.status = conj.status;
  r.model = std::move(conj.model);
  r.note = "builtin";
  if (r.status == SolveStatus::Unknown) r.note = budget.exhausted ? "builtin: search budget exhausted" : "builtin: incomplete";
  // Fill symbols the search never had to touch (e.g. only in a satisfied disjunct).
  if (r.status == SolveStatus::Sat) {
    for (const auto& s : c.symbols()) {
      if (r.model.count(s)) continue;
      auto d = domains.find(s);
      r.model[s] = d == domains.end() ? 0 : std::clamp<Int>(0, d->second.first, d->second.second);
    }
  }
  if (r.status == SolveStatus::Unknown && config_.backend == Backend::Auto && !config_.smt_cmd.empty() &&
      c.tier() != Tier::Linear) {
    auto ext = check_smt(c, domains);
    if (ext.status != SolveStatus::Unknown) return ext;
  }
  return r;
}

SolveResult Solver::check_smt(const ConstraintSet& c, const std::map<SymKey, std::pair<Int, Int>>& domains) {
  SolveResult r;
  auto text = to_smtlib(c, domains);
  if (!text) {
    r.note = "smt: query not expressible";
    return r;
  }
  std::string query = "(set-option :timeout " + std::to_string(config_.timeout_ms) + ")\n" + *text;
  if (config_.smt_log) *config_.smt_log << "; query\n" << query << std::flush;
  char path[] = "/tmp/loopsum-smt-XXXXXX";
  int fd = mkstemp(path);
  if (fd < 0) {
    r.note = "smt: cannot create temporary file";
    return r;
  }
  {
    std::ofstream f(path);
    f << query;
  }
  close(fd);
  int secs = std::max(1, (config_.timeout_ms + 999) / 1000 + 1);
  std::string cmd = "timeout " + std::to_string(secs) + " " + config_.smt_cmd + " < " + path + " 2>&1";
  std::string out;
  if (FILE* p = popen(cmd.c_str(), "r")) {
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof buf, p)) > 0) out.append(buf, n);
    pclose(p);
  }
  std::remove(path);
  if (config_.smt_log) *config_.smt_log << "; response\n" << out << std::flush;
  std::istringstream in(out);
  std::string first;
  in >> first;
  if (first == "unsat") {
    r.status = SolveStatus::Unsat;
    r.note = "smt";
    return r;
  }
  if (first != "sat") {
    r.note = "smt: " + (first.empty() ? std::string("no answer") : first);
    return r;
  }
  std::string rest((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::size_t i = 0;
  Sexp values = parse_sexp(rest, i);
  auto syms = c.symbols();
  std::map<std::string, SymKey> by_name;
  for (const auto& s : syms) by_name[smt_name(s)] = s;
  for (const auto& pair : values.list) {
    if (!pair.is_list || pair.list.size() != 2) continue;
    auto it = by_name.find(pair.list[0].atom);
    auto v = sexp_int(pair.list[1]);
    if (it != by_name.end() && v) r.model[it->second] = *v;
  }
  if (r.model.size() != syms.size()) {
    r.model.clear();
    r.note = "smt: incomplete model";
    return r;
  }
  r.status = SolveStatus::Sat;
  r.note = "smt";
  return r;
}

MinIterations min_iterations(Solver& solver, ConstraintSet c, const SymKey& n,
                             const std::map<SymKey, std::pair<Int, Int>>& domains, int max_rounds) {
  MinIterations out;
  auto first = solver.check(c, domains);
  if (first.status == SolveStatus::Unsat) {
    out.status = MinIterations::Status::NoSolution;
    return out;
  }
  if (first.status == SolveStatus::Unknown) return out;
  Int best = first.model.at(n);
  auto nsym = symbol(n);
  for (out.rounds = 1; out.rounds <= max_rounds; ++out.rounds) {
    c.add(lt(nsym, constant(best)));
    auto r = solver.check(c, domains);
    if (r.status == SolveStatus::Unsat) {
      out.status = MinIterations::Status::Found;
      out.value = best;
      return out;
    }
    if (r.status == SolveStatus::Unknown) return out;
    best = r.model.at(n);
  }
  return out;
}

Expr closed_form(const Expr& x0, Int a, const Expr& b, const Expr& n) {
  if (a == 1) return x0 + b * n;
  // a^n * x0 + b * (a^n - 1) / (a - 1); the division is exact.
  auto an = pow(constant(a), n);
  return an * x0 + b * floor_div(an - constant(1), a - 1);
}

}  // namespace loopsum
