#include <algorithm>
#include <functional>
#include <memory>

#include "loopsum/summarize.hpp"
#include "summarize_internal.hpp"

namespace loopsum {

namespace {

using detail::conjuncts;

/// Variable roles inside a high-order SCC.
struct Shape {
  std::string x;                      // the oscillating variable
  std::vector<std::string> params;    // untouched by every member
  std::vector<std::string> counters;  // updated, but never tested by member conditions
  Expr param_guard;                   // member conditions over params only
  std::vector<int> members;
  std::map<int, IntervalSet> sets;  // member -> x values taking it
  std::map<int, Expr> xop;          // member -> x' over x_0
  std::map<std::string, bool> additive;
  std::map<std::string, std::map<int, Expr>> counter_part;  // increment or reset value over x_0
};

SummaryFailure unsupported(const std::string& what) { return SummaryFailure(reason::kNotSummarizable, what); }

std::optional<IntervalSet> interval_of(const Expr& b, const SymKey& x) {
  switch (b->kind) {
    case Kind::BoolConst:
      return b->value ? IntervalSet::all() : IntervalSet::empty();
    case Kind::And:
    case Kind::Or: {
      IntervalSet acc = b->kind == Kind::And ? IntervalSet::all() : IntervalSet::empty();
      for (const auto& a : b->args) {
        auto s = interval_of(a, x);
        if (!s) return std::nullopt;
        acc = b->kind == Kind::And ? acc.intersect(*s) : acc.unite(*s);
      }
      return acc;
    }
    case Kind::Ge:
    case Kind::Eq:
    case Kind::Ne: {
      auto split = split_linear(atom_operand(b), x);
      if (!split || !split->coef->is_const() || !split->rest->is_const()) return std::nullopt;
      const Int a = split->coef->value;
      const Int r = split->rest->value;
      if (b->kind == Kind::Ge) {
        if (a > 0) return IntervalSet::at_least(arith::ceil_div(arith::neg(r), a));
        return IntervalSet::at_most(arith::floor_div(r, arith::neg(a)));
      }
      IntervalSet pt = arith::floor_mod(r, a) == 0 ? IntervalSet::point(arith::neg(r) / a) : IntervalSet::empty();
      return b->kind == Kind::Eq ? pt : pt.complement();
    }
    default:
      return std::nullopt;
  }
}

bool only_mentions(const Expr& e, const std::set<std::string>& names) {
  for (const auto& s : free_symbols(e)) {
    if (s.kind != SymKind::Pre || !names.count(s.name)) return false;
  }
  return true;
}

Shape shape_of(const LoopPaths& lp, const Scc& scc) {
  Shape sh;
  sh.members = scc.members;
  auto path = [&](int p) -> const SPath& { return lp.paths[static_cast<std::size_t>(p)]; };
  std::set<std::string> updated;
  for (const auto& v : lp.variables) {
    for (int p : scc.members) {
      auto it = path(p).op.find({SymKind::Var, v});
      if (it != path(p).op.end() && !equal(it->second, pre(v))) updated.insert(v);
    }
  }
  std::set<std::string> tested;
  for (int p : scc.members) {
    for (const auto& s : free_symbols(path(p).cond_conj())) {
      if (updated.count(s.name)) tested.insert(s.name);
    }
  }
  if (tested.empty()) throw unsupported("member conditions test no updated variable");
  if (tested.size() > 1) throw unsupported("oscillation over more than one variable");
  sh.x = *tested.begin();
  for (const auto& v : lp.variables) {
    if (!updated.count(v)) {
      sh.params.push_back(v);
    } else if (v != sh.x) {
      sh.counters.push_back(v);
    }
  }
  const std::set<std::string> params(sh.params.begin(), sh.params.end());
  const std::set<std::string> xs{sh.x};
  const SymKey xkey{SymKind::Pre, sh.x};

  std::optional<Expr> pg;
  for (int p : scc.members) {
    std::vector<Expr> pa, xa;
    for (const auto& c : path(p).cond) {
      for (const auto& atom : conjuncts(c)) {
        if (only_mentions(atom, params)) {
          pa.push_back(atom);
        } else if (only_mentions(atom, xs)) {
          xa.push_back(atom);
        } else {
          throw unsupported("condition " + to_string(atom) + " mixes the oscillating variable with others");
        }
      }
    }
    Expr g = land(std::move(pa));
    if (pg && !equal(*pg, g)) throw unsupported("members disagree on conditions over untouched variables");
    pg = g;
    for (const auto& atom : conjuncts(lp.guard)) {
      if (only_mentions(atom, xs)) xa.push_back(atom);
    }
    auto set = interval_of(land(std::move(xa)), xkey);
    if (!set) throw unsupported("member condition is not an interval condition on " + sh.x);
    sh.sets[p] = *set;

    Expr xop = path(p).op.at({SymKind::Var, sh.x});
    if (!only_mentions(xop, xs)) {
      throw SummaryFailure(reason::kCoupledRecurrence, "update of " + sh.x + " depends on other variables");
    }
    sh.xop[p] = xop;
    for (const auto& y : sh.counters) {
      Expr e = path(p).op.at({SymKind::Var, y});
      auto split = split_linear(e, {SymKind::Pre, y});
      if (!split || !split->coef->is_const() || (split->coef->value != 0 && split->coef->value != 1)) {
        throw unsupported("update of " + y + " is neither an increment nor a reset");
      }
      if (!only_mentions(split->rest, xs)) {
        throw SummaryFailure(reason::kCoupledRecurrence, "update of " + y + " depends on other updated variables");
      }
      bool add = split->coef->value == 1;
      auto it = sh.additive.find(y);
      if (it != sh.additive.end() && it->second != add) throw unsupported("update of " + y + " mixes increment and reset");
      sh.additive[y] = add;
      sh.counter_part[y][p] = split->rest;
    }
  }
  sh.param_guard = pg.value_or(truth(true));
  return sh;
}

std::optional<std::pair<Int, Int>> affine_of(const Expr& e, const SymKey& x) {
  auto split = split_linear(e, x);
  if (!split || !split->coef->is_const() || !split->rest->is_const()) return std::nullopt;
  return std::make_pair(split->coef->value, split->rest->value);
}

Int eval_at(const Expr& e, const std::string& x, Int v) { return eval_int(e, Valuation{{{SymKind::Pre, x}, v}}); }

IntervalSet image(const Expr& op, const std::string& x, const IntervalSet& s, Int cap) {
  if (s.is_empty()) return s;
  auto aff = affine_of(op, {SymKind::Pre, x});
  auto n = s.count();
  bool small = n && *n <= cap;
  if (aff && (arith::abs(aff->first) <= 1 || !small)) return s.affine_image(aff->first, aff->second);
  if (!small) throw SummaryFailure(reason::kInfiniteOscillation, "image of an unbounded set under " + to_string(op));
  std::vector<Int> vals;
  s.for_each([&](Int v) { vals.push_back(eval_at(op, x, v)); });
  return IntervalSet::from_values(std::move(vals));
}

IntervalSet preimage(const Expr& op, const std::string& x, const IntervalSet& domain, const IntervalSet& target,
                     Int cap) {
  if (auto aff = affine_of(op, {SymKind::Pre, x})) return domain.intersect(target.affine_preimage(aff->first, aff->second));
  auto n = domain.count();
  if (!n || *n > cap) throw unsupported("jump interval of a non-affine update over an unbounded domain");
  std::vector<Int> vals;
  domain.for_each([&](Int v) {
    if (target.contains(eval_at(op, x, v))) vals.push_back(v);
  });
  return IntervalSet::from_values(std::move(vals));
}

/// Functional graph of one SCC step over the values of O.
struct Table {
  Shape shape;
  IntervalSet o;
  IntervalSet region;
  std::vector<IntervalSet::Range> ranges;
  std::vector<Int> offsets;  // first index of each range
  Int size = 0;

  std::vector<Int> next;   // index, or -1 when the step leaves the SCC region
  std::vector<Int> out;    // x after the step, for steps that leave
  std::vector<Int> tail;   // steps before reaching a cycle (or before leaving)
  std::vector<Int> cycle;  // cycle id, -1 when the trajectory leaves
  std::vector<Int> pos;    // position on the cycle (cycle members only)
  std::vector<std::vector<Int>> cycles;
  std::map<std::string, std::vector<Int>> part;  // per counter: increment / reset value at each index
  std::map<std::string, std::vector<std::vector<Int>>> cycle_prefix;  // doubled prefix sums per cycle

  Int index(Int v) const {
    for (std::size_t r = 0; r < ranges.size(); ++r) {
      if (v >= ranges[r].lo && v <= ranges[r].hi) return offsets[r] + (v - ranges[r].lo);
    }
    return -1;
  }
  Int value(Int i) const {
    auto r = static_cast<std::size_t>(std::upper_bound(offsets.begin(), offsets.end(), i) - offsets.begin() - 1);
    return ranges[r].lo + (i - offsets[r]);
  }
  Int at(std::size_t i) const { return static_cast<Int>(i); }

  /// Index after n steps; -1 when the trajectory has left before that.
  Int advance(Int i, Int n) const {
    while (n > 0 && tail[static_cast<std::size_t>(i)] > 0) {
      i = next[static_cast<std::size_t>(i)];
      --n;
      if (i < 0) return -1;
    }
    if (n == 0) return i;
    const auto& cyc = cycles[static_cast<std::size_t>(cycle[static_cast<std::size_t>(i)])];
    Int len = static_cast<Int>(cyc.size());
    return cyc[static_cast<std::size_t>((pos[static_cast<std::size_t>(i)] + n) % len)];
  }

  /// Value of x after n steps, including the step that leaves the region.
  Int value_after(Int i, Int n) const {
    if (n == 0) return value(i);
    Int j = advance(i, n - 1);
    if (j < 0) throw EvalError("trajectory left the oscillatory interval");
    Int k = next[static_cast<std::size_t>(j)];
    return k < 0 ? out[static_cast<std::size_t>(j)] : value(k);
  }

  /// Sum of a counter's increments over the first n steps from index i.
  Int sum(const std::string& y, Int i, Int n) const {
    const auto& inc = part.at(y);
    Int acc = 0;
    while (n > 0 && tail[static_cast<std::size_t>(i)] > 0) {
      acc = arith::add(acc, inc[static_cast<std::size_t>(i)]);
      i = next[static_cast<std::size_t>(i)];
      --n;
      if (i < 0) {
        if (n == 0) return acc;
        throw EvalError("trajectory left the oscillatory interval");
      }
    }
    if (n == 0) return acc;
    auto c = static_cast<std::size_t>(cycle[static_cast<std::size_t>(i)]);
    const auto& pre = cycle_prefix.at(y)[c];
    Int len = static_cast<Int>(cycles[c].size());
    Int p = pos[static_cast<std::size_t>(i)];
    Int full = n / len, rest = n % len;
    acc = arith::add(acc, arith::mul(full, pre[static_cast<std::size_t>(len)]));
    acc = arith::add(acc, arith::sub(pre[static_cast<std::size_t>(p + rest)], pre[static_cast<std::size_t>(p)]));
    return acc;
  }
};

void build_table(Table& t, const LoopPaths& lp, Int cap, Oscillation* info) {
  (void)lp;
  t.ranges = t.o.ranges();
  for (const auto& r : t.ranges) {
    t.offsets.push_back(t.size);
    t.size = arith::add(t.size, arith::add(arith::sub(r.hi, r.lo), 1));
  }
  if (t.size > cap) throw SummaryFailure(reason::kInfiniteOscillation, "oscillatory interval exceeds the value cap");
  const auto n = static_cast<std::size_t>(t.size);
  t.next.assign(n, -1);
  t.out.assign(n, 0);
  std::vector<int> member(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    Int v = t.value(t.at(i));
    for (int p : t.shape.members) {
      if (t.shape.sets.at(p).contains(v)) {
        member[i] = p;
        break;
      }
    }
    if (member[i] < 0) throw std::logic_error("oscillatory interval leaves the SCC region");
    Int w = eval_at(t.shape.xop.at(member[i]), t.shape.x, v);
    t.out[i] = w;
    if (t.region.contains(w)) {
      Int j = t.index(w);
      if (j < 0) throw std::logic_error("oscillatory interval is not closed");
      t.next[i] = j;
    }
  }
  for (const auto& y : t.shape.counters) {
    auto& part = t.part[y];
    part.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      part[i] = eval_at(t.shape.counter_part.at(y).at(member[i]), t.shape.x, t.value(t.at(i)));
    }
  }

  // cycle detection on the functional graph
  t.tail.assign(n, -1);
  t.cycle.assign(n, -1);
  t.pos.assign(n, -1);
  std::vector<char> state(n, 0);  // 0 new, 1 on the current walk, 2 done
  std::vector<Int> walk;
  for (std::size_t s = 0; s < n; ++s) {
    if (state[s]) continue;
    walk.clear();
    Int v = static_cast<Int>(s);
    while (v >= 0 && state[static_cast<std::size_t>(v)] == 0) {
      state[static_cast<std::size_t>(v)] = 1;
      walk.push_back(v);
      v = t.next[static_cast<std::size_t>(v)];
    }
    std::size_t stop = walk.size();
    if (v >= 0 && state[static_cast<std::size_t>(v)] == 1) {
      // closed a new cycle starting at v
      auto start = static_cast<std::size_t>(std::find(walk.begin(), walk.end(), v) - walk.begin());
      std::vector<Int> cyc(walk.begin() + static_cast<std::ptrdiff_t>(start), walk.end());
      Int id = static_cast<Int>(t.cycles.size());
      for (std::size_t k = 0; k < cyc.size(); ++k) {
        auto c = static_cast<std::size_t>(cyc[k]);
        t.cycle[c] = id;
        t.pos[c] = static_cast<Int>(k);
        t.tail[c] = 0;
        state[c] = 2;
      }
      t.cycles.push_back(std::move(cyc));
      stop = start;
    }
    for (std::size_t k = stop; k-- > 0;) {
      auto c = static_cast<std::size_t>(walk[k]);
      Int nx = t.next[c];
      if (nx < 0) {
        t.tail[c] = 1;
        t.cycle[c] = -1;
      } else {
        t.tail[c] = t.tail[static_cast<std::size_t>(nx)] + 1;
        t.cycle[c] = t.cycle[static_cast<std::size_t>(nx)];
      }
      state[c] = 2;
    }
  }
  for (const auto& y : t.shape.counters) {
    auto& all = t.cycle_prefix[y];
    for (const auto& cyc : t.cycles) {
      std::vector<Int> pre(2 * cyc.size() + 1, 0);
      for (std::size_t k = 0; k < 2 * cyc.size(); ++k) {
        pre[k + 1] = arith::add(pre[k], t.part[y][static_cast<std::size_t>(cyc[k % cyc.size()])]);
      }
      all.push_back(std::move(pre));
    }
  }

  if (info) {
    info->values = t.size;
    std::vector<Int> rec;
    for (std::size_t i = 0; i < n; ++i) {
      // steps until a value repeats (or the walk leaves): tail + cycle length
      Int steps = t.tail[i];
      if (t.cycle[i] >= 0) steps += static_cast<Int>(t.cycles[static_cast<std::size_t>(t.cycle[i])].size());
      info->max_steps_to_repeat = std::max(info->max_steps_to_repeat, steps);
      if (steps > t.size) info->pigeonhole_ok = false;
      if (t.cycle[i] >= 0 && t.tail[i] == 0) rec.push_back(t.value(t.at(i)));
    }
    info->recurrent = IntervalSet::from_values(std::move(rec));
  }
}

/// Modular form of an arithmetic cycle over a contiguous block of values.
std::optional<PeriodicClass> arithmetic(const Table& t, const std::vector<Int>& cyc) {
  std::vector<Int> vals;
  for (Int i : cyc) vals.push_back(t.value(i));
  auto [lo, hi] = std::minmax_element(vals.begin(), vals.end());
  Int m = static_cast<Int>(cyc.size());
  if (*hi - *lo + 1 != m) return std::nullopt;
  Int base = *lo;
  Int v0 = vals[0];
  Int w0 = t.value(t.next[static_cast<std::size_t>(cyc[0])]);
  Int c = arith::floor_mod(w0 - v0, m);
  for (Int i : cyc) {
    Int v = t.value(i);
    Int w = t.value(t.next[static_cast<std::size_t>(i)]);
    if (w - base != arith::floor_mod(v - base + c, m)) return std::nullopt;
  }
  PeriodicClass pc;
  pc.values = IntervalSet::closed(*lo, *hi);
  pc.modular = true;
  pc.offset = base;
  pc.period = m;
  pc.step = c;
  return pc;
}

class TableFn : public Function {
 public:
  enum class What { Value, Sum, Last, Exit };
  TableFn(std::string name, std::shared_ptr<const Table> t, What what, std::string counter, Expr guard,
          std::vector<std::string> vars, Int fuel)
      : name_(std::move(name)),
        t_(std::move(t)),
        what_(what),
        counter_(std::move(counter)),
        guard_(std::move(guard)),
        vars_(std::move(vars)),
        fuel_(fuel) {
    if (what_ == What::Exit) {
      linear_ = true;
      for (const auto& a : conjuncts(guard_)) {
        if ((a->kind != Kind::Ge && a->kind != Kind::Eq && a->kind != Kind::Ne) || tier_of(a) != Tier::Linear) {
          linear_ = false;
        }
      }
    }
  }
  const std::string& name() const override { return name_; }

  Int apply(std::span<const Int> args) const override {
    switch (what_) {
      case What::Value: {
        return t_->value_after(start(args[0]), args[1]);
      }
      case What::Sum:
        return t_->sum(counter_, start(args[0]), args[1]);
      case What::Last: {
        if (args[2] == 0) return args[1];
        Int j = t_->advance(start(args[0]), args[2] - 1);
        if (j < 0) throw EvalError(name_ + ": trajectory left the oscillatory interval");
        return t_->part.at(counter_)[static_cast<std::size_t>(j)];
      }
      case What::Exit:
        return exit_step(args);
    }
    return 0;
  }

 private:
  Int start(Int v) const {
    Int i = t_->index(v);
    if (i < 0) throw EvalError(name_ + ": " + std::to_string(v) + " is outside the oscillatory interval");
    return i;
  }

  /// One SCC step from index i, updating env; returns the new index or -1.
  Int step(Int i, Valuation& env) const {
    const auto& sh = t_->shape;
    for (const auto& y : sh.counters) {
      Int p = t_->part.at(y)[static_cast<std::size_t>(i)];
      auto& slot = env[{SymKind::Pre, y}];
      slot = sh.additive.at(y) ? arith::add(slot, p) : p;
    }
    Int j = t_->next[static_cast<std::size_t>(i)];
    if (j >= 0) env[{SymKind::Pre, sh.x}] = t_->value(j);
    return j;
  }

  Int exit_step(std::span<const Int> args) const {
    Valuation env = detail::pre_env(vars_, args);
    Int i = start(args[static_cast<std::size_t>(
        std::find(vars_.begin(), vars_.end(), t_->shape.x) - vars_.begin())]);
    const Int d = t_->tail[static_cast<std::size_t>(i)];
    Int n = 0;
    // walk the tail explicitly, one step into the cycle
    while (n < d + 1) {
      i = step(i, env);
      ++n;
      if (i < 0 || !eval_bool(guard_, env)) return n;
    }
    const auto& cyc = t_->cycles[static_cast<std::size_t>(t_->cycle[static_cast<std::size_t>(i)])];
    const Int len = static_cast<Int>(cyc.size());
    if (!linear_) {
      for (;;) {
        i = step(i, env);
        ++n;
        if (!eval_bool(guard_, env)) return n;
        if (n >= fuel_) throw EvalError(name_ + ": no exit within " + std::to_string(fuel_) + " iterations");
      }
    }
    // from here the state after each further period shifts by a fixed delta
    std::map<std::string, Int> delta;
    for (const auto& y : t_->shape.counters) {
      if (!t_->shape.additive.at(y)) continue;
      Int acc = 0;
      for (Int c : cyc) acc = arith::add(acc, t_->part.at(y)[static_cast<std::size_t>(c)]);
      delta[y] = acc;
    }
    Int best = -1;
    for (Int b = 0; b < len; ++b) {
      if (b > 0) {
        i = step(i, env);
        ++n;
        if (!eval_bool(guard_, env)) return n;
      }
      Valuation shifted = env;
      for (const auto& [y, dv] : delta) shifted[{SymKind::Pre, y}] = arith::add(shifted[{SymKind::Pre, y}], dv);
      for (const auto& a : conjuncts(guard_)) {
        const Expr& p = atom_operand(a);
        Int f0 = eval_int(p, env);
        Int slope = arith::sub(eval_int(p, shifted), f0);
        if (slope == 0) continue;
        Int q = -1;
        if (a->kind == Kind::Ge) {
          if (slope < 0) q = arith::floor_div(f0, arith::neg(slope)) + 1;
        } else if (a->kind == Kind::Eq) {
          q = 1;
        } else if (arith::floor_mod(f0, slope) == 0 && -f0 / slope > 0) {
          q = -f0 / slope;
        }
        if (q > 0) {
          Int cand = arith::add(n, arith::mul(q, len));
          if (best < 0 || cand < best) best = cand;
        }
      }
    }
    if (best < 0) throw EvalError(name_ + ": the oscillation never reaches the exit condition");
    return best;
  }

  std::string name_;
  std::shared_ptr<const Table> t_;
  What what_;
  std::string counter_;
  Expr guard_;
  std::vector<std::string> vars_;
  Int fuel_;
  bool linear_ = false;
};

}  // namespace

OscillatoryResult find_oscillatory_interval(const LoopPaths& lp, const Scc& scc, const SummarizeOptions& opt) {
  Shape sh = shape_of(lp, scc);
  OscillatoryResult r;
  r.variable = sh.x;
  r.member_sets = sh.sets;
  for (const auto& [p, s] : sh.sets) r.region = r.region.unite(s);
  const Int cap = opt.max_interval_values;
  for (int p : sh.members) {
    IntervalSet others;
    for (int q : sh.members) {
      if (q != p) others = others.unite(sh.sets.at(q));
    }
    r.jump = r.jump.unite(preimage(sh.xop.at(p), sh.x, sh.sets.at(p), others, cap));
  }
  IntervalSet a = r.jump;
  for (int round = 1;; ++round) {
    if (round > opt.max_rounds) {
      throw SummaryFailure(reason::kInfiniteOscillation,
                           "no oscillatory interval after " + std::to_string(opt.max_rounds) + " rounds");
    }
    auto n = a.count();
    if (!n) throw SummaryFailure(reason::kInfiniteOscillation, "oscillatory interval is unbounded: " + a.to_string());
    if (*n > cap) {
      throw SummaryFailure(reason::kInfiniteOscillation,
                           "oscillatory interval has more than " + std::to_string(cap) + " values");
    }
    IntervalSet b;
    for (int p : sh.members) b = b.unite(image(sh.xop.at(p), sh.x, a.intersect(sh.sets.at(p)), cap));
    b = b.intersect(r.region);
    if (b.subset_of(a)) {
      r.rounds = round;
      break;
    }
    a = a.unite(b);
  }
  r.interval = a;
  return r;
}

std::vector<std::vector<Stage>> summarize_scc_high(const LoopPaths& lp, const Scc& scc, const SummarizeOptions& opt,
                                                   Oscillation* info) {
  Oscillation local;
  Oscillation& osc = info ? *info : local;
  osc.scc = scc.id;
  OscillatoryResult r = find_oscillatory_interval(lp, scc, opt);
  osc.variable = r.variable;
  osc.jump = r.jump;
  osc.interval = r.interval;
  osc.rounds = r.rounds;

  auto table = std::make_shared<Table>();
  table->shape = shape_of(lp, scc);
  table->o = r.interval;
  table->region = r.region;
  build_table(*table, lp, opt.max_interval_values, &osc);
  if (!osc.pigeonhole_ok) throw std::logic_error("cycle detection exceeded the number of values");

  const Shape& sh = table->shape;
  const std::string tag = "s" + std::to_string(scc.id);
  const Expr xpre = pre(sh.x);

  // periodic classes: arithmetic cycles get a modular form, the rest is tabulated
  std::vector<Int> tabulated;
  for (const auto& cyc : table->cycles) {
    auto pc = arithmetic(*table, cyc);
    if (pc) {
      osc.classes.push_back(*pc);
    } else {
      for (Int i : cyc) tabulated.push_back(table->value(i));
    }
  }
  for (Int i = 0; i < table->size; ++i) {
    if (table->cycle[static_cast<std::size_t>(i)] < 0 || table->tail[static_cast<std::size_t>(i)] > 0) {
      tabulated.push_back(table->value(i));
    }
  }
  if (!tabulated.empty()) {
    PeriodicClass pc;
    pc.values = IntervalSet::from_values(std::move(tabulated));
    osc.classes.push_back(pc);
  }

  auto exit_fn = std::make_shared<TableFn>("exit_" + tag, table, TableFn::What::Exit, "", lp.guard, lp.variables,
                                           opt.eval_fuel);
  auto value_fn = std::make_shared<TableFn>("tab_" + sh.x + "_" + tag, table, TableFn::What::Value, "", nullptr,
                                            std::vector<std::string>{}, opt.eval_fuel);
  std::map<std::string, std::shared_ptr<TableFn>> counter_fn;
  for (const auto& y : sh.counters) {
    bool add = sh.additive.at(y);
    counter_fn[y] = std::make_shared<TableFn>((add ? "sum_" : "last_") + y + "_" + tag, table,
                                              add ? TableFn::What::Sum : TableFn::What::Last, y, nullptr,
                                              std::vector<std::string>{}, opt.eval_fuel);
  }

  std::vector<Stage> periodic;
  for (const auto& pc : osc.classes) {
    Stage st;
    st.scc = scc.id;
    st.tag = Provenance::HighOrderPeriodic;
    st.paths = scc.members;
    st.guard = land({lp.guard, sh.param_guard, detail::in_set(xpre, pc.values)});
    st.iterations = call(exit_fn, detail::pre_args(lp.variables));
    for (const auto& v : lp.variables) st.post[{SymKind::Var, v}] = pre(v);
    if (pc.modular) {
      st.post[{SymKind::Var, sh.x}] = mod(xpre - pc.offset + pc.step * iter(), pc.period) + pc.offset;
    } else {
      st.post[{SymKind::Var, sh.x}] = call(value_fn, {xpre, iter()});
    }
    for (const auto& y : sh.counters) {
      if (sh.additive.at(y)) {
        st.post[{SymKind::Var, y}] = pre(y) + call(counter_fn[y], {xpre, iter()});
      } else {
        st.post[{SymKind::Var, y}] = call(counter_fn[y], {xpre, pre(y), iter()});
      }
    }
    periodic.push_back(std::move(st));
  }

  std::vector<std::vector<Stage>> alts;
  for (const auto& st : periodic) alts.push_back({st});
  const Expr outside = lnot(detail::in_set(xpre, r.interval));
  for (int p : sh.members) {
    if (sh.sets.at(p).minus(r.interval).is_empty()) continue;
    auto pre_stage = summarize_scc_1(lp, lp.paths[static_cast<std::size_t>(p)], scc.id, opt, outside);
    if (!pre_stage) continue;
    pre_stage->tag = Provenance::HighOrderPrephase;
    alts.push_back({*pre_stage});
    for (const auto& st : periodic) alts.push_back({*pre_stage, st});
  }
  return alts;
}

}  // namespace loopsum
