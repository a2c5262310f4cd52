#include "loopsum/summarize.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

#include "summarize_internal.hpp"

namespace loopsum {

std::string to_string(Provenance p) {
  switch (p) {
    case Provenance::ZeroOrder:
      return "ZERO_ORDER";
    case Provenance::OneOrder:
      return "ONE_ORDER";
    case Provenance::HighOrderPeriodic:
      return "HIGH_ORDER_PERIODIC";
    case Provenance::HighOrderPrephase:
      return "HIGH_ORDER_PREPHASE";
    case Provenance::Composed:
      return "COMPOSED";
  }
  return "?";
}

namespace detail {

std::vector<Expr> conjuncts(const Expr& e) {
  if (e->kind == Kind::And) return e->args;
  if (e->is_true()) return {};
  return {e};
}

Expr in_set(const Expr& x, const IntervalSet& s) {
  std::vector<Expr> parts;
  for (const auto& r : s.ranges()) {
    std::vector<Expr> b;
    if (r.lo != IntervalSet::kNegInf) b.push_back(ge(x, constant(r.lo)));
    if (r.hi != IntervalSet::kPosInf) b.push_back(le(x, constant(r.hi)));
    parts.push_back(land(std::move(b)));
  }
  return lor(std::move(parts));
}

Valuation pre_env(const std::vector<std::string>& vars, std::span<const Int> args) {
  Valuation env;
  for (std::size_t i = 0; i < vars.size(); ++i) env[{SymKind::Pre, vars[i]}] = args[i];
  return env;
}

std::vector<Expr> pre_args(const std::vector<std::string>& vars) {
  std::vector<Expr> out;
  for (const auto& v : vars) out.push_back(pre(v));
  return out;
}

namespace {

/// sum_{k=0}^{n-1} k^p for p <= 3, as an integer-valued expression in n.
Expr power_sum(int p, const Expr& n) {
  switch (p) {
    case 0:
      return n;
    case 1:
      return floor_div(n * (n - 1), 2);
    case 2:
      return floor_div((n - 1) * n * (2 * n - 1), 6);
    case 3: {
      auto s1 = floor_div(n * (n - 1), 2);
      return s1 * s1;
    }
    default:
      throw SummaryFailure(reason::kClosedFormUnavailable, "summation of degree above 3");
  }
}

/// sum_{k=0}^{N-1} b(k) where b is a polynomial in the iteration symbol.
Expr sum_over_iterations(const Expr& b) {
  const SymKey n_key{SymKind::Iter, "N"};
  std::map<int, Expr> by_power;
  for (const auto& t : terms_of(b)) {
    int p = 0;
    std::vector<Factor> others;
    for (const auto& f : t.mono) {
      if (f.atom->kind == Kind::Sym && f.atom->sym == n_key) {
        p = f.power;
      } else {
        if (mentions(f.atom, n_key)) {
          throw SummaryFailure(reason::kClosedFormUnavailable, "increment is not polynomial in the iteration count");
        }
        others.push_back(f);
      }
    }
    Expr c = from_terms({Term{t.coef, std::move(others)}});
    auto it = by_power.find(p);
    by_power[p] = it == by_power.end() ? c : it->second + c;
  }
  Expr total = constant(0);
  for (const auto& [p, c] : by_power) total = total + c * power_sum(p, iter());
  return total;
}

}  // namespace

Recurrences solve(const SymMap& op, const std::vector<std::string>& variables) {
  Recurrences r;
  const Expr n = iter();
  std::map<std::string, int> valid_from;
  std::vector<std::string> pending;
  for (const auto& v : variables) {
    auto it = op.find({SymKind::Var, v});
    Expr e = it == op.end() ? pre(v) : it->second;
    if (equal(e, pre(v))) {
      r.forms[{SymKind::Var, v}] = e;
      valid_from[v] = 0;
    } else {
      pending.push_back(v);
    }
  }
  auto at = [&](const std::string& v, const Expr& k) {
    return substitute(r.forms.at({SymKind::Var, v}), SymMap{{{SymKind::Iter, "N"}, k}});
  };
  bool progress = true;
  while (!pending.empty() && progress) {
    progress = false;
    for (auto it = pending.begin(); it != pending.end();) {
      const std::string v = *it;
      Expr e = op.at({SymKind::Var, v});
      std::vector<std::string> deps;
      bool ready = true;
      for (const auto& s : free_symbols(e)) {
        if (s.kind != SymKind::Pre) throw std::logic_error("path operation over non-pre symbol " + to_string(s));
        if (s.name == v) continue;
        deps.push_back(s.name);
        if (!valid_from.count(s.name)) ready = false;
      }
      if (!ready) {
        ++it;
        continue;
      }
      auto split = split_linear(e, {SymKind::Pre, v});
      if (!split || !split->coef->is_const()) {
        throw SummaryFailure(reason::kClosedFormUnavailable, "update of " + v + " is not affine: " + to_string(e));
      }
      const Int a = split->coef->value;
      const Expr& b = split->rest;
      int from = 0;
      for (const auto& d : deps) from = std::max(from, valid_from[d]);
      Expr form;
      if (a == 0) {
        SymMap shifted;
        for (const auto& d : deps) shifted[{SymKind::Pre, d}] = at(d, n - 1);
        form = substitute(b, shifted);
        from += 1;
        if (from > 1) {
          throw SummaryFailure(reason::kClosedFormUnavailable, "update of " + v + " lags a lagged variable");
        }
      } else {
        if (from > 0) {
          throw SummaryFailure(reason::kClosedFormUnavailable, "update of " + v + " accumulates a lagged variable");
        }
        SymMap now;
        for (const auto& d : deps) now[{SymKind::Pre, d}] = at(d, n);
        Expr bk = substitute(b, now);
        if (!mentions(bk, {SymKind::Iter, "N"})) {
          form = closed_form(pre(v), a, bk, n);
        } else if (a == 1) {
          form = pre(v) + sum_over_iterations(bk);
        } else {
          throw SummaryFailure(reason::kClosedFormUnavailable,
                               "update of " + v + " scales by " + std::to_string(a) + " with a varying increment");
        }
      }
      r.forms[{SymKind::Var, v}] = form;
      valid_from[v] = from;
      if (from > 0) r.lagged.insert(v);
      it = pending.erase(it);
      progress = true;
    }
  }
  if (!pending.empty()) {
    std::string names;
    for (const auto& v : pending) names += (names.empty() ? "" : ", ") + v;
    throw SummaryFailure(reason::kCoupledRecurrence, "updates of " + names + " depend on each other");
  }
  return r;
}

FirstExit::FirstExit(std::string name, Expr cond, std::vector<std::string> vars, bool limited, Int fuel)
    : name_(std::move(name)), cond_(std::move(cond)), vars_(std::move(vars)), limited_(limited), fuel_(fuel) {}

Int FirstExit::apply(std::span<const Int> args) const {
  Valuation env = pre_env(vars_, args);
  const Int limit = limited_ ? args[vars_.size()] : 0;
  const SymKey n_key{SymKind::Iter, "N"};
  for (Int n = 1;; ++n) {
    if (limited_ && n >= limit) return std::max<Int>(limit, 1);
    env[n_key] = n;
    if (!eval_bool(cond_, env)) return n;
    if (n >= fuel_) throw EvalError(name_ + ": no exit within " + std::to_string(fuel_) + " iterations");
  }
}

}  // namespace detail

SymMap solve_recurrences(const SymMap& op, const std::vector<std::string>& variables) {
  return detail::solve(op, variables).forms;
}

Stage summarize_scc_0(const LoopPaths& lp, const SPath& sp, int scc) {
  Stage st;
  st.scc = scc;
  st.tag = Provenance::ZeroOrder;
  st.paths = {sp.index};
  st.guard = land(lp.guard, sp.cond_conj());
  st.iterations = constant(1);
  st.post = sp.op;
  return st;
}

std::optional<Stage> summarize_scc_1(const LoopPaths& lp, const SPath& sp, int scc, const SummarizeOptions& opt,
                                     const Expr& extra) {
  const SymKey n_key{SymKind::Iter, "N"};
  Stage st;
  st.scc = scc;
  st.tag = Provenance::OneOrder;
  st.paths = {sp.index};
  st.guard = land({lp.guard, sp.cond_conj(), extra});
  auto rec = detail::solve(sp.op, lp.variables);
  st.post = rec.forms;

  SymMap at_n;
  for (const auto& [k, v] : rec.forms) at_n[{SymKind::Pre, k.name}] = v;
  const Expr cont = substitute(st.guard, at_n);  // run condition at iteration N

  // A lagged variable in the guard breaks the "atom holds at N = 0" argument.
  bool lag = false;
  for (const auto& s : free_symbols(st.guard)) {
    if (s.kind == SymKind::Pre && rec.lagged.count(s.name)) lag = true;
  }

  bool symbolic = !lag;
  std::vector<Expr> bounds;
  if (cont->is_false()) {
    bounds.push_back(constant(1));
  } else {
    for (const auto& atom : detail::conjuncts(cont)) {
      if (!mentions(atom, n_key)) continue;
      if (atom->kind != Kind::Ge && atom->kind != Kind::Eq) {
        symbolic = false;
        continue;
      }
      auto split = split_linear(atom_operand(atom), n_key);
      if (!split || !split->coef->is_const()) {
        symbolic = false;
        continue;
      }
      const Int beta = split->coef->value;
      if (atom->kind == Kind::Eq) {
        bounds.push_back(constant(1));
      } else if (beta < 0) {
        bounds.push_back(floor_div(split->rest, -beta) + 1);
      }
    }
  }
  if (symbolic) {
    if (bounds.empty()) return std::nullopt;
    st.iterations = bounds.size() == 1 ? bounds.front() : min(bounds);
    return st;
  }
  std::string name = "n_s" + std::to_string(scc) + "_" + sp.name();
  auto fn = std::make_shared<detail::FirstExit>(name, cont, lp.variables, !bounds.empty() && !lag, opt.eval_fuel);
  auto args = detail::pre_args(lp.variables);
  if (!bounds.empty() && !lag) args.push_back(bounds.size() == 1 ? bounds.front() : min(bounds));
  st.iterations = call(fn, std::move(args));
  return st;
}

SummaryCase make_case(const LoopPaths& lp, std::vector<Stage> stages) {
  SummaryCase c;
  SymMap state;
  for (const auto& v : lp.variables) state[{SymKind::Pre, v}] = pre(v);
  std::vector<Expr> guards;
  Expr total = constant(0);
  for (const auto& st : stages) {
    guards.push_back(substitute(st.guard, state));
    Expr n = substitute(st.iterations, state);
    total = total + n;
    SymMap with_n = state;
    with_n[{SymKind::Iter, "N"}] = n;
    SymMap next;
    for (const auto& v : lp.variables) {
      auto it = st.post.find({SymKind::Var, v});
      Expr e = it == st.post.end() ? pre(v) : it->second;
      next[{SymKind::Pre, v}] = substitute(e, with_n);
    }
    state = std::move(next);
  }
  guards.push_back(lnot(substitute(lp.guard, state)));
  c.guard = land(std::move(guards));
  c.iterations = total;
  for (const auto& v : lp.variables) c.post[{SymKind::Var, v}] = state.at({SymKind::Pre, v});
  if (stages.empty()) {
    c.tag = Provenance::ZeroOrder;
  } else if (stages.size() == 1) {
    c.tag = stages.front().tag;
  } else {
    c.tag = Provenance::Composed;
  }
  c.stages = std::move(stages);
  return c;
}

std::vector<SummaryCase> compose_csg(const LoopPaths& lp, const Csg& csg,
                                     const std::map<int, std::vector<std::vector<Stage>>>& alternatives,
                                     const SummarizeOptions& opt) {
  std::vector<std::vector<Stage>> chains;
  std::vector<Stage> chain;
  std::function<void(int)> walk = [&](int scc) {
    for (int next : csg.successors(scc)) {
      if (next == csg.end) {
        chains.push_back(chain);
        if (chains.size() > opt.max_cases) {
          throw SummaryFailure(reason::kCaseExplosion,
                               "more than " + std::to_string(opt.max_cases) + " summary cases");
        }
        continue;
      }
      auto it = alternatives.find(next);
      if (it == alternatives.end()) continue;
      for (const auto& alt : it->second) {
        chain.insert(chain.end(), alt.begin(), alt.end());
        walk(next);
        chain.resize(chain.size() - alt.size());
      }
    }
  };
  walk(csg.start);
  // shorter chains first: the loop-skipping case, then single SCCs, then compositions
  std::stable_sort(chains.begin(), chains.end(),
                   [](const auto& a, const auto& b) { return a.size() < b.size(); });
  std::vector<SummaryCase> out;
  for (auto& c : chains) out.push_back(make_case(lp, std::move(c)));
  return out;
}

LoopAnalysis analyze(const Cfg& cfg, const CanonicalLoop& loop, Solver& solver, const SummarizeOptions& opt) {
  LoopAnalysis a;
  a.paths = analyze_loop(cfg, loop, solver, opt.max_paths);
  a.graph = build_spath_graph(a.paths, solver);
  a.csg = contract(a.graph);
  return a;
}

Summary summarize_loop(const Cfg& cfg, const CanonicalLoop& loop, Solver& solver, const SummarizeOptions& opt,
                       LoopAnalysis* analysis) {
  Summary s;
  s.loop_id = loop.id;
  s.stmt_id = loop.stmt_id;
  s.variables = cfg.variables;
  s.guard = lift_to_pre(ast::to_sym(cfg.nodes[static_cast<std::size_t>(loop.header)].cond));
  try {
    LoopAnalysis a = analyze(cfg, loop, solver, opt);
    const LoopPaths& lp = a.paths;
    s.variables = lp.variables;
    s.guard = lp.guard;
    for (const auto& [x, y] : a.graph.unknown_edges) {
      s.notes.push_back("jump " + std::to_string(x) + "->" + std::to_string(y) + " kept after solver UNKNOWN");
    }
    std::map<int, std::vector<std::vector<Stage>>> alts;
    for (int id : a.csg.topological_order()) {
      if (id == a.csg.start || id == a.csg.end) continue;
      const Scc& scc = a.csg.sccs[static_cast<std::size_t>(id)];
      const SPath& first = lp.paths[static_cast<std::size_t>(scc.members.front())];
      switch (scc.order()) {
        case 0:
          alts[id] = {{summarize_scc_0(lp, first, id)}};
          break;
        case 1: {
          auto st = summarize_scc_1(lp, first, id, opt);
          if (st) {
            alts[id] = {{*st}};
          } else {
            alts[id] = {};
            s.notes.push_back(first.name() + " repeats forever once entered");
          }
          break;
        }
        default: {
          Oscillation osc;
          alts[id] = summarize_scc_high(lp, scc, opt, &osc);
          s.oscillations.push_back(std::move(osc));
          break;
        }
      }
    }
    s.cases = compose_csg(lp, a.csg, alts, opt);
    if (analysis) *analysis = std::move(a);
  } catch (const SummaryFailure& f) {
    s.failure = Failure{f.code, f.what()};
    s.cases.clear();
  } catch (const AnalysisError& e) {
    s.failure = Failure{e.code, e.what()};
  } catch (const OverflowError& e) {
    s.failure = Failure{reason::kNotSummarizable, e.what()};
  }
  return s;
}

CaseRun run_case(const Summary& s, const SummaryCase& c, const Valuation& pre_state) {
  CaseRun run;
  Valuation env = pre_state;
  for (const auto& v : s.variables) env.try_emplace({SymKind::Pre, v}, 0);
  Int total = 0;
  for (const auto& st : c.stages) {
    if (!eval_bool(st.guard, env)) return run;
    const Int n = eval_int(st.iterations, env);
    Valuation with_n = env;
    with_n[{SymKind::Iter, "N"}] = n;
    Valuation next;
    for (const auto& v : s.variables) {
      auto it = st.post.find({SymKind::Var, v});
      next[{SymKind::Pre, v}] = it == st.post.end() ? env.at({SymKind::Pre, v}) : eval_int(it->second, with_n);
    }
    env = std::move(next);
    total = arith::add(total, n);
  }
  if (eval_bool(s.guard, env)) return run;
  run.matched = true;
  run.post = std::move(env);
  run.iterations = total;
  return run;
}

}  // namespace loopsum
