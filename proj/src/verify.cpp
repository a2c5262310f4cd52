#include "loopsum/verify.hpp"

#include <functional>
#include <map>
#include <set>
#include <stdexcept>

namespace loopsum {

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Holds:
      return "HOLDS";
    case Verdict::Violated:
      return "VIOLATED";
    case Verdict::Unknown:
      return "UNKNOWN";
  }
  return "?";
}

std::vector<AssertionSite> assertions(const ast::Program& program) {
  std::vector<AssertionSite> out;
  std::function<void(const ast::Block&, bool)> walk = [&](const ast::Block& b, bool in_loop) {
    for (const auto& s : b) {
      if (s->kind == ast::Stmt::Kind::Assert) out.push_back({s, in_loop});
      if (s->kind == ast::Stmt::Kind::If) {
        walk(s->then_body, in_loop);
        walk(s->else_body, in_loop);
      }
      if (s->kind == ast::Stmt::Kind::While) walk(s->then_body, true);
    }
  };
  walk(program.body, false);
  return out;
}

namespace {

bool has_assert(const ast::Block& b) {
  for (const auto& s : b) {
    if (s->kind == ast::Stmt::Kind::Assert) return true;
    if (has_assert(s->then_body) || has_assert(s->else_body)) return true;
  }
  return false;
}

struct Path {
  std::map<std::string, Expr> state;
  std::vector<Expr> pc;
};

struct Status {
  bool violated = false;
  State witness;
  std::string method;
  bool undecided = false;  // some query was not settled symbolically
  std::string why;
  int queries = 0;
};

/// Symbolic execution of the nesting-free program; top-level loops are
/// replaced by their summary cases.
class Checker {
 public:
  Checker(const ast::Program& original, const ast::Program& flat, const ProgramSummary& ps, Solver& solver,
          const VerifyOptions& opt)
      : original_(original), flat_(flat), solver_(solver), opt_(opt) {
    for (const auto& l : ps.loops) summaries_[l.stmt_id] = &l.summary;
    for (const auto& in : original.inputs) domains_[{SymKind::Var, in.name}] = {in.lo, in.hi};
  }

  std::map<int, Status> run() {
    Path p;
    for (const auto& v : flat_.variables()) p.state[v] = constant(0);
    for (const auto& in : flat_.inputs) p.state[in.name] = var(in.name);
    try {
      exec(flat_.body, {p});
    } catch (const Abort& a) {
      stop_reason_ = a.reason;
    }
    return std::move(status_);
  }

  const std::optional<std::string>& stop_reason() const { return stop_reason_; }

 private:
  struct Abort {
    std::string reason;
  };

  Expr lower(const ast::ExprPtr& e, const Path& p) {
    return substitute(ast::to_sym(e), [&](const SymKey& k) -> std::optional<Expr> {
      if (k.kind != SymKind::Var) return std::nullopt;
      return p.state.at(k.name);
    });
  }

  /// Pre symbols of a summary expression bound to the path state.
  Expr bind(const Expr& e, const std::map<std::string, Expr>& state, const Expr* n = nullptr) {
    return substitute(e, [&](const SymKey& k) -> std::optional<Expr> {
      if (k.kind == SymKind::Iter && n) return *n;
      if (k.kind != SymKind::Pre) return std::nullopt;
      auto it = state.find(k.name);
      if (it != state.end()) return it->second;
      return constant(0);
    });
  }

  SolveResult query(std::vector<Expr> cs) { return solver_.check(ConstraintSet(std::move(cs)), domains_); }

  bool feasible(const std::vector<Expr>& pc) { return query(pc).status != SolveStatus::Unsat; }

  void check(int id, const std::vector<Expr>& pc, const Expr& negated) {
    Status& st = status_[id];
    if (st.violated) return;
    ++st.queries;
    std::vector<Expr> cs = pc;
    cs.push_back(negated);
    SolveResult r = query(cs);
    if (r.status == SolveStatus::Unsat) return;
    if (r.status == SolveStatus::Unknown) {
      st.undecided = true;
      st.why = "solver: " + r.note;
      return;
    }
    State in;
    for (const auto& d : original_.inputs) {
      auto it = r.model.find({SymKind::Var, d.name});
      in[d.name] = it == r.model.end() ? d.lo : it->second;
    }
    InterpretOptions io;
    io.fuel = opt_.fuel;
    ConcreteState cs_run = interpret(original_, in, io);
    if (cs_run.status == ConcreteState::Status::AssertFailed && cs_run.stmt_id == id) {
      st.violated = true;
      st.witness = in;
      st.method = "symbolic";
      return;
    }
    st.undecided = true;
    st.why = "model did not replay to a failure";
  }

  void mark_undecided(const ast::Block& b, const std::string& why) {
    for (const auto& s : b) {
      if (s->kind == ast::Stmt::Kind::Assert) {
        Status& st = status_[s->id];
        st.undecided = true;
        st.why = why;
      }
      mark_undecided(s->then_body, why);
      mark_undecided(s->else_body, why);
    }
  }

  std::vector<Path> exec(const ast::Block& b, std::vector<Path> paths) {
    for (const auto& s : b) {
      if (paths.empty()) break;
      paths = exec(*s, std::move(paths));
      if (paths.size() > opt_.max_paths) throw Abort{"too many symbolic paths"};
    }
    return paths;
  }

  std::vector<Path> exec(const ast::Stmt& s, std::vector<Path> paths) {
    using K = ast::Stmt::Kind;
    std::vector<Path> out;
    switch (s.kind) {
      case K::Decl:
        for (auto& p : paths) p.state[s.target] = s.value ? lower(s.value, p) : constant(0);
        return paths;
      case K::Assign:
        for (auto& p : paths) p.state[s.target] = lower(s.value, p);
        return paths;
      case K::ParallelAssign:
        for (auto& p : paths) {
          std::vector<Expr> vals;
          for (const auto& [t, e] : s.parallel) vals.push_back(lower(e, p));
          for (std::size_t i = 0; i < vals.size(); ++i) p.state[s.parallel[i].first] = vals[i];
        }
        return paths;
      case K::Assert:
        for (auto& p : paths) {
          Expr c = lower(s.cond, p);
          if (c->is_true()) continue;
          check(s.id, p.pc, lnot(c));
          p.pc.push_back(c);
        }
        return paths;
      case K::Break:
        // only reached inside a loop body, where the iteration ends here
        return {};
      case K::If: {
        std::vector<Path> then_paths;
        std::vector<Path> else_paths;
        for (auto& p : paths) {
          Expr c = lower(s.cond, p);
          if (!c->is_false()) {
            Path q = p;
            if (!c->is_true()) q.pc.push_back(c);
            if (c->is_true() || feasible(q.pc)) then_paths.push_back(std::move(q));
          }
          if (!c->is_true()) {
            Path q = std::move(p);
            if (!c->is_false()) q.pc.push_back(lnot(c));
            if (c->is_false() || feasible(q.pc)) else_paths.push_back(std::move(q));
          }
        }
        out = exec(s.then_body, std::move(then_paths));
        auto rest = exec(s.else_body, std::move(else_paths));
        out.insert(out.end(), std::make_move_iterator(rest.begin()), std::make_move_iterator(rest.end()));
        return out;
      }
      case K::While:
        return loop(s, std::move(paths));
    }
    return paths;
  }

  std::vector<Path> loop(const ast::Stmt& s, std::vector<Path> paths) {
    auto it = summaries_.find(s.id);
    if (it == summaries_.end() || !it->second->ok()) {
      std::string why = "loop at statement " + std::to_string(s.id) + " has no summary";
      if (it != summaries_.end()) why = it->second->failure->reason;
      throw Abort{why};
    }
    const Summary& sum = *it->second;
    const bool body_asserts = has_assert(s.then_body);
    std::vector<Path> out;
    int fresh = 0;
    for (auto& p : paths) {
      std::vector<Expr> guards;
      for (const auto& c : sum.cases) guards.push_back(bind(c.guard, p.state));
      if (body_asserts) {
        // Runs no case covers never leave the loop; their iterations are not summarized.
        std::vector<Expr> cs = p.pc;
        cs.push_back(lnot(lor(guards)));
        if (query(cs).status != SolveStatus::Unsat) mark_undecided(s.then_body, "loop may not terminate");
      }
      for (std::size_t ci = 0; ci < sum.cases.size(); ++ci) {
        const SummaryCase& c = sum.cases[ci];
        Path base = p;
        if (!guards[ci]->is_true()) base.pc.push_back(guards[ci]);
        if (!guards[ci]->is_false() && feasible(base.pc)) {
          if (body_asserts) iterations(s, sum, c, base, fresh);
          Path after = base;
          for (const auto& v : sum.variables) {
            auto post = c.post.find({SymKind::Var, v});
            if (post != c.post.end() && after.state.count(v)) after.state[v] = bind(post->second, p.state);
          }
          out.push_back(std::move(after));
        }
      }
    }
    return out;
  }

  /// Runs the loop body once from every loop-head state the case passes through.
  void iterations(const ast::Stmt& s, const Summary& sum, const SummaryCase& c, const Path& base, int& fresh) {
    std::map<std::string, Expr> entry = base.state;
    for (const auto& st : c.stages) {
      std::vector<Path> heads;
      Path first = base;
      first.state = entry;
      heads.push_back(first);
      Expr count = bind(st.iterations, entry);
      if (!(count->is_const() && count->value <= 1)) {
        Expr n = iter("n" + std::to_string(fresh++));
        Path later = base;
        later.pc.push_back(ge(n, constant(1)));
        if (count->kind == Kind::Min) {
          for (const auto& a : count->args) later.pc.push_back(lt(n, a));
        } else {
          later.pc.push_back(lt(n, count));
        }
        for (const auto& v : sum.variables) {
          auto post = st.post.find({SymKind::Var, v});
          if (post != st.post.end() && later.state.count(v)) later.state[v] = bind(post->second, entry, &n);
        }
        heads.push_back(std::move(later));
      }
      for (auto& h : heads) h.pc.push_back(lower(s.cond, h));
      exec(s.then_body, std::move(heads));
      std::map<std::string, Expr> next = entry;
      for (const auto& v : sum.variables) {
        auto post = st.post.find({SymKind::Var, v});
        if (post == st.post.end() || !next.count(v)) continue;
        Expr total = count;
        next[v] = bind(post->second, entry, &total);
      }
      entry = std::move(next);
    }
  }

  const ast::Program& original_;
  const ast::Program& flat_;
  Solver& solver_;
  const VerifyOptions& opt_;
  std::map<int, const Summary*> summaries_;
  std::map<SymKey, std::pair<Int, Int>> domains_;
  std::map<int, Status> status_;
  std::optional<std::string> stop_reason_;
};

Int input_space(const ast::Program& p) {
  Int n = 1;
  for (const auto& in : p.inputs) {
    n = arith::mul(n, arith::add(arith::sub(in.hi, in.lo), 1));
  }
  return n;
}

/// Runs every input; loops without assertions go through their summaries.
void enumerate(const ast::Program& program, const ProgramSummary& ps, const VerifyOptions& opt,
               std::map<int, Status>& status, const std::set<int>& wanted) {
  std::map<int, const Summary*> hooks;
  for (const auto& s : program.body) {
    if (s->kind != ast::Stmt::Kind::While || has_assert(s->then_body)) continue;
    for (const auto& l : ps.loops) {
      if (l.stmt_id == s->id && l.summary.ok()) hooks[s->id] = &l.summary;
    }
  }
  InterpretOptions io;
  io.fuel = opt.fuel;
  io.summaries = &hooks;
  bool exhausted = false;
  std::vector<Int> cur;
  for (const auto& in : program.inputs) cur.push_back(in.lo);
  std::set<int> open = wanted;
  for (;;) {
    State in;
    for (std::size_t i = 0; i < cur.size(); ++i) in[program.inputs[i].name] = cur[i];
    ConcreteState r = interpret(program, in, io);
    if (r.status == ConcreteState::Status::FuelExhausted || r.status == ConcreteState::Status::RuntimeError) {
      exhausted = true;
    }
    if (r.status == ConcreteState::Status::AssertFailed && open.count(r.stmt_id)) {
      Status& st = status[r.stmt_id];
      st.violated = true;
      st.witness = in;
      st.method = "enumeration";
      open.erase(r.stmt_id);
      if (open.empty()) return;
    }
    std::size_t k = 0;
    while (k < cur.size() && cur[k] == program.inputs[k].hi) {
      cur[k] = program.inputs[k].lo;
      ++k;
    }
    if (k == cur.size()) break;
    ++cur[k];
  }
  for (int id : open) {
    Status& st = status[id];
    if (exhausted) {
      st.why = "some inputs ran out of fuel";
      continue;
    }
    st.undecided = false;
    st.method = "enumeration";
  }
}

}  // namespace

VerifyReport verify(const ast::Program& program, Solver& solver, const VerifyOptions& options) {
  VerifyReport rep;
  auto sites = assertions(program);
  ProgramSummary ps = summarize_program(program, solver, options.summarize);
  rep.summary_failure = ps.failure;
  Elimination el = eliminate_nested(program, solver, options.summarize);

  std::map<int, Status> status;
  std::optional<std::string> stop;
  if (program.bit_width) {
    stop = "bit-width semantics are not modeled symbolically";
  } else if (el.failure) {
    stop = el.failure->reason;
  } else {
    Checker ck(program, el.program, ps, solver, options);
    status = ck.run();
    stop = ck.stop_reason();
  }

  // Assertions the symbolic pass could not settle.
  std::set<int> open;
  for (const auto& site : sites) {
    Status& st = status[site.stmt->id];
    if (st.violated) continue;
    if (stop) {
      st.undecided = true;
      st.why = *stop;
    }
    if (st.undecided) open.insert(site.stmt->id);
  }
  // Enumeration stands in for the solver, never for a missing summary.
  const bool summarized = ps.ok() && !el.failure;
  if (!open.empty() && summarized && input_space(program) <= options.enumerate_limit) {
    enumerate(program, ps, options, status, open);
  }

  for (const auto& site : sites) {
    const Status& st = status[site.stmt->id];
    AssertionResult r;
    r.stmt_id = site.stmt->id;
    r.loc = site.stmt->loc;
    r.text = ast::to_source(site.stmt->cond);
    r.in_loop = site.in_loop;
    r.queries = st.queries;
    if (st.violated) {
      r.verdict = Verdict::Violated;
      r.witness = st.witness;
      r.method = st.method;
    } else if (st.undecided) {
      r.verdict = Verdict::Unknown;
      r.reason = st.why;
    } else {
      r.verdict = Verdict::Holds;
      r.method = st.method.empty() ? "symbolic" : st.method;
    }
    rep.results.push_back(std::move(r));
  }
  return rep;
}

namespace {

AssertionResult verify_one(const ast::Program& program, int stmt_id, bool in_loop, Solver& solver,
                           const VerifyOptions& options) {
  bool found = false;
  for (const auto& site : assertions(program)) {
    if (site.stmt->id != stmt_id) continue;
    found = true;
    if (site.in_loop != in_loop) {
      throw std::invalid_argument("assertion " + std::to_string(stmt_id) +
                                  (in_loop ? " is not inside a loop" : " is inside a loop"));
    }
  }
  if (!found) throw std::invalid_argument("no assertion with statement id " + std::to_string(stmt_id));
  for (auto& r : verify(program, solver, options).results) {
    if (r.stmt_id == stmt_id) return r;
  }
  throw std::logic_error("assertion vanished");
}

}  // namespace

AssertionResult verify_in_loop(const ast::Program& program, int stmt_id, Solver& solver,
                               const VerifyOptions& options) {
  return verify_one(program, stmt_id, true, solver, options);
}

AssertionResult verify_after_loop(const ast::Program& program, int stmt_id, Solver& solver,
                                  const VerifyOptions& options) {
  return verify_one(program, stmt_id, false, solver, options);
}

}  // namespace loopsum
