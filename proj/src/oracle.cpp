#include "loopsum/oracle.hpp"

#include <unordered_map>

namespace loopsum {

std::string to_string(ConcreteState::Status s) {
  switch (s) {
    case ConcreteState::Status::Running:
      return "RUNNING";
    case ConcreteState::Status::Done:
      return "DONE";
    case ConcreteState::Status::FuelExhausted:
      return "FUEL_EXHAUSTED";
    case ConcreteState::Status::AssertFailed:
      return "ASSERT_FAILED";
    case ConcreteState::Status::RuntimeError:
      return "RUNTIME_ERROR";
  }
  return "?";
}

namespace {

class Interpreter {
 public:
  Interpreter(const ast::Program& p, const InterpretOptions& o) : program_(p), opt_(o) {}

  ConcreteState run(const State& inputs) {
    for (const auto& v : program_.variables()) env_[{SymKind::Var, v}] = 0;
    for (const auto& in : program_.inputs) {
      auto it = inputs.find(in.name);
      if (it != inputs.end()) env_[{SymKind::Var, in.name}] = wrap(it->second);
    }
    try {
      exec(program_.body);
      if (st_.status == ConcreteState::Status::Running) st_.status = ConcreteState::Status::Done;
    } catch (const OverflowError& e) {
      fail(ConcreteState::Status::RuntimeError, e.what());
    } catch (const DivisionByZero& e) {
      fail(ConcreteState::Status::RuntimeError, e.what());
    } catch (const EvalError& e) {
      fail(ConcreteState::Status::RuntimeError, e.what());
    }
    for (const auto& [k, v] : env_) st_.vars[k.name] = v;
    return st_;
  }

 private:
  enum class Flow { Normal, Break, Stop };

  const Expr& lowered(const ast::ExprPtr& e) {
    auto it = cache_.find(e.get());
    if (it != cache_.end()) return it->second;
    return cache_.emplace(e.get(), ast::to_sym(e)).first->second;
  }

  Int wrap(Int v) const {
    if (!program_.bit_width || *program_.bit_width >= 64) return v;
    const int w = *program_.bit_width;
    const auto m = static_cast<std::uint64_t>(1) << w;
    auto u = static_cast<std::uint64_t>(v) & (m - 1);
    if (u >= m / 2) return static_cast<Int>(u) - static_cast<Int>(m);
    return static_cast<Int>(u);
  }

  void fail(ConcreteState::Status s, std::string msg) {
    st_.status = s;
    st_.message = std::move(msg);
  }

  void assign(const std::string& name, Int v) { env_[{SymKind::Var, name}] = wrap(v); }

  Flow exec(const ast::Block& b) {
    for (const auto& s : b) {
      Flow f = exec(*s);
      if (f != Flow::Normal) return f;
    }
    return Flow::Normal;
  }

  Flow exec(const ast::Stmt& s) {
    current_ = &s;
    switch (s.kind) {
      case ast::Stmt::Kind::Decl:
        assign(s.target, s.value ? eval_int(lowered(s.value), env_) : 0);
        return Flow::Normal;
      case ast::Stmt::Kind::Assign:
        assign(s.target, eval_int(lowered(s.value), env_));
        return Flow::Normal;
      case ast::Stmt::Kind::ParallelAssign: {
        std::vector<Int> vals;
        for (const auto& [t, e] : s.parallel) vals.push_back(eval_int(lowered(e), env_));
        for (std::size_t i = 0; i < vals.size(); ++i) assign(s.parallel[i].first, vals[i]);
        return Flow::Normal;
      }
      case ast::Stmt::Kind::Assert:
        if (!eval_bool(lowered(s.cond), env_)) {
          st_.loc = s.loc;
          st_.stmt_id = s.id;
          fail(ConcreteState::Status::AssertFailed, "assertion failed: " + ast::to_source(s.cond));
          return Flow::Stop;
        }
        return Flow::Normal;
      case ast::Stmt::Kind::Break:
        return Flow::Break;
      case ast::Stmt::Kind::If: {
        bool c = eval_bool(lowered(s.cond), env_);
        if (opt_.trace) opt_.trace->push_back({s.id, c});
        return exec(c ? s.then_body : s.else_body);
      }
      case ast::Stmt::Kind::While:
        return loop(s);
    }
    return Flow::Normal;
  }

  Flow loop(const ast::Stmt& s) {
    if (opt_.summaries) {
      auto it = opt_.summaries->find(s.id);
      if (it != opt_.summaries->end()) {
        State cur;
        for (const auto& [k, v] : env_) cur[k.name] = v;
        SummaryEval r = eval_summary(*it->second, cur);
        if (r.status != SummaryEval::Status::Ok) {
          st_.stmt_id = s.id;
          st_.loc = s.loc;
          fail(ConcreteState::Status::RuntimeError, "summary: " + r.message);
          return Flow::Stop;
        }
        for (const auto& [k, v] : r.vars) env_[{SymKind::Var, k}] = wrap(v);
        st_.steps = arith::add(st_.steps, arith::add(r.iterations, 1));
        return Flow::Normal;
      }
    }
    for (;;) {
      if (++st_.steps > opt_.fuel) {
        fail(ConcreteState::Status::FuelExhausted, "fuel exhausted");
        return Flow::Stop;
      }
      bool c = eval_bool(lowered(s.cond), env_);
      if (opt_.trace) opt_.trace->push_back({s.id, c});
      if (!c) return Flow::Normal;
      Flow f = exec(s.then_body);
      if (f == Flow::Stop) return f;
      if (f == Flow::Break) return Flow::Normal;
    }
  }

  const ast::Program& program_;
  const InterpretOptions& opt_;
  Valuation env_;
  ConcreteState st_;
  const ast::Stmt* current_ = nullptr;
  std::unordered_map<const ast::ExprNode*, Expr> cache_;
};

}  // namespace

ConcreteState interpret(const ast::Program& program, const State& inputs, const InterpretOptions& options) {
  Interpreter in(program, options);
  return in.run(inputs);
}

SummaryEval eval_summary(const Summary& summary, const State& state) {
  SummaryEval out;
  if (!summary.ok()) {
    out.message = "summary failed: " + summary.failure->reason;
    return out;
  }
  Valuation pre_state;
  for (const auto& v : summary.variables) {
    auto it = state.find(v);
    pre_state[{SymKind::Pre, v}] = it == state.end() ? 0 : it->second;
  }
  try {
    for (std::size_t i = 0; i < summary.cases.size(); ++i) {
      CaseRun r = run_case(summary, summary.cases[i], pre_state);
      if (!r.matched) continue;
      out.status = SummaryEval::Status::Ok;
      out.vars = state;
      for (const auto& [k, v] : r.post) {
        if (state.count(k.name)) out.vars[k.name] = v;
      }
      out.iterations = r.iterations;
      out.case_index = static_cast<int>(i);
      return out;
    }
    out.status = SummaryEval::Status::NoCase;
    out.message = "no case matches";
  } catch (const std::exception& e) {
    out.status = SummaryEval::Status::Error;
    out.message = e.what();
  }
  return out;
}

State visible(const State& s) {
  State out;
  for (const auto& [k, v] : s) {
    if (k.rfind("__brk", 0) != 0) out[k] = v;
  }
  return out;
}

State random_inputs(const ast::Program& program, std::mt19937_64& rng) {
  State in;
  for (const auto& d : program.inputs) {
    std::uniform_int_distribution<Int> dist(d.lo, d.hi);
    in[d.name] = dist(rng);
  }
  return in;
}

DiffReport oracle_diff(const ast::Program& program, const ProgramSummary& summary, int inputs, std::uint64_t seed,
                       Int fuel) {
  DiffReport rep;
  rep.seed = seed;
  rep.inputs = inputs;
  std::map<int, const Summary*> hooks;
  for (const auto& l : summary.loops) hooks[l.stmt_id] = &l.summary;
  InterpretOptions plain;
  plain.fuel = fuel;
  InterpretOptions with;
  with.fuel = fuel;
  with.summaries = &hooks;
  std::mt19937_64 rng(seed);
  for (int k = 0; k < inputs; ++k) {
    State in = random_inputs(program, rng);
    ConcreteState want = interpret(program, in, plain);
    if (want.status == ConcreteState::Status::FuelExhausted || want.status == ConcreteState::Status::RuntimeError) {
      ++rep.skipped;
      continue;
    }
    ++rep.compared;
    ConcreteState got = interpret(program, in, with);
    bool same = got.status == want.status && visible(got.vars) == visible(want.vars);
    if (same) {
      ++rep.matched;
      continue;
    }
    ++rep.mismatch_count;
    if (rep.mismatches.size() < 5) {
      rep.mismatches.push_back({in, visible(want.vars), visible(got.vars), got.message});
    }
  }
  return rep;
}

}  // namespace loopsum
