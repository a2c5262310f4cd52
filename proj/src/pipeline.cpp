#include <algorithm>
#include <functional>

#include "loopsum/summarize.hpp"

namespace loopsum {

namespace {

bool synthesized(const std::string& v) { return v.rfind("__brk", 0) == 0; }

/// Pre symbols become program variables; break flags start out clear.
Expr to_program_vars(const Expr& e) {
  return substitute(e, [](const SymKey& k) -> std::optional<Expr> {
    if (k.kind != SymKind::Pre) return std::nullopt;
    if (synthesized(k.name)) return constant(0);
    return var(k.name);
  });
}

int max_id(const ast::Block& b) {
  int m = -1;
  for (const auto& s : b) {
    m = std::max({m, s->id, max_id(s->then_body), max_id(s->else_body)});
  }
  return m;
}

}  // namespace

ast::StmtPtr summary_code(const Summary& s, int& next_id) {
  ast::StmtPtr head;
  ast::Stmt* tail = nullptr;
  for (const auto& c : s.cases) {
    auto st = std::make_shared<ast::Stmt>();
    st->kind = ast::Stmt::Kind::If;
    st->id = next_id++;
    st->cond = ast::symbolic(to_program_vars(c.guard));
    auto assign = std::make_shared<ast::Stmt>();
    assign->kind = ast::Stmt::Kind::ParallelAssign;
    assign->id = next_id++;
    for (const auto& v : s.variables) {
      if (synthesized(v)) continue;
      auto it = c.post.find({SymKind::Var, v});
      if (it == c.post.end() || equal(it->second, pre(v))) continue;
      assign->parallel.emplace_back(v, ast::symbolic(to_program_vars(it->second)));
    }
    if (!assign->parallel.empty()) st->then_body.push_back(assign);
    if (tail) {
      tail->else_body.push_back(st);
    } else {
      head = st;
    }
    tail = st.get();
  }
  if (!head) {
    // no case at all: the loop never terminates once reached
    head = std::make_shared<ast::Stmt>();
    head->kind = ast::Stmt::Kind::Assert;
    head->id = next_id++;
    head->cond = ast::bool_lit(false);
  }
  return head;
}

Elimination eliminate_nested(const ast::Program& program, Solver& solver, const SummarizeOptions& opt) {
  Elimination el;
  el.program = ast::clone(program);
  int next_id = max_id(el.program.body) + 1;
  const std::vector<std::string> vars = el.program.variables();
  int outermost = -1;

  std::function<void(ast::Block&, int)> process = [&](ast::Block& b, int depth) {
    for (auto& st : b) {
      if (el.failure) return;
      if (st->kind == ast::Stmt::Kind::If) {
        process(st->then_body, depth);
        process(st->else_body, depth);
        continue;
      }
      if (st->kind != ast::Stmt::Kind::While) continue;
      if (depth == 0) outermost = st->id;
      process(st->then_body, depth + 1);
      if (el.failure || depth == 0) continue;

      ast::Program q;
      q.locals = vars;
      q.bit_width = el.program.bit_width;
      q.body = {st};
      Summary s;
      try {
        Cfg cfg = build_cfg(q);
        auto loops = canonicalize(cfg);
        s = summarize_loop(cfg, loops.front(), solver, opt);
      } catch (const CfgError& e) {
        s.stmt_id = st->id;
        s.failure = Failure{e.code, e.what()};
      }
      el.outer[st->id] = outermost;
      if (!s.ok()) {
        el.failure = s.failure;
        el.failure->detail = "inner loop at statement " + std::to_string(st->id) + ": " + el.failure->detail;
        el.summaries.push_back(std::move(s));
        return;
      }
      st = summary_code(s, next_id);
      el.rewritten.insert(outermost);
      el.summaries.push_back(std::move(s));
    }
  };
  process(el.program.body, 0);
  return el;
}

ProgramSummary summarize_program(const ast::Program& program, Solver& solver, const SummarizeOptions& opt) {
  ProgramSummary ps;
  Elimination el = eliminate_nested(program, solver, opt);
  auto inner_of = [&](int outer_id) {
    std::vector<Summary> out;
    for (const auto& s : el.summaries) {
      auto it = el.outer.find(s.stmt_id);
      if (it != el.outer.end() && it->second == outer_id) out.push_back(s);
    }
    return out;
  };
  if (el.failure) {
    ps.failure = el.failure;
    for (const auto& s : el.summaries) {
      auto it = el.outer.find(s.stmt_id);
      if (it == el.outer.end()) continue;
      if (std::none_of(ps.loops.begin(), ps.loops.end(), [&](const LoopReport& r) { return r.stmt_id == it->second; })) {
        LoopReport r;
        r.stmt_id = it->second;
        r.summary.stmt_id = it->second;
        r.summary.failure = el.failure;
        r.inner = inner_of(it->second);
        ps.loops.push_back(std::move(r));
      }
    }
    return ps;
  }
  Cfg cfg;
  std::vector<CanonicalLoop> loops;
  try {
    cfg = build_cfg(el.program);
    loops = canonicalize(cfg);
  } catch (const CfgError& e) {
    ps.failure = Failure{e.code, e.what()};
    return ps;
  }
  for (const auto& loop : loops) {
    LoopReport r;
    r.stmt_id = loop.stmt_id;
    r.summary = summarize_loop(cfg, loop, solver, opt);
    r.inner = inner_of(loop.stmt_id);
    auto& f = r.summary.failure;
    if (f && el.rewritten.count(loop.stmt_id) &&
        (f->reason == reason::kClosedFormUnavailable || f->reason == reason::kNotSummarizable)) {
      f->detail = "after nesting elimination: " + f->detail;
      f->reason = reason::kInductivenessTrap;
    }
    if (f && !ps.failure) ps.failure = f;
    ps.loops.push_back(std::move(r));
  }
  return ps;
}

}  // namespace loopsum
