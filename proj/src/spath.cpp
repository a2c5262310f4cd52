#include "loopsum/spath.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

namespace loopsum {

SymMap SPath::op_on_pre() const {
  SymMap out;
  for (const auto& [k, v] : op) out[{SymKind::Pre, k.name}] = v;
  return out;
}

Expr lift_to_pre(const Expr& e) {
  return substitute(e, [](const SymKey& k) -> std::optional<Expr> {
    if (k.kind == SymKind::Var) return pre(k.name);
    return std::nullopt;
  });
}

SymMap identity_op(const std::vector<std::string>& variables) {
  SymMap op;
  for (const auto& v : variables) op[{SymKind::Var, v}] = pre(v);
  return op;
}

std::vector<SPath> enumerate_spaths(const Cfg& cfg, const CanonicalLoop& loop, std::size_t max_paths) {
  std::vector<SPath> out;
  std::vector<int> stack_nodes;
  std::vector<Decision> stack_dec;
  std::vector<char> on_path(cfg.nodes.size(), 0);
  auto in_body = [&](int v) { return std::binary_search(loop.body.begin(), loop.body.end(), v); };

  std::function<void(int)> walk = [&](int v) {
    if (v == loop.header) {
      if (out.size() >= max_paths) {
        throw AnalysisError("PATH_EXPLOSION", "loop has more than " + std::to_string(max_paths) + " paths");
      }
      SPath sp;
      sp.index = static_cast<int>(out.size());
      sp.nodes = stack_nodes;
      sp.decisions = stack_dec;
      out.push_back(std::move(sp));
      return;
    }
    if (!in_body(v)) throw AnalysisError("IRREDUCIBLE_FLOW", "path leaves the loop body");
    if (on_path[static_cast<std::size_t>(v)]) {
      throw AnalysisError("NESTED_LOOP", "loop body is not acyclic; eliminate inner loops first");
    }
    const auto& n = cfg.nodes[static_cast<std::size_t>(v)];
    on_path[static_cast<std::size_t>(v)] = 1;
    stack_nodes.push_back(v);
    if (n.kind == CfgNode::Kind::Cond) {
      if (n.is_loop_header) throw AnalysisError("NESTED_LOOP", "loop body contains another loop");
      stack_dec.push_back({n.stmt_id, true});
      walk(n.next);
      stack_dec.back().taken = false;
      walk(n.next_false);
      stack_dec.pop_back();
    } else {
      walk(n.next);
    }
    stack_nodes.pop_back();
    on_path[static_cast<std::size_t>(v)] = 0;
  };
  walk(cfg.nodes[static_cast<std::size_t>(loop.header)].next);
  return out;
}

void compute_cond_op(const Cfg& cfg, const std::vector<std::string>& variables, SPath& sp) {
  SymMap op = identity_op(variables);
  sp.cond.clear();
  std::size_t d = 0;
  for (int v : sp.nodes) {
    const auto& n = cfg.nodes[static_cast<std::size_t>(v)];
    if (n.kind == CfgNode::Kind::Cond) {
      auto c = substitute(ast::to_sym(n.cond), op);
      sp.cond.push_back(sp.decisions[d++].taken ? c : lnot(c));
      continue;
    }
    for (const auto& s : n.stmts) {
      switch (s->kind) {
        case ast::Stmt::Kind::Decl:
        case ast::Stmt::Kind::Assign:
          op[{SymKind::Var, s->target}] = s->value ? substitute(ast::to_sym(s->value), op) : constant(0);
          break;
        case ast::Stmt::Kind::ParallelAssign: {
          std::vector<std::pair<std::string, Expr>> updates;
          for (const auto& [t, e] : s->parallel) updates.emplace_back(t, substitute(ast::to_sym(e), op));
          for (auto& [t, e] : updates) op[{SymKind::Var, t}] = e;
          break;
        }
        default:
          break;
      }
    }
  }
  sp.op = std::move(op);
}

std::vector<SPath> prune_invalid(const std::vector<SPath>& paths, const Expr& guard, Solver& solver) {
  std::vector<SPath> out;
  for (const auto& sp : paths) {
    ConstraintSet c{guard};
    for (const auto& e : sp.cond) c.add(e);
    if (solver.check(c).status != SolveStatus::Unsat) out.push_back(sp);
  }
  return out;
}

LoopPaths analyze_loop(const Cfg& cfg, const CanonicalLoop& loop, Solver& solver, std::size_t max_paths) {
  LoopPaths lp;
  lp.loop_id = loop.id;
  lp.stmt_id = loop.stmt_id;
  lp.variables = cfg.variables;
  lp.guard = lift_to_pre(ast::to_sym(cfg.nodes[static_cast<std::size_t>(loop.header)].cond));
  lp.paths = enumerate_spaths(cfg, loop, max_paths);
  for (auto& sp : lp.paths) compute_cond_op(cfg, lp.variables, sp);
  auto kept = prune_invalid(lp.paths, lp.guard, solver);
  for (auto& sp : lp.paths) {
    sp.valid = std::any_of(kept.begin(), kept.end(), [&](const SPath& k) { return k.index == sp.index; });
  }
  return lp;
}

std::string dump_spaths(const LoopPaths& lp) {
  std::ostringstream os;
  os << "loop " << lp.loop_id << " guard: " << to_string(lp.guard) << "\n";
  for (const auto& sp : lp.paths) {
    os << "  " << sp.name() << (sp.valid ? "" : " (invalid)") << " decisions:";
    if (sp.decisions.empty()) os << " none";
    for (const auto& d : sp.decisions) os << " s" << d.stmt_id << (d.taken ? "=T" : "=F");
    os << "\n    cond:";
    if (sp.cond.empty()) os << " true";
    for (std::size_t i = 0; i < sp.cond.size(); ++i) os << (i ? ", " : " ") << to_string(sp.cond[i]);
    os << "\n    op:";
    bool first = true;
    for (const auto& [k, v] : sp.op) {
      os << (first ? " " : ", ") << k.name << " = " << to_string(v);
      first = false;
    }
    os << "\n";
  }
  return os.str();
}

}  // namespace loopsum
