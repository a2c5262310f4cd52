#include "loopsum/cfg.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace loopsum {

std::vector<int> CfgNode::successors() const {
  std::vector<int> out;
  if (next >= 0) out.push_back(next);
  if (kind == Kind::Cond && next_false >= 0) out.push_back(next_false);
  return out;
}

std::vector<std::vector<int>> Cfg::predecessors() const {
  std::vector<std::vector<int>> preds(nodes.size());
  for (const auto& n : nodes) {
    for (int s : n.successors()) preds[static_cast<std::size_t>(s)].push_back(n.id);
  }
  return preds;
}

namespace {

using ast::Stmt;

class Builder {
 public:
  int add(CfgNode::Kind kind) {
    CfgNode n;
    n.id = static_cast<int>(nodes.size());
    n.kind = kind;
    nodes.push_back(std::move(n));
    return nodes.back().id;
  }

  // Builds back to front so every fragment already knows its continuation.
  int build(const ast::Block& block, int next) {
    std::vector<ast::StmtPtr> run;
    auto flush = [&] {
      if (run.empty()) return;
      int b = add(CfgNode::Kind::Block);
      nodes[b].stmts.assign(run.rbegin(), run.rend());
      nodes[b].next = next;
      next = b;
      run.clear();
    };
    for (auto it = block.rbegin(); it != block.rend(); ++it) {
      const auto& s = *it;
      switch (s->kind) {
        case Stmt::Kind::Decl:
        case Stmt::Kind::Assign:
        case Stmt::Kind::ParallelAssign:
        case Stmt::Kind::Assert:
          run.push_back(s);
          break;
        case Stmt::Kind::If: {
          flush();
          int t = build(s->then_body, next);
          int e = build(s->else_body, next);
          int c = add(CfgNode::Kind::Cond);
          nodes[c].cond = s->cond;
          nodes[c].stmt_id = s->id;
          nodes[c].next = t;
          nodes[c].next_false = e;
          next = c;
          break;
        }
        case Stmt::Kind::While: {
          flush();
          int h = add(CfgNode::Kind::Cond);
          nodes[h].cond = s->cond;
          nodes[h].stmt_id = s->id;
          nodes[h].is_loop_header = true;
          nodes[h].next_false = next;
          exits_.push_back(next);
          int body = build(s->then_body, h);
          exits_.pop_back();
          if (body == h) {
            body = add(CfgNode::Kind::Block);
            nodes[body].next = h;
          }
          nodes[h].next = body;
          next = h;
          break;
        }
        case Stmt::Kind::Break: {
          run.clear();
          int b = add(CfgNode::Kind::Block);
          nodes[b].next = exits_.back();
          next = b;
          break;
        }
      }
    }
    flush();
    return next;
  }

  std::vector<CfgNode> nodes;

 private:
  std::vector<int> exits_;
};

std::vector<int> reverse_post_order(const std::vector<CfgNode>& nodes, int entry) {
  std::vector<int> post;
  std::vector<char> seen(nodes.size(), 0);
  // Iterative DFS exploring false successors first, so that after reversal
  // the true branch (and a loop body) precedes its sibling.
  std::vector<std::pair<int, std::size_t>> stack{{entry, 0}};
  seen[static_cast<std::size_t>(entry)] = 1;
  while (!stack.empty()) {
    auto& [v, k] = stack.back();
    auto succ = nodes[static_cast<std::size_t>(v)].successors();
    std::reverse(succ.begin(), succ.end());
    if (k < succ.size()) {
      int w = succ[k++];
      if (!seen[static_cast<std::size_t>(w)]) {
        seen[static_cast<std::size_t>(w)] = 1;
        stack.emplace_back(w, 0);
      }
    } else {
      post.push_back(v);
      stack.pop_back();
    }
  }
  std::reverse(post.begin(), post.end());
  return post;
}

// Drops unreachable nodes and renumbers the rest in reverse post-order.
void renumber_rpo(Cfg& cfg) {
  auto order = reverse_post_order(cfg.nodes, cfg.entry);
  std::vector<int> remap(cfg.nodes.size(), -1);
  for (std::size_t i = 0; i < order.size(); ++i) remap[static_cast<std::size_t>(order[i])] = static_cast<int>(i);
  std::vector<CfgNode> out;
  out.reserve(order.size());
  for (int old : order) {
    CfgNode n = cfg.nodes[static_cast<std::size_t>(old)];
    n.id = remap[static_cast<std::size_t>(old)];
    if (n.next >= 0) n.next = remap[static_cast<std::size_t>(n.next)];
    if (n.next_false >= 0) n.next_false = remap[static_cast<std::size_t>(n.next_false)];
    out.push_back(std::move(n));
  }
  cfg.entry = remap[static_cast<std::size_t>(cfg.entry)];
  cfg.exit = cfg.exit >= 0 ? remap[static_cast<std::size_t>(cfg.exit)] : -1;
  cfg.nodes = std::move(out);
}

struct NaturalLoop {
  int header;
  std::set<int> body;
  std::vector<int> latches;
};

std::vector<NaturalLoop> natural_loops(const Cfg& cfg) {
  auto idom = dominators(cfg);
  auto preds = cfg.predecessors();

  // A retreating DFS edge whose target does not dominate its source means a
  // cycle with two entries.
  std::vector<int> state(cfg.nodes.size(), 0);
  std::function<void(int)> dfs = [&](int v) {
    state[static_cast<std::size_t>(v)] = 1;
    for (int w : cfg.nodes[static_cast<std::size_t>(v)].successors()) {
      if (state[static_cast<std::size_t>(w)] == 1 && !dominates(idom, w, v)) {
        throw CfgError("IRREDUCIBLE_FLOW", "cycle through node " + std::to_string(w) + " has multiple entries");
      }
      if (state[static_cast<std::size_t>(w)] == 0) dfs(w);
    }
    state[static_cast<std::size_t>(v)] = 2;
  };
  dfs(cfg.entry);

  std::map<int, NaturalLoop> by_header;
  for (const auto& n : cfg.nodes) {
    for (int h : n.successors()) {
      if (!dominates(idom, h, n.id)) continue;
      auto& loop = by_header[h];
      loop.header = h;
      loop.body.insert(h);
      loop.latches.push_back(n.id);
      std::vector<int> work{n.id};
      while (!work.empty()) {
        int v = work.back();
        work.pop_back();
        if (!loop.body.insert(v).second) continue;
        for (int p : preds[static_cast<std::size_t>(v)]) work.push_back(p);
      }
    }
  }
  std::vector<NaturalLoop> out;
  for (auto& [h, loop] : by_header) {
    if (cfg.nodes[static_cast<std::size_t>(h)].kind != CfgNode::Kind::Cond) {
      throw CfgError("IRREDUCIBLE_FLOW", "loop header " + std::to_string(h) + " is not a condition");
    }
    std::sort(loop.latches.begin(), loop.latches.end());
    out.push_back(std::move(loop));
  }
  return out;
}

ast::StmtPtr flag_assign(const std::string& flag, Int value) {
  auto s = std::make_shared<Stmt>();
  s->kind = Stmt::Kind::Assign;
  s->target = flag;
  s->value = ast::int_lit(value);
  return s;
}

}  // namespace

Cfg build_cfg(const ast::Program& program) {
  Builder b;
  Cfg cfg;
  cfg.exit = b.add(CfgNode::Kind::Exit);
  int first = b.build(program.body, cfg.exit);
  cfg.entry = b.add(CfgNode::Kind::Entry);
  b.nodes[static_cast<std::size_t>(cfg.entry)].next = first;
  cfg.nodes = std::move(b.nodes);
  cfg.variables = program.variables();
  renumber_rpo(cfg);
  return cfg;
}

std::vector<int> dominators(const Cfg& cfg) {
  auto order = reverse_post_order(cfg.nodes, cfg.entry);
  std::vector<int> rank(cfg.nodes.size(), -1);
  for (std::size_t i = 0; i < order.size(); ++i) rank[static_cast<std::size_t>(order[i])] = static_cast<int>(i);
  auto preds = cfg.predecessors();
  std::vector<int> idom(cfg.nodes.size(), -1);
  idom[static_cast<std::size_t>(cfg.entry)] = cfg.entry;
  auto intersect = [&](int a, int b) {
    while (a != b) {
      while (rank[static_cast<std::size_t>(a)] > rank[static_cast<std::size_t>(b)]) a = idom[static_cast<std::size_t>(a)];
      while (rank[static_cast<std::size_t>(b)] > rank[static_cast<std::size_t>(a)]) b = idom[static_cast<std::size_t>(b)];
    }
    return a;
  };
  for (bool changed = true; changed;) {
    changed = false;
    for (int v : order) {
      if (v == cfg.entry) continue;
      int best = -1;
      for (int p : preds[static_cast<std::size_t>(v)]) {
        if (idom[static_cast<std::size_t>(p)] < 0) continue;
        best = best < 0 ? p : intersect(p, best);
      }
      if (best >= 0 && idom[static_cast<std::size_t>(v)] != best) {
        idom[static_cast<std::size_t>(v)] = best;
        changed = true;
      }
    }
  }
  return idom;
}

bool dominates(const std::vector<int>& idom, int a, int b) {
  if (b < 0 || idom[static_cast<std::size_t>(b)] < 0) return false;
  for (;;) {
    if (a == b) return true;
    int up = idom[static_cast<std::size_t>(b)];
    if (up == b) return false;
    b = up;
  }
}

std::vector<CanonicalLoop> canonicalize(Cfg& cfg) {
  auto loops = natural_loops(cfg);
  std::sort(loops.begin(), loops.end(), [&](const NaturalLoop& a, const NaturalLoop& b) {
    return cfg.nodes[static_cast<std::size_t>(a.header)].stmt_id < cfg.nodes[static_cast<std::size_t>(b.header)].stmt_id;
  });

  std::map<int, std::string> flags;  // header stmt id -> flag
  int flag_count = 0;
  for (auto& loop : loops) {
    auto& header = cfg.nodes[static_cast<std::size_t>(loop.header)];
    int exit = header.next_false;
    // Break blocks do not reach a latch, so they sit just outside the body.
    std::set<int> breakers;
    for (int v : loop.body) {
      if (v == loop.header) continue;
      for (int s : cfg.nodes[static_cast<std::size_t>(v)].successors()) {
        if (loop.body.count(s)) continue;
        const auto& target = cfg.nodes[static_cast<std::size_t>(s)];
        if (s == exit) {
          breakers.insert(v);
        } else if (target.kind == CfgNode::Kind::Block && target.stmts.empty() && target.next == exit) {
          breakers.insert(s);
        } else {
          throw CfgError("IRREDUCIBLE_FLOW", "loop exit edges target different nodes");
        }
      }
    }
    if (breakers.empty()) continue;
    std::string flag = "__brk_" + std::to_string(flag_count++);
    cfg.variables.push_back(flag);
    flags[header.stmt_id] = flag;
    for (int v : breakers) {
      auto& node = cfg.nodes[static_cast<std::size_t>(v)];
      if (node.kind == CfgNode::Kind::Block) {
        node.stmts.push_back(flag_assign(flag, 1));
        node.next = loop.header;
      } else {
        CfgNode extra;
        extra.id = static_cast<int>(cfg.nodes.size());
        extra.kind = CfgNode::Kind::Block;
        extra.stmts.push_back(flag_assign(flag, 1));
        extra.next = loop.header;
        if (node.next == exit) node.next = extra.id;
        if (node.next_false == exit) node.next_false = extra.id;
        loop.body.insert(extra.id);
        cfg.nodes.push_back(std::move(extra));
      }
      loop.body.insert(v);
    }
    auto& h = cfg.nodes[static_cast<std::size_t>(loop.header)];
    h.cond = ast::binary(ast::BinOp::And, ast::binary(ast::BinOp::Eq, ast::var_ref(flag), ast::int_lit(0)), h.cond);
  }

  // Preheaders: one block outside the loop whose only successor is the header.
  for (const auto& loop : loops) {
    int h = loop.header;
    int stmt_id = cfg.nodes[static_cast<std::size_t>(h)].stmt_id;
    auto preds = cfg.predecessors();
    std::vector<int> outside;
    for (int p : preds[static_cast<std::size_t>(h)]) {
      if (!loop.body.count(p)) outside.push_back(p);
    }
    auto flag = flags.find(stmt_id);
    bool reuse = outside.size() == 1 && cfg.nodes[static_cast<std::size_t>(outside[0])].kind == CfgNode::Kind::Block;
    int pre;
    if (reuse) {
      pre = outside[0];
    } else {
      CfgNode extra;
      extra.id = static_cast<int>(cfg.nodes.size());
      extra.kind = CfgNode::Kind::Block;
      extra.next = h;
      pre = extra.id;
      cfg.nodes.push_back(std::move(extra));
      for (int p : outside) {
        auto& node = cfg.nodes[static_cast<std::size_t>(p)];
        if (node.next == h) node.next = pre;
        if (node.kind == CfgNode::Kind::Cond && node.next_false == h) node.next_false = pre;
      }
    }
    if (flag != flags.end()) cfg.nodes[static_cast<std::size_t>(pre)].stmts.push_back(flag_assign(flag->second, 0));
  }

  renumber_rpo(cfg);

  auto final_loops = natural_loops(cfg);
  std::sort(final_loops.begin(), final_loops.end(), [&](const NaturalLoop& a, const NaturalLoop& b) {
    return cfg.nodes[static_cast<std::size_t>(a.header)].stmt_id < cfg.nodes[static_cast<std::size_t>(b.header)].stmt_id;
  });
  auto preds = cfg.predecessors();
  std::vector<CanonicalLoop> out;
  for (std::size_t i = 0; i < final_loops.size(); ++i) {
    const auto& nl = final_loops[i];
    CanonicalLoop cl;
    cl.id = static_cast<int>(i);
    cl.header = nl.header;
    const auto& h = cfg.nodes[static_cast<std::size_t>(nl.header)];
    cl.stmt_id = h.stmt_id;
    cl.body.assign(nl.body.begin(), nl.body.end());
    cl.latches = nl.latches;
    cl.exit = h.next_false;
    for (int p : preds[static_cast<std::size_t>(nl.header)]) {
      if (!nl.body.count(p)) cl.preheader = p;
    }
    auto flag = flags.find(cl.stmt_id);
    if (flag != flags.end()) cl.break_flag = flag->second;
    out.push_back(std::move(cl));
  }
  // Parent: the smallest other loop whose body contains this header.
  for (auto& cl : out) {
    std::size_t best_size = 0;
    for (const auto& other : out) {
      if (other.id == cl.id) continue;
      if (!std::binary_search(other.body.begin(), other.body.end(), cl.header)) continue;
      if (!cl.parent || other.body.size() < best_size) {
        cl.parent = other.id;
        best_size = other.body.size();
      }
    }
  }
  for (auto& cl : out) {
    for (auto p = cl.parent; p; p = out[static_cast<std::size_t>(*p)].parent) ++cl.depth;
  }
  return out;
}

namespace {

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

}  // namespace

std::string node_label(const CfgNode& node) {
  switch (node.kind) {
    case CfgNode::Kind::Entry:
      return "entry";
    case CfgNode::Kind::Exit:
      return "exit";
    case CfgNode::Kind::Cond:
      return ast::to_source(node.cond);
    case CfgNode::Kind::Block:
      break;
  }
  std::string out;
  for (const auto& s : node.stmts) {
    ast::Program one;
    one.body.push_back(s);
    auto text = ast::pretty_print(one);
    if (!text.empty() && text.back() == '\n') text.pop_back();
    if (!out.empty()) out += "\n";
    out += text;
  }
  return out;
}

std::string to_dot(const Cfg& cfg, const std::vector<CanonicalLoop>& loops) {
  std::map<int, int> header_loop;
  for (const auto& l : loops) header_loop[l.header] = l.id;
  std::ostringstream os;
  os << "digraph cfg {\n";
  for (const auto& n : cfg.nodes) {
    std::string label = node_label(n);
    std::string shape = "box";
    if (n.kind == CfgNode::Kind::Cond) shape = "diamond";
    if (n.kind == CfgNode::Kind::Entry || n.kind == CfgNode::Kind::Exit) shape = "oval";
    auto hl = header_loop.find(n.id);
    if (hl != header_loop.end()) label = "loop " + std::to_string(hl->second) + ": " + label;
    std::string esc = escape(label);
    std::string lines;
    for (char c : esc) lines += c == '\n' ? std::string("\\l") : std::string(1, c);
    if (n.kind == CfgNode::Kind::Block) lines += "\\l";
    os << "  n" << n.id << " [shape=" << shape << ", label=\"" << lines << "\"];\n";
  }
  for (const auto& n : cfg.nodes) {
    if (n.kind == CfgNode::Kind::Cond) {
      os << "  n" << n.id << " -> n" << n.next << " [label=\"T\"];\n";
      os << "  n" << n.id << " -> n" << n.next_false << " [label=\"F\"];\n";
    } else if (n.next >= 0) {
      os << "  n" << n.id << " -> n" << n.next << ";\n";
    }
  }
  os << "}\n";
  return os.str();
}

}  // namespace loopsum
