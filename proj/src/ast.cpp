#include "loopsum/ast.hpp"

#include <sstream>

namespace loopsum::ast {

bool ExprNode::is_bool() const {
  switch (kind) {
    case Kind::BoolLit:
    case Kind::Not:
      return true;
    case Kind::Binary:
      return op != BinOp::Add && op != BinOp::Sub && op != BinOp::Mul && op != BinOp::Div && op != BinOp::Mod;
    case Kind::Symbolic:
      return symbolic->is_bool();
    default:
      return false;
  }
}

ExprPtr int_lit(Int v, Loc loc) {
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprNode::Kind::IntLit;
  n->value = v;
  n->loc = loc;
  return n;
}

ExprPtr bool_lit(bool v, Loc loc) {
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprNode::Kind::BoolLit;
  n->value = v ? 1 : 0;
  n->loc = loc;
  return n;
}

ExprPtr var_ref(std::string name, Loc loc) {
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprNode::Kind::VarRef;
  n->name = std::move(name);
  n->loc = loc;
  return n;
}

ExprPtr unary(ExprNode::Kind kind, ExprPtr operand, Loc loc) {
  auto n = std::make_shared<ExprNode>();
  n->kind = kind;
  n->lhs = std::move(operand);
  n->loc = loc;
  return n;
}

ExprPtr binary(BinOp op, ExprPtr lhs, ExprPtr rhs, Loc loc) {
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprNode::Kind::Binary;
  n->op = op;
  n->lhs = std::move(lhs);
  n->rhs = std::move(rhs);
  n->loc = loc;
  return n;
}

ExprPtr symbolic(loopsum::Expr e) {
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprNode::Kind::Symbolic;
  n->symbolic = std::move(e);
  return n;
}

std::vector<std::string> Program::variables() const {
  std::vector<std::string> out;
  for (const auto& in : inputs) out.push_back(in.name);
  out.insert(out.end(), locals.begin(), locals.end());
  return out;
}

Block clone(const Block& b) {
  Block out;
  out.reserve(b.size());
  for (const auto& s : b) {
    auto c = std::make_shared<Stmt>(*s);
    c->then_body = clone(s->then_body);
    c->else_body = clone(s->else_body);
    out.push_back(std::move(c));
  }
  return out;
}

Program clone(const Program& p) {
  Program out = p;
  out.body = clone(p.body);
  return out;
}

bool same_structure(const ExprPtr& a, const ExprPtr& b) {
  if (!a || !b) return !a && !b;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case ExprNode::Kind::IntLit:
    case ExprNode::Kind::BoolLit:
      return a->value == b->value;
    case ExprNode::Kind::VarRef:
      return a->name == b->name;
    case ExprNode::Kind::Neg:
    case ExprNode::Kind::Not:
      return same_structure(a->lhs, b->lhs);
    case ExprNode::Kind::Binary:
      return a->op == b->op && same_structure(a->lhs, b->lhs) && same_structure(a->rhs, b->rhs);
    case ExprNode::Kind::Symbolic:
      return loopsum::equal(a->symbolic, b->symbolic);
  }
  return false;
}

bool same_structure(const Block& a, const Block& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const Stmt& x = *a[i];
    const Stmt& y = *b[i];
    if (x.kind != y.kind || x.id != y.id || x.target != y.target) return false;
    if (!same_structure(x.value, y.value) || !same_structure(x.cond, y.cond)) return false;
    if (x.parallel.size() != y.parallel.size()) return false;
    for (std::size_t k = 0; k < x.parallel.size(); ++k) {
      if (x.parallel[k].first != y.parallel[k].first) return false;
      if (!same_structure(x.parallel[k].second, y.parallel[k].second)) return false;
    }
    if (!same_structure(x.then_body, y.then_body) || !same_structure(x.else_body, y.else_body)) return false;
  }
  return true;
}

bool same_structure(const Program& a, const Program& b) {
  if (a.inputs.size() != b.inputs.size() || a.locals != b.locals || a.bit_width != b.bit_width) return false;
  for (std::size_t i = 0; i < a.inputs.size(); ++i) {
    if (a.inputs[i].name != b.inputs[i].name || a.inputs[i].lo != b.inputs[i].lo ||
        a.inputs[i].hi != b.inputs[i].hi) {
      return false;
    }
  }
  return same_structure(a.body, b.body);
}

namespace {

void renumber_block(Block& b, int& next) {
  for (auto& s : b) {
    s->id = next++;
    renumber_block(s->then_body, next);
    renumber_block(s->else_body, next);
  }
}

}  // namespace

void renumber(Program& p) {
  int next = 0;
  renumber_block(p.body, next);
}

loopsum::Expr to_sym(const ExprPtr& e) {
  using K = ExprNode::Kind;
  switch (e->kind) {
    case K::IntLit:
      return constant(e->value);
    case K::BoolLit:
      return truth(e->value != 0);
    case K::VarRef:
      return var(e->name);
    case K::Neg:
      return -to_sym(e->lhs);
    case K::Not: {
      auto inner = to_sym(e->lhs);
      return lnot(inner->is_bool() ? inner : nonzero(inner));
    }
    case K::Symbolic:
      return e->symbolic;
    case K::Binary:
      break;
  }
  auto lhs = to_sym(e->lhs);
  auto rhs = to_sym(e->rhs);
  auto as_bool = [](const loopsum::Expr& x) { return x->is_bool() ? x : nonzero(x); };
  switch (e->op) {
    case BinOp::Add:
      return lhs + rhs;
    case BinOp::Sub:
      return lhs - rhs;
    case BinOp::Mul:
      return lhs * rhs;
    case BinOp::Div:
      if (!rhs->is_const()) throw std::invalid_argument("division by a non-literal");
      return floor_div(lhs, rhs->value);
    case BinOp::Mod:
      if (!rhs->is_const()) throw std::invalid_argument("modulo by a non-literal");
      return mod(lhs, rhs->value);
    case BinOp::Lt:
      return lt(lhs, rhs);
    case BinOp::Le:
      return le(lhs, rhs);
    case BinOp::Gt:
      return gt(lhs, rhs);
    case BinOp::Ge:
      return ge(lhs, rhs);
    case BinOp::Eq:
      return eq(lhs, rhs);
    case BinOp::Ne:
      return ne(lhs, rhs);
    case BinOp::And:
      return land(as_bool(lhs), as_bool(rhs));
    case BinOp::Or:
      return lor(as_bool(lhs), as_bool(rhs));
  }
  throw std::logic_error("unreachable");
}

namespace {

int precedence(BinOp op) {
  switch (op) {
    case BinOp::Or:
      return 1;
    case BinOp::And:
      return 2;
    case BinOp::Eq:
    case BinOp::Ne:
      return 3;
    case BinOp::Lt:
    case BinOp::Le:
    case BinOp::Gt:
    case BinOp::Ge:
      return 4;
    case BinOp::Add:
    case BinOp::Sub:
      return 5;
    default:
      return 6;
  }
}

const char* spelling(BinOp op) {
  switch (op) {
    case BinOp::Add:
      return "+";
    case BinOp::Sub:
      return "-";
    case BinOp::Mul:
      return "*";
    case BinOp::Div:
      return "/";
    case BinOp::Mod:
      return "%";
    case BinOp::Lt:
      return "<";
    case BinOp::Le:
      return "<=";
    case BinOp::Gt:
      return ">";
    case BinOp::Ge:
      return ">=";
    case BinOp::Eq:
      return "==";
    case BinOp::Ne:
      return "!=";
    case BinOp::And:
      return "&&";
    case BinOp::Or:
      return "||";
  }
  return "?";
}

// Fully parenthesised below the parent's precedence; left-associative.
std::string print(const ExprPtr& e, int parent) {
  using K = ExprNode::Kind;
  switch (e->kind) {
    case K::IntLit:
      return e->value < 0 ? "(" + std::to_string(e->value) + ")" : std::to_string(e->value);
    case K::BoolLit:
      return e->value ? "true" : "false";
    case K::VarRef:
      return e->name;
    case K::Neg: {
      std::string inner = print(e->lhs, 7);
      return inner[0] == '-' ? "-(" + inner + ")" : "-" + inner;
    }
    case K::Not:
      return "!" + print(e->lhs, 7);
    case K::Symbolic:
      return "{" + loopsum::to_string(e->symbolic) + "}";
    case K::Binary: {
      int p = precedence(e->op);
      std::string s = print(e->lhs, p) + " " + spelling(e->op) + " " + print(e->rhs, p + 1);
      return p < parent ? "(" + s + ")" : s;
    }
  }
  return "?";
}

void print_block(std::ostringstream& os, const Block& b, int indent);

void print_stmt(std::ostringstream& os, const Stmt& s, int indent) {
  std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  switch (s.kind) {
    case Stmt::Kind::Decl:
      os << pad << "int " << s.target;
      if (s.value) os << " = " << print(s.value, 0);
      os << ";\n";
      break;
    case Stmt::Kind::Assign:
      os << pad << s.target << " = " << print(s.value, 0) << ";\n";
      break;
    case Stmt::Kind::ParallelAssign:
      os << pad << "(";
      for (std::size_t i = 0; i < s.parallel.size(); ++i) os << (i ? ", " : "") << s.parallel[i].first;
      os << ") = (";
      for (std::size_t i = 0; i < s.parallel.size(); ++i) os << (i ? ", " : "") << print(s.parallel[i].second, 0);
      os << ");\n";
      break;
    case Stmt::Kind::If:
      os << pad << "if (" << print(s.cond, 0) << ") {\n";
      print_block(os, s.then_body, indent + 1);
      os << pad << "}";
      if (!s.else_body.empty()) {
        os << " else {\n";
        print_block(os, s.else_body, indent + 1);
        os << pad << "}";
      }
      os << "\n";
      break;
    case Stmt::Kind::While:
      os << pad << "while (" << print(s.cond, 0) << ") {\n";
      print_block(os, s.then_body, indent + 1);
      os << pad << "}\n";
      break;
    case Stmt::Kind::Assert:
      os << pad << "assert(" << print(s.cond, 0) << ");\n";
      break;
    case Stmt::Kind::Break:
      os << pad << "break;\n";
      break;
  }
}

void print_block(std::ostringstream& os, const Block& b, int indent) {
  for (const auto& s : b) print_stmt(os, *s, indent);
}

}  // namespace

std::string to_source(const ExprPtr& e) { return print(e, 0); }

std::string pretty_print(const Program& p) {
  std::ostringstream os;
  for (const auto& in : p.inputs) os << "// input " << in.name << " in [" << in.lo << ", " << in.hi << "]\n";
  if (p.bit_width) os << "// bits " << *p.bit_width << "\n";
  print_block(os, p.body, 0);
  return os.str();
}

bool contains_loop(const Block& b) { return loop_depth(b) > 0; }

int loop_depth(const Block& b) {
  int best = 0;
  for (const auto& s : b) {
    int inner = std::max(loop_depth(s->then_body), loop_depth(s->else_body));
    if (s->kind == Stmt::Kind::While) inner += 1;
    best = std::max(best, inner);
  }
  return best;
}

}  // namespace loopsum::ast
