#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "loopsum/arith.hpp"
#include "loopsum/expr.hpp"

namespace loopsum::ast {

struct Loc {
  int line = 0;
  int column = 0;
};

enum class BinOp { Add, Sub, Mul, Div, Mod, Lt, Le, Gt, Ge, Eq, Ne, And, Or };

struct ExprNode;
using ExprPtr = std::shared_ptr<const ExprNode>;

/// Surface expression as written in the source. `Symbolic` nodes only appear
/// in generated code (loop summaries spliced in by nesting elimination) and
/// wrap a symbolic expression over program variables.
struct ExprNode {
  enum class Kind { IntLit, BoolLit, VarRef, Neg, Not, Binary, Symbolic };

  Kind kind = Kind::IntLit;
  Loc loc;
  Int value = 0;        // IntLit, BoolLit
  std::string name;     // VarRef
  BinOp op = BinOp::Add;
  ExprPtr lhs;          // Neg, Not, Binary
  ExprPtr rhs;          // Binary
  loopsum::Expr symbolic;

  bool is_bool() const;
};

ExprPtr int_lit(Int v, Loc loc = {});
ExprPtr bool_lit(bool v, Loc loc = {});
ExprPtr var_ref(std::string name, Loc loc = {});
ExprPtr unary(ExprNode::Kind kind, ExprPtr operand, Loc loc = {});
ExprPtr binary(BinOp op, ExprPtr lhs, ExprPtr rhs, Loc loc = {});
ExprPtr symbolic(loopsum::Expr e);

struct Stmt;
using StmtPtr = std::shared_ptr<Stmt>;
using Block = std::vector<StmtPtr>;

struct Stmt {
  enum class Kind { Decl, Assign, ParallelAssign, If, While, Assert, Break };

  Kind kind = Kind::Assign;
  Loc loc;
  int id = -1;  // pre-order statement number, stable across pretty-print round trips

  std::string target;  // Decl, Assign
  ExprPtr value;       // Decl initializer (optional), Assign
  std::vector<std::pair<std::string, ExprPtr>> parallel;  // ParallelAssign
  ExprPtr cond;        // If, While, Assert
  Block then_body;     // If; loop body for While
  Block else_body;     // If
};

struct InputDecl {
  std::string name;
  Int lo = -100;
  Int hi = 100;
};

struct Program {
  std::vector<InputDecl> inputs;
  std::vector<std::string> locals;  // declared with `int`, in declaration order
  Block body;
  std::optional<int> bit_width;

  std::vector<std::string> variables() const;  // inputs then locals
};

/// Deep copy (statements are shared pointers and transforms mutate copies).
Block clone(const Block& b);
Program clone(const Program& p);

/// Structural equality ignoring source locations.
bool same_structure(const ExprPtr& a, const ExprPtr& b);
bool same_structure(const Block& a, const Block& b);
bool same_structure(const Program& a, const Program& b);

/// Re-number statement ids in pre-order.
void renumber(Program& p);

/// Lower to a symbolic expression over program-variable symbols.
loopsum::Expr to_sym(const ExprPtr& e);

std::string to_source(const ExprPtr& e);
std::string pretty_print(const Program& p);

bool contains_loop(const Block& b);
int loop_depth(const Block& b);

}  // namespace loopsum::ast
