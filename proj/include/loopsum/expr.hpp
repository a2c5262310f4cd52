#pragma once

// Symbolic integer/boolean expressions in a canonical normal form.
//
// Integer expressions are kept as sums of products: a Poly node holds sorted
// monomials over "atoms" (symbols and the non-polynomial operators floor-div,
// mod, pow, min, max, ite and opaque calls) with folded integer coefficients.
// Boolean expressions are conjunctions/disjunctions of the three comparison
// atoms `p >= 0`, `p == 0` and `p != 0`; negation is pushed into the atoms.
// Two expressions are semantically identical whenever their normal forms are
// structurally equal, which makes `equal()` usable for golden tests.

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "loopsum/arith.hpp"

namespace loopsum {

/// Namespaces for symbols. Program variables and pre-state symbols never
/// collide, so substitution of one for the other is capture-free.
enum class SymKind : std::uint8_t { Var, Pre, Iter, Aux };

struct SymKey {
  SymKind kind = SymKind::Var;
  std::string name;

  auto operator<=>(const SymKey&) const = default;
  bool operator==(const SymKey&) const = default;
};

std::string to_string(const SymKey& key);

enum class Kind : std::uint8_t {
  Const,
  Sym,
  Poly,
  FloorDiv,
  Mod,
  Pow,
  Min,
  Max,
  Ite,
  Call,
  BoolConst,
  Ge,
  Eq,
  Ne,
  And,
  Or,
};

class Node;
using Expr = std::shared_ptr<const Node>;

/// An uninterpreted integer function whose concrete meaning is supplied by
/// the producer (tabulated summaries, implicit iteration counts).
class Function {
 public:
  virtual ~Function() = default;
  virtual const std::string& name() const = 0;
  virtual Int apply(std::span<const Int> args) const = 0;
};

struct Factor {
  Expr atom;
  int power = 1;
};

struct Term {
  Int coef = 0;
  std::vector<Factor> mono;  // sorted by atom order, empty for the constant term
};

class Node {
 public:
  Kind kind = Kind::Const;
  Int value = 0;  // Const, BoolConst, and the literal divisor of FloorDiv/Mod
  SymKey sym;     // Sym
  std::vector<Term> terms;  // Poly
  std::vector<Expr> args;   // operands of every other kind
  std::shared_ptr<const Function> fn;  // Call
  std::size_t hash = 0;

  bool is_bool() const {
    return kind == Kind::BoolConst || kind == Kind::Ge || kind == Kind::Eq || kind == Kind::Ne ||
           kind == Kind::And || kind == Kind::Or;
  }
  bool is_const() const { return kind == Kind::Const; }
  bool is_true() const { return kind == Kind::BoolConst && value != 0; }
  bool is_false() const { return kind == Kind::BoolConst && value == 0; }
};

/// Total structural order on normal forms.
int compare(const Expr& a, const Expr& b);
bool equal(const Expr& a, const Expr& b);

struct ExprLess {
  bool operator()(const Expr& a, const Expr& b) const { return compare(a, b) < 0; }
};

// ---- integer builders -------------------------------------------------------

Expr constant(Int v);
Expr symbol(SymKey key);
Expr var(const std::string& name);
Expr pre(const std::string& name);
Expr iter(const std::string& name = "N");
Expr aux(const std::string& name);

Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);
Expr operator+(const Expr& a, Int b);
Expr operator-(const Expr& a, Int b);
Expr operator*(Int a, const Expr& b);

Expr floor_div(const Expr& e, Int k);
Expr mod(const Expr& e, Int k);
Expr pow(const Expr& base, const Expr& exponent);
Expr min(std::vector<Expr> operands);
Expr max(std::vector<Expr> operands);
Expr ite(const Expr& cond, const Expr& then_e, const Expr& else_e);
Expr call(std::shared_ptr<const Function> fn, std::vector<Expr> args);

// ---- boolean builders -------------------------------------------------------

Expr truth(bool b);
Expr ge(const Expr& a, const Expr& b);
Expr gt(const Expr& a, const Expr& b);
Expr le(const Expr& a, const Expr& b);
Expr lt(const Expr& a, const Expr& b);
Expr eq(const Expr& a, const Expr& b);
Expr ne(const Expr& a, const Expr& b);
Expr land(std::vector<Expr> operands);
Expr lor(std::vector<Expr> operands);
Expr land(const Expr& a, const Expr& b);
Expr lor(const Expr& a, const Expr& b);
Expr lnot(const Expr& e);
/// Integer used as a condition: true iff non-zero.
Expr nonzero(const Expr& e);

// ---- polynomial views -------------------------------------------------------

std::vector<Term> terms_of(const Expr& e);
Expr from_terms(std::vector<Term> terms);
/// The comparison atom's polynomial operand (`p` in `p >= 0`).
const Expr& atom_operand(const Expr& atom);

/// `e` as `coef * x + rest`, where `rest` does not mention symbol `x`;
/// nullopt when `x` occurs non-linearly (inside an atom or with degree > 1).
struct LinearSplit {
  Expr coef;
  Expr rest;
};
std::optional<LinearSplit> split_linear(const Expr& e, const SymKey& x);

// ---- traversal --------------------------------------------------------------

using SymMap = std::map<SymKey, Expr>;

Expr substitute(const Expr& e, const SymMap& mapping);
Expr substitute(const Expr& e, const std::function<std::optional<Expr>(const SymKey&)>& mapping);
std::set<SymKey> free_symbols(const Expr& e);
bool mentions(const Expr& e, const SymKey& key);
/// Deepest-first visit of every node.
void visit(const Expr& e, const std::function<void(const Expr&)>& fn);

// ---- evaluation -------------------------------------------------------------

using Valuation = std::map<SymKey, Int>;

class UnboundSymbol : public std::runtime_error {
 public:
  explicit UnboundSymbol(const SymKey& key);
};

Int eval_int(const Expr& e, const Valuation& env);
bool eval_bool(const Expr& e, const Valuation& env);

// ---- classification ---------------------------------------------------------

enum class Tier : std::uint8_t { Linear, Polynomial, Opaque };
std::string to_string(Tier t);

/// LINEAR: every monomial has degree <= 1 and only symbols as atoms.
/// POLYNOMIAL: higher-degree monomials over symbols.
/// OPAQUE: contains floor/mod/pow/min/max/ite/call over symbols.
Tier tier_of(const Expr& e);

std::string to_string(const Expr& e);

}  // namespace loopsum
