#pragma once

#include <set>
#include <span>
#include <string>
#include <vector>

#include "loopsum/summarize.hpp"

namespace loopsum::detail {

std::vector<Expr> conjuncts(const Expr& e);
/// `x` lies in one of the ranges of `s`.
Expr in_set(const Expr& x, const IntervalSet& s);
Valuation pre_env(const std::vector<std::string>& vars, std::span<const Int> args);
std::vector<Expr> pre_args(const std::vector<std::string>& vars);

struct Recurrences {
  SymMap forms;                // Var -> closed form over pre symbols and N
  std::set<std::string> lagged;  // forms only valid from N = 1 on
};

Recurrences solve(const SymMap& op, const std::vector<std::string>& variables);

/// Least n >= 1 at which `cond` (over pre symbols and N) fails; the optional
/// trailing argument is a known upper bound.
class FirstExit : public Function {
 public:
  FirstExit(std::string name, Expr cond, std::vector<std::string> vars, bool limited, Int fuel);
  const std::string& name() const override { return name_; }
  Int apply(std::span<const Int> args) const override;

 private:
  std::string name_;
  Expr cond_;
  std::vector<std::string> vars_;
  bool limited_;
  Int fuel_;
};

}  // namespace loopsum::detail
