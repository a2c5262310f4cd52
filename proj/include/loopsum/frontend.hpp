#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "loopsum/ast.hpp"

namespace loopsum {

enum class FeatureTag { MemoryOp, RealType, UnsupportedExpr, DivByVar };
std::string to_string(FeatureTag t);

enum class Severity { Error, Warning };

struct SourceDiagnostic {
  ast::Loc loc;
  Severity severity = Severity::Error;
  std::string message;
  std::optional<FeatureTag> tag;  // unset for plain syntax errors

  std::string to_string() const;
};

struct ParseResult {
  std::optional<ast::Program> program;
  std::vector<SourceDiagnostic> diagnostics;

  bool ok() const { return program.has_value(); }
};

struct ParseOptions {
  Int nondet_lo = 0;
  Int nondet_hi = 100;
};

/// Parses a `.wl` source. Either a program or at least one error diagnostic.
ParseResult parse(std::string_view source, const ParseOptions& options = {});

class ParseError : public std::runtime_error {
 public:
  explicit ParseError(SourceDiagnostic d) : std::runtime_error(d.to_string()), diagnostic(std::move(d)) {}
  SourceDiagnostic diagnostic;
};

/// Parses a lone expression; identifiers need no declaration. Throws ParseError.
ast::ExprPtr parse_expression(std::string_view text);

}  // namespace loopsum
