#pragma once

#include <string>

#include "kmt/expr.hpp"
#include "kmt/parser.hpp"
#include "kmt/theory.hpp"

namespace kmt {

struct PrintOptions {
  /// Print implicit arguments as %{...} fills (reparseable).
  bool explicitImplicits = false;
};

/// Notation-driven pretty printer; inverse of parseExpression on meta-free
/// expressions, inserting minimal bracketing from precedences.
std::string printExpression(const ExprPtr& e, const Scope& scope,
                            PrintOptions opts = {});

/// One-declaration rendering in file syntax.
std::string printDeclaration(const Declaration& d, const Scope& scope,
                             PrintOptions opts = {});

}  // namespace kmt
