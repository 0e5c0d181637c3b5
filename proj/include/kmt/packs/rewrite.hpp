#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "kmt/expr.hpp"
#include "kmt/theory.hpp"

namespace kmt {
class Solver;
}

namespace kmt::rewrite {

/// A rewrite rule extracted from a `role Simplify` constant of shape
/// c : {Gamma} l = r. The Gamma variables are the match holes.
struct RewriteSpec {
  std::string origin;
  ExprPtr pattern;
  ExprPtr replacement;
  std::vector<std::string> holeOrder;
  std::map<std::string, ExprPtr> holeTypes;
  std::string headKey;  // spine head of the pattern
};

/// Syntactic first-order matching modulo alpha; holes applied to distinct
/// bound variables match in Miller-pattern style. Returns the assignment
/// or nothing.
std::optional<std::map<std::string, ExprPtr>> matchPattern(
    Solver& s, const RewriteSpec& spec, const ExprPtr& scrutinee);

/// Analyze a checked declaration; empty optional plus a message when the
/// declaration cannot become a rewrite rule.
struct ExtractResult {
  std::optional<RewriteSpec> spec;
  std::string rejection;
};
ExtractResult extractRewriteRule(Solver& s, const Declaration& decl);

RulePtr makeGeneratedRule(RewriteSpec spec);

/// The change listener that turns `role Simplify` constants into
/// computation rules. Recognized roles: Simplify, RewriteEq,
/// RewriteJudgment.
void registerRules(Registry& r);

}  // namespace kmt::rewrite
