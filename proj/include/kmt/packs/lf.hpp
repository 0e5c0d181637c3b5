#pragma once

#include <optional>
#include <string>

#include "kmt/expr.hpp"
#include "kmt/solver.hpp"
#include "kmt/theory.hpp"

namespace kmt::lf {

inline constexpr const char* kType = "type";
inline constexpr const char* kKind = "kind";
inline constexpr const char* kPi = "Pi";
inline constexpr const char* kLambda = "lambda";
inline constexpr const char* kApply = "apply";

struct PiParts {
  std::string var;
  ExprPtr domain;
  ExprPtr body;
};

std::optional<PiParts> asPi(const ExprPtr& e);
std::optional<PiParts> asLambda(const ExprPtr& e);

ExprPtr mkPi(std::string var, ExprPtr domain, ExprPtr body);
ExprPtr mkLambda(std::string var, ExprPtr domain, ExprPtr body);
ExprPtr mkArrow(const ExprPtr& domain, const ExprPtr& body);  // Pi, unused var
ExprPtr mkApply(ExprPtr f, ExprPtr a);
ExprPtr mkApplySpine(ExprPtr head, const std::vector<ExprPtr>& args);
ExprPtr typeExpr();
ExprPtr kindExpr();

/// infer(t) is `type` or `kind` after normalization. In lenient mode an
/// undetermined (meta-blocked) answer passes; the strict pass re-checks.
bool isTypeLike(Solver& s, const Context& ctx, const ExprPtr& t);

/// Register the 11 LF rules and the PLF shallow-polymorphism rule.
void registerRules(Registry& r);

/// Built-in theory sources (parsed on graph construction).
std::string preludeLF();
std::string preludePLF();

}  // namespace kmt::lf
