#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "kmt/expr.hpp"

namespace kmt {

class Solver;
class CheckSession;
struct Declaration;
struct FeatureDecl;
struct Theory;

/// Outcome of trying a rule: not my shape, decided positively, or a
/// definite failure (the rule has recorded a diagnostic on the solver).
enum class RuleOutcome { NotApplicable, Ok, Fail };

enum class RuleKind {
  Inference,
  Typing,
  Equality,
  Computation,
  Inhabitable,
  Solution,
  ExternalCondition,
  ChangeListener,
  StructuralFeature,
};

/// A dispatchable kernel behavior keyed to a judgment kind and one or more
/// head constants (listeners and features key on events/keywords instead).
class Rule {
public:
  virtual ~Rule() = default;
  virtual RuleKind kind() const = 0;
  /// Registry identifier, e.g. "lf.Beta".
  virtual std::string id() const = 0;
  /// Dispatch keys; empty for keyless rules.
  virtual std::vector<std::string> headKeys() const { return {}; }
};

using RulePtr = std::shared_ptr<const Rule>;

class InferenceRule : public Rule {
public:
  RuleKind kind() const final { return RuleKind::Inference; }
  virtual RuleOutcome infer(Solver& s, const Context& ctx, const ExprPtr& term,
                            bool covered, ExprPtr& outType) const = 0;
};

class TypingRule : public Rule {
public:
  RuleKind kind() const final { return RuleKind::Typing; }
  /// `type` is compute-normal and its head matched a key of this rule.
  virtual RuleOutcome check(Solver& s, const Context& ctx, const ExprPtr& term,
                            const ExprPtr& type) const = 0;
};

class EqualityRule : public Rule {
public:
  RuleKind kind() const final { return RuleKind::Equality; }
  virtual RuleOutcome equal(Solver& s, const Context& ctx, const ExprPtr& a,
                            const ExprPtr& b, const ExprPtr& type) const = 0;
};

class ComputationRule : public Rule {
public:
  RuleKind kind() const final { return RuleKind::Computation; }
  /// One head-step; NotApplicable when there is no redex at the root.
  virtual RuleOutcome step(Solver& s, const Context& ctx, const ExprPtr& term,
                           ExprPtr& out) const = 0;
};

class InhabitableRule : public Rule {
public:
  RuleKind kind() const final { return RuleKind::Inhabitable; }
  virtual RuleOutcome inhabitable(Solver& s, const Context& ctx,
                                  const ExprPtr& type) const = 0;
};

/// Solves meta-variables from an equality `meta-side == other side`.
class SolutionRule : public Rule {
public:
  RuleKind kind() const final { return RuleKind::Solution; }
  virtual RuleOutcome solve(Solver& s, const Context& ctx,
                            const ExprPtr& metaSide, const ExprPtr& other,
                            const ExprPtr& type) const = 0;
};

/// Evaluates an extra-linguistic side condition p(t, A). Must be pure and
/// must not solve metas; records a diagnostic on failure.
class ExternalConditionRule : public Rule {
public:
  RuleKind kind() const final { return RuleKind::ExternalCondition; }
  virtual bool evaluate(Solver& s, const Context& ctx, const ExprPtr& t,
                        const ExprPtr& type) const = 0;
};

/// Fires after a declaration has been successfully checked and committed.
class ChangeListener : public Rule {
public:
  RuleKind kind() const final { return RuleKind::ChangeListener; }
  virtual void declarationChecked(CheckSession& session, Theory& theory,
                                  const Declaration& decl,
                                  size_t index) const = 0;
};

/// Elaborates a keyword-introduced nested declaration group into ordinary
/// declarations, inserted in place.
class StructuralFeature : public Rule {
public:
  RuleKind kind() const final { return RuleKind::StructuralFeature; }
  virtual std::string keyword() const = 0;
  virtual std::vector<Declaration> elaborate(CheckSession& session,
                                             Theory& theory,
                                             const FeatureDecl& fd) const = 0;
};

}  // namespace kmt
