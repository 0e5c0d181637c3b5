#pragma once

#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "kmt/expr.hpp"
#include "kmt/rules.hpp"
#include "kmt/theory.hpp"

namespace kmt {

class CheckSession;

/// The five judgment forms, used for delayed constraints and history.
struct Judgment {
  enum class Kind { Inhabitable, Check, Infer, Equal, Compute };
  Kind kind;
  Context ctx;
  ExprPtr a;     // term / left side / type for Inhabitable
  ExprPtr b;     // right side (Equal)
  ExprPtr type;  // expected type (Check, Equal)
};

struct MetaInfo {
  std::vector<std::string> params;  // canonical parameter names
  ExprPtr solution;                 // body over params, null while unsolved
  ExprPtr expectedType;             // over params, when known
  int order = 0;                    // creation order
};

struct Diagnostic {
  std::string message;
  SourcePos pos;
  std::vector<std::string> trace;  // judgment chain, outermost first
  std::string render() const;      // pos: error: msg + indented trace
};

/// Per-declaration solver state: meta store, delayed constraints, history,
/// fuel, and instrumentation. Confined to a single checking task.
class SolverState {
public:
  std::map<std::string, MetaInfo> metas;
  std::deque<Judgment> delayed;
  std::vector<Diagnostic> errors;
  std::vector<std::string> frames;      // current judgment stack
  std::vector<std::string> firedRules;  // rule ids, in firing order

  long fuelLimit = 10000;
  long fuelUsed = 0;
  bool fuelExhausted = false;
  int externalConditionCalls = 0;
  int metaCounter = 0;
  SourcePos declPos;

  bool hasUnsolvedMetas() const;
  std::vector<std::string> unsolvedMetas() const;
};

/// Dispatch table of the rules visible at the current position.
struct RuleTable {
  std::map<RuleKind, std::map<std::string, std::vector<RulePtr>>> byHead;
  std::vector<RulePtr> solutions;
  std::map<std::string, std::vector<RulePtr>> external;  // by condition head
  std::vector<RulePtr> listeners;
  std::map<std::string, RulePtr> features;  // by keyword
  std::vector<RulePtr> all;

  void add(const RulePtr& rule);
  const std::vector<RulePtr>* lookup(RuleKind kind, const std::string& head) const;
  bool contains(const std::string& id) const;
};

/// The judgment engine. Dispatches to visible rules, solves metas in the
/// pattern fragment, delays constraints blocked on unsolved metas, and
/// carries a history trace for diagnostics. No logic-specific behavior.
class Solver {
public:
  Solver(CheckSession& session, SolverState& state, bool lenient);

  CheckSession& session() { return session_; }
  SolverState& state() { return state_; }
  bool lenient() const { return lenient_; }

  // --- judgments ---
  std::optional<ExprPtr> infer(const Context& ctx, const ExprPtr& t, bool covered);
  bool check(const Context& ctx, const ExprPtr& t, const ExprPtr& type);
  bool equal(const Context& ctx, const ExprPtr& a, const ExprPtr& b,
             const ExprPtr& type);
  ExprPtr compute(const Context& ctx, const ExprPtr& t);
  bool inhabitable(const Context& ctx, const ExprPtr& type);

  /// Run the delayed-constraint queue to a fixpoint. Returns false when a
  /// constraint definitely failed.
  bool delayAndResume();

  // --- meta store ---
  ExprPtr newMeta(const Context& ctx, const std::string& hint);
  const MetaInfo* metaInfo(const std::string& name) const;
  bool isSolved(const std::string& name) const;
  /// Record a solution (body over the meta's params). Fails on re-solution
  /// with a different body.
  bool solveMeta(const std::string& name, const ExprPtr& body);
  /// Pattern-fragment solving: metaSide must be a Meta applied to distinct
  /// variables; rhs free variables must be covered; occurs check applies.
  /// Returns NotApplicable when outside the fragment.
  RuleOutcome trySolvePattern(const ExprPtr& metaSide, const ExprPtr& rhs);
  /// Deep instantiation of solved metas; no normalization.
  ExprPtr instantiate(const ExprPtr& e) const;

  // --- services for rules ---
  const Declaration* lookupConstant(const std::string& name) const;
  /// Spine-aware head: strips application constants left-to-right.
  std::optional<std::string> headConstant(const ExprPtr& e) const;
  /// Decompose nested applications into (head, args); head is not an
  /// application node.
  std::pair<ExprPtr, std::vector<ExprPtr>> spine(const ExprPtr& e) const;
  /// Rebuild an application spine using the application constant in scope.
  ExprPtr mkSpine(const ExprPtr& head, const std::vector<ExprPtr>& args) const;
  bool isApplicationConstant(const std::string& name) const;
  bool ruleVisible(const std::string& id) const;
  const RuleTable& rules() const;

  void error(const std::string& message);
  bool spendFuel();
  void resetFuel();
  std::string renderExpr(const ExprPtr& e) const;

  /// Rules call this when they cannot proceed because of an unsolved meta;
  /// enclosing judgments then delay instead of failing (lenient mode).
  void markBlocked() { blockedOnMeta_ = true; }
  bool blockedOnMeta() const { return blockedOnMeta_; }

  /// RAII history frame.
  class Frame {
  public:
    Frame(Solver& s, std::string description);
    ~Frame();

  private:
    Solver& solver_;
  };

  size_t errorMark() const { return state_.errors.size(); }
  void rollbackErrors(size_t mark);

private:
  CheckSession& session_;
  SolverState& state_;
  bool lenient_;
  bool blockedOnMeta_ = false;
  int inhDepth_ = 0;

  std::vector<std::string> dispatchKeys(const ExprPtr& e) const;
  ExprPtr computeRec(const Context& ctx, const ExprPtr& e, int depth);
  bool equalCongruent(const Context& ctx, const ExprPtr& a, const ExprPtr& b);
  bool rerun(const Judgment& j);
  void delay(Judgment j);
  bool finishDelayed(bool requireEmpty);

  friend class CheckSession;
};

}  // namespace kmt
