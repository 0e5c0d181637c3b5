#include "kmt/packs/llfp.hpp"

#include "kmt/packs/lf.hpp"
#include "kmt/solver.hpp"

namespace kmt::llfp {

namespace {

constexpr const char* kLockType = "locktype";
constexpr const char* kLockTerm = "lockterm";
constexpr const char* kUnlock = "unlock";

struct LockParts {
  ExprPtr condition;
  ExprPtr inner;  // type or term under the lock
};

std::optional<LockParts> asLock(Solver& s, const ExprPtr& e,
                                const char* head) {
  auto [h, args] = s.spine(e);
  if (!h->isConstant(head) || args.size() != 2) return std::nullopt;
  return LockParts{args[0], args[1]};
}

std::optional<ExprPtr> asUnlock(Solver& s, const ExprPtr& e) {
  auto [h, args] = s.spine(e);
  if (!h->isConstant(kUnlock) || args.size() != 1) return std::nullopt;
  return args[0];
}

/// Establish the side condition K: assumed when an alpha-equal condition
/// entry is in the context (we are in the monad), otherwise evaluated by
/// the ExternalConditionRule registered for its head.
bool establishCondition(Solver& s, const Context& ctx, const ExprPtr& k0) {
  ExprPtr k = s.instantiate(k0);
  for (const auto& e : ctx.entries) {
    if (!e.condition || !e.type) continue;
    if (alphaEqual(s.instantiate(e.type), k)) return true;
  }
  auto [p, args] = s.spine(k);
  if (!p->isConstant() || args.size() != 2) {
    s.error("side condition must have the shape p(t, A): " + s.renderExpr(k));
    return false;
  }
  auto it = s.rules().external.find(p->name);
  if (it == s.rules().external.end() || it->second.empty()) {
    s.error("no rule for condition " + p->name + " found");
    return false;
  }
  s.state().externalConditionCalls++;
  for (const auto& r : it->second) {
    s.state().firedRules.push_back(r->id());
    if (std::static_pointer_cast<const ExternalConditionRule>(r)->evaluate(
            s, ctx, args[0], args[1]))
      return true;
  }
  return false;
}

// (i) formation: L K<A> => type from A => type, with K assumed
class InferLockType final : public InferenceRule {
public:
  std::string id() const override { return "llfp.InferLockType"; }
  std::vector<std::string> headKeys() const override { return {kLockType}; }
  RuleOutcome infer(Solver& s, const Context& ctx, const ExprPtr& t,
                    bool covered, ExprPtr& out) const override {
    auto lock = asLock(s, t, kLockType);
    if (!lock) return RuleOutcome::NotApplicable;
    if (!covered) {
      Context inner = ctx.extendedCondition(lock->condition);
      auto tA = s.infer(inner, lock->inner, false);
      if (!tA) return RuleOutcome::Fail;
      if (!s.equal(inner, *tA, lf::typeExpr(), nullptr)) {
        s.error("the content of a lock type must be a type");
        return RuleOutcome::Fail;
      }
    }
    out = lf::typeExpr();
    return RuleOutcome::Ok;
  }
};

// (ii) introduction: L K<t> => L K<A> from t => A, with K assumed
class InferLockTerm final : public InferenceRule {
public:
  std::string id() const override { return "llfp.InferLockTerm"; }
  std::vector<std::string> headKeys() const override { return {kLockTerm}; }
  RuleOutcome infer(Solver& s, const Context& ctx, const ExprPtr& t,
                    bool covered, ExprPtr& out) const override {
    auto lock = asLock(s, t, kLockTerm);
    if (!lock) return RuleOutcome::NotApplicable;
    Context inner = ctx.extendedCondition(lock->condition);
    auto tA = s.infer(inner, lock->inner, covered);
    if (!tA) return RuleOutcome::Fail;
    out = s.mkSpine(Expr::constant(kLockType), {lock->condition, *tA});
    return RuleOutcome::Ok;
  }
};

// (iii) elimination: U<t> : A if t : L K<A> and K holds
class InferUnlock final : public InferenceRule {
public:
  std::string id() const override { return "llfp.InferUnlock"; }
  std::vector<std::string> headKeys() const override { return {kUnlock}; }
  RuleOutcome infer(Solver& s, const Context& ctx, const ExprPtr& t,
                    bool covered, ExprPtr& out) const override {
    auto inner = asUnlock(s, t);
    if (!inner) return RuleOutcome::NotApplicable;
    auto tt = s.infer(ctx, *inner, covered);
    if (!tt) return RuleOutcome::Fail;
    ExprPtr ttn = s.compute(ctx, *tt);
    auto lock = asLock(s, ttn, kLockType);
    if (!lock) {
      if (ttn->kind == Expr::Kind::Meta) {
        s.markBlocked();
        return RuleOutcome::Fail;
      }
      s.error("expected lock type when unlocking, found " + s.renderExpr(ttn));
      return RuleOutcome::Fail;
    }
    if (!establishCondition(s, ctx, lock->condition)) return RuleOutcome::Fail;
    out = lock->inner;
    return RuleOutcome::Ok;
  }
};

// (iv) check against monadic type
class CheckLock final : public TypingRule {
public:
  std::string id() const override { return "llfp.CheckLock"; }
  std::vector<std::string> headKeys() const override { return {kLockType}; }
  RuleOutcome check(Solver& s, const Context& ctx, const ExprPtr& t,
                    const ExprPtr& type) const override {
    auto lockType = asLock(s, type, kLockType);
    if (!lockType) return RuleOutcome::NotApplicable;
    ExprPtr tn = s.compute(ctx, t);
    auto lockTerm = asLock(s, tn, kLockTerm);
    if (!lockTerm) return RuleOutcome::NotApplicable;  // neutral: infer route
    if (!s.equal(ctx, lockTerm->condition, lockType->condition, nullptr)) {
      s.error("lock conditions do not agree");
      return RuleOutcome::Fail;
    }
    Context inner = ctx.extendedCondition(lockType->condition);
    return s.check(inner, lockTerm->inner, lockType->inner)
               ? RuleOutcome::Ok
               : RuleOutcome::Fail;
  }
};

// (v) equality at monadic type: compare the unlocked values under K
class EqualLock final : public EqualityRule {
public:
  std::string id() const override { return "llfp.EqualLock"; }
  std::vector<std::string> headKeys() const override { return {kLockType}; }
  RuleOutcome equal(Solver& s, const Context& ctx, const ExprPtr& a,
                    const ExprPtr& b, const ExprPtr& type) const override {
    auto lockType = asLock(s, type, kLockType);
    if (!lockType) return RuleOutcome::NotApplicable;
    Context inner = ctx.extendedCondition(lockType->condition);
    ExprPtr ua = s.mkSpine(Expr::constant(kUnlock), {a});
    ExprPtr ub = s.mkSpine(Expr::constant(kUnlock), {b});
    return s.equal(inner, ua, ub, lockType->inner) ? RuleOutcome::Ok
                                                   : RuleOutcome::Fail;
  }
};

// (vi) reduce unlock of lock
class UnlockBeta final : public ComputationRule {
public:
  std::string id() const override { return "llfp.UnlockBeta"; }
  std::vector<std::string> headKeys() const override { return {kUnlock}; }
  RuleOutcome step(Solver& s, const Context&, const ExprPtr& t,
                   ExprPtr& out) const override {
    auto inner = asUnlock(s, t);
    if (!inner) return RuleOutcome::NotApplicable;
    auto lockTerm = asLock(s, *inner, kLockTerm);
    if (!lockTerm) return RuleOutcome::NotApplicable;
    out = lockTerm->inner;
    return RuleOutcome::Ok;
  }
};

// Val(t, A): t must be a lambda-abstraction or a free object variable
class ValRule final : public ExternalConditionRule {
public:
  std::string id() const override { return "rules.ValRule"; }
  std::vector<std::string> headKeys() const override { return {"Val"}; }
  bool evaluate(Solver& s, const Context& ctx, const ExprPtr& t,
                const ExprPtr&) const override {
    ExprPtr tn = s.compute(ctx, t);
    auto head = s.headConstant(tn);
    if (head && (*head == "free" || *head == "lam")) return true;
    s.error(s.renderExpr(tn) + " must be lambda-abstraction or variable");
    return false;
  }
};

}  // namespace

void registerRules(Registry& r) {
  r.add(std::make_shared<InferLockType>());
  r.add(std::make_shared<InferLockTerm>());
  r.add(std::make_shared<InferUnlock>());
  r.add(std::make_shared<CheckLock>());
  r.add(std::make_shared<EqualLock>());
  r.add(std::make_shared<UnlockBeta>());
  r.add(std::make_shared<ValRule>());
}

std::string preludeLLFP() {
  return R"(theory LLFP =
  include LF
  locktype # 𝓛 1 ⟨ 2 ⟩
  lockterm # L 1 ⟨ 2 ⟩
  unlock # U ⟨ 1 ⟩
  rule llfp.InferLockType
  rule llfp.InferLockTerm
  rule llfp.InferUnlock
  rule llfp.CheckLock
  rule llfp.EqualLock
  rule llfp.UnlockBeta
end
)";
}

}  // namespace kmt::llfp
