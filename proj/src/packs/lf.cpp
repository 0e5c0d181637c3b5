#include "kmt/packs/lf.hpp"

namespace kmt::lf {

std::optional<PiParts> asPi(const ExprPtr& e) {
  if (e->kind != Expr::Kind::Complex || e->name != kPi) return std::nullopt;
  if (e->bindings.size() != 1 || e->args.size() != 1) return std::nullopt;
  const auto& b = e->bindings.entries[0];
  return PiParts{b.name, b.type, e->args[0]};
}

std::optional<PiParts> asLambda(const ExprPtr& e) {
  if (e->kind != Expr::Kind::Complex || e->name != kLambda) return std::nullopt;
  if (e->bindings.size() != 1 || e->args.size() != 1) return std::nullopt;
  const auto& b = e->bindings.entries[0];
  return PiParts{b.name, b.type, e->args[0]};
}

ExprPtr mkPi(std::string var, ExprPtr domain, ExprPtr body) {
  Context bs;
  bs.entries.push_back({std::move(var), std::move(domain), false});
  return Expr::complex(kPi, std::move(bs), {std::move(body)});
}

ExprPtr mkLambda(std::string var, ExprPtr domain, ExprPtr body) {
  Context bs;
  bs.entries.push_back({std::move(var), std::move(domain), false});
  return Expr::complex(kLambda, std::move(bs), {std::move(body)});
}

ExprPtr mkArrow(const ExprPtr& domain, const ExprPtr& body) {
  std::string x = freshName("x", freeVars(body));
  return mkPi(x, domain, body);
}

ExprPtr mkApply(ExprPtr f, ExprPtr a) {
  return Expr::complex(kApply, Context{}, {std::move(f), std::move(a)});
}

ExprPtr mkApplySpine(ExprPtr head, const std::vector<ExprPtr>& args) {
  ExprPtr cur = std::move(head);
  for (const auto& a : args) cur = mkApply(std::move(cur), a);
  return cur;
}

ExprPtr typeExpr() { return Expr::constant(kType); }
ExprPtr kindExpr() { return Expr::constant(kKind); }

bool isTypeLike(Solver& s, const Context& ctx, const ExprPtr& t) {
  auto u = s.infer(ctx, t, false);
  if (!u) {
    if (s.lenient() && s.blockedOnMeta()) return true;
    return false;
  }
  ExprPtr un = s.compute(ctx, *u);
  if (un->isConstant(kType) || un->isConstant(kKind)) return true;
  if (s.lenient() && !metaNames(un).empty()) return true;
  s.error("expected a type or kind, found something of sort " + s.renderExpr(un));
  return false;
}

namespace {

class InferType final : public InferenceRule {
public:
  std::string id() const override { return "lf.InferType"; }
  std::vector<std::string> headKeys() const override { return {kType}; }
  RuleOutcome infer(Solver&, const Context&, const ExprPtr& t, bool,
                    ExprPtr& out) const override {
    if (!t->isConstant(kType)) return RuleOutcome::NotApplicable;
    out = kindExpr();
    return RuleOutcome::Ok;
  }
};

class InferKind final : public InferenceRule {
public:
  std::string id() const override { return "lf.InferKind"; }
  std::vector<std::string> headKeys() const override { return {kKind}; }
  RuleOutcome infer(Solver& s, const Context&, const ExprPtr& t, bool,
                    ExprPtr&) const override {
    if (!t->isConstant(kKind)) return RuleOutcome::NotApplicable;
    s.error("the universe kind has no type");
    return RuleOutcome::Fail;
  }
};

class InferPi final : public InferenceRule {
public:
  std::string id() const override { return "lf.InferPi"; }
  std::vector<std::string> headKeys() const override { return {kPi}; }
  RuleOutcome infer(Solver& s, const Context& ctx, const ExprPtr& t,
                    bool covered, ExprPtr& out) const override {
    auto pi = asPi(t);
    if (!pi) return RuleOutcome::NotApplicable;
    if (!covered) {
      size_t mark = s.errorMark();
      auto dA = s.infer(ctx, pi->domain, false);
      if (!dA) {
        // a meta-typed domain gets solved by uses in the body; retried
        // by the strict pass
        if (!(s.lenient() && s.blockedOnMeta())) return RuleOutcome::Fail;
        s.rollbackErrors(mark);
      } else if (!s.equal(ctx, *dA, typeExpr(), nullptr)) {
        s.error("Pi domain must be a type");
        return RuleOutcome::Fail;
      }
    }
    std::string x = pickFresh(ctx, pi->var);
    Context inner = ctx.extended(x, pi->domain);
    auto tB = s.infer(inner, substitute(pi->body, pi->var, Expr::var(x)),
                      covered);
    if (!tB) return RuleOutcome::Fail;
    ExprPtr un = s.compute(inner, *tB);
    if (!un->isConstant(kType) && !un->isConstant(kKind)) {
      if (!(s.lenient() && !metaNames(un).empty())) {
        s.error("Pi body must be a type or a kind");
        return RuleOutcome::Fail;
      }
    }
    out = un;
    return RuleOutcome::Ok;
  }
};

class InferLambda final : public InferenceRule {
public:
  std::string id() const override { return "lf.InferLambda"; }
  std::vector<std::string> headKeys() const override { return {kLambda}; }
  RuleOutcome infer(Solver& s, const Context& ctx, const ExprPtr& t,
                    bool covered, ExprPtr& out) const override {
    auto lam = asLambda(t);
    if (!lam) return RuleOutcome::NotApplicable;
    if (!lam->domain) {
      s.error("cannot infer the type of an unannotated lambda");
      return RuleOutcome::Fail;
    }
    if (!covered && !isTypeLike(s, ctx, lam->domain)) return RuleOutcome::Fail;
    std::string x = pickFresh(ctx, lam->var);
    Context inner = ctx.extended(x, lam->domain);
    auto tb = s.infer(inner, substitute(lam->body, lam->var, Expr::var(x)),
                      covered);
    if (!tb) return RuleOutcome::Fail;
    out = mkPi(x, lam->domain, *tb);
    return RuleOutcome::Ok;
  }
};

class InferApply final : public InferenceRule {
public:
  std::string id() const override { return "lf.InferApply"; }
  std::vector<std::string> headKeys() const override { return {kApply}; }
  RuleOutcome infer(Solver& s, const Context& ctx, const ExprPtr& t,
                    bool covered, ExprPtr& out) const override {
    if (t->kind != Expr::Kind::Complex || t->name != kApply ||
        t->args.size() != 2)
      return RuleOutcome::NotApplicable;
    const ExprPtr& f = t->args[0];
    const ExprPtr& a = t->args[1];
    auto tf = s.infer(ctx, f, covered);
    if (!tf) return RuleOutcome::Fail;
    ExprPtr tfn = s.compute(ctx, *tf);
    auto pi = asPi(tfn);
    if (!pi) {
      if (tfn->kind == Expr::Kind::Meta) {
        s.markBlocked();
        return RuleOutcome::Fail;
      }
      s.error("expected a function type when applying " + s.renderExpr(f) +
              ", found " + s.renderExpr(tfn));
      return RuleOutcome::Fail;
    }
    if (!covered && !s.check(ctx, a, pi->domain)) return RuleOutcome::Fail;
    out = substitute(pi->body, pi->var, a);
    return RuleOutcome::Ok;
  }
};

class CheckPi final : public TypingRule {
public:
  std::string id() const override { return "lf.CheckPi"; }
  std::vector<std::string> headKeys() const override { return {kPi}; }
  RuleOutcome check(Solver& s, const Context& ctx, const ExprPtr& t,
                    const ExprPtr& type) const override {
    auto pi = asPi(type);
    if (!pi) return RuleOutcome::NotApplicable;
    std::string x = pickFresh(ctx, pi->var);
    ExprPtr bodyType = substitute(pi->body, pi->var, Expr::var(x));
    if (auto lam = asLambda(t)) {
      // annotation against domain, then the body
      if (lam->domain && !s.equal(ctx, lam->domain, pi->domain, nullptr)) {
        s.error("bound-variable type does not match the expected domain");
        return RuleOutcome::Fail;
      }
      Context inner = ctx.extended(x, pi->domain);
      ExprPtr body = substitute(lam->body, lam->var, Expr::var(x));
      return s.check(inner, body, bodyType) ? RuleOutcome::Ok
                                            : RuleOutcome::Fail;
    }
    // eta style: t applied to a fresh variable checks against the body
    Context inner = ctx.extended(x, pi->domain);
    ExprPtr applied = mkApply(t, Expr::var(x));
    return s.check(inner, applied, bodyType) ? RuleOutcome::Ok
                                             : RuleOutcome::Fail;
  }
};

class EqualPi final : public EqualityRule {
public:
  std::string id() const override { return "lf.EqualPi"; }
  std::vector<std::string> headKeys() const override { return {kPi}; }
  RuleOutcome equal(Solver& s, const Context& ctx, const ExprPtr& a,
                    const ExprPtr& b, const ExprPtr& type) const override {
    auto pi = asPi(type);
    if (!pi) return RuleOutcome::NotApplicable;
    std::string x = pickFresh(ctx, pi->var);
    Context inner = ctx.extended(x, pi->domain);
    ExprPtr bodyType = substitute(pi->body, pi->var, Expr::var(x));
    bool ok = s.equal(inner, mkApply(a, Expr::var(x)), mkApply(b, Expr::var(x)),
                      bodyType);
    return ok ? RuleOutcome::Ok : RuleOutcome::Fail;
  }
};

class Beta final : public ComputationRule {
public:
  std::string id() const override { return "lf.Beta"; }
  std::vector<std::string> headKeys() const override { return {kApply}; }
  RuleOutcome step(Solver&, const Context&, const ExprPtr& t,
                   ExprPtr& out) const override {
    if (t->kind != Expr::Kind::Complex || t->name != kApply ||
        t->args.size() != 2)
      return RuleOutcome::NotApplicable;
    auto lam = asLambda(t->args[0]);
    if (!lam) return RuleOutcome::NotApplicable;
    out = substitute(lam->body, lam->var, t->args[1]);
    return RuleOutcome::Ok;
  }
};

// Pattern unification. Handles a bare meta-variable applied to distinct
// variables, and the Miller case of a meta under an application spine
// (?F y1 ... yk == t solves F := [y1] ... [yk] t, with lambda domains
// taken from F's expected type).
class Solve final : public SolutionRule {
public:
  std::string id() const override { return "lf.Solve"; }
  RuleOutcome solve(Solver& s, const Context& ctx, const ExprPtr& metaSide,
                    const ExprPtr& other, const ExprPtr&) const override {
    if (metaSide->kind == Expr::Kind::Meta)
      return s.trySolvePattern(metaSide, other);

    auto [head, args] = s.spine(metaSide);
    if (args.empty() || head->kind != Expr::Kind::Meta)
      return RuleOutcome::NotApplicable;
    const MetaInfo* m = s.metaInfo(head->name);
    if (!m || m->solution) return RuleOutcome::NotApplicable;

    std::vector<std::string> ys;
    std::set<std::string> seen;
    for (const auto& a : args) {
      if (a->kind != Expr::Kind::Var || !seen.insert(a->name).second)
        return RuleOutcome::NotApplicable;
      ys.push_back(a->name);
    }

    ExprPtr t = s.instantiate(other);

    // eta shortcut: t = H y1 ... yk with the exact same trailing
    // variables solves the meta to H directly
    auto [th, targs] = s.spine(t);
    if (targs.size() >= ys.size()) {
      size_t offset = targs.size() - ys.size();
      bool exact = true;
      for (size_t i = 0; i < ys.size() && exact; ++i)
        exact = targs[offset + i]->kind == Expr::Kind::Var &&
                targs[offset + i]->name == ys[i];
      if (exact) {
        ExprPtr prefix = th;
        for (size_t i = 0; i < offset; ++i) prefix = mkApply(prefix, targs[i]);
        auto pf = freeVars(prefix);
        bool captured = std::any_of(ys.begin(), ys.end(), [&](const std::string& y) {
          return pf.count(y) > 0;
        });
        if (!captured) {
          auto r = s.trySolvePattern(head, prefix);
          if (r != RuleOutcome::NotApplicable) return r;
        }
      }
    }

    // abstract with omitted binder types; solutions sit in checked
    // positions so the annotations are never needed
    ExprPtr body = t;
    for (size_t i = ys.size(); i-- > 0;) body = mkLambda(ys[i], nullptr, body);
    return s.trySolvePattern(head, body);
  }
};

class InhUniverse final : public InhabitableRule {
public:
  std::string id() const override { return "lf.InhUniverse"; }
  std::vector<std::string> headKeys() const override { return {kType, kKind}; }
  RuleOutcome inhabitable(Solver&, const Context&,
                          const ExprPtr& t) const override {
    if (t->isConstant(kType) || t->isConstant(kKind)) return RuleOutcome::Ok;
    return RuleOutcome::NotApplicable;
  }
};

class InhPi final : public InhabitableRule {
public:
  std::string id() const override { return "lf.InhPi"; }
  std::vector<std::string> headKeys() const override { return {kPi}; }
  RuleOutcome inhabitable(Solver& s, const Context& ctx,
                          const ExprPtr& t) const override {
    auto pi = asPi(t);
    if (!pi) return RuleOutcome::NotApplicable;
    size_t mark = s.errorMark();
    auto dA = s.infer(ctx, pi->domain, false);
    if (!dA) {
      if (s.lenient() && s.blockedOnMeta()) {
        s.rollbackErrors(mark);
      } else {
        return RuleOutcome::Fail;
      }
    } else if (!s.equal(ctx, *dA, typeExpr(), nullptr)) {
      s.error("Pi domain must be a type");
      return RuleOutcome::Fail;
    }
    std::string x = pickFresh(ctx, pi->var);
    Context inner = ctx.extended(x, pi->domain);
    bool ok = s.inhabitable(inner, substitute(pi->body, pi->var, Expr::var(x)));
    return ok ? RuleOutcome::Ok : RuleOutcome::Fail;
  }
};

// the PLF rule: kinded variables may be bound at the toplevel of a
// declaration's type
class ShallowPolymorphism final : public InhabitableRule {
public:
  std::string id() const override { return "plf.ShallowPolymorphism"; }
  std::vector<std::string> headKeys() const override { return {kPi}; }
  RuleOutcome inhabitable(Solver& s, const Context& ctx,
                          const ExprPtr& t) const override {
    auto pi = asPi(t);
    if (!pi) return RuleOutcome::NotApplicable;
    size_t mark = s.errorMark();
    auto dA = s.infer(ctx, pi->domain, false);
    if (!dA) {
      if (s.lenient() && s.blockedOnMeta()) {
        s.rollbackErrors(mark);
      } else {
        return RuleOutcome::Fail;
      }
    } else {
      ExprPtr un = s.compute(ctx, *dA);
      if (!un->isConstant(kType) && !un->isConstant(kKind)) {
        if (!(s.lenient() && !metaNames(un).empty())) {
          s.error("Pi domain must live in a universe");
          return RuleOutcome::Fail;
        }
      }
    }
    std::string x = pickFresh(ctx, pi->var);
    Context inner = ctx.extended(x, pi->domain);
    bool ok = s.inhabitable(inner, substitute(pi->body, pi->var, Expr::var(x)));
    return ok ? RuleOutcome::Ok : RuleOutcome::Fail;
  }
};

}  // namespace

void registerRules(Registry& r) {
  r.add(std::make_shared<InferType>());
  r.add(std::make_shared<InferKind>());
  r.add(std::make_shared<InferPi>());
  r.add(std::make_shared<InferLambda>());
  r.add(std::make_shared<InferApply>());
  r.add(std::make_shared<CheckPi>());
  r.add(std::make_shared<EqualPi>());
  r.add(std::make_shared<Beta>());
  r.add(std::make_shared<Solve>());
  r.add(std::make_shared<InhUniverse>());
  r.add(std::make_shared<InhPi>());
  r.add(std::make_shared<ShallowPolymorphism>());
}

std::string preludeLF() {
  return R"(theory LF =
  type # type
  kind # kind
  Pi # { V1 } 1
  lambda # [ V1 ] 1
  apply # 1 2
  arrow # 1 → 2 prec -9990
  rule lf.InferType
  rule lf.InferKind
  rule lf.InferPi
  rule lf.InferLambda
  rule lf.InferApply
  rule lf.CheckPi
  rule lf.EqualPi
  rule lf.Beta
  rule lf.Solve
  rule lf.InhUniverse
  rule lf.InhPi
end
)";
}

std::string preludePLF() {
  return R"(theory PLF =
  include LF
  rule plf.ShallowPolymorphism
end
)";
}

}  // namespace kmt::lf
