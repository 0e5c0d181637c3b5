#include "kmt/packs/rewrite.hpp"

#include <algorithm>

#include "kmt/packs/lf.hpp"
#include "kmt/session.hpp"
#include "kmt/solver.hpp"

namespace kmt::rewrite {

namespace {

struct MatchState {
  Solver& solver;
  const RewriteSpec& spec;
  // pattern-side bound name -> scrutinee-side bound name
  std::map<std::string, std::string> bound;
  std::set<std::string> scrutBound;
  std::map<std::string, ExprPtr> assignment;

  bool isHole(const std::string& n) const {
    return spec.holeTypes.count(n) && !bound.count(n);
  }

  bool bindHole(const std::string& hole, const ExprPtr& value) {
    auto it = assignment.find(hole);
    if (it != assignment.end()) return alphaEqual(it->second, value);
    // a hole must not capture scrutinee-side bound variables
    for (const auto& fv : freeVars(value))
      if (scrutBound.count(fv)) return false;
    assignment[hole] = value;
    return true;
  }

  bool match(const ExprPtr& p, const ExprPtr& t) {
    if (p->kind == Expr::Kind::Var) {
      auto b = bound.find(p->name);
      if (b != bound.end())
        return t->kind == Expr::Kind::Var && t->name == b->second;
      if (isHole(p->name)) return bindHole(p->name, t);
      return t->kind == Expr::Kind::Var && t->name == p->name;
    }
    if (p->kind == Expr::Kind::Meta) return false;

    // Miller-pattern hole: hole applied to distinct bound variables
    auto [ph, pargs] = solver.spine(p);
    if (!pargs.empty() && ph->kind == Expr::Kind::Var && isHole(ph->name)) {
      std::vector<std::string> argNames;
      std::set<std::string> seen;
      bool pat = true;
      for (const auto& a : pargs) {
        if (a->kind != Expr::Kind::Var || !bound.count(a->name) ||
            !seen.insert(a->name).second) {
          pat = false;
          break;
        }
        argNames.push_back(bound.at(a->name));
      }
      if (pat) {
        // abstract the matched subterm over the argument variables, with
        // domains from the hole's Pi-type telescope
        ExprPtr holeType = spec.holeTypes.at(ph->name);
        ExprPtr value = t;
        std::vector<std::pair<std::string, ExprPtr>> lams;
        ExprPtr walk = holeType;
        for (const auto& an : argNames) {
          auto pi = lf::asPi(walk);
          if (!pi) return false;
          lams.push_back({an, pi->domain});
          walk = substitute(pi->body, pi->var, Expr::var(an));
        }
        for (const auto& fv : freeVars(t))
          if (scrutBound.count(fv) &&
              std::find(argNames.begin(), argNames.end(), fv) ==
                  argNames.end())
            return false;
        for (size_t i = lams.size(); i-- > 0;)
          value = lf::mkLambda(lams[i].first, lams[i].second, value);
        return bindHole(ph->name, value);
      }
    }

    if (t->kind != Expr::Kind::Complex || p->name != t->name) return false;
    if (p->bindings.size() != t->bindings.size()) return false;
    if (p->args.size() != t->args.size()) return false;

    MatchState sub = *this;
    for (size_t i = 0; i < p->bindings.size(); ++i) {
      const auto& bp = p->bindings.entries[i];
      const auto& bt = t->bindings.entries[i];
      if (bp.condition != bt.condition) return false;
      if ((bp.type == nullptr) != (bt.type == nullptr)) return false;
      if (bp.type && !sub.match(bp.type, bt.type)) return false;
      if (!bp.condition) {
        sub.bound[bp.name] = bt.name;
        sub.scrutBound.insert(bt.name);
      }
    }
    for (size_t i = 0; i < p->args.size(); ++i)
      if (!sub.match(p->args[i], t->args[i])) return false;
    assignment = std::move(sub.assignment);
    return true;
  }
};

const Declaration* findRoleConstant(const Scope& scope, const std::string& role,
                                    const std::string& name) {
  const Declaration* d = scope.decl(name);
  if (d && d->role && *d->role == role) return d;
  return nullptr;
}

}  // namespace

std::optional<std::map<std::string, ExprPtr>> matchPattern(
    Solver& s, const RewriteSpec& spec, const ExprPtr& scrutinee) {
  MatchState st{s, spec, {}, {}, {}};
  if (!st.match(spec.pattern, scrutinee)) return std::nullopt;
  return st.assignment;
}

ExtractResult extractRewriteRule(Solver& s, const Declaration& decl) {
  if (!decl.type) return {std::nullopt, "rewrite constant has no type"};
  const Scope& scope = s.session().scope();

  RewriteSpec spec;
  spec.origin = decl.name;

  // strip the Pi telescope; its variables become the match holes
  Context ctx;
  ExprPtr body = s.compute(ctx, decl.type);
  while (auto pi = lf::asPi(body)) {
    std::string x = pickFresh(ctx, pi->var);
    spec.holeOrder.push_back(x);
    spec.holeTypes[x] = pi->domain;
    ctx = ctx.extended(x, pi->domain);
    body = s.compute(ctx, substitute(pi->body, pi->var, Expr::var(x)));
  }

  // hypotheses beyond hole bindings make the rule conditional: rejected
  for (const auto& [hole, ty] : spec.holeTypes) {
    (void)hole;
    auto h = s.headConstant(s.compute(ctx, ty));
    if (h && findRoleConstant(scope, "RewriteJudgment", *h))
      return {std::nullopt, "conditional rewrite rules are not supported"};
  }

  // peel the truth judgment, then the equation
  auto [jh, jargs] = s.spine(body);
  ExprPtr equation = body;
  if (jh->isConstant() && findRoleConstant(scope, "RewriteJudgment", jh->name) &&
      !jargs.empty())
    equation = jargs.back();
  auto [eh, eargs] = s.spine(equation);
  if (!eh->isConstant() || !findRoleConstant(scope, "RewriteEq", eh->name) ||
      eargs.size() < 2)
    return {std::nullopt,
            "type of a Simplify constant must be an equation under the "
            "rewrite judgment"};
  spec.pattern = eargs[eargs.size() - 2];
  spec.replacement = eargs[eargs.size() - 1];

  auto head = s.headConstant(spec.pattern);
  if (!head || spec.holeTypes.count(*head))
    return {std::nullopt,
            "left-hand side of a rewrite rule must have a constant head"};
  spec.headKey = *head;

  std::set<std::string> holeSet(spec.holeOrder.begin(), spec.holeOrder.end());
  auto lhsFree = freeVars(spec.pattern);
  for (const auto& fv : freeVars(spec.replacement)) {
    if (holeSet.count(fv) && !lhsFree.count(fv))
      return {std::nullopt, "right-hand side uses hole " + fv +
                                " that the left-hand side does not bind"};
  }
  return {spec, ""};
}

namespace {

class GeneratedRewriteRule final : public ComputationRule {
public:
  explicit GeneratedRewriteRule(RewriteSpec spec) : spec_(std::move(spec)) {}
  std::string id() const override { return "rewrite.generated." + spec_.origin; }
  std::vector<std::string> headKeys() const override { return {spec_.headKey}; }
  RuleOutcome step(Solver& s, const Context&, const ExprPtr& t,
                   ExprPtr& out) const override {
    auto sigma = matchPattern(s, spec_, t);
    if (!sigma) return RuleOutcome::NotApplicable;
    std::map<std::string, ExprPtr> sub(sigma->begin(), sigma->end());
    out = substituteAll(spec_.replacement, sub);
    return RuleOutcome::Ok;
  }

private:
  RewriteSpec spec_;
};

class SimplifyListener final : public ChangeListener {
public:
  std::string id() const override { return "rewrite.SimplifyListener"; }
  void declarationChecked(CheckSession& session, Theory&,
                          const Declaration& decl, size_t) const override {
    if (!decl.role || *decl.role != "Simplify") return;
    SolverState st;
    st.declPos = decl.pos;
    Solver solver(session, st, /*lenient=*/false);
    auto result = extractRewriteRule(solver, decl);
    if (!result.spec)
      throw TheoryError{"cannot generate rewrite rule from " + decl.name +
                            ": " + result.rejection,
                        decl.pos};
    session.insertAfterCurrent(
        RuleObj{makeGeneratedRule(std::move(*result.spec)), decl.name});
  }
};

}  // namespace

RulePtr makeGeneratedRule(RewriteSpec spec) {
  return std::make_shared<GeneratedRewriteRule>(std::move(spec));
}

void registerRules(Registry& r) {
  r.add(std::make_shared<SimplifyListener>());
}

}  // namespace kmt::rewrite
