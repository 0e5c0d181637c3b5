#include "kmt/packs/linear.hpp"

#include <algorithm>

#include "kmt/solver.hpp"

namespace kmt::linear {

namespace {

constexpr const char* kWorld = "world";
constexpr const char* kUnion = "union";
constexpr const char* kEmpty = "empty";

void collectAtoms(Solver& s, const ExprPtr& w, std::vector<ExprPtr>& out) {
  auto [h, args] = s.spine(w);
  if (h->isConstant(kUnion) && args.size() == 2) {
    collectAtoms(s, args[0], out);
    collectAtoms(s, args[1], out);
    return;
  }
  if (w->isConstant(kEmpty)) return;
  out.push_back(w);
}

struct AtomKey {
  int category;  // 0 bound var (by depth), 1 free var, 2 meta, 3 other
  int depth;     // larger = bound more recently (innermost)
  std::string name;

  bool operator<(const AtomKey& o) const {
    if (category != o.category) return category < o.category;
    if (depth != o.depth) return depth > o.depth;  // innermost first
    return name < o.name;
  }
};

AtomKey keyOf(const Context& ctx, const ExprPtr& a) {
  if (a->kind == Expr::Kind::Var) {
    for (int i = static_cast<int>(ctx.entries.size()) - 1; i >= 0; --i) {
      const auto& e = ctx.entries[static_cast<size_t>(i)];
      if (!e.condition && e.name == a->name) return {0, i, a->name};
    }
    return {1, 0, a->name};
  }
  if (a->kind == Expr::Kind::Meta) return {2, 0, a->name};
  return {3, 0, rawString(a)};
}

}  // namespace

std::vector<ExprPtr> worldAtoms(Solver& s, const ExprPtr& w) {
  std::vector<ExprPtr> atoms;
  collectAtoms(s, s.instantiate(w), atoms);
  return atoms;
}

ExprPtr rebuildWorld(Solver& s, const Context& ctx,
                     std::vector<ExprPtr> atoms) {
  std::stable_sort(atoms.begin(), atoms.end(),
                   [&](const ExprPtr& a, const ExprPtr& b) {
                     return keyOf(ctx, a) < keyOf(ctx, b);
                   });
  if (atoms.empty()) return Expr::constant(kEmpty);
  ExprPtr cur = atoms.back();
  for (size_t i = atoms.size() - 1; i-- > 0;)
    cur = s.mkSpine(Expr::constant(kUnion), {atoms[i], cur});
  return cur;
}

namespace {

// remove the atoms common to both multisets (free commutative monoid
// cancellation)
void cancelCommon(std::vector<ExprPtr>& l, std::vector<ExprPtr>& r) {
  for (size_t i = 0; i < l.size();) {
    bool cancelled = false;
    for (size_t j = 0; j < r.size(); ++j) {
      if (alphaEqual(l[i], r[j])) {
        l.erase(l.begin() + i);
        r.erase(r.begin() + j);
        cancelled = true;
        break;
      }
    }
    if (!cancelled) ++i;
  }
}

bool hasMeta(const std::vector<ExprPtr>& atoms) {
  return std::any_of(atoms.begin(), atoms.end(), [](const ExprPtr& a) {
    return !metaNames(a).empty();
  });
}

class NormalizeWorlds final : public ComputationRule {
public:
  std::string id() const override { return "linear.NormalizeWorlds"; }
  std::vector<std::string> headKeys() const override { return {kUnion}; }
  RuleOutcome step(Solver& s, const Context& ctx, const ExprPtr& t,
                   ExprPtr& out) const override {
    auto [h, args] = s.spine(t);
    if (!h->isConstant(kUnion) || args.size() != 2)
      return RuleOutcome::NotApplicable;
    ExprPtr normal = rebuildWorld(s, ctx, worldAtoms(s, t));
    if (alphaEqual(normal, t)) return RuleOutcome::NotApplicable;
    out = normal;
    return RuleOutcome::Ok;
  }
};

class EquateWorlds final : public EqualityRule {
public:
  std::string id() const override { return "linear.EquateWorlds"; }
  std::vector<std::string> headKeys() const override { return {kWorld}; }
  RuleOutcome equal(Solver& s, const Context& ctx, const ExprPtr& a,
                    const ExprPtr& b, const ExprPtr&) const override {
    auto l = worldAtoms(s, s.compute(ctx, a));
    auto r = worldAtoms(s, s.compute(ctx, b));
    cancelCommon(l, r);
    if (l.empty() && r.empty()) return RuleOutcome::Ok;

    // one residual side a single meta: solve it to the other side
    auto solveSingle = [&](std::vector<ExprPtr>& metaSide,
                           std::vector<ExprPtr>& other) -> RuleOutcome {
      if (metaSide.size() != 1 ||
          metaSide[0]->kind != Expr::Kind::Meta || hasMeta(other))
        return RuleOutcome::NotApplicable;
      ExprPtr rhs = rebuildWorld(s, ctx, other);
      return s.trySolvePattern(metaSide[0], rhs);
    };
    auto res = solveSingle(l, r);
    if (res != RuleOutcome::NotApplicable) return res;
    res = solveSingle(r, l);
    if (res != RuleOutcome::NotApplicable) return res;

    if (!hasMeta(l) && !hasMeta(r)) {
      s.error("worlds carry different resources: " +
              s.renderExpr(rebuildWorld(s, ctx, l)) + " vs " +
              s.renderExpr(rebuildWorld(s, ctx, r)));
      return RuleOutcome::Fail;
    }
    return RuleOutcome::NotApplicable;  // delay: metas on both sides
  }
};

// contraction variant: worlds compare as sets of resources
class IdempotentWorlds final : public EqualityRule {
public:
  std::string id() const override { return "linear.IdempotentWorlds"; }
  std::vector<std::string> headKeys() const override { return {kWorld}; }
  RuleOutcome equal(Solver& s, const Context& ctx, const ExprPtr& a,
                    const ExprPtr& b, const ExprPtr&) const override {
    auto l = worldAtoms(s, s.compute(ctx, a));
    auto r = worldAtoms(s, s.compute(ctx, b));
    if (hasMeta(l) || hasMeta(r)) return RuleOutcome::NotApplicable;
    auto dedup = [](std::vector<ExprPtr>& v) {
      std::vector<ExprPtr> out;
      for (const auto& e : v) {
        bool seen = std::any_of(out.begin(), out.end(), [&](const ExprPtr& o) {
          return alphaEqual(o, e);
        });
        if (!seen) out.push_back(e);
      }
      v = std::move(out);
    };
    dedup(l);
    dedup(r);
    cancelCommon(l, r);
    if (l.empty() && r.empty()) return RuleOutcome::Ok;
    return RuleOutcome::NotApplicable;
  }
};

}  // namespace

void registerRules(Registry& r) {
  r.add(std::make_shared<NormalizeWorlds>());
  r.add(std::make_shared<EquateWorlds>());
  r.add(std::make_shared<IdempotentWorlds>());
}

}  // namespace kmt::linear
