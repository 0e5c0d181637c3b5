#include "kmt/solver.hpp"

#include <algorithm>
#include <cassert>
#include <sstream>

#include "kmt/printer.hpp"
#include "kmt/session.hpp"

namespace kmt {

std::string Diagnostic::render() const {
  std::ostringstream os;
  os << pos.str() << ": error: " << message;
  for (const auto& t : trace) os << "\n  " << t;
  return os.str();
}

bool SolverState::hasUnsolvedMetas() const {
  for (const auto& [n, m] : metas)
    if (!m.solution) {
      (void)n;
      return true;
    }
  return false;
}

std::vector<std::string> SolverState::unsolvedMetas() const {
  std::vector<std::string> out;
  for (const auto& [n, m] : metas)
    if (!m.solution) out.push_back(n);
  return out;
}

void RuleTable::add(const RulePtr& rule) {
  all.push_back(rule);
  switch (rule->kind()) {
    case RuleKind::Solution:
      solutions.push_back(rule);
      break;
    case RuleKind::ExternalCondition:
      for (const auto& h : rule->headKeys()) external[h].push_back(rule);
      break;
    case RuleKind::ChangeListener:
      listeners.push_back(rule);
      break;
    case RuleKind::StructuralFeature: {
      auto f = std::static_pointer_cast<const StructuralFeature>(rule);
      features[f->keyword()] = rule;
      break;
    }
    default:
      for (const auto& h : rule->headKeys()) byHead[rule->kind()][h].push_back(rule);
      break;
  }
}

const std::vector<RulePtr>* RuleTable::lookup(RuleKind kind,
                                              const std::string& head) const {
  auto k = byHead.find(kind);
  if (k == byHead.end()) return nullptr;
  auto h = k->second.find(head);
  if (h == k->second.end()) return nullptr;
  return &h->second;
}

bool RuleTable::contains(const std::string& id) const {
  return std::any_of(all.begin(), all.end(),
                     [&](const RulePtr& r) { return r->id() == id; });
}

Solver::Solver(CheckSession& session, SolverState& state, bool lenient)
    : session_(session), state_(state), lenient_(lenient) {
  state_.fuelLimit = session.options().fuel;
}

Solver::Frame::Frame(Solver& s, std::string description) : solver_(s) {
  solver_.state_.frames.push_back(std::move(description));
}

Solver::Frame::~Frame() { solver_.state_.frames.pop_back(); }

void Solver::error(const std::string& message) {
  Diagnostic d;
  d.message = message;
  d.pos = state_.declPos;
  d.trace = state_.frames;
  state_.errors.push_back(std::move(d));
}

void Solver::rollbackErrors(size_t mark) {
  if (state_.errors.size() > mark) state_.errors.resize(mark);
}

bool Solver::spendFuel() {
  if (state_.fuelUsed >= state_.fuelLimit) {
    if (!state_.fuelExhausted) {
      state_.fuelExhausted = true;
      error("computation step budget exceeded (" +
            std::to_string(state_.fuelLimit) +
            " head rewrites); possible non-terminating rewrite system");
    }
    return false;
  }
  state_.fuelUsed++;
  return true;
}

void Solver::resetFuel() {
  state_.fuelUsed = 0;
  state_.fuelExhausted = false;
}

const Declaration* Solver::lookupConstant(const std::string& name) const {
  return session_.lookupConstant(name);
}

bool Solver::isApplicationConstant(const std::string& name) const {
  return session_.isApplicationConstant(name);
}

bool Solver::ruleVisible(const std::string& id) const {
  return session_.ruleTable().contains(id);
}

const RuleTable& Solver::rules() const { return session_.ruleTable(); }

std::string Solver::renderExpr(const ExprPtr& e) const {
  return printExpression(instantiate(e), session_.scope());
}

std::optional<std::string> Solver::headConstant(const ExprPtr& e) const {
  const Expr* cur = e.get();
  while (cur->kind == Expr::Kind::Complex &&
         isApplicationConstant(cur->name) && !cur->args.empty()) {
    cur = cur->args.front().get();
  }
  if (cur->kind == Expr::Kind::Complex) return cur->name;
  return std::nullopt;
}

std::pair<ExprPtr, std::vector<ExprPtr>> Solver::spine(const ExprPtr& e) const {
  if (e->kind == Expr::Kind::Complex && isApplicationConstant(e->name) &&
      e->args.size() == 2) {
    auto [h, as] = spine(e->args[0]);
    as.push_back(e->args[1]);
    return {h, as};
  }
  return {e, {}};
}

ExprPtr Solver::mkSpine(const ExprPtr& head,
                        const std::vector<ExprPtr>& args) const {
  ExprPtr cur = head;
  const std::string& app = session_.scope().applicationConstant;
  for (const auto& a : args) cur = Expr::complex(app, Context{}, {cur, a});
  return cur;
}

std::vector<std::string> Solver::dispatchKeys(const ExprPtr& e) const {
  std::vector<std::string> keys;
  if (e->kind != Expr::Kind::Complex) return keys;
  auto sp = headConstant(e);
  if (sp && *sp != e->name) keys.push_back(*sp);
  keys.push_back(e->name);
  return keys;
}

// --- meta store ---

ExprPtr Solver::newMeta(const Context& ctx, const std::string& hint) {
  std::string name = hint + std::to_string(++state_.metaCounter);
  MetaInfo info;
  info.order = state_.metaCounter;
  std::vector<ExprPtr> args;
  for (const auto& e : ctx.entries) {
    if (e.condition) continue;
    info.params.push_back(e.name);
    args.push_back(Expr::var(e.name));
  }
  state_.metas[name] = std::move(info);
  return Expr::meta(name, std::move(args));
}

const MetaInfo* Solver::metaInfo(const std::string& name) const {
  auto it = state_.metas.find(name);
  return it == state_.metas.end() ? nullptr : &it->second;
}

bool Solver::isSolved(const std::string& name) const {
  auto* m = metaInfo(name);
  return m && m->solution != nullptr;
}

bool Solver::solveMeta(const std::string& name, const ExprPtr& body) {
  auto it = state_.metas.find(name);
  if (it == state_.metas.end()) {
    error("solution for unknown meta-variable ?" + name);
    return false;
  }
  if (it->second.solution) {
    // no backtracking over committed solutions
    if (alphaEqual(it->second.solution, body)) return true;
    error("conflicting re-solution of meta-variable ?" + name);
    return false;
  }
  it->second.solution = body;
  return true;
}

ExprPtr Solver::instantiate(const ExprPtr& e) const {
  switch (e->kind) {
    case Expr::Kind::Var:
      return e;
    case Expr::Kind::Meta: {
      std::vector<ExprPtr> args;
      args.reserve(e->args.size());
      for (const auto& a : e->args) args.push_back(instantiate(a));
      auto* m = metaInfo(e->name);
      if (m && m->solution) {
        std::map<std::string, ExprPtr> sub;
        for (size_t i = 0; i < m->params.size() && i < args.size(); ++i)
          sub[m->params[i]] = args[i];
        return instantiate(substituteAll(m->solution, sub));
      }
      return Expr::meta(e->name, std::move(args));
    }
    case Expr::Kind::Complex: {
      Context bs;
      for (const auto& b : e->bindings.entries) {
        ContextEntry nb = b;
        if (nb.type) nb.type = instantiate(nb.type);
        bs.entries.push_back(std::move(nb));
      }
      std::vector<ExprPtr> args;
      args.reserve(e->args.size());
      for (const auto& a : e->args) args.push_back(instantiate(a));
      return Expr::complex(e->name, std::move(bs), std::move(args));
    }
  }
  return e;
}

RuleOutcome Solver::trySolvePattern(const ExprPtr& metaSide, const ExprPtr& rhs) {
  if (metaSide->kind != Expr::Kind::Meta) return RuleOutcome::NotApplicable;
  auto* m = metaInfo(metaSide->name);
  if (!m) return RuleOutcome::NotApplicable;
  if (m->solution) return RuleOutcome::NotApplicable;

  // arguments must be pairwise distinct variables
  std::vector<std::string> argNames;
  std::set<std::string> seen;
  for (const auto& a : metaSide->args) {
    if (a->kind != Expr::Kind::Var) return RuleOutcome::NotApplicable;
    if (!seen.insert(a->name).second) return RuleOutcome::NotApplicable;
    argNames.push_back(a->name);
  }

  ExprPtr t = instantiate(rhs);

  // occurs check, strict (no pruning)
  if (metaNames(t).count(metaSide->name)) {
    error("occurs check failed: ?" + metaSide->name + " occurs in its own solution");
    return RuleOutcome::Fail;
  }

  // free variables of the solution must be covered by the meta's arguments
  std::set<std::string> allowed(argNames.begin(), argNames.end());
  for (const auto& fv : freeVars(t))
    if (!allowed.count(fv) && !lookupConstant(fv)) return RuleOutcome::NotApplicable;

  // rename arguments to the meta's canonical parameters
  std::map<std::string, ExprPtr> ren;
  for (size_t i = 0; i < argNames.size() && i < m->params.size(); ++i)
    ren[argNames[i]] = Expr::var(m->params[i]);
  ExprPtr body = substituteAll(t, ren);
  if (!solveMeta(metaSide->name, body)) return RuleOutcome::Fail;
  return RuleOutcome::Ok;
}

// --- compute ---

ExprPtr Solver::compute(const Context& ctx, const ExprPtr& t) {
  Frame f(*this, "compute: " + rawString(t));
  return computeRec(ctx, t, 0);
}

ExprPtr Solver::computeRec(const Context& ctx, const ExprPtr& e, int depth) {
  if (depth > 512) {
    error("expression too deep during computation");
    return e;
  }
  switch (e->kind) {
    case Expr::Kind::Var:
      return e;
    case Expr::Kind::Meta: {
      if (isSolved(e->name)) return computeRec(ctx, instantiate(e), depth + 1);
      std::vector<ExprPtr> args;
      args.reserve(e->args.size());
      for (const auto& a : e->args) args.push_back(computeRec(ctx, a, depth + 1));
      return Expr::meta(e->name, std::move(args));
    }
    case Expr::Kind::Complex:
      break;
  }

  // innermost first: normalize children, then rewrite at the head until no
  // visible computation rule applies
  ExprPtr cur = e;
  for (;;) {
    Context bs;
    Context inner = ctx;
    bool childChanged = false;
    for (const auto& b : cur->bindings.entries) {
      ContextEntry nb = b;
      if (nb.type) {
        nb.type = computeRec(inner, nb.type, depth + 1);
        if (nb.type != b.type) childChanged = true;
      }
      bs.entries.push_back(nb);
      if (!b.condition)
        inner = inner.extended(nb.name, nb.type);
      else
        inner = inner.extendedCondition(nb.type);
    }
    std::vector<ExprPtr> args;
    args.reserve(cur->args.size());
    for (const auto& a : cur->args) {
      auto na = computeRec(inner, a, depth + 1);
      if (na != a) childChanged = true;
      args.push_back(std::move(na));
    }
    if (childChanged)
      cur = Expr::complex(cur->name, std::move(bs), std::move(args));

    // definition expansion for bare constants
    if (cur->isConstant()) {
      const auto* d = lookupConstant(cur->name);
      if (d && d->definiens) {
        if (!spendFuel()) return cur;
        cur = d->definiens;
        continue;
      }
    }

    bool stepped = false;
    if (!state_.fuelExhausted) {
      for (const auto& key : dispatchKeys(cur)) {
        const auto* rs = rules().lookup(RuleKind::Computation, key);
        if (!rs) continue;
        for (const auto& r : *rs) {
          ExprPtr out;
          auto outcome = std::static_pointer_cast<const ComputationRule>(r)->step(
              *this, ctx, cur, out);
          if (outcome == RuleOutcome::Ok) {
            state_.firedRules.push_back(r->id());
            if (!spendFuel()) return cur;
            cur = out;
            stepped = true;
            break;
          }
          if (outcome == RuleOutcome::Fail) return cur;
        }
        if (stepped) break;
      }
    }
    if (!stepped) return cur;
  }
}

// --- infer ---

std::optional<ExprPtr> Solver::infer(const Context& ctx, const ExprPtr& t,
                                     bool covered) {
  Frame f(*this, "infer: " + rawString(t));
  switch (t->kind) {
    case Expr::Kind::Var: {
      const auto* e = ctx.lookup(t->name);
      if (!e) {
        error("unbound variable " + t->name);
        return std::nullopt;
      }
      if (!e->type) {
        error("variable " + t->name + " has no type");
        return std::nullopt;
      }
      return instantiate(e->type);
    }
    case Expr::Kind::Meta: {
      if (isSolved(t->name)) return infer(ctx, instantiate(t), covered);
      const auto* m = metaInfo(t->name);
      if (m && m->expectedType) {
        std::map<std::string, ExprPtr> sub;
        for (size_t i = 0; i < m->params.size() && i < t->args.size(); ++i)
          sub[m->params[i]] = t->args[i];
        return substituteAll(m->expectedType, sub);
      }
      blockedOnMeta_ = true;
      return std::nullopt;
    }
    case Expr::Kind::Complex:
      break;
  }

  // built-in lookup rule: declared constants
  if (t->isConstant()) {
    const auto* d = lookupConstant(t->name);
    if (d && d->type) return d->type;
  }

  bool anyFail = false;
  for (const auto& key : dispatchKeys(t)) {
    const auto* rs = rules().lookup(RuleKind::Inference, key);
    if (!rs) continue;
    for (const auto& r : *rs) {
      size_t mark = errorMark();
      ExprPtr out;
      auto outcome = std::static_pointer_cast<const InferenceRule>(r)->infer(
          *this, ctx, t, covered, out);
      if (outcome == RuleOutcome::Ok) {
        rollbackErrors(mark);
        state_.firedRules.push_back(r->id());
        return out;
      }
      if (outcome == RuleOutcome::Fail) anyFail = true;
    }
  }
  if (anyFail) return std::nullopt;

  if (t->isConstant()) {
    const auto* d = lookupConstant(t->name);
    if (d && d->definiens) return infer(ctx, d->definiens, covered);
    if (d) {
      error("constant " + t->name + " has no type to infer");
      return std::nullopt;
    }
    error("unknown constant " + t->name);
    return std::nullopt;
  }
  error("no rule applies to infer a type for " + renderExpr(t));
  return std::nullopt;
}

// --- check ---

bool Solver::check(const Context& ctx, const ExprPtr& t, const ExprPtr& type) {
  Frame f(*this, "check: " + rawString(t) + " <= " + rawString(type));

  if (t->kind == Expr::Kind::Meta) {
    if (isSolved(t->name)) return check(ctx, instantiate(t), type);
    auto it = state_.metas.find(t->name);
    if (it != state_.metas.end() && !it->second.expectedType) {
      // record the expected type when the meta is applied to exactly its
      // own parameters (creation-site shape)
      bool creationShape = it->second.params.size() == t->args.size();
      for (size_t i = 0; creationShape && i < t->args.size(); ++i)
        creationShape = t->args[i]->kind == Expr::Kind::Var &&
                        t->args[i]->name == it->second.params[i];
      if (creationShape) it->second.expectedType = instantiate(type);
    }
    if (lenient_) {
      delay({Judgment::Kind::Check, ctx, t, nullptr, type});
      return true;
    }
    error("unresolved meta-variable ?" + t->name);
    return false;
  }

  ExprPtr tn = compute(ctx, type);
  bool anyFail = false;
  // variables check by comparing their context type with the expectation;
  // dispatching them to typing rules would only re-derive that equality
  bool dispatchRules = t->kind != Expr::Kind::Var;
  for (const auto& key : dispatchRules ? dispatchKeys(tn) : std::vector<std::string>{}) {
    const auto* rs = rules().lookup(RuleKind::Typing, key);
    if (!rs) continue;
    for (const auto& r : *rs) {
      size_t mark = errorMark();
      auto outcome = std::static_pointer_cast<const TypingRule>(r)->check(
          *this, ctx, t, tn);
      if (outcome == RuleOutcome::Ok) {
        rollbackErrors(mark);
        state_.firedRules.push_back(r->id());
        return true;
      }
      if (outcome == RuleOutcome::Fail) anyFail = true;
    }
  }
  if (anyFail) return false;

  blockedOnMeta_ = false;
  auto inferred = infer(ctx, t, false);
  if (!inferred) {
    if (blockedOnMeta_ && lenient_) {
      delay({Judgment::Kind::Check, ctx, t, nullptr, type});
      return true;
    }
    return false;
  }
  if (equal(ctx, *inferred, tn, nullptr)) return true;
  error("type mismatch: inferred " + renderExpr(*inferred) + " but expected " +
        renderExpr(tn));
  return false;
}

// --- equal ---

bool Solver::equal(const Context& ctx, const ExprPtr& a0, const ExprPtr& b0,
                   const ExprPtr& type) {
  ExprPtr a = instantiate(a0);
  ExprPtr b = instantiate(b0);
  Frame f(*this, "equal: " + rawString(a) + " == " + rawString(b) +
                     (type ? " : " + rawString(type) : ""));

  if (alphaEqual(a, b)) return true;

  // type-directed rules
  if (type) {
    ExprPtr tn = compute(ctx, type);
    for (const auto& key : dispatchKeys(tn)) {
      const auto* rs = rules().lookup(RuleKind::Equality, key);
      if (!rs) continue;
      for (const auto& r : *rs) {
        size_t mark = errorMark();
        auto outcome = std::static_pointer_cast<const EqualityRule>(r)->equal(
            *this, ctx, a, b, tn);
        if (outcome == RuleOutcome::Ok) {
          rollbackErrors(mark);
          state_.firedRules.push_back(r->id());
          return true;
        }
        if (outcome == RuleOutcome::Fail) return false;
      }
    }
  }

  // meta-variable routes through solution rules; after instantiation a
  // meta-headed side is always unsolved
  auto metaHeaded = [&](const ExprPtr& x) {
    if (x->kind == Expr::Kind::Meta) return true;
    auto [h, as] = spine(x);
    return !as.empty() && h->kind == Expr::Kind::Meta;
  };
  auto trySolutions = [&](const ExprPtr& x, const ExprPtr& y) -> std::optional<bool> {
    if (!metaHeaded(x)) return std::nullopt;
    for (const auto& r : rules().solutions) {
      auto outcome = std::static_pointer_cast<const SolutionRule>(r)->solve(
          *this, ctx, x, y, type);
      if (outcome == RuleOutcome::Ok) {
        state_.firedRules.push_back(r->id());
        return true;
      }
      if (outcome == RuleOutcome::Fail) return false;
    }
    return std::nullopt;
  };
  if (auto r = trySolutions(a, b)) return *r;
  if (auto r = trySolutions(b, a)) return *r;

  // compare computation normal forms
  ExprPtr an = compute(ctx, a);
  ExprPtr bn = compute(ctx, b);
  if (alphaEqual(an, bn)) return true;
  if (auto r = trySolutions(an, bn)) return *r;
  if (auto r = trySolutions(bn, an)) return *r;

  if (equalCongruent(ctx, an, bn)) return true;

  // recover a type to dispatch equality rules when none was given
  if (!type) {
    ExprPtr inferFrom;
    if (metaNames(an).empty())
      inferFrom = an;
    else if (metaNames(bn).empty())
      inferFrom = bn;
    if (inferFrom) {
      size_t mark = errorMark();
      auto ty = infer(ctx, inferFrom, true);
      rollbackErrors(mark);
      if (ty) {
        ExprPtr tn = compute(ctx, *ty);
        for (const auto& key : dispatchKeys(tn)) {
          const auto* rs = rules().lookup(RuleKind::Equality, key);
          if (!rs) continue;
          for (const auto& r : *rs) {
            size_t mark = errorMark();
            auto outcome =
                std::static_pointer_cast<const EqualityRule>(r)->equal(
                    *this, ctx, an, bn, tn);
            if (outcome == RuleOutcome::Ok) {
              rollbackErrors(mark);
              state_.firedRules.push_back(r->id());
              return true;
            }
            if (outcome == RuleOutcome::Fail) return false;
          }
        }
      }
    }
  }

  if (lenient_ && (!metaNames(an).empty() || !metaNames(bn).empty())) {
    delay({Judgment::Kind::Equal, ctx, an, bn, type});
    return true;
  }
  return false;
}

bool Solver::equalCongruent(const Context& ctx, const ExprPtr& a,
                            const ExprPtr& b) {
  if (a->kind != b->kind) return false;
  if (a->kind == Expr::Kind::Var) return a->name == b->name;
  if (a->kind == Expr::Kind::Meta) {
    if (a->name != b->name || a->args.size() != b->args.size()) return false;
    for (size_t i = 0; i < a->args.size(); ++i)
      if (!equal(ctx, a->args[i], b->args[i], nullptr)) return false;
    return true;
  }

  // spine decomposition: same head, pairwise-equal arguments; each
  // sub-equality recovers its own type for rule dispatch
  auto [ha, argsA] = spine(a);
  auto [hb, argsB] = spine(b);
  if (!argsA.empty() || !argsB.empty()) {
    if (argsA.size() != argsB.size()) return false;
    if (ha->kind == Expr::Kind::Meta || hb->kind == Expr::Kind::Meta)
      return false;
    if (!alphaEqual(ha, hb)) return false;
    for (size_t i = 0; i < argsA.size(); ++i)
      if (!equal(ctx, argsA[i], argsB[i], nullptr)) return false;
    return true;
  }

  // plain congruence on complex nodes with binders
  if (a->name != b->name) return false;
  if (a->bindings.size() != b->bindings.size()) return false;
  if (a->args.size() != b->args.size()) return false;
  Context inner = ctx;
  std::map<std::string, ExprPtr> subA, subB;
  for (size_t i = 0; i < a->bindings.size(); ++i) {
    const auto& ea = a->bindings.entries[i];
    const auto& eb = b->bindings.entries[i];
    if (ea.condition != eb.condition) return false;
    ExprPtr ta = ea.type ? substituteAll(ea.type, subA) : nullptr;
    ExprPtr tb = eb.type ? substituteAll(eb.type, subB) : nullptr;
    // an omitted annotation (solution lambdas) matches any annotation
    if (ta && tb && !equal(inner, ta, tb, nullptr)) return false;
    if (ea.condition) {
      inner = inner.extendedCondition(ta);
      continue;
    }
    std::string fresh = freshName(ea.name, inner.names());
    subA[ea.name] = Expr::var(fresh);
    subB[eb.name] = Expr::var(fresh);
    inner = inner.extended(fresh, ta ? ta : tb);
  }
  for (size_t i = 0; i < a->args.size(); ++i) {
    ExprPtr xa = substituteAll(a->args[i], subA);
    ExprPtr xb = substituteAll(b->args[i], subB);
    if (!equal(inner, xa, xb, nullptr)) return false;
  }
  return true;
}

// --- inhabitable ---

bool Solver::inhabitable(const Context& ctx, const ExprPtr& type) {
  Frame f(*this, "inhabitable: " + rawString(type));
  if (inhDepth_ > 8) {
    error("inhabitability recursion too deep");
    return false;
  }
  ExprPtr t = instantiate(type);
  if (t->kind == Expr::Kind::Meta) {
    if (lenient_) {
      delay({Judgment::Kind::Inhabitable, ctx, t, nullptr, nullptr});
      return true;
    }
    error("unresolved meta-variable in declaration type");
    return false;
  }

  bool anyFail = false;
  for (const auto& key : dispatchKeys(t)) {
    const auto* rs = rules().lookup(RuleKind::Inhabitable, key);
    if (!rs) continue;
    for (const auto& r : *rs) {
      size_t mark = errorMark();
      auto outcome =
          std::static_pointer_cast<const InhabitableRule>(r)->inhabitable(
              *this, ctx, t);
      if (outcome == RuleOutcome::Ok) {
        rollbackErrors(mark);
        state_.firedRules.push_back(r->id());
        return true;
      }
      if (outcome == RuleOutcome::Fail) anyFail = true;
    }
    if (anyFail) {
      error("type is not inhabitable: " + renderExpr(t));
      return false;
    }
  }

  // fall through: the type of T must itself be an inhabitable universe
  blockedOnMeta_ = false;
  auto u = infer(ctx, t, false);
  if (!u) {
    if (blockedOnMeta_ && lenient_) {
      delay({Judgment::Kind::Inhabitable, ctx, t, nullptr, nullptr});
      return true;
    }
    error("type is not inhabitable: " + renderExpr(t));
    return false;
  }
  inhDepth_++;
  bool ok = inhabitable(ctx, compute(ctx, *u));
  inhDepth_--;
  if (!ok) error("type is not inhabitable: " + renderExpr(t));
  return ok;
}

// --- delayed constraints ---

void Solver::delay(Judgment j) { state_.delayed.push_back(std::move(j)); }

bool Solver::rerun(const Judgment& j) {
  switch (j.kind) {
    case Judgment::Kind::Check:
      return check(j.ctx, j.a, j.type);
    case Judgment::Kind::Equal:
      return equal(j.ctx, j.a, j.b, j.type);
    case Judgment::Kind::Inhabitable:
      return inhabitable(j.ctx, j.a);
    case Judgment::Kind::Infer: {
      auto r = infer(j.ctx, j.a, false);
      return r.has_value();
    }
    case Judgment::Kind::Compute:
      compute(j.ctx, j.a);
      return true;
  }
  return false;
}

namespace {
size_t countSolved(const SolverState& st) {
  size_t n = 0;
  for (const auto& [k, m] : st.metas) {
    (void)k;
    if (m.solution) n++;
  }
  return n;
}
}  // namespace

bool Solver::delayAndResume() {
  // FIFO fixpoint: constraints re-run whenever re-running makes progress
  // (a constraint decided, or a meta got solved)
  for (int round = 0; round < 1000; ++round) {
    size_t solvedBefore = countSolved(state_);
    size_t queueBefore = state_.delayed.size();
    std::deque<Judgment> work;
    work.swap(state_.delayed);
    bool decidedAny = false;
    while (!work.empty()) {
      Judgment j = std::move(work.front());
      work.pop_front();
      size_t before = state_.delayed.size();
      resetFuel();
      bool ok = rerun(j);
      if (!ok) {
        if (j.kind == Judgment::Kind::Equal)
          error("delayed constraint failed: " + renderExpr(j.a) +
                " == " + renderExpr(j.b));
        return false;
      }
      if (state_.delayed.size() == before) decidedAny = true;
    }
    bool progress = decidedAny || countSolved(state_) != solvedBefore ||
                    state_.delayed.size() != queueBefore;
    if (state_.delayed.empty()) return true;
    if (!progress) break;
  }
  // residual constraints: when all metas are solved the strict pass will
  // re-derive them; with unsolved metas reconstruction is incomplete
  return finishDelayed(false);
}

bool Solver::finishDelayed(bool) {
  if (!state_.hasUnsolvedMetas()) return true;
  std::string names;
  for (const auto& n : state_.unsolvedMetas()) {
    if (!names.empty()) names += ", ";
    names += "?" + n;
  }
  error("reconstruction incomplete: unsolved meta-variables " + names);
  return false;
}

}  // namespace kmt
