#include "kmt/packs/wtypes.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

#include "kmt/packs/lf.hpp"
#include "kmt/parser.hpp"
#include "kmt/session.hpp"
#include "kmt/solver.hpp"

namespace kmt::wtypes {

namespace {

constexpr const char* kEnum = "ENUM";
constexpr const char* kCase = "CASE";
constexpr const char* kMatch = "enumMatch";
constexpr const char* kW = "W";
constexpr const char* kSup = "sup";
constexpr const char* kRec = "rec";

ExprPtr numeral(int n) { return Expr::constant(std::to_string(n)); }

std::optional<int> asNumeral(const ExprPtr& e) {
  if (!e->isConstant() || !isNumeralName(e->name)) return std::nullopt;
  return std::stoi(e->name);
}

ExprPtr mkEnum(Solver& s, int n) {
  return s.mkSpine(Expr::constant(kEnum), {numeral(n)});
}

ExprPtr mkCase(Solver& s, int i) {
  return s.mkSpine(Expr::constant(kCase), {numeral(i)});
}

/// ENUM n with a literal arity, after normalization.
std::optional<int> asEnum(Solver& s, const Context& ctx, const ExprPtr& e) {
  auto [h, args] = s.spine(s.compute(ctx, e));
  if (!h->isConstant(kEnum) || args.size() != 1) return std::nullopt;
  return asNumeral(s.compute(ctx, args[0]));
}

std::optional<int> asCase(Solver& s, const Context& ctx, const ExprPtr& e) {
  auto [h, args] = s.spine(s.compute(ctx, e));
  if (!h->isConstant(kCase) || args.size() != 1) return std::nullopt;
  return asNumeral(s.compute(ctx, args[0]));
}

struct WParts {
  std::string var;
  ExprPtr domain;
  ExprPtr arity;
};

std::optional<WParts> asW(const ExprPtr& e) {
  if (e->kind != Expr::Kind::Complex || e->name != kW) return std::nullopt;
  if (e->bindings.size() != 1 || e->args.size() != 1) return std::nullopt;
  const auto& b = e->bindings.entries[0];
  return WParts{b.name, b.type, e->args[0]};
}

ExprPtr mkW(std::string var, ExprPtr domain, ExprPtr arity) {
  Context bs;
  bs.entries.push_back({std::move(var), std::move(domain), false});
  return Expr::complex(kW, std::move(bs), {std::move(arity)});
}

struct MatchParts {
  std::string motiveVar;
  ExprPtr scrutinee, annotation, motive;
  std::vector<ExprPtr> branches;
};

std::optional<MatchParts> asMatch(const ExprPtr& e) {
  if (e->kind != Expr::Kind::Complex || e->name != kMatch) return std::nullopt;
  if (e->bindings.size() != 1 || e->args.size() < 3) return std::nullopt;
  MatchParts m;
  m.motiveVar = e->bindings.entries[0].name;
  m.scrutinee = e->args[0];
  m.annotation = e->args[1];
  m.motive = e->args[2];
  m.branches.assign(e->args.begin() + 3, e->args.end());
  return m;
}

ExprPtr mkMatch(std::string motiveVar, ExprPtr scrutinee, ExprPtr annotation,
                ExprPtr motive, std::vector<ExprPtr> branches) {
  Context bs;
  bs.entries.push_back({std::move(motiveVar), nullptr, false});
  std::vector<ExprPtr> args{std::move(scrutinee), std::move(annotation),
                            std::move(motive)};
  for (auto& b : branches) args.push_back(std::move(b));
  return Expr::complex(kMatch, std::move(bs), std::move(args));
}

struct RecParts {
  std::string c, g, h;
  ExprPtr scrutinee, branch, motive;
};

std::optional<RecParts> asRec(const ExprPtr& e) {
  if (e->kind != Expr::Kind::Complex || e->name != kRec) return std::nullopt;
  if (e->bindings.size() != 3 || e->args.size() != 3) return std::nullopt;
  RecParts r;
  r.c = e->bindings.entries[0].name;
  r.g = e->bindings.entries[1].name;
  r.h = e->bindings.entries[2].name;
  r.scrutinee = e->args[0];
  r.branch = e->args[1];
  r.motive = e->args[2];
  return r;
}

ExprPtr mkRec(std::string c, std::string g, std::string h, ExprPtr scrutinee,
              ExprPtr branch, ExprPtr motive) {
  Context bs;
  bs.entries.push_back({std::move(c), nullptr, false});
  bs.entries.push_back({std::move(g), nullptr, false});
  bs.entries.push_back({std::move(h), nullptr, false});
  return Expr::complex(kRec, std::move(bs),
                       {std::move(scrutinee), std::move(branch),
                        std::move(motive)});
}

/// Substitute v := value into the types of the entries bound after v.
Context refineContext(const Context& ctx, const std::string& v,
                      const ExprPtr& value) {
  Context out;
  bool seen = false;
  for (const auto& e : ctx.entries) {
    ContextEntry ne = e;
    if (seen && ne.type) ne.type = substitute(ne.type, v, value);
    if (!e.condition && e.name == v) seen = true;
    out.entries.push_back(std::move(ne));
  }
  return out;
}

// CASE i checks against ENUM n when i < n; neutrals go through inference
class CheckCase final : public TypingRule {
public:
  std::string id() const override { return "wtypes.CheckCase"; }
  std::vector<std::string> headKeys() const override { return {kEnum}; }
  RuleOutcome check(Solver& s, const Context& ctx, const ExprPtr& t,
                    const ExprPtr& type) const override {
    auto n = asEnum(s, ctx, type);
    if (!n) return RuleOutcome::NotApplicable;
    auto i = asCase(s, ctx, t);
    if (!i) return RuleOutcome::NotApplicable;
    if (*i < *n) return RuleOutcome::Ok;
    s.error("constructor index " + std::to_string(*i) +
            " out of range for an enumeration of size " + std::to_string(*n));
    return RuleOutcome::Fail;
  }
};

class InferW final : public InferenceRule {
public:
  std::string id() const override { return "wtypes.InferW"; }
  std::vector<std::string> headKeys() const override { return {kW}; }
  RuleOutcome infer(Solver& s, const Context& ctx, const ExprPtr& t,
                    bool covered, ExprPtr& out) const override {
    auto w = asW(t);
    if (!w) return RuleOutcome::NotApplicable;
    if (!covered) {
      size_t mark = s.errorMark();
      auto dA = s.infer(ctx, w->domain, false);
      if (!dA) {
        if (!(s.lenient() && s.blockedOnMeta())) return RuleOutcome::Fail;
        s.rollbackErrors(mark);
      } else if (!s.equal(ctx, *dA, lf::typeExpr(), nullptr)) {
        s.error("W domain must be a type");
        return RuleOutcome::Fail;
      }
    }
    std::string x = pickFresh(ctx, w->var);
    Context inner = ctx.extended(x, w->domain);
    if (!lf::isTypeLike(s, inner,
                        substitute(w->arity, w->var, Expr::var(x))))
      return RuleOutcome::Fail;
    out = lf::typeExpr();
    return RuleOutcome::Ok;
  }
};

class InferSup final : public InferenceRule {
public:
  std::string id() const override { return "wtypes.InferSup"; }
  std::vector<std::string> headKeys() const override { return {kSup}; }
  RuleOutcome infer(Solver& s, const Context& ctx, const ExprPtr& t,
                    bool covered, ExprPtr& out) const override {
    auto [h, args] = s.spine(t);
    if (!h->isConstant(kSup) || args.size() != 3)
      return RuleOutcome::NotApplicable;
    const ExprPtr& a = args[0];
    const ExprPtr& f = args[1];
    const ExprPtr& wt = args[2];
    ExprPtr wtn = s.compute(ctx, wt);
    auto w = asW(wtn);
    if (!w) {
      s.error("sup target must be a W-type");
      return RuleOutcome::Fail;
    }
    if (!covered) {
      if (!s.check(ctx, a, w->domain)) return RuleOutcome::Fail;
      ExprPtr arityA = substitute(w->arity, w->var, a);
      if (!s.check(ctx, f, lf::mkArrow(arityA, wtn))) return RuleOutcome::Fail;
    }
    out = wtn;
    return RuleOutcome::Ok;
  }
};

class InferRec final : public InferenceRule {
public:
  std::string id() const override { return "wtypes.InferRec"; }
  std::vector<std::string> headKeys() const override { return {kRec}; }
  RuleOutcome infer(Solver& s, const Context& ctx, const ExprPtr& t,
                    bool covered, ExprPtr& out) const override {
    auto r = asRec(t);
    if (!r) return RuleOutcome::NotApplicable;
    auto tw = s.infer(ctx, r->scrutinee, covered);
    if (!tw) return RuleOutcome::Fail;
    ExprPtr twn = s.compute(ctx, *tw);
    auto w = asW(twn);
    if (!w) {
      if (twn->kind == Expr::Kind::Meta) {
        s.markBlocked();
        return RuleOutcome::Fail;
      }
      s.error("rec scrutinee must have a W-type, found " + s.renderExpr(twn));
      return RuleOutcome::Fail;
    }

    std::string c = pickFresh(ctx, r->c);
    ExprPtr motive = substitute(r->motive, r->c, Expr::var(c));
    if (!covered) {
      Context mctx = ctx.extended(c, twn);
      if (!lf::isTypeLike(s, mctx, motive)) return RuleOutcome::Fail;
    }

    if (!covered) {
      // branch context: c : A, g : B[x/c] -> W, h : {y : B[x/c]} C[c/g y]
      Context bctx = ctx.extended(c, w->domain);
      ExprPtr arityC = substitute(w->arity, w->var, Expr::var(c));
      std::string g = pickFresh(bctx, r->g);
      bctx = bctx.extended(g, lf::mkArrow(arityC, twn));
      std::string y = pickFresh(bctx, "y");
      ExprPtr hType = lf::mkPi(
          y, arityC,
          substitute(motive, c, lf::mkApply(Expr::var(g), Expr::var(y))));
      std::string h = pickFresh(bctx, r->h);
      bctx = bctx.extended(h, hType);
      ExprPtr branch = substituteAll(
          r->branch, {{r->c, Expr::var(c)},
                      {r->g, Expr::var(g)},
                      {r->h, Expr::var(h)}});
      ExprPtr supC = s.mkSpine(Expr::constant(kSup),
                               {Expr::var(c), Expr::var(g), twn});
      ExprPtr expected = substitute(motive, c, supC);
      if (!s.check(bctx, branch, expected)) return RuleOutcome::Fail;
    }

    out = substitute(motive, c, r->scrutinee);
    return RuleOutcome::Ok;
  }
};

// iota: rec over sup steps into the branch, with the recursive results
// packaged as a function over the arity
class ComputeRec final : public ComputationRule {
public:
  std::string id() const override { return "wtypes.ComputeRec"; }
  std::vector<std::string> headKeys() const override { return {kRec}; }
  RuleOutcome step(Solver& s, const Context& ctx, const ExprPtr& t,
                   ExprPtr& out) const override {
    auto r = asRec(t);
    if (!r) return RuleOutcome::NotApplicable;
    auto [sh, sargs] = s.spine(r->scrutinee);
    if (!sh->isConstant(kSup) || sargs.size() != 3)
      return RuleOutcome::NotApplicable;
    const ExprPtr& a = sargs[0];
    const ExprPtr& f = sargs[1];
    ExprPtr wtn = s.compute(ctx, sargs[2]);
    auto w = asW(wtn);
    if (!w) return RuleOutcome::NotApplicable;

    std::set<std::string> avoid = freeVars(f);
    std::string y = freshName("y", avoid);
    ExprPtr inner = mkRec(r->c, r->g, r->h,
                          lf::mkApply(f, Expr::var(y)), r->branch, r->motive);
    ExprPtr hThunk =
        lf::mkLambda(y, substitute(w->arity, w->var, a), inner);
    out = substituteAll(r->branch,
                        {{r->c, a}, {r->g, f}, {r->h, hThunk}});
    return RuleOutcome::Ok;
  }
};

class InferMatch final : public InferenceRule {
public:
  std::string id() const override { return "wtypes.InferMatch"; }
  std::vector<std::string> headKeys() const override { return {kMatch}; }
  RuleOutcome infer(Solver& s, const Context& ctx, const ExprPtr& t,
                    bool covered, ExprPtr& out) const override {
    auto m = asMatch(t);
    if (!m) return RuleOutcome::NotApplicable;
    auto n = asEnum(s, ctx, m->annotation);
    if (!n) {
      s.error("match annotation must be a literal enumeration type");
      return RuleOutcome::Fail;
    }
    if (static_cast<int>(m->branches.size()) != *n) {
      s.error("match over an enumeration of size " + std::to_string(*n) +
              " needs exactly that many branches, found " +
              std::to_string(m->branches.size()));
      return RuleOutcome::Fail;
    }
    if (!covered && !s.check(ctx, m->scrutinee, m->annotation))
      return RuleOutcome::Fail;

    std::string y = pickFresh(ctx, m->motiveVar);
    ExprPtr motive = substitute(m->motive, m->motiveVar, Expr::var(y));
    if (!covered) {
      Context mctx = ctx.extended(y, m->annotation);
      if (!lf::isTypeLike(s, mctx, motive)) return RuleOutcome::Fail;
      // each branch checks at the motive for its own case; a variable
      // scrutinee is refined in the branch context
      for (int i = 0; i < *n; ++i) {
        ExprPtr ci = mkCase(s, i);
        ExprPtr expected = substitute(motive, y, ci);
        ExprPtr branch = m->branches[static_cast<size_t>(i)];
        Context bctx = ctx;
        if (m->scrutinee->kind == Expr::Kind::Var) {
          const std::string& v = m->scrutinee->name;
          bctx = refineContext(ctx, v, ci);
          expected = substitute(expected, v, ci);
          branch = substitute(branch, v, ci);
        }
        branch = substitute(branch, m->motiveVar, ci);
        if (!s.check(bctx, branch, expected)) return RuleOutcome::Fail;
      }
    }
    out = substitute(motive, y, m->scrutinee);
    return RuleOutcome::Ok;
  }
};

class ComputeMatch final : public ComputationRule {
public:
  std::string id() const override { return "wtypes.ComputeMatch"; }
  std::vector<std::string> headKeys() const override { return {kMatch}; }
  RuleOutcome step(Solver& s, const Context& ctx, const ExprPtr& t,
                   ExprPtr& out) const override {
    auto m = asMatch(t);
    if (!m) return RuleOutcome::NotApplicable;
    auto i = asCase(s, ctx, m->scrutinee);
    if (!i || *i < 0 || *i >= static_cast<int>(m->branches.size()))
      return RuleOutcome::NotApplicable;
    out = substitute(m->branches[static_cast<size_t>(*i)], m->motiveVar,
                     m->scrutinee);
    return RuleOutcome::Ok;
  }
};

// ---------------------------------------------------------------------------
// structural features
// ---------------------------------------------------------------------------

struct CtorSig {
  std::string name;
  int arity;  // number of recursive arguments
  std::optional<Notation> notation;
};

/// The constructor type must be an arrow chain T -> ... -> T over the
/// inductive type itself.
int ctorArity(const ExprPtr& type, const std::string& typeName,
              const SourcePos& pos) {
  int arity = 0;
  ExprPtr cur = type;
  while (auto pi = lf::asPi(cur)) {
    if (!pi->domain || !pi->domain->isConstant(typeName))
      throw ParseError{
          "constructor arguments must be recursive occurrences of the "
          "inductive type",
          pos};
    arity++;
    cur = pi->body;
  }
  if (!cur->isConstant(typeName))
    throw ParseError{"constructor must produce the inductive type", pos};
  return arity;
}

/// f : ENUM arity -> T mapping the k-th slot to elems[k].
ExprPtr mkArityFun(Solver& s, int arity, const std::vector<ExprPtr>& elems,
                   const ExprPtr& target, const std::set<std::string>& avoid) {
  std::string y = freshName("y", avoid);
  std::string z = freshName("z", avoid);
  ExprPtr body = mkMatch(z, Expr::var(y), mkEnum(s, arity), target, elems);
  return lf::mkLambda(y, mkEnum(s, arity), body);
}

class InductFeature final : public StructuralFeature {
public:
  std::string id() const override { return "features.Induct"; }
  std::string keyword() const override { return "induct"; }

  std::vector<Declaration> elaborate(CheckSession& session, Theory& theory,
                                     const FeatureDecl& fd) const override {
    if (!fd.paramsSrc.empty() &&
        fd.paramsSrc.find_first_not_of(" \t") != std::string::npos)
      throw ParseError{"parameterized inductive types are not supported",
                       fd.pos};
    if (fd.body.empty())
      throw ParseError{"induct block needs a type declaration", fd.pos};

    // first declaration is the type, the rest are constructors
    Declaration typeDecl = parseDeclLine(fd.body[0].text, fd.body[0].pos);
    if (typeDecl.typeSrc.text != "type")
      throw ParseError{"the first declaration of an induct block must be "
                       "the type itself",
                       fd.body[0].pos};

    Scope scope = session.scope();
    Declaration synthetic;
    synthetic.name = typeDecl.name;
    synthetic.type = lf::typeExpr();
    synthetic.notation = typeDecl.notation;
    scope.constants[typeDecl.name] = &synthetic;

    std::vector<CtorSig> ctors;
    for (size_t i = 1; i < fd.body.size(); ++i) {
      Declaration c = parseDeclLine(fd.body[i].text, fd.body[i].pos);
      if (c.typeSrc.empty() || !c.definiensSrc.empty())
        throw ParseError{"constructors carry a type and nothing else",
                         fd.body[i].pos};
      ExprPtr ct = parseExpression(c.typeSrc.text, c.typeSrc.pos, scope,
                                   Context{}, nullptr);
      ctors.push_back(
          {c.name, ctorArity(ct, typeDecl.name, fd.body[i].pos), c.notation});
    }
    if (ctors.empty())
      throw ParseError{"induct block needs at least one constructor", fd.pos};

    SolverState st;
    Solver s(session, st, false);
    int k = static_cast<int>(ctors.size());

    std::vector<Declaration> out;

    // the type: a W-type over ENUM k whose arity function maps each case
    // to the enumeration of its recursive argument count
    std::string x = "x";
    std::string z = "z";
    std::vector<ExprPtr> arities;
    for (const auto& c : ctors) arities.push_back(mkEnum(s, c.arity));
    ExprPtr arityFun =
        mkMatch(z, Expr::var(x), mkEnum(s, k), lf::typeExpr(), arities);
    Declaration tdecl;
    tdecl.name = typeDecl.name;
    tdecl.pos = fd.pos;
    tdecl.type = lf::typeExpr();
    tdecl.definiens = mkW(x, mkEnum(s, k), arityFun);
    tdecl.notation = typeDecl.notation;
    out.push_back(tdecl);

    ExprPtr tconst = Expr::constant(typeDecl.name);
    InductiveInfo info;
    info.typeName = typeDecl.name;

    for (int i = 0; i < k; ++i) {
      const auto& c = ctors[static_cast<size_t>(i)];
      info.ctors.push_back({c.name, c.arity});

      std::vector<std::string> argNames;
      std::set<std::string> used;
      for (int a = 0; a < c.arity; ++a) {
        std::string nm = freshName("x" + std::to_string(a + 1), used);
        used.insert(nm);
        argNames.push_back(nm);
      }
      std::vector<ExprPtr> elems;
      for (const auto& nm : argNames) elems.push_back(Expr::var(nm));
      ExprPtr f = mkArityFun(s, c.arity, elems, tconst, used);
      ExprPtr body = s.mkSpine(Expr::constant(kSup), {mkCase(s, i), f, tconst});
      ExprPtr ty = tconst;
      for (int a = c.arity; a-- > 0;) {
        body = lf::mkLambda(argNames[static_cast<size_t>(a)], tconst, body);
        ty = lf::mkArrow(tconst, ty);
      }
      Declaration cd;
      cd.name = c.name;
      cd.pos = fd.pos;
      cd.type = ty;
      cd.definiens = body;
      cd.notation = c.notation;
      out.push_back(std::move(cd));
    }

    theory.inductives[typeDecl.name] = std::move(info);
    return out;
  }
};

/// Discards metas: clause binders are surface syntax, not reconstruction.
class DiscardSink final : public MetaSink {
public:
  ExprPtr makeMeta(const Context&, const std::string&) override {
    return Expr::meta("clause" + std::to_string(++n_), {});
  }

private:
  int n_ = 0;
};

class DefFeature final : public StructuralFeature {
public:
  std::string id() const override { return "features.Def"; }
  std::string keyword() const override { return "def"; }

  std::vector<Declaration> elaborate(CheckSession& session, Theory& theory,
                                     const FeatureDecl& fd) const override {
    if (fd.body.empty())
      throw ParseError{"def block needs a function declaration", fd.pos};

    SolverState st;
    Solver s(session, st, false);
    const Scope& baseScope = session.scope();

    // parameters (n : N), comma separated
    Context params;
    if (!fd.paramsSrc.empty()) {
      std::istringstream is(fd.paramsSrc);
      std::string group;
      while (std::getline(is, group, ',')) {
        auto colon = group.find(':');
        if (colon == std::string::npos)
          throw ParseError{"parameter needs a type: " + group, fd.pos};
        std::string pname = group.substr(0, colon);
        std::string ptype = group.substr(colon + 1);
        auto trim = [](std::string& str) {
          while (!str.empty() && std::isspace((unsigned char)str.front()))
            str.erase(str.begin());
          while (!str.empty() && std::isspace((unsigned char)str.back()))
            str.pop_back();
        };
        trim(pname);
        trim(ptype);
        ExprPtr pt =
            parseExpression(ptype, fd.pos, baseScope, params, nullptr);
        params = params.extended(pname, pt);
      }
    }

    Declaration fnDecl = parseDeclLine(fd.body[0].text, fd.body[0].pos);
    if (fnDecl.typeSrc.empty())
      throw ParseError{"def function needs a type", fd.body[0].pos};
    ExprPtr fnType = parseExpression(fnDecl.typeSrc.text, fnDecl.typeSrc.pos,
                                     baseScope, params, nullptr);
    auto pi = lf::asPi(fnType);
    if (!pi)
      throw ParseError{"def function must take the inductive argument first",
                       fd.body[0].pos};
    if (!pi->domain->isConstant() ||
        !theory.inductives.count(pi->domain->name))
      throw ParseError{"target is not a generated inductive type",
                       fd.body[0].pos};
    const InductiveInfo& info = theory.inductives.at(pi->domain->name);
    ExprPtr motive = pi->body;
    if (freeVars(motive).count(pi->var))
      throw ParseError{"def does not support motives depending on the "
                       "scrutinee",
                       fd.body[0].pos};

    // clauses, one per constructor
    std::map<std::string, std::pair<ExprPtr, SourcePos>> clauses;
    Scope clauseScope = baseScope;
    Declaration synthetic;
    synthetic.name = fnDecl.name;
    synthetic.type = fnType;
    clauseScope.constants[fnDecl.name] = &synthetic;
    for (size_t i = 1; i < fd.body.size(); ++i) {
      Declaration cl = parseDeclLine(fd.body[i].text, fd.body[i].pos);
      if (cl.definiensSrc.empty())
        throw ParseError{"clause needs a right-hand side", fd.body[i].pos};
      bool known = std::any_of(
          info.ctors.begin(), info.ctors.end(),
          [&](const InductiveInfo::Ctor& c) { return c.name == cl.name; });
      if (!known)
        throw ParseError{"unknown constructor in def clause: " + cl.name,
                         fd.body[i].pos};
      if (clauses.count(cl.name))
        throw ParseError{"duplicate clause for constructor " + cl.name,
                         fd.body[i].pos};
      DiscardSink sink;
      ExprPtr rhs = parseExpression(cl.definiensSrc.text, cl.definiensSrc.pos,
                                    clauseScope, params, &sink);
      clauses[cl.name] = {rhs, fd.body[i].pos};
    }
    for (const auto& c : info.ctors)
      if (!clauses.count(c.name))
        throw ParseError{"non-exhaustive def: missing clause for " + c.name,
                         fd.pos};

    // assemble rec branches
    std::set<std::string> avoid = params.names();
    avoid.insert(fnDecl.name);
    std::string scrut = freshName(pi->var.empty() ? "m" : pi->var, avoid);
    avoid.insert(scrut);
    std::string c = freshName("c", avoid);
    avoid.insert(c);
    std::string g = freshName("g", avoid);
    avoid.insert(g);
    std::string h = freshName("h", avoid);
    avoid.insert(h);
    std::string mv = freshName("v", avoid);

    std::vector<ExprPtr> branches;
    for (size_t ci = 0; ci < info.ctors.size(); ++ci) {
      const auto& ctor = info.ctors[ci];
      auto [rhs, cpos] = clauses.at(ctor.name);
      // strip the clause binders: one per recursive argument
      std::vector<std::string> vars;
      ExprPtr body = rhs;
      for (int a = 0; a < ctor.recursiveArity; ++a) {
        auto lam = lf::asLambda(body);
        if (!lam)
          throw ParseError{"clause for " + ctor.name + " must bind " +
                               std::to_string(ctor.recursiveArity) +
                               " argument(s)",
                           cpos};
        vars.push_back(lam->var);
        body = lam->body;
      }
      branches.push_back(translateClause(s, body, fnDecl.name, vars, g, h,
                                         static_cast<int>(ci), cpos));
    }

    ExprPtr recBranch = mkMatch(
        mv, Expr::var(c), mkEnum(s, static_cast<int>(info.ctors.size())),
        motive, branches);
    ExprPtr def = mkRec(c, g, h, Expr::var(scrut), recBranch, motive);
    def = lf::mkLambda(scrut, pi->domain, def);
    ExprPtr ty = fnType;
    for (size_t i = params.size(); i-- > 0;) {
      const auto& p = params.entries[i];
      def = lf::mkLambda(p.name, p.type, def);
      ty = lf::mkPi(p.name, p.type, ty);
    }

    Declaration d;
    d.name = fnDecl.name;
    d.pos = fd.pos;
    d.type = ty;
    d.definiens = def;
    d.notation = fnDecl.notation;
    return {d};
  }

private:
  /// Structural recursion: in the clause body, `f v_k` becomes `h (CASE k)`
  /// and a bare `v_k` becomes `g (CASE k)`.
  static ExprPtr translateClause(Solver& s, const ExprPtr& e,
                                 const std::string& fnName,
                                 const std::vector<std::string>& vars,
                                 const std::string& g, const std::string& h,
                                 int ctorIndex, const SourcePos& pos) {
    (void)ctorIndex;
    auto indexOf = [&](const std::string& v) -> int {
      for (size_t i = 0; i < vars.size(); ++i)
        if (vars[i] == v) return static_cast<int>(i);
      return -1;
    };
    std::function<ExprPtr(const ExprPtr&, std::set<std::string>)> go =
        [&](const ExprPtr& cur, std::set<std::string> shadowed) -> ExprPtr {
      switch (cur->kind) {
        case Expr::Kind::Var: {
          int i = shadowed.count(cur->name) ? -1 : indexOf(cur->name);
          if (i >= 0) return lf::mkApply(Expr::var(g), mkCase(s, i));
          return cur;
        }
        case Expr::Kind::Meta:
          return cur;
        case Expr::Kind::Complex: {
          // recursive call f v_k
          if (cur->name == lf::kApply && cur->args.size() == 2 &&
              cur->args[0]->isConstant(fnName) &&
              cur->args[1]->kind == Expr::Kind::Var &&
              !shadowed.count(cur->args[1]->name)) {
            int i = indexOf(cur->args[1]->name);
            if (i >= 0) return lf::mkApply(Expr::var(h), mkCase(s, i));
          }
          if (cur->isConstant(fnName))
            throw ParseError{
                "only structural recursion on a clause variable is allowed",
                pos};
          Context bs;
          std::set<std::string> inner = shadowed;
          for (const auto& b : cur->bindings.entries) {
            ContextEntry nb = b;
            if (nb.type) nb.type = go(nb.type, inner);
            if (!b.condition) inner.insert(b.name);
            bs.entries.push_back(std::move(nb));
          }
          std::vector<ExprPtr> args;
          for (const auto& a : cur->args) args.push_back(go(a, inner));
          return Expr::complex(cur->name, std::move(bs), std::move(args));
        }
      }
      return cur;
    };
    return go(e, {});
  }
};

}  // namespace

void registerRules(Registry& r) {
  r.add(std::make_shared<CheckCase>());
  r.add(std::make_shared<InferW>());
  r.add(std::make_shared<InferSup>());
  r.add(std::make_shared<InferRec>());
  r.add(std::make_shared<ComputeRec>());
  r.add(std::make_shared<InferMatch>());
  r.add(std::make_shared<ComputeMatch>());
  r.add(std::make_shared<InductFeature>());
  r.add(std::make_shared<DefFeature>());
}

std::string preludeLFW() {
  return R"(theory LFW =
  include LF
  num : type
  ENUM : num → type
  CASE # CASE 1
  enumMatch
  W # W V1 . 1
  sup # sup 1 , 2 to 3
  rec
  rule wtypes.CheckCase
  rule wtypes.InferW
  rule wtypes.InferSup
  rule wtypes.InferRec
  rule wtypes.ComputeRec
  rule wtypes.InferMatch
  rule wtypes.ComputeMatch
  rule features.Induct
  rule features.Def
  UNIT : type = ENUM 1
  star : UNIT = CASE 0
  EMPTY : type = ENUM 0
end
)";
}

}  // namespace kmt::wtypes
