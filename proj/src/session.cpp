#include "kmt/session.hpp"

#include <algorithm>

#include "kmt/printer.hpp"

namespace kmt {

namespace {

class SolverSink : public MetaSink {
public:
  explicit SolverSink(Solver& s) : solver_(s) {}
  ExprPtr makeMeta(const Context& locals, const std::string& hint) override {
    return solver_.newMeta(locals, hint);
  }

private:
  Solver& solver_;
};

}  // namespace

bool TheoryReport::ok() const {
  return std::all_of(decls.begin(), decls.end(),
                     [](const DeclReport& d) { return d.ok; });
}

CheckSession::CheckSession(TheoryGraph& graph, const std::string& theoryName,
                           CheckOptions opts)
    : graph_(graph), theory_(graph.find(theoryName)), opts_(opts) {
  if (!theory_) throw TheoryError{"unknown theory: " + theoryName, {}};
}

void CheckSession::rebuildVisibility() {
  visible_.clear();
  table_ = RuleTable{};
  std::vector<const Declaration*> ordered;
  for (const auto& fi : graph_.flattenPrefix(theory_->name, position_)) {
    if (const auto* d = std::get_if<Declaration>(fi.item)) {
      visible_[d->name] = d;
      ordered.push_back(d);
    } else if (const auto* rr = std::get_if<RuleRef>(fi.item)) {
      auto rule = graph_.resolveRule(rr->id);
      if (rule) table_.add(rule);
    } else if (const auto* ro = std::get_if<RuleObj>(fi.item)) {
      table_.add(ro->rule);
    }
  }
  scope_ = buildScope(ordered);
}

const Declaration* CheckSession::lookupConstant(const std::string& name) const {
  auto it = visible_.find(name);
  if (it != visible_.end()) return it->second;
  if (isNumeralName(name) && visible_.count("num")) {
    auto nit = numerals_.find(name);
    if (nit == numerals_.end()) {
      Declaration d;
      d.name = name;
      d.type = Expr::constant("num");
      d.generated = true;
      nit = numerals_.emplace(name, std::move(d)).first;
    }
    return &nit->second;
  }
  return nullptr;
}

bool CheckSession::isApplicationConstant(const std::string& name) const {
  return !name.empty() && name == scope_.applicationConstant;
}

ExprPtr CheckSession::parseExpr(const ExprSource& src, const Context& locals,
                                MetaSink* sink) {
  return parseExpression(src.text, src.pos, scope_, locals, sink);
}

void CheckSession::insertAfterCurrent(TheoryItem item) {
  insertOffset_++;
  theory_->body.insert(theory_->body.begin() + position_ + insertOffset_,
                       std::move(item));
}

std::optional<std::string> CheckSession::fireListeners(const Declaration& decl,
                                                       size_t index) {
  for (const auto& l : table_.listeners) {
    try {
      std::static_pointer_cast<const ChangeListener>(l)->declarationChecked(
          *this, *theory_, decl, index);
    } catch (const TheoryError& e) {
      return e.pos.str() + ": error: " + e.message;
    }
  }
  return std::nullopt;
}

DeclReport CheckSession::checkDeclaration(Declaration& decl) {
  DeclReport rep;
  rep.theory = theory_->name;
  rep.name = decl.name;
  rep.pos = decl.pos;

  if (visible_.count(decl.name)) {
    rep.message = decl.pos.str() + ": error: duplicate declaration name " +
                  decl.name;
    return rep;
  }

  SolverState st;
  st.declPos = decl.pos;
  Solver solver(*this, st, /*lenient=*/true);
  SolverSink sink(solver);

  auto failFrom = [&](SolverState& s, DeclReport& r) {
    if (!s.errors.empty()) {
      r.message = s.errors.front().render();
      r.trace = s.errors.front().trace;
    } else {
      r.message = decl.pos.str() + ": error: checking failed";
    }
  };

  // parse sources against the current scope
  try {
    if (!decl.typeSrc.empty() && !decl.type)
      decl.type = parseExpr(decl.typeSrc, Context{}, &sink);
    if (!decl.definiensSrc.empty() && !decl.definiens)
      decl.definiens = parseExpr(decl.definiensSrc, Context{}, &sink);
  } catch (const ParseError& e) {
    rep.message = e.render();
    return rep;
  }

  // syntax-only constants (no type, no definiens) are fine as is
  if (!decl.type && !decl.definiens) {
    if (auto err = fireListeners(decl, position_)) {
      rep.message = *err;
      return rep;
    }
    rep.ok = true;
    return rep;
  }

  // reconstruction pass: solve metas, collect constraints
  bool ok = true;
  ExprPtr inferredType;
  solver.resetFuel();
  if (decl.type) ok = solver.inhabitable(Context{}, decl.type);
  if (ok && decl.definiens) {
    solver.resetFuel();
    if (decl.type) {
      ok = solver.check(Context{}, decl.definiens, decl.type);
    } else {
      auto r = solver.infer(Context{}, decl.definiens, false);
      ok = r.has_value();
      if (r) inferredType = *r;
    }
  }
  if (ok) ok = solver.delayAndResume();

  ExprPtr committedType =
      decl.type ? solver.instantiate(decl.type)
                : (inferredType ? solver.instantiate(inferredType) : nullptr);
  ExprPtr committedDef =
      decl.definiens ? solver.instantiate(decl.definiens) : nullptr;

  if (!ok) {
    if (getenv("KMT_DEBUG")) {
      fprintf(stderr, "[debug] pass1 failed for %s; %zu errors\n",
              decl.name.c_str(), st.errors.size());
      for (auto& e : st.errors) fprintf(stderr, "  E: %s\n", e.render().c_str());
      for (auto& [n, m] : st.metas)
        if (!m.solution)
          fprintf(stderr, "  unsolved ?%s expected=%s\n", n.c_str(),
                  m.expectedType ? rawString(m.expectedType).c_str() : "-");
      for (auto& j : st.delayed)
        fprintf(stderr, "  delayed kind=%d a=%s b=%s\n", (int)j.kind,
                j.a ? rawString(solver.instantiate(j.a)).c_str() : "-",
                j.b ? rawString(solver.instantiate(j.b)).c_str() : "-");
    }
    failFrom(st, rep);
    // commit what we have so later declarations still resolve
    decl.type = committedType;
    decl.definiens = committedDef;
    rep.externalConditionCalls = st.externalConditionCalls;
    rep.firedRules = st.firedRules;
    return rep;
  }

  // verification pass over the committed, meta-free declaration
  SolverState st2;
  st2.declPos = decl.pos;
  Solver strict(*this, st2, /*lenient=*/false);
  bool ok2 = true;
  strict.resetFuel();
  if (committedType) ok2 = strict.inhabitable(Context{}, committedType);
  if (ok2 && committedDef) {
    strict.resetFuel();
    if (committedType)
      ok2 = strict.check(Context{}, committedDef, committedType);
    else {
      auto r = strict.infer(Context{}, committedDef, false);
      ok2 = r.has_value();
      if (r) committedType = *r;
    }
  }

  rep.externalConditionCalls =
      st.externalConditionCalls + st2.externalConditionCalls;
  rep.firedRules = st.firedRules;
  rep.firedRules.insert(rep.firedRules.end(), st2.firedRules.begin(),
                        st2.firedRules.end());

  if (!ok2) {
    if (getenv("KMT_DEBUG")) {
      fprintf(stderr, "[debug] pass2 failed for %s; %zu errors\n",
              decl.name.c_str(), st2.errors.size());
      for (auto& e : st2.errors) fprintf(stderr, "  E: %s\n", e.render().c_str());
    }
    failFrom(st2, rep);
    decl.type = committedType;
    decl.definiens = committedDef;
    return rep;
  }

  decl.type = committedType;
  decl.definiens = committedDef;
  if (auto err = fireListeners(decl, position_)) {
    rep.message = *err;
    return rep;
  }
  rep.ok = true;

  if (opts_.recordSolvedMetas) {
    std::vector<std::pair<int, std::pair<std::string, std::string>>> rows;
    for (const auto& [name, info] : st.metas) {
      if (!info.solution) continue;
      ExprPtr shown = solver.instantiate(info.solution);
      rows.push_back({info.order, {name, printExpressionForReport(shown)}});
    }
    std::sort(rows.begin(), rows.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (auto& r : rows) rep.solvedMetas.push_back(std::move(r.second));
  }

  return rep;
}

std::string CheckSession::printExpressionForReport(const ExprPtr& e) const {
  return printExpression(e, scope_);
}

DeclReport CheckSession::checkBuiltDeclaration(Declaration& decl) {
  rebuildVisibility();
  return checkDeclaration(decl);
}

TheoryReport CheckSession::checkAll() {
  TheoryReport rep;
  rep.theory = theory_->name;

  if (theory_->metaTheory && !graph_.find(*theory_->metaTheory)) {
    DeclReport d;
    d.theory = theory_->name;
    d.name = theory_->name;
    d.pos = theory_->pos;
    d.message = theory_->pos.str() + ": error: unknown meta-theory " +
                *theory_->metaTheory;
    rep.decls.push_back(std::move(d));
    return rep;
  }

  for (position_ = 0; position_ < theory_->body.size(); ++position_) {
    insertOffset_ = 0;
    TheoryItem& item = theory_->body[position_];
    if (auto* inc = std::get_if<Include>(&item)) {
      if (!graph_.find(inc->theory)) {
        DeclReport d;
        d.theory = theory_->name;
        d.name = inc->theory;
        d.pos = inc->pos;
        d.message = inc->pos.str() + ": error: unknown included theory " +
                    inc->theory;
        rep.decls.push_back(std::move(d));
      }
      continue;
    }
    if (auto* rr = std::get_if<RuleRef>(&item)) {
      if (graph_.ruleEnabled(rr->id) && !graph_.registry.find(rr->id)) {
        DeclReport d;
        d.theory = theory_->name;
        d.name = rr->id;
        d.pos = rr->pos;
        d.message =
            rr->pos.str() + ": error: unresolvable rule identifier " + rr->id;
        rep.decls.push_back(std::move(d));
      }
      continue;
    }
    if (std::holds_alternative<RuleObj>(item)) continue;
    if (auto* fd = std::get_if<FeatureDecl>(&item)) {
      rebuildVisibility();
      auto fit = table_.features.find(fd->keyword);
      if (fit == table_.features.end()) {
        DeclReport d;
        d.theory = theory_->name;
        d.name = fd->name;
        d.pos = fd->pos;
        d.message = fd->pos.str() + ": error: no structural feature for keyword '" +
                    fd->keyword + "'";
        rep.decls.push_back(std::move(d));
        continue;
      }
      try {
        auto decls = std::static_pointer_cast<const StructuralFeature>(fit->second)
                         ->elaborate(*this, *theory_, *fd);
        for (auto& d : decls) {
          d.generated = true;
          insertAfterCurrent(std::move(d));
        }
      } catch (const ParseError& e) {
        DeclReport d;
        d.theory = theory_->name;
        d.name = fd->name;
        d.pos = fd->pos;
        d.message = e.render();
        rep.decls.push_back(std::move(d));
      }
      continue;
    }
    auto& decl = std::get<Declaration>(item);
    rebuildVisibility();
    rep.decls.push_back(checkDeclaration(decl));
  }
  return rep;
}

}  // namespace kmt
