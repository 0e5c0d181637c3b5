#include "kmt/theory.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace kmt {

std::string SourcePos::str() const {
  std::ostringstream os;
  os << (file.empty() ? "<builtin>" : file) << ":" << line << ":" << col;
  return os.str();
}

void Registry::add(RulePtr rule) {
  auto id = rule->id();
  if (rules_.count(id))
    throw TheoryError{"duplicate rule id in registry: " + id, {}};
  rules_[id] = std::move(rule);
}

RulePtr Registry::find(const std::string& id) const {
  auto it = rules_.find(id);
  return it == rules_.end() ? nullptr : it->second;
}

std::vector<std::string> Registry::ids() const {
  std::vector<std::string> out;
  for (const auto& [id, r] : rules_) {
    (void)r;
    out.push_back(id);
  }
  return out;
}

TheoryPtr TheoryGraph::find(const std::string& name) const {
  auto it = theories_.find(name);
  return it == theories_.end() ? nullptr : it->second;
}

Theory& TheoryGraph::require(const std::string& name) {
  auto t = find(name);
  if (!t) throw TheoryError{"unknown theory: " + name, {}};
  return *t;
}

const Theory& TheoryGraph::require(const std::string& name) const {
  auto t = find(name);
  if (!t) throw TheoryError{"unknown theory: " + name, {}};
  return *t;
}

void TheoryGraph::addTheory(TheoryPtr t) {
  if (theories_.count(t->name))
    throw TheoryError{"duplicate theory: " + t->name, t->pos};
  theories_[t->name] = std::move(t);
}

std::vector<std::string> TheoryGraph::theoryNames() const {
  std::vector<std::string> out;
  for (const auto& [n, t] : theories_) {
    (void)t;
    out.push_back(n);
  }
  return out;
}

bool TheoryGraph::ruleEnabled(const std::string& id) const {
  if (deniedRules.count(id)) return false;
  if (!allowedRules.empty() && !allowedRules.count(id)) return false;
  return true;
}

RulePtr TheoryGraph::resolveRule(const std::string& id) const {
  if (!ruleEnabled(id)) return nullptr;
  return registry.find(id);
}

void TheoryGraph::flattenInto(const std::string& name,
                              std::vector<FlatItem>& out,
                              std::set<std::string>& visited,
                              bool ownBodyOnly) const {
  if (visited.count(name)) return;
  visited.insert(name);
  const Theory& t = require(name);
  if (!ownBodyOnly && t.metaTheory) flattenInto(*t.metaTheory, out, visited, false);
  // includes first (dependency order, duplicates once), then own body
  for (const auto& item : t.body) {
    if (const auto* inc = std::get_if<Include>(&item))
      flattenInto(inc->theory, out, visited, false);
  }
  for (const auto& item : t.body) {
    if (std::holds_alternative<Include>(item)) continue;
    out.push_back({&t, &item});
  }
}

std::vector<TheoryGraph::FlatItem> TheoryGraph::flatten(
    const std::string& theory) const {
  std::vector<FlatItem> out;
  std::set<std::string> visited;
  const Theory& t = require(theory);
  if (t.metaTheory) {
    if (!find(*t.metaTheory))
      throw TheoryError{"unknown meta-theory: " + *t.metaTheory, t.pos};
    flattenInto(*t.metaTheory, out, visited, false);
  }
  flattenInto(theory, out, visited, false);
  return out;
}

std::vector<const Declaration*> TheoryGraph::flattenDecls(
    const std::string& theory) const {
  std::vector<const Declaration*> out;
  for (const auto& fi : flatten(theory))
    if (const auto* d = std::get_if<Declaration>(fi.item)) out.push_back(d);
  return out;
}

std::vector<TheoryGraph::FlatItem> TheoryGraph::flattenPrefix(
    const std::string& theory, size_t ownLimit) const {
  std::vector<FlatItem> out;
  std::set<std::string> visited;
  const Theory& t = require(theory);
  if (t.metaTheory) flattenInto(*t.metaTheory, out, visited, false);
  for (const auto& item : t.body) {
    if (const auto* inc = std::get_if<Include>(&item))
      flattenInto(inc->theory, out, visited, false);
  }
  size_t idx = 0;
  for (const auto& item : t.body) {
    if (idx >= ownLimit) break;
    idx++;
    if (std::holds_alternative<Include>(item)) continue;
    out.push_back({&t, &item});
  }
  return out;
}

std::vector<RulePtr> TheoryGraph::visibleRules(const std::string& theory) const {
  std::vector<RulePtr> out;
  for (const auto& fi : flatten(theory)) {
    if (const auto* rr = std::get_if<RuleRef>(fi.item)) {
      if (!ruleEnabled(rr->id)) continue;
      auto rule = registry.find(rr->id);
      if (!rule)
        throw TheoryError{"unresolvable rule identifier: " + rr->id, rr->pos};
      out.push_back(rule);
    } else if (const auto* ro = std::get_if<RuleObj>(fi.item)) {
      out.push_back(ro->rule);
    }
  }
  return out;
}

bool isNumeralName(const std::string& s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) {
    return std::isdigit(c);
  });
}

const Declaration* TheoryGraph::resolveConstant(const std::string& theory,
                                                const std::string& name) const {
  for (const auto* d : flattenDecls(theory))
    if (d->name == name) return d;
  if (isNumeralName(name)) {
    // numerals have type `num` wherever a constant of that name is in scope
    for (const auto* d : flattenDecls(theory)) {
      if (d->name == "num") {
        auto it = numerals_.find(name);
        if (it == numerals_.end()) {
          Declaration decl;
          decl.name = name;
          decl.type = Expr::constant("num");
          decl.generated = true;
          it = numerals_.emplace(name, std::move(decl)).first;
        }
        return &it->second;
      }
    }
  }
  return nullptr;
}

}  // namespace kmt
