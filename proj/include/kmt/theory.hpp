#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "kmt/expr.hpp"
#include "kmt/notation.hpp"
#include "kmt/rules.hpp"

namespace kmt {

struct SourcePos {
  std::string file;
  int line = 0;
  int col = 0;
  std::string str() const;
};

/// Raw expression text, kept until the notations of the flattened context
/// are known.
struct ExprSource {
  std::string text;
  SourcePos pos;
  bool empty() const { return text.empty(); }
};

/// Named constant with optional type, definiens, notation, and role.
struct Declaration {
  std::string name;
  ExprPtr type;          // reconstructed (meta-free once checked)
  ExprPtr definiens;
  std::optional<Notation> notation;
  std::optional<std::string> role;
  SourcePos pos;

  // unparsed sources; empty once the declaration was built programmatically
  ExprSource typeSrc;
  ExprSource definiensSrc;
  bool generated = false;  // produced by a structural feature or listener
};

struct Include {
  std::string theory;
  SourcePos pos;
};

struct RuleRef {
  std::string id;
  SourcePos pos;
};

/// A rule object injected directly into a theory body (used by change
/// listeners for generated rules, scoped right after their origin).
struct RuleObj {
  RulePtr rule;
  std::string origin;  // constant the rule was generated from
};

/// Keyword-introduced nested declaration group, elaborated by a
/// structural feature at checking time.
struct FeatureDecl {
  std::string keyword;  // "induct", "def", ...
  std::string name;
  std::string paramsSrc;  // raw text between parentheses, may be empty
  struct BodyLine {
    std::string text;
    SourcePos pos;
  };
  std::vector<BodyLine> body;
  SourcePos pos;
};

using TheoryItem =
    std::variant<Declaration, Include, RuleRef, RuleObj, FeatureDecl>;

/// Metadata recorded by the `induct` feature so `def` can elaborate
/// functions over the generated type.
struct InductiveInfo {
  std::string typeName;
  struct Ctor {
    std::string name;
    int recursiveArity = 0;
  };
  std::vector<Ctor> ctors;
};

struct Theory {
  std::string name;
  std::optional<std::string> metaTheory;
  std::vector<TheoryItem> body;
  SourcePos pos;
  bool builtin = false;

  std::map<std::string, InductiveInfo> inductives;

  void add(TheoryItem item) { body.push_back(std::move(item)); }
};

using TheoryPtr = std::shared_ptr<Theory>;

/// Registry of compiled-in rules, keyed by dotted identifier.
class Registry {
public:
  void add(RulePtr rule);
  RulePtr find(const std::string& id) const;
  std::vector<std::string> ids() const;

private:
  std::map<std::string, RulePtr> rules_;
};

struct TheoryError {
  std::string message;
  SourcePos pos;
};

/// All loaded theories plus the rule registry; immutable once loading and
/// checking are done.
class TheoryGraph {
public:
  Registry registry;
  /// Rule ids removed from resolution (e.g. to disable a pack).
  std::set<std::string> deniedRules;
  /// When non-empty, only these rule ids resolve.
  std::set<std::string> allowedRules;

  TheoryPtr find(const std::string& name) const;
  Theory& require(const std::string& name);
  const Theory& require(const std::string& name) const;
  void addTheory(TheoryPtr t);
  std::vector<std::string> theoryNames() const;

  bool ruleEnabled(const std::string& id) const;
  RulePtr resolveRule(const std::string& id) const;

  /// Declarations of the meta-theory chain, then transitively included
  /// theories (dependency order, duplicates once), then the theory's own
  /// body. Generated rule objects travel with their position.
  struct FlatItem {
    const Theory* owner;
    const TheoryItem* item;
  };
  std::vector<FlatItem> flatten(const std::string& theory) const;

  /// flatten() restricted to declarations.
  std::vector<const Declaration*> flattenDecls(const std::string& theory) const;

  /// Like flatten, but the named theory's own body is cut off at
  /// `ownLimit` items (meta-theories and includes stay complete). This is
  /// the visibility while checking body item `ownLimit`.
  std::vector<FlatItem> flattenPrefix(const std::string& theory,
                                      size_t ownLimit) const;

  /// Rules visible in a theory, in flatten order.
  std::vector<RulePtr> visibleRules(const std::string& theory) const;

  /// Lookup through flatten; numerals resolve synthetically (type `num`)
  /// when a constant named `num` is in scope.
  const Declaration* resolveConstant(const std::string& theory,
                                     const std::string& name) const;

private:
  std::map<std::string, TheoryPtr> theories_;
  void flattenInto(const std::string& name, std::vector<FlatItem>& out,
                   std::set<std::string>& visited, bool ownBodyOnly) const;

  // synthetic numeral declarations, created on demand
  mutable std::map<std::string, Declaration> numerals_;
};

bool isNumeralName(const std::string& s);

}  // namespace kmt
