#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace kmt {

class Expr;
using ExprPtr = std::shared_ptr<const Expr>;

/// One context entry `x : T`. The type may be absent (untyped hypothesis).
/// Entries with `condition == true` carry an extra-linguistic side condition
/// as their "type"; they are invisible to variable lookup.
struct ContextEntry {
  std::string name;
  ExprPtr type;  // may be null
  bool condition = false;
};

/// Ordered telescope of bindings. Each entry's type may mention only
/// earlier entries.
class Context {
public:
  std::vector<ContextEntry> entries;

  Context() = default;
  explicit Context(std::vector<ContextEntry> es) : entries(std::move(es)) {}

  bool binds(const std::string& name) const;
  const ContextEntry* lookup(const std::string& name) const;
  Context extended(std::string name, ExprPtr type) const;
  Context extendedCondition(ExprPtr condition) const;
  std::set<std::string> names() const;
  size_t size() const { return entries.size(); }
  bool empty() const { return entries.empty(); }
};

/// Expressions: variables, meta-variables (reconstruction unknowns applied
/// to the local variables they may depend on), and complex terms
/// c(x1:A1,...,xm:Am; E1,...,En) with a head constant, bound-variable
/// context, and argument list. Immutable; share freely.
class Expr {
public:
  enum class Kind { Var, Meta, Complex };

  Kind kind;
  std::string name;        // variable name, meta name, or head constant
  Context bindings;        // Complex only
  std::vector<ExprPtr> args;  // Complex arguments or Meta arguments

  static ExprPtr var(std::string name);
  static ExprPtr meta(std::string name, std::vector<ExprPtr> args);
  static ExprPtr complex(std::string head, Context bindings,
                         std::vector<ExprPtr> args);
  /// Bare constant c().
  static ExprPtr constant(std::string head);

  bool isVar() const { return kind == Kind::Var; }
  bool isMeta() const { return kind == Kind::Meta; }
  bool isComplex() const { return kind == Kind::Complex; }
  bool isConstant() const {
    return kind == Kind::Complex && bindings.empty() && args.empty();
  }
  bool isConstant(const std::string& c) const {
    return isConstant() && name == c;
  }
};

/// Free variables of e (meta arguments count; meta names do not).
std::set<std::string> freeVars(const ExprPtr& e);

/// Names of all meta-variables occurring in e.
std::set<std::string> metaNames(const ExprPtr& e);

/// Capture-avoiding simultaneous substitution of variables.
ExprPtr substituteAll(const ExprPtr& e,
                      const std::map<std::string, ExprPtr>& sub);

/// Capture-avoiding substitution of a single variable.
ExprPtr substitute(const ExprPtr& e, const std::string& x, const ExprPtr& t);

/// Substitute into every type of a context (entry names are binders of the
/// enclosing scope and are removed from the substitution as they pass).
Context substituteCtx(const Context& ctx, const std::map<std::string, ExprPtr>& sub);

/// Equality up to consistent renaming of bound variables. Meta-variables
/// compare by name and pairwise alpha-equal arguments.
bool alphaEqual(const ExprPtr& a, const ExprPtr& b);

/// Deterministic fresh name: `hint` if unused, else hint1, hint2, ...
std::string freshName(const std::string& hint, const std::set<std::string>& used);

/// Fresh name against a context.
std::string pickFresh(const Context& ctx, const std::string& hint);

/// Raw structural rendering, for diagnostics and debugging only.
std::string rawString(const ExprPtr& e);

}  // namespace kmt
