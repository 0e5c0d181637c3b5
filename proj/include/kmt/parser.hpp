#pragma once

#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "kmt/expr.hpp"
#include "kmt/notation.hpp"
#include "kmt/theory.hpp"

namespace kmt {

struct ParseError {
  std::string message;
  SourcePos pos;
  std::string render() const;
};

/// Creates the fresh meta-variables standing for omitted implicit arguments
/// and omitted binder types, applied to the local variables in scope.
class MetaSink {
public:
  virtual ~MetaSink() = default;
  virtual ExprPtr makeMeta(const Context& locals, const std::string& hint) = 0;
};

/// Everything the expression parser and printer need to know about the
/// constants visible at one position: names, notations, which constant is
/// pure application, and whether the special inductive forms are in scope.
struct Scope {
  std::map<std::string, const Declaration*> constants;
  std::string applicationConstant;  // "" when none visible

  bool has(const std::string& name) const { return constants.count(name) > 0; }
  const Declaration* decl(const std::string& name) const {
    auto it = constants.find(name);
    return it == constants.end() ? nullptr : it->second;
  }
  bool numeralsAllowed() const { return has("num"); }
  bool recEnabled() const { return has("rec"); }
  bool matchEnabled() const { return has("enumMatch"); }
};

Scope buildScope(const std::vector<const Declaration*>& decls);

/// Notation-driven expression parser. Omitted implicit arguments and
/// omitted bound-variable types become fresh metas applied to the local
/// variables in scope (sink may be null only for meta-free input).
ExprPtr parseExpression(const std::string& text, const SourcePos& base,
                        const Scope& scope, const Context& locals,
                        MetaSink* sink);

/// Structure-level parse of a `.kmt` theory file; expressions inside
/// declarations are kept as raw sources until the notations of the
/// flattened context are known.
std::vector<TheoryPtr> parseTheoryFile(const std::string& text,
                                       const std::string& filename);

/// Structure-level parse of one declaration line
/// (NAME (: expr)? (= expr)? (# notation)? (role NAME)?).
Declaration parseDeclLine(const std::string& text, const SourcePos& pos);

}  // namespace kmt
