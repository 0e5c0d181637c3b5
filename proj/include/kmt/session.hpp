#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "kmt/parser.hpp"
#include "kmt/solver.hpp"
#include "kmt/theory.hpp"

namespace kmt {

struct CheckOptions {
  long fuel = 10000;
  bool recordSolvedMetas = true;
};

/// Outcome of checking one declaration.
struct DeclReport {
  std::string theory;
  std::string name;
  bool ok = false;
  std::string message;                 // first failure, rendered
  std::vector<std::string> trace;      // judgment chain of the failure
  std::vector<std::pair<std::string, std::string>> solvedMetas;
  int externalConditionCalls = 0;
  std::vector<std::string> firedRules;
  SourcePos pos;
};

struct TheoryReport {
  std::string theory;
  std::vector<DeclReport> decls;
  bool ok() const;
};

/// Drives checking of one theory: builds prefix visibility, parses
/// declaration sources against it, runs the kernel per declaration, commits
/// reconstructed declarations, elaborates structural features, and fires
/// change listeners. Single-threaded per theory.
class CheckSession {
public:
  CheckSession(TheoryGraph& graph, const std::string& theoryName,
               CheckOptions opts = {});

  TheoryGraph& graph() { return graph_; }
  const TheoryGraph& graph() const { return graph_; }
  Theory& theory() { return *theory_; }
  const CheckOptions& options() const { return opts_; }

  TheoryReport checkAll();

  // --- visibility as of the current checking position ---
  const Declaration* lookupConstant(const std::string& name) const;
  const RuleTable& ruleTable() const { return table_; }
  bool isApplicationConstant(const std::string& name) const;
  const Scope& scope() const { return scope_; }

  /// Parse an expression source against the current scope.
  ExprPtr parseExpr(const ExprSource& src, const Context& locals,
                    MetaSink* sink);

  /// Insert an item right after the current body position (used by change
  /// listeners for generated rules and by features for elaborated decls).
  void insertAfterCurrent(TheoryItem item);

  /// Check a programmatically built declaration in the current scope
  /// (used by features and tests); commits on success.
  DeclReport checkBuiltDeclaration(Declaration& decl);

  std::string printExpressionForReport(const ExprPtr& e) const;

private:
  TheoryGraph& graph_;
  TheoryPtr theory_;
  CheckOptions opts_;
  RuleTable table_;
  Scope scope_;
  std::map<std::string, const Declaration*> visible_;
  mutable std::map<std::string, Declaration> numerals_;
  size_t position_ = 0;  // index into theory body currently being checked
  size_t insertOffset_ = 0;

  void rebuildVisibility();
  DeclReport checkDeclaration(Declaration& decl);
  std::optional<std::string> fireListeners(const Declaration& decl,
                                           size_t index);
};

}  // namespace kmt
