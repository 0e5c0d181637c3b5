#pragma once

#include <optional>
#include <string>
#include <vector>

namespace kmt {

/// Mixfix notation: a sequence of delimiters, argument markers, implicit
/// argument markers, and variable-binding markers, plus a precedence.
/// Argument indices absent from the item list denote implicit arguments.
struct Notation {
  struct Item {
    enum class Kind { Delimiter, Arg, ImplicitArg, VarBinding };
    Kind kind;
    std::string text;  // Delimiter only
    int index = 0;     // Arg / ImplicitArg / VarBinding

    static Item delim(std::string s) {
      return {Kind::Delimiter, std::move(s), 0};
    }
    static Item arg(int n) { return {Kind::Arg, "", n}; }
    static Item implicitArg(int n) { return {Kind::ImplicitArg, "", n}; }
    static Item varBinding(int n) { return {Kind::VarBinding, "", n}; }
  };

  std::vector<Item> items;
  int precedence = 0;

  bool pureApplication() const;       // no delimiters at all
  bool hasBinder() const;             // contains a VarBinding marker
  int maxIndex() const;               // highest Arg/ImplicitArg/VarBinding index
  /// Argument positions (1-based, up to maxIndex) that have no Arg or
  /// ImplicitArg item, i.e. are implicit and carry no display position.
  std::vector<int> implicitPositions() const;
  /// Explicit argument indices in item order.
  std::vector<int> explicitArgOrder() const;
  std::string spec() const;           // round-trips through compileNotation
};

struct NotationError {
  std::string message;
};

/// Parse a notation spec such as "[V1] 1" or "1 ⇒ 2 prec 10" or
/// "refl %I1 %I2". Throws NotationError on duplicate or malformed markers.
Notation compileNotation(const std::string& specText);

}  // namespace kmt
