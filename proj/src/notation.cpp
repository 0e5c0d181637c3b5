#include "kmt/notation.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

namespace kmt {

bool Notation::pureApplication() const {
  return std::none_of(items.begin(), items.end(), [](const Item& it) {
    return it.kind == Item::Kind::Delimiter;
  });
}

bool Notation::hasBinder() const {
  return std::any_of(items.begin(), items.end(), [](const Item& it) {
    return it.kind == Item::Kind::VarBinding;
  });
}

int Notation::maxIndex() const {
  int m = 0;
  for (const auto& it : items)
    if (it.kind == Item::Kind::Arg || it.kind == Item::Kind::ImplicitArg)
      m = std::max(m, it.index);
  return m;
}

std::vector<int> Notation::implicitPositions() const {
  std::set<int> placed;
  for (const auto& it : items)
    if (it.kind == Item::Kind::Arg || it.kind == Item::Kind::ImplicitArg)
      placed.insert(it.index);
  std::vector<int> out;
  for (int i = 1; i <= maxIndex(); ++i)
    if (!placed.count(i)) out.push_back(i);
  return out;
}

std::vector<int> Notation::explicitArgOrder() const {
  std::vector<int> out;
  for (const auto& it : items)
    if (it.kind == Item::Kind::Arg) out.push_back(it.index);
  return out;
}

std::string Notation::spec() const {
  std::ostringstream os;
  bool first = true;
  for (const auto& it : items) {
    if (!first) os << " ";
    first = false;
    switch (it.kind) {
      case Item::Kind::Delimiter: os << it.text; break;
      case Item::Kind::Arg: os << it.index; break;
      case Item::Kind::ImplicitArg: os << "%I" << it.index; break;
      case Item::Kind::VarBinding: os << "V" << it.index; break;
    }
  }
  if (precedence != 0) os << " prec " << precedence;
  return os.str();
}

namespace {

bool allDigits(const std::string& s) {
  return !s.empty() &&
         std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
}

// Split a whitespace-separated word further: brackets commonly written
// flush against markers ("[V1]", "{V1}") become their own tokens.
void splitWord(const std::string& w, std::vector<std::string>& out) {
  static const std::string brackets = "[]{}()";
  size_t i = 0;
  while (i < w.size()) {
    if (brackets.find(w[i]) != std::string::npos) {
      out.push_back(std::string(1, w[i]));
      ++i;
      continue;
    }
    size_t j = i;
    while (j < w.size() && brackets.find(w[j]) == std::string::npos) ++j;
    out.push_back(w.substr(i, j - i));
    i = j;
  }
}

}  // namespace

Notation compileNotation(const std::string& specText) {
  std::vector<std::string> tokens;
  {
    std::istringstream is(specText);
    std::string w;
    while (is >> w) splitWord(w, tokens);
  }
  Notation n;
  // argument markers and variable markers number independently
  std::set<int> seenArgs, seenVars;
  auto takeIndex = [&](const std::string& tok, size_t from, std::set<int>& seen) {
    std::string digits = tok.substr(from);
    if (!allDigits(digits))
      throw NotationError{"malformed notation marker: " + tok};
    int idx = std::stoi(digits);
    if (idx <= 0) throw NotationError{"notation index must be positive: " + tok};
    if (!seen.insert(idx).second)
      throw NotationError{"duplicate notation index: " + tok};
    return idx;
  };
  for (size_t i = 0; i < tokens.size(); ++i) {
    const std::string& t = tokens[i];
    if (t == "prec") {
      if (i + 1 >= tokens.size())
        throw NotationError{"prec requires an integer"};
      try {
        n.precedence = std::stoi(tokens[i + 1]);
      } catch (...) {
        throw NotationError{"malformed precedence: " + tokens[i + 1]};
      }
      if (i + 2 != tokens.size())
        throw NotationError{"prec must come last in a notation"};
      break;
    }
    if (allDigits(t)) {
      n.items.push_back(Notation::Item::arg(takeIndex(t, 0, seenArgs)));
    } else if (t.size() >= 2 && t[0] == 'V' && allDigits(t.substr(1))) {
      n.items.push_back(Notation::Item::varBinding(takeIndex(t, 1, seenVars)));
    } else if (t.size() >= 3 && t[0] == '%' && t[1] == 'I') {
      n.items.push_back(Notation::Item::implicitArg(takeIndex(t, 2, seenArgs)));
    } else if (t[0] == '%') {
      throw NotationError{"malformed notation marker: " + t};
    } else {
      n.items.push_back(Notation::Item::delim(t));
    }
  }
  return n;
}

}  // namespace kmt
