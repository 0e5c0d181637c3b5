#include "kmt/printer.hpp"

#include <sstream>

namespace kmt {

namespace {

constexpr long kBoundAny = -1000000000L;
constexpr long kAppPrec = 1000000000L;
constexpr long kBoundAtom = kAppPrec + 1;

struct Printer {
  const Scope& scope;
  PrintOptions opts;

  std::pair<ExprPtr, std::vector<ExprPtr>> spine(const ExprPtr& e) const {
    if (e->kind == Expr::Kind::Complex &&
        e->name == scope.applicationConstant && !scope.applicationConstant.empty() &&
        e->args.size() == 2 && e->bindings.empty()) {
      auto [h, as] = spine(e->args[0]);
      as.push_back(e->args[1]);
      return {h, as};
    }
    return {e, {}};
  }

  const Notation* notationOf(const std::string& constant) const {
    const Declaration* d = scope.decl(constant);
    if (!d || !d->notation || d->notation->items.empty()) return nullptr;
    if (d->notation->pureApplication()) return nullptr;
    return &*d->notation;
  }

  std::string paren(const std::string& s) { return "(" + s + ")"; }

  std::string print(const ExprPtr& e, long bound) {
    switch (e->kind) {
      case Expr::Kind::Var:
        return e->name;
      case Expr::Kind::Meta:
        return "?" + e->name;
      case Expr::Kind::Complex:
        break;
    }

    // special inductive forms
    if (e->name == "rec" && e->bindings.size() == 3 && e->args.size() == 3) {
      const auto& bs = e->bindings.entries;
      std::ostringstream os;
      os << "rec " << print(e->args[0], kBoundAtom) << " , " << bs[0].name
         << " , " << bs[1].name << " , " << bs[2].name << " ==> "
         << print(e->args[1], kBoundAny) << " to "
         << print(e->args[2], kBoundAtom);
      std::string s = os.str();
      return bound > kBoundAny ? paren(s) : s;
    }
    if (e->name == "enumMatch" && e->bindings.size() == 1 &&
        e->args.size() >= 3) {
      std::ostringstream os;
      os << print(e->args[0], kBoundAtom) << " match "
         << print(e->args[1], kBoundAtom) << " , "
         << e->bindings.entries[0].name << " . ";
      for (size_t i = 3; i < e->args.size(); ++i) {
        if (i > 3) os << " | ";
        os << print(e->args[i], kBoundAny);
      }
      if (e->args.size() > 3) os << " ";
      os << "to " << print(e->args[2], kBoundAtom);
      std::string s = os.str();
      return bound > kBoundAny ? paren(s) : s;
    }

    // binder-notation complex
    if (!e->bindings.empty()) {
      const Notation* n = notationOf(e->name);
      if (n && n->hasBinder() && e->bindings.size() == 1 && e->args.size() == 1) {
        const auto& b = e->bindings.entries[0];
        // non-dependent Pi displays as an arrow when one is in scope
        if (e->name == "Pi" && b.type && scope.has("arrow") &&
            !freeVars(e->args[0]).count(b.name)) {
          const Notation* arr = notationOf("arrow");
          std::string arrDelim;
          if (arr)
            for (const auto& it : arr->items)
              if (it.kind == Notation::Item::Kind::Delimiter) {
                arrDelim = it.text;
                break;
              }
          if (arr && !arrDelim.empty()) {
            std::string s = print(b.type, arr->precedence + 1) + " " +
                            arrDelim + " " +
                            print(e->args[0], arr->precedence);
            return arr->precedence >= bound ? s : paren(s);
          }
        }
        std::ostringstream os;
        for (const auto& item : n->items) {
          switch (item.kind) {
            case Notation::Item::Kind::Delimiter:
              if (os.tellp() > 0) os << " ";
              os << item.text;
              break;
            case Notation::Item::Kind::VarBinding:
              if (os.tellp() > 0) os << " ";
              os << b.name;
              if (b.type) os << " : " << print(b.type, kBoundAny);
              break;
            case Notation::Item::Kind::Arg:
              if (os.tellp() > 0) os << " ";
              os << print(e->args[0], kBoundAny);
              break;
            case Notation::Item::Kind::ImplicitArg:
              break;
          }
        }
        std::string s = os.str();
        return bound > kBoundAny ? paren(s) : s;
      }
      // no usable notation: raw binder form
      std::ostringstream os;
      os << e->name << " (";
      for (size_t i = 0; i < e->bindings.size(); ++i) {
        if (i) os << ", ";
        const auto& b = e->bindings.entries[i];
        if (b.condition) {
          os << "{" << (b.type ? print(b.type, kBoundAny) : "") << "}";
        } else {
          os << b.name;
          if (b.type) os << " : " << print(b.type, kBoundAny);
        }
      }
      os << " ; ";
      for (size_t i = 0; i < e->args.size(); ++i) {
        if (i) os << " ";
        os << print(e->args[i], kBoundAtom);
      }
      os << ")";
      return os.str();
    }

    // bare constant
    if (e->args.empty()) {
      const Notation* n = notationOf(e->name);
      if (n && n->maxIndex() == 0) {
        // nullary mixfix like `type` or the empty world
        std::ostringstream os;
        bool first = true;
        for (const auto& item : n->items) {
          if (!first) os << " ";
          first = false;
          os << item.text;
        }
        return os.str();
      }
      return e->name;
    }

    // application spine
    auto [head, args] = spine(e);
    if (head->isConstant()) {
      const Notation* n = notationOf(head->name);
      if (n && !n->hasBinder() && static_cast<int>(args.size()) == n->maxIndex()) {
        std::ostringstream os;
        bool first = true;
        auto emit = [&](const std::string& s) {
          if (!first) os << " ";
          first = false;
          os << s;
        };
        bool fillsDumped = false;
        auto dumpFills = [&]() {
          if (fillsDumped || !opts.explicitImplicits) return;
          fillsDumped = true;
          for (int idx : n->implicitPositions())
            emit("%{" + print(args[idx - 1], kBoundAny) + "}");
        };
        for (size_t i = 0; i < n->items.size(); ++i) {
          const auto& item = n->items[i];
          switch (item.kind) {
            case Notation::Item::Kind::Delimiter:
              emit(item.text);
              dumpFills();  // fills go right after the trigger delimiter
              break;
            case Notation::Item::Kind::Arg: {
              // the leading argument of an infix form binds strictly tighter
              long slot = i == 0 ? n->precedence + 1 : slotBound(*n, i);
              emit(print(args[item.index - 1], slot));
              break;
            }
            case Notation::Item::Kind::ImplicitArg:
              if (opts.explicitImplicits)
                emit("%{" + print(args[item.index - 1], kBoundAny) + "}");
              break;
            case Notation::Item::Kind::VarBinding:
              break;
          }
        }
        if (opts.explicitImplicits) dumpFills();
        std::string s = os.str();
        return n->precedence >= bound ? s : paren(s);
      }
    }
    // prefix application fallback
    std::ostringstream os;
    os << print(head, kBoundAtom);
    for (const auto& a : args) os << " " << print(a, kBoundAtom);
    std::string s = os.str();
    return kAppPrec >= bound ? s : paren(s);
  }

  long slotBound(const Notation& n, size_t itemIdx) const {
    for (size_t j = itemIdx + 1; j < n.items.size(); ++j) {
      const auto& it = n.items[j];
      if (it.kind == Notation::Item::Kind::ImplicitArg) continue;
      if (it.kind == Notation::Item::Kind::Delimiter) return kBoundAny;
      return kBoundAtom;
    }
    return n.hasBinder() ? kBoundAny : n.precedence;
  }
};

}  // namespace

std::string printExpression(const ExprPtr& e, const Scope& scope,
                            PrintOptions opts) {
  Printer p{scope, opts};
  return p.print(e, kBoundAny);
}

std::string printDeclaration(const Declaration& d, const Scope& scope,
                             PrintOptions opts) {
  std::ostringstream os;
  os << d.name;
  if (d.type) os << " : " << printExpression(d.type, scope, opts);
  if (d.definiens) os << " = " << printExpression(d.definiens, scope, opts);
  if (d.notation) os << " # " << d.notation->spec();
  if (d.role) os << " role " << *d.role;
  return os.str();
}

}  // namespace kmt
