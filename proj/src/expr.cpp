#include "kmt/expr.hpp"

#include <sstream>
#include <stdexcept>

namespace kmt {

bool Context::binds(const std::string& name) const {
  return lookup(name) != nullptr;
}

const ContextEntry* Context::lookup(const std::string& name) const {
  // innermost binding wins
  for (auto it = entries.rbegin(); it != entries.rend(); ++it) {
    if (!it->condition && it->name == name) return &*it;
  }
  return nullptr;
}

Context Context::extended(std::string name, ExprPtr type) const {
  Context out = *this;
  out.entries.push_back({std::move(name), std::move(type), false});
  return out;
}

Context Context::extendedCondition(ExprPtr condition) const {
  Context out = *this;
  out.entries.push_back({"", std::move(condition), true});
  return out;
}

std::set<std::string> Context::names() const {
  std::set<std::string> out;
  for (const auto& e : entries)
    if (!e.condition) out.insert(e.name);
  return out;
}

ExprPtr Expr::var(std::string name) {
  auto e = std::make_shared<Expr>();
  e->kind = Kind::Var;
  e->name = std::move(name);
  return e;
}

ExprPtr Expr::meta(std::string name, std::vector<ExprPtr> args) {
  auto e = std::make_shared<Expr>();
  e->kind = Kind::Meta;
  e->name = std::move(name);
  e->args = std::move(args);
  return e;
}

ExprPtr Expr::complex(std::string head, Context bindings,
                      std::vector<ExprPtr> args) {
  auto e = std::make_shared<Expr>();
  e->kind = Kind::Complex;
  e->name = std::move(head);
  e->bindings = std::move(bindings);
  e->args = std::move(args);
  return e;
}

ExprPtr Expr::constant(std::string head) {
  return complex(std::move(head), Context{}, {});
}

namespace {

void collectFree(const ExprPtr& e, std::set<std::string>& bound,
                 std::set<std::string>& out) {
  switch (e->kind) {
    case Expr::Kind::Var:
      if (!bound.count(e->name)) out.insert(e->name);
      return;
    case Expr::Kind::Meta:
      for (const auto& a : e->args) collectFree(a, bound, out);
      return;
    case Expr::Kind::Complex: {
      std::vector<std::string> added;
      for (const auto& b : e->bindings.entries) {
        if (b.type) collectFree(b.type, bound, out);
        if (!b.condition && !bound.count(b.name)) {
          bound.insert(b.name);
          added.push_back(b.name);
        }
      }
      for (const auto& a : e->args) collectFree(a, bound, out);
      for (const auto& n : added) bound.erase(n);
      return;
    }
  }
}

void collectMetas(const ExprPtr& e, std::set<std::string>& out) {
  switch (e->kind) {
    case Expr::Kind::Var:
      return;
    case Expr::Kind::Meta:
      out.insert(e->name);
      for (const auto& a : e->args) collectMetas(a, out);
      return;
    case Expr::Kind::Complex:
      for (const auto& b : e->bindings.entries)
        if (b.type) collectMetas(b.type, out);
      for (const auto& a : e->args) collectMetas(a, out);
      return;
  }
}

ExprPtr substImpl(const ExprPtr& e, std::map<std::string, ExprPtr> sub,
                  std::set<std::string> avoid) {
  if (sub.empty()) return e;
  switch (e->kind) {
    case Expr::Kind::Var: {
      auto it = sub.find(e->name);
      return it == sub.end() ? e : it->second;
    }
    case Expr::Kind::Meta: {
      std::vector<ExprPtr> args;
      args.reserve(e->args.size());
      for (const auto& a : e->args) args.push_back(substImpl(a, sub, avoid));
      return Expr::meta(e->name, std::move(args));
    }
    case Expr::Kind::Complex: {
      Context newBindings;
      std::map<std::string, ExprPtr> cur = sub;
      std::set<std::string> curAvoid = avoid;
      for (const auto& b : e->bindings.entries) {
        ContextEntry nb = b;
        if (nb.type) nb.type = substImpl(nb.type, cur, curAvoid);
        if (!b.condition) {
          std::string newName = b.name;
          if (curAvoid.count(b.name)) {
            // would capture a free variable of a replacement
            std::set<std::string> used = curAvoid;
            used.insert(b.name);
            newName = freshName(b.name, used);
          }
          if (newName != b.name) {
            nb.name = newName;
            cur[b.name] = Expr::var(newName);
          } else {
            cur.erase(b.name);
          }
          curAvoid.insert(newName);
        }
        newBindings.entries.push_back(std::move(nb));
      }
      std::vector<ExprPtr> args;
      args.reserve(e->args.size());
      for (const auto& a : e->args) args.push_back(substImpl(a, cur, curAvoid));
      return Expr::complex(e->name, std::move(newBindings), std::move(args));
    }
  }
  throw std::logic_error("unreachable expression kind");
}

struct AlphaEnv {
  std::map<std::string, int> left, right;
  int next = 0;
};

bool alphaEq(const ExprPtr& a, const ExprPtr& b, AlphaEnv env) {
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case Expr::Kind::Var: {
      auto la = env.left.find(a->name);
      auto rb = env.right.find(b->name);
      if (la != env.left.end() || rb != env.right.end())
        return la != env.left.end() && rb != env.right.end() &&
               la->second == rb->second;
      return a->name == b->name;
    }
    case Expr::Kind::Meta: {
      if (a->name != b->name || a->args.size() != b->args.size()) return false;
      for (size_t i = 0; i < a->args.size(); ++i)
        if (!alphaEq(a->args[i], b->args[i], env)) return false;
      return true;
    }
    case Expr::Kind::Complex: {
      if (a->name != b->name) return false;
      if (a->bindings.size() != b->bindings.size()) return false;
      if (a->args.size() != b->args.size()) return false;
      AlphaEnv cur = env;
      for (size_t i = 0; i < a->bindings.size(); ++i) {
        const auto& ba = a->bindings.entries[i];
        const auto& bb = b->bindings.entries[i];
        if (ba.condition != bb.condition) return false;
        if ((ba.type == nullptr) != (bb.type == nullptr)) return false;
        if (ba.type && !alphaEq(ba.type, bb.type, cur)) return false;
        if (!ba.condition) {
          cur.left[ba.name] = cur.next;
          cur.right[bb.name] = cur.next;
          cur.next++;
        }
      }
      for (size_t i = 0; i < a->args.size(); ++i)
        if (!alphaEq(a->args[i], b->args[i], cur)) return false;
      return true;
    }
  }
  return false;
}

}  // namespace

std::set<std::string> freeVars(const ExprPtr& e) {
  std::set<std::string> bound, out;
  collectFree(e, bound, out);
  return out;
}

std::set<std::string> metaNames(const ExprPtr& e) {
  std::set<std::string> out;
  collectMetas(e, out);
  return out;
}

ExprPtr substituteAll(const ExprPtr& e,
                      const std::map<std::string, ExprPtr>& sub) {
  std::set<std::string> avoid;
  for (const auto& [k, v] : sub) {
    (void)k;
    auto fv = freeVars(v);
    avoid.insert(fv.begin(), fv.end());
  }
  return substImpl(e, sub, std::move(avoid));
}

ExprPtr substitute(const ExprPtr& e, const std::string& x, const ExprPtr& t) {
  return substituteAll(e, {{x, t}});
}

Context substituteCtx(const Context& ctx,
                      const std::map<std::string, ExprPtr>& sub) {
  Context out;
  std::map<std::string, ExprPtr> cur = sub;
  for (const auto& e : ctx.entries) {
    ContextEntry ne = e;
    if (ne.type) ne.type = substituteAll(ne.type, cur);
    if (!e.condition) cur.erase(e.name);
    out.entries.push_back(std::move(ne));
  }
  return out;
}

bool alphaEqual(const ExprPtr& a, const ExprPtr& b) {
  return alphaEq(a, b, AlphaEnv{});
}

std::string freshName(const std::string& hint,
                      const std::set<std::string>& used) {
  if (!used.count(hint)) return hint;
  for (int i = 1;; ++i) {
    std::string candidate = hint + std::to_string(i);
    if (!used.count(candidate)) return candidate;
  }
}

std::string pickFresh(const Context& ctx, const std::string& hint) {
  return freshName(hint, ctx.names());
}

std::string rawString(const ExprPtr& e) {
  std::ostringstream os;
  switch (e->kind) {
    case Expr::Kind::Var:
      os << e->name;
      break;
    case Expr::Kind::Meta:
      os << "?" << e->name;
      if (!e->args.empty()) {
        os << "[";
        for (size_t i = 0; i < e->args.size(); ++i) {
          if (i) os << ",";
          os << rawString(e->args[i]);
        }
        os << "]";
      }
      break;
    case Expr::Kind::Complex:
      os << e->name << "(";
      for (const auto& b : e->bindings.entries) {
        if (b.condition)
          os << "{" << (b.type ? rawString(b.type) : "") << "}";
        else {
          os << b.name;
          if (b.type) os << ":" << rawString(b.type);
        }
        os << ",";
      }
      os << ";";
      for (size_t i = 0; i < e->args.size(); ++i) {
        if (i) os << ",";
        os << rawString(e->args[i]);
      }
      os << ")";
      break;
  }
  return os.str();
}

}  // namespace kmt
