#include "kmt/parser.hpp"

#include <algorithm>
#include <cassert>
#include <cctype>
#include <sstream>

namespace kmt {

std::string ParseError::render() const {
  return pos.str() + ": error: " + message;
}

namespace {

constexpr long kBoundAny = -1000000000L;   // accept every notation
constexpr long kAppPrec = 1000000000L;     // application binds tightest
constexpr long kBoundAtom = kAppPrec + 1;  // single atoms only

struct Token {
  std::string text;
  SourcePos pos;
  bool numeral = false;
};

bool isWordChar(unsigned char c) {
  return std::isalnum(c) || c == '_' || static_cast<unsigned char>(c) >= 0x80;
}

bool isReserved(char c) {
  static const std::string rs = "()[]{},:.|'";
  return rs.find(c) != std::string::npos;
}

// UTF-8 aware enough: reserved chars are ASCII; multi-byte sequences are
// word characters, except the bracket pair U+27E8/U+27E9 which splits.
std::vector<Token> lexExpr(const std::string& text, const SourcePos& base) {
  std::vector<Token> out;
  int line = base.line;
  int col = base.col;
  size_t i = 0;
  auto push = [&](std::string t, int l, int c, bool num = false) {
    out.push_back({std::move(t), {base.file, l, c}, num});
  };
  while (i < text.size()) {
    char c = text[i];
    if (c == '\n') {
      line++;
      col = 1;
      i++;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      col++;
      i++;
      continue;
    }
    if (text.compare(i, 2, "%{") == 0) {
      push("%{", line, col);
      i += 2;
      col += 2;
      continue;
    }
    if (text.compare(i, 3, "⟨") == 0 || text.compare(i, 3, "⟩") == 0) {
      push(text.substr(i, 3), line, col);
      i += 3;
      col++;
      continue;
    }
    if (isReserved(c)) {
      push(std::string(1, c), line, col);
      i++;
      col++;
      continue;
    }
    // a maximal run without whitespace, reserved chars, or angle brackets
    size_t j = i;
    int startCol = col;
    while (j < text.size()) {
      char d = text[j];
      if (std::isspace(static_cast<unsigned char>(d)) || isReserved(d)) break;
      if (text.compare(j, 3, "⟨") == 0 || text.compare(j, 3, "⟩") == 0)
        break;
      if (text.compare(j, 2, "%{") == 0) break;
      j++;
      col++;
    }
    std::string w = text.substr(i, j - i);
    bool num = std::all_of(w.begin(), w.end(), [](unsigned char ch) {
      return std::isdigit(ch);
    });
    push(std::move(w), line, startCol, num);
    i = j;
  }
  return out;
}

struct NotationUse {
  const Declaration* decl;
  const Notation* notation;
  bool ambiguous = false;
};

struct Tables {
  std::map<std::string, NotationUse> prefix;  // first item is a delimiter
  std::map<std::string, NotationUse> infix;   // leading arg, then delimiter
  const Scope* scope = nullptr;

  static Tables build(const Scope& scope) {
    Tables t;
    t.scope = &scope;
    auto put = [](std::map<std::string, NotationUse>& m, const std::string& key,
                  NotationUse use) {
      auto [it, fresh] = m.emplace(key, use);
      if (!fresh && it->second.decl != use.decl) it->second.ambiguous = true;
    };
    for (const auto& [name, d] : scope.constants) {
      (void)name;
      if (!d->notation || d->notation->items.empty()) continue;
      const Notation& n = *d->notation;
      if (n.pureApplication()) continue;
      const auto& first = n.items.front();
      if (first.kind == Notation::Item::Kind::Delimiter) {
        put(t.prefix, first.text, {d, &n});
      } else if (first.kind == Notation::Item::Kind::Arg) {
        for (const auto& it : n.items) {
          if (it.kind == Notation::Item::Kind::Delimiter) {
            put(t.infix, it.text, {d, &n});
            break;
          }
        }
      }
    }
    return t;
  }
};

class ExprParser {
public:
  ExprParser(std::vector<Token> tokens, const Scope& scope, Context locals,
             MetaSink* sink, const SourcePos& base)
      : tokens_(std::move(tokens)),
        scope_(scope),
        tables_(Tables::build(scope)),
        locals_(std::move(locals)),
        sink_(sink),
        base_(base) {}

  ExprPtr parseAll() {
    ExprPtr e = parseExpr(kBoundAny);
    if (pos_ != tokens_.size())
      fail("unexpected token '" + peek().text + "'", peek().pos);
    return e;
  }

private:
  std::vector<Token> tokens_;
  const Scope& scope_;
  Tables tables_;
  Context locals_;
  MetaSink* sink_;
  SourcePos base_;
  size_t pos_ = 0;

  [[noreturn]] void fail(const std::string& msg, const SourcePos& p) {
    throw ParseError{msg, p};
  }
  bool atEnd() const { return pos_ >= tokens_.size(); }
  const Token& peek(size_t k = 0) const {
    static Token eof{"<end>", {}, false};
    return pos_ + k < tokens_.size() ? tokens_[pos_ + k] : eof;
  }
  Token next() {
    if (atEnd()) fail("unexpected end of expression", base_);
    return tokens_[pos_++];
  }
  void expect(const std::string& text) {
    if (atEnd() || peek().text != text)
      fail("expected '" + text + "' but found '" + peek().text + "'",
           atEnd() ? base_ : peek().pos);
    pos_++;
  }

  ExprPtr makeMeta(const std::string& hint) {
    if (!sink_) fail("implicit arguments are not allowed here", peek().pos);
    return sink_->makeMeta(locals_, hint);
  }

  ExprPtr applyConst() const {
    return Expr::constant(scope_.applicationConstant);
  }

  ExprPtr mkApply(ExprPtr f, ExprPtr a) {
    if (scope_.applicationConstant.empty())
      fail("no application constant in scope", peek().pos);
    return Expr::complex(scope_.applicationConstant, Context{},
                         {std::move(f), std::move(a)});
  }

  ExprPtr mkSpineOf(const std::string& head, const std::map<int, ExprPtr>& args,
                    int maxIdx) {
    // arrow is display sugar for a non-dependent Pi
    if (head == "arrow" && maxIdx == 2 && scope_.has("Pi") && args.count(1) &&
        args.count(2)) {
      const ExprPtr& dom = args.at(1);
      const ExprPtr& cod = args.at(2);
      std::set<std::string> used = freeVars(cod);
      std::string x = freshName("x", used);
      Context bs;
      bs.entries.push_back({x, dom, false});
      return Expr::complex("Pi", std::move(bs), {cod});
    }
    ExprPtr cur = Expr::constant(head);
    for (int i = 1; i <= maxIdx; ++i) {
      auto it = args.find(i);
      cur = mkApply(std::move(cur),
                    it != args.end() ? it->second : makeMeta("m"));
    }
    return cur;
  }

  bool tokenStartsAtom() const {
    if (atEnd()) return false;
    const Token& t = peek();
    if (t.text == "(") return true;
    if (t.text == "rec" && scope_.recEnabled()) return true;
    auto pi = tables_.prefix.find(t.text);
    if (pi != tables_.prefix.end()) return true;
    if (locals_.binds(t.text)) return true;
    if (scope_.has(t.text)) return true;
    if (t.numeral && scope_.numeralsAllowed()) return true;
    return false;
  }

  // consume %{...} fills into the lowest unfilled implicit positions
  void consumeFills(const Notation& n, std::map<int, ExprPtr>& args) {
    while (!atEnd() && peek().text == "%{") {
      next();
      ExprPtr e = parseExpr(kBoundAny);
      expect("}");
      bool placed = false;
      for (int idx : n.implicitPositions()) {
        if (!args.count(idx)) {
          args[idx] = e;
          placed = true;
          break;
        }
      }
      if (!placed) {
        for (const auto& item : n.items) {
          if (item.kind == Notation::Item::Kind::ImplicitArg &&
              !args.count(item.index)) {
            args[item.index] = e;
            placed = true;
            break;
          }
        }
      }
      if (!placed) fail("too many implicit argument fills", peek().pos);
    }
  }

  long slotBound(const Notation& n, size_t itemIdx) const {
    // find what follows this argument slot, skipping implicit markers
    for (size_t j = itemIdx + 1; j < n.items.size(); ++j) {
      const auto& it = n.items[j];
      if (it.kind == Notation::Item::Kind::ImplicitArg) continue;
      if (it.kind == Notation::Item::Kind::Delimiter) return kBoundAny;
      return kBoundAtom;  // another argument follows directly
    }
    // trailing slot: binders extend maximally to the right
    return n.hasBinder() ? kBoundAny : n.precedence;
  }

  struct BinderEntry {
    std::string name;
    ExprPtr type;  // annotation, or a fresh meta when omitted
  };

  // names separated by commas; a `: T` annotation attaches to the name
  // directly before it ({A, X:A} leaves A's type open for reconstruction).
  // Each name is bound immediately so later annotations can mention it;
  // callers restore locals_ afterwards.
  std::vector<BinderEntry> parseBinderGroup() {
    std::vector<BinderEntry> entries;
    for (;;) {
      if (atEnd()) fail("unexpected end in binder", base_);
      Token t = next();
      if (t.numeral || !isWordChar(static_cast<unsigned char>(t.text[0])))
        fail("expected a bound-variable name, found '" + t.text + "'", t.pos);
      ExprPtr ty;
      if (!atEnd() && peek().text == ":") {
        next();
        ty = parseExpr(kBoundAny);
      } else {
        ty = makeMeta("m");
      }
      locals_ = locals_.extended(t.text, ty);
      entries.push_back({t.text, ty});
      if (!atEnd() && peek().text == ",") {
        next();
        continue;
      }
      break;
    }
    return entries;
  }

  ExprPtr parseNotation(const NotationUse& use) {
    if (use.ambiguous)
      fail("ambiguous notation trigger for '" + use.decl->name + "'",
           peek().pos);
    const Notation& n = *use.notation;
    std::map<int, ExprPtr> args;
    std::vector<BinderEntry> binder;
    bool sawBinder = false;
    int binderBodyIdx = -1;
    Context savedLocals = locals_;

    for (size_t idx = 1; idx < n.items.size(); ++idx) {
      const auto& item = n.items[idx];
      switch (item.kind) {
        case Notation::Item::Kind::Delimiter:
          consumeFills(n, args);
          expect(item.text);
          break;
        case Notation::Item::Kind::Arg: {
          consumeFills(n, args);
          if (sawBinder && binderBodyIdx < 0) binderBodyIdx = item.index;
          args[item.index] = parseExpr(slotBound(n, idx));
          break;
        }
        case Notation::Item::Kind::ImplicitArg:
          consumeFills(n, args);
          if (!atEnd() && peek().text == "%{") {
            next();
            args[item.index] = parseExpr(kBoundAny);
            expect("}");
          } else {
            args[item.index] = makeMeta("m");
          }
          break;
        case Notation::Item::Kind::VarBinding:
          binder = parseBinderGroup();  // extends locals for the body
          sawBinder = true;
          break;
      }
    }
    consumeFills(n, args);
    locals_ = std::move(savedLocals);
    for (int idx : n.implicitPositions())
      if (!args.count(idx)) args[idx] = makeMeta("m");

    if (sawBinder) {
      // comma groups desugar to right-nested single binders
      if (binderBodyIdx < 0 || args.size() != 1)
        fail("binder notation of '" + use.decl->name +
                 "' must have exactly one argument slot",
             peek().pos);
      ExprPtr cur = args[binderBodyIdx];
      for (size_t bi = binder.size(); bi-- > 0;) {
        Context bs;
        bs.entries.push_back({binder[bi].name, binder[bi].type, false});
        cur = Expr::complex(use.decl->name, std::move(bs), {cur});
      }
      return cur;
    }
    return mkSpineOf(use.decl->name, args, n.maxIndex());
  }

  ExprPtr parseRecForm() {
    // rec w , c , g , h ==> e to C
    ExprPtr w = parseExpr(kBoundAny);
    expect(",");
    Token c = next();
    expect(",");
    Token g = next();
    expect(",");
    Token h = next();
    expect("==>");
    Context saved = locals_;
    locals_ = locals_.extended(c.text, nullptr)
                  .extended(g.text, nullptr)
                  .extended(h.text, nullptr);
    ExprPtr e = parseExpr(kBoundAny);
    locals_ = saved;
    expect("to");
    Context savedC = locals_;
    locals_ = locals_.extended(c.text, nullptr);
    ExprPtr motive = parseExpr(kBoundAny);
    locals_ = savedC;
    Context bs;
    bs.entries.push_back({c.text, nullptr, false});
    bs.entries.push_back({g.text, nullptr, false});
    bs.entries.push_back({h.text, nullptr, false});
    return Expr::complex("rec", std::move(bs), {w, e, motive});
  }

  ExprPtr parseMatchForm(ExprPtr scrutinee) {
    // t match annotation , y . e0 | e1 | ... to C
    ExprPtr annotation = parseExpr(kBoundAny);
    expect(",");
    Token y = next();
    expect(".");
    Context saved = locals_;
    locals_ = locals_.extended(y.text, nullptr);
    std::vector<ExprPtr> branches;
    if (!atEnd() && peek().text != "to") {
      branches.push_back(parseExpr(kBoundAny));
      while (!atEnd() && peek().text == "|") {
        next();
        branches.push_back(parseExpr(kBoundAny));
      }
    }
    expect("to");
    ExprPtr motive = parseExpr(kBoundAny);
    locals_ = saved;
    Context bs;
    bs.entries.push_back({y.text, nullptr, false});
    std::vector<ExprPtr> args{std::move(scrutinee), std::move(annotation),
                              std::move(motive)};
    for (auto& b : branches) args.push_back(std::move(b));
    return Expr::complex("enumMatch", std::move(bs), std::move(args));
  }

  ExprPtr parseAtom() {
    if (atEnd()) fail("unexpected end of expression", base_);
    Token t = peek();
    if (t.text == "(") {
      next();
      ExprPtr e = parseExpr(kBoundAny);
      expect(")");
      return e;
    }
    if (t.text == "rec" && scope_.recEnabled()) {
      next();
      return parseRecForm();
    }
    auto pi = tables_.prefix.find(t.text);
    if (pi != tables_.prefix.end()) {
      next();
      return parseNotation(pi->second);
    }
    if (locals_.binds(t.text)) {
      next();
      return Expr::var(t.text);
    }
    if (scope_.has(t.text)) {
      next();
      return Expr::constant(t.text);
    }
    if (t.numeral && scope_.numeralsAllowed()) {
      next();
      return Expr::constant(t.text);
    }
    fail("unbound identifier '" + t.text + "'", t.pos);
  }

  ExprPtr parseExpr(long bound) {
    ExprPtr left = parseAtom();
    for (;;) {
      if (atEnd()) break;
      const Token& t = peek();
      auto ii = tables_.infix.find(t.text);
      if (ii != tables_.infix.end() && ii->second.notation->precedence >= bound) {
        if (ii->second.ambiguous)
          fail("ambiguous notation trigger '" + t.text + "'", t.pos);
        const Notation& n = *ii->second.notation;
        // the leading argument is what we already parsed
        std::map<int, ExprPtr> args;
        args[n.items.front().index] = left;
        size_t idx = 1;
        // skip implicit markers before the trigger delimiter
        while (idx < n.items.size() &&
               n.items[idx].kind == Notation::Item::Kind::ImplicitArg)
          idx++;
        expect(n.items[idx].text);  // the trigger delimiter
        for (size_t j = idx + 1; j < n.items.size(); ++j) {
          const auto& item = n.items[j];
          if (item.kind == Notation::Item::Kind::Delimiter) {
            consumeFills(n, args);
            expect(item.text);
          } else if (item.kind == Notation::Item::Kind::Arg) {
            consumeFills(n, args);
            args[item.index] = parseExpr(slotBound(n, j));
          } else if (item.kind == Notation::Item::Kind::ImplicitArg) {
            consumeFills(n, args);
            if (!atEnd() && peek().text == "%{") {
              next();
              args[item.index] = parseExpr(kBoundAny);
              expect("}");
            } else {
              args[item.index] = makeMeta("m");
            }
          } else {
            fail("binder markers are only supported at the front of a notation",
                 t.pos);
          }
        }
        consumeFills(n, args);
        for (int k : n.implicitPositions())
          if (!args.count(k)) args[k] = makeMeta("m");
        left = mkSpineOf(ii->second.decl->name, args,
                         n.maxIndex());
        continue;
      }
      if (t.text == "match" && scope_.matchEnabled() && 0 >= bound) {
        next();
        left = parseMatchForm(left);
        continue;
      }
      if (kAppPrec >= bound && tokenStartsAtom()) {
        left = mkApply(left, parseAtom());
        continue;
      }
      break;
    }
    return left;
  }
};

}  // namespace

Scope buildScope(const std::vector<const Declaration*>& decls) {
  Scope s;
  for (const auto* d : decls) {
    s.constants[d->name] = d;
    if (d->notation && !d->notation->items.empty() &&
        d->notation->pureApplication() && d->notation->maxIndex() == 2)
      s.applicationConstant = d->name;
  }
  return s;
}

ExprPtr parseExpression(const std::string& text, const SourcePos& base,
                        const Scope& scope, const Context& locals,
                        MetaSink* sink) {
  auto tokens = lexExpr(text, base);
  if (tokens.empty()) throw ParseError{"empty expression", base};
  ExprParser p(std::move(tokens), scope, locals, sink, base);
  return p.parseAll();
}

// ---------------------------------------------------------------------------
// theory file structure
// ---------------------------------------------------------------------------

namespace {

struct Line {
  std::string text;
  int number;
  int indent;
};

std::vector<Line> splitLines(const std::string& text) {
  std::vector<Line> out;
  std::istringstream is(text);
  std::string raw;
  int num = 0;
  while (std::getline(is, raw)) {
    num++;
    // strip // comments
    auto pos = raw.find("//");
    if (pos != std::string::npos) raw = raw.substr(0, pos);
    int indent = 0;
    size_t i = 0;
    while (i < raw.size() && (raw[i] == ' ' || raw[i] == '\t')) {
      indent += raw[i] == '\t' ? 4 : 1;
      i++;
    }
    std::string body = raw.substr(i);
    while (!body.empty() && std::isspace(static_cast<unsigned char>(body.back())))
      body.pop_back();
    if (body.empty()) continue;
    out.push_back({body, num, indent});
  }
  return out;
}

std::vector<std::string> words(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  std::string w;
  while (is >> w) out.push_back(w);
  return out;
}

// split a declaration line into name / type / definiens / notation / role,
// cutting only at top-level marker words
struct DeclParts {
  std::string name;
  std::string type, definiens, notation, role;
};

DeclParts splitDecl(const std::string& text, const SourcePos& pos) {
  DeclParts out;
  auto ws = words(text);
  if (ws.empty()) throw ParseError{"empty declaration", pos};
  out.name = ws[0];

  // scan the rest, tracking bracket depth; markers count only at depth 0
  enum Part { None, Type, Definiens, Notation, Role } cur = None;
  int depth = 0;
  auto append = [&](Part p, const std::string& w) {
    std::string* dst = nullptr;
    switch (p) {
      case Type: dst = &out.type; break;
      case Definiens: dst = &out.definiens; break;
      case Notation: dst = &out.notation; break;
      case Role: dst = &out.role; break;
      case None: throw ParseError{"malformed declaration '" + out.name + "'", pos};
    }
    if (!dst->empty()) *dst += " ";
    *dst += w;
  };
  size_t i = text.find(ws[0]) + ws[0].size();
  // tokenize by words but keep brackets balanced via character scan
  std::string word;
  // markers only move forward: name : type = definiens # notation role r
  auto flush = [&]() {
    if (word.empty()) return;
    if (depth == 0) {
      if (word == ":" && cur < Type) { cur = Type; word.clear(); return; }
      if (word == "=" && cur < Definiens) { cur = Definiens; word.clear(); return; }
      if (word == "#" && cur < Notation) { cur = Notation; word.clear(); return; }
      if (word == "role" && cur < Role) { cur = Role; word.clear(); return; }
    }
    append(cur, word);
    word.clear();
  };
  for (; i < text.size(); ++i) {
    char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      flush();
      continue;
    }
    if (c == '(' || c == '[' || c == '{') depth++;
    if (c == ')' || c == ']' || c == '}') depth--;
    word += c;
  }
  flush();
  return out;
}

}  // namespace

Declaration parseDeclLine(const std::string& text, const SourcePos& pos) {
  auto parts = splitDecl(text, pos);
  Declaration d;
  d.name = parts.name;
  d.pos = pos;
  if (!parts.type.empty()) d.typeSrc = {parts.type, pos};
  if (!parts.definiens.empty()) d.definiensSrc = {parts.definiens, pos};
  if (!parts.notation.empty()) {
    try {
      d.notation = compileNotation(parts.notation);
    } catch (const NotationError& e) {
      throw ParseError{e.message, pos};
    }
  }
  if (!parts.role.empty()) d.role = parts.role;
  return d;
}

std::vector<TheoryPtr> parseTheoryFile(const std::string& text,
                                       const std::string& filename) {
  std::vector<TheoryPtr> out;
  auto lines = splitLines(text);
  size_t i = 0;

  auto posOf = [&](const Line& l) { return SourcePos{filename, l.number, l.indent + 1}; };

  while (i < lines.size()) {
    const Line& head = lines[i];
    auto hw = words(head.text);
    if (hw.empty() || hw[0] != "theory")
      throw ParseError{"expected 'theory', found '" + head.text + "'", posOf(head)};
    if (hw.size() < 2) throw ParseError{"theory needs a name", posOf(head)};
    auto th = std::make_shared<Theory>();
    th->name = hw[1];
    th->pos = posOf(head);
    size_t k = 2;
    if (k < hw.size() && hw[k] == ":") {
      if (k + 1 >= hw.size())
        throw ParseError{"missing meta-theory name", posOf(head)};
      th->metaTheory = hw[k + 1];
      k += 2;
    }
    if (k >= hw.size() || hw[k] != "=")
      throw ParseError{"expected '=' in theory header", posOf(head)};
    i++;

    // body until matching "end"
    bool closed = false;
    while (i < lines.size()) {
      const Line& l = lines[i];
      auto lw = words(l.text);
      if (lw[0] == "end") {
        i++;
        closed = true;
        break;
      }
      if (lw[0] == "theory")
        throw ParseError{"missing 'end' before next theory", posOf(l)};

      if (lw[0] == "include") {
        if (lw.size() != 2)
          throw ParseError{"include needs exactly one theory name", posOf(l)};
        th->add(Include{lw[1], posOf(l)});
        i++;
        continue;
      }
      if (lw[0] == "rule") {
        if (lw.size() != 2)
          throw ParseError{"rule needs exactly one identifier", posOf(l)};
        th->add(RuleRef{lw[1], posOf(l)});
        i++;
        continue;
      }
      if (lw[0] == "induct" || lw[0] == "def") {
        FeatureDecl fd;
        fd.keyword = lw[0];
        fd.pos = posOf(l);
        if (lw.size() < 2)
          throw ParseError{fd.keyword + " needs a name", posOf(l)};
        fd.name = lw[1];
        // params between ( and ), up to trailing '='
        auto open = l.text.find('(');
        auto close = l.text.rfind(')');
        if (open != std::string::npos && close != std::string::npos && close > open)
          fd.paramsSrc = l.text.substr(open + 1, close - open - 1);
        if (l.text.back() != '=')
          throw ParseError{fd.keyword + " header must end with '='", posOf(l)};
        i++;
        while (i < lines.size() && words(lines[i].text)[0] != "end") {
          const Line& bl = lines[i];
          fd.body.push_back({bl.text, posOf(bl)});
          i++;
        }
        if (i >= lines.size())
          throw ParseError{"missing 'end' for " + fd.keyword + " block", fd.pos};
        i++;  // consume end
        th->add(std::move(fd));
        continue;
      }

      // ordinary declaration; deeper-indented following lines continue it
      std::string joined = l.text;
      SourcePos dpos = posOf(l);
      size_t j = i + 1;
      while (j < lines.size() && lines[j].indent > l.indent) {
        auto jw = words(lines[j].text);
        if (jw[0] == "end" || jw[0] == "theory") break;
        joined += " " + lines[j].text;
        j++;
      }
      i = j;
      th->add(parseDeclLine(joined, dpos));
    }
    if (!closed)
      throw ParseError{"missing 'end' for theory " + th->name, th->pos};
    out.push_back(std::move(th));
  }
  return out;
}

}  // namespace kmt
