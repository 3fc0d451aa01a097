#pragma once

#include <cctype>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "foamcalc/foams.hpp"
#include "foamcalc/webs.hpp"

namespace foamcalc {

/// Parse failure with the 1-based source location of the offending token.
struct ParseError : std::runtime_error {
  int line, col;
  ParseError(int l, int c, const std::string& msg)
      : std::runtime_error("line " + std::to_string(l) + ", col " +
                           std::to_string(c) + ": " + msg),
        line(l),
        col(c) {}
};

namespace dsldetail {

struct Token {
  std::string text;
  int line, col;
  size_t offset;
  bool is_word;  // identifier, number, or path chunk
};

/// Statements are separated by ';' or newline; '#' comments to end of line.
/// Words cover identifiers, integers, and path characters; everything else
/// is single-character punctuation.
inline std::vector<std::vector<Token>> tokenize(const std::string& text) {
  std::vector<std::vector<Token>> stmts(1);
  int line = 1, col = 1;
  auto is_wordc = [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' ||
           c == '.' || c == '/';
  };
  size_t i = 0;
  while (i < text.size()) {
    char c = text[i];
    if (c == '#') {
      while (i < text.size() && text[i] != '\n') ++i;
      continue;
    }
    if (c == '\n' || c == ';') {
      if (!stmts.back().empty()) stmts.emplace_back();
      ++i;
      if (c == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      ++col;
      continue;
    }
    Token t{"", line, col, i, false};
    if (is_wordc(c)) {
      while (i < text.size() && is_wordc(text[i])) {
        t.text += text[i++];
        ++col;
      }
      t.is_word = true;
    } else {
      t.text = std::string(1, c);
      ++i;
      ++col;
    }
    stmts.back().push_back(std::move(t));
  }
  if (stmts.back().empty()) stmts.pop_back();
  return stmts;
}

/// Sequential reader over one statement.
class Stmt {
 public:
  explicit Stmt(const std::vector<Token>& toks) : toks_(toks) {}

  bool done() const { return pos_ >= toks_.size(); }
  const Token& peek() const {
    if (done()) {
      const Token& last = toks_.back();
      throw ParseError(last.line, last.col + (int)last.text.size(),
                       "unexpected end of statement");
    }
    return toks_[pos_];
  }
  const Token& next() {
    const Token& t = peek();
    ++pos_;
    return t;
  }
  void expect(const std::string& s) {
    const Token& t = next();
    if (t.text != s)
      throw ParseError(t.line, t.col, "expected '" + s + "', got '" + t.text + "'");
  }
  bool accept(const std::string& s) {
    if (!done() && toks_[pos_].text == s) {
      ++pos_;
      return true;
    }
    return false;
  }
  [[noreturn]] void fail(const std::string& msg) const {
    if (toks_.empty()) throw ParseError(1, 1, msg);
    const Token& t = pos_ < toks_.size() ? toks_[pos_] : toks_.back();
    throw ParseError(t.line, t.col, msg);
  }

  int read_int() {
    const Token& t = next();
    if (!t.is_word || t.text.find_first_not_of("0123456789") != std::string::npos)
      throw ParseError(t.line, t.col, "expected an integer, got '" + t.text + "'");
    return std::stoi(t.text);
  }

  /// "(a,b,...)" with positive entries.
  std::vector<int> read_tuple() {
    expect("(");
    std::vector<int> out;
    out.push_back(read_int());
    while (accept(",")) out.push_back(read_int());
    expect(")");
    return out;
  }

  const std::vector<Token>& tokens() const { return toks_; }
  size_t pos() const { return pos_; }

 private:
  const std::vector<Token>& toks_;
  size_t pos_ = 0;
};

/// expr := term (('+'|'-') term)*; term := factor ('*' factor)*;
/// factor := '-' factor | primary ('^' int)?; primary := int | eN | '(' expr ')'
/// eN is the N-th elementary symmetric polynomial in the block's variables
/// (zero when N exceeds the variable count).
inline MultiPoly parse_expr(Stmt& st, int nvars);

inline MultiPoly parse_primary(Stmt& st, int nvars) {
  const Token& t = st.peek();
  if (t.text == "(") {
    st.next();
    MultiPoly p = parse_expr(st, nvars);
    st.expect(")");
    return p;
  }
  if (!t.is_word) st.fail("expected a polynomial term, got '" + t.text + "'");
  st.next();
  if (t.text.find_first_not_of("0123456789") == std::string::npos)
    return MultiPoly::constant(nvars, std::stoi(t.text));
  if (t.text.size() >= 2 && t.text[0] == 'e' &&
      t.text.find_first_not_of("0123456789", 1) == std::string::npos) {
    int j = std::stoi(t.text.substr(1));
    if (j < 1) throw ParseError(t.line, t.col, "e0 is not a generator");
    if (j > nvars) return MultiPoly(nvars);
    return schur(Partition(std::vector<int>(j, 1)), nvars);
  }
  throw ParseError(t.line, t.col,
                   "unknown polynomial token '" + t.text +
                       "' (use integers and e1,e2,...)");
}

inline MultiPoly parse_factor(Stmt& st, int nvars) {
  if (st.accept("-")) return Rational(-1) * parse_factor(st, nvars);
  MultiPoly p = parse_primary(st, nvars);
  if (st.accept("^")) {
    int e = st.read_int();
    MultiPoly r = MultiPoly::one(nvars);
    for (int i = 0; i < e; ++i) r = r * p;
    return r;
  }
  return p;
}

inline MultiPoly parse_term(Stmt& st, int nvars) {
  MultiPoly p = parse_factor(st, nvars);
  while (st.accept("*")) p = p * parse_factor(st, nvars);
  return p;
}

inline MultiPoly parse_expr(Stmt& st, int nvars) {
  MultiPoly p = parse_term(st, nvars);
  while (!st.done()) {
    if (st.accept("+"))
      p += parse_term(st, nvars);
    else if (st.accept("-"))
      p -= parse_term(st, nvars);
    else
      break;
  }
  return p;
}

inline Layer parse_layer(Stmt& st) {
  const Token& kw = st.next();
  Layer l{};
  if (kw.text == "merge") {
    l.kind = Layer::Kind::Merge;
    int s = st.read_int();
    if (s < 1) throw ParseError(kw.line, kw.col, "strand indices are 1-based");
    l.slot = s - 1;
  } else if (kw.text == "split") {
    l.kind = Layer::Kind::Split;
    int s = st.read_int();
    if (s < 1) throw ParseError(kw.line, kw.col, "strand indices are 1-based");
    l.slot = s - 1;
    auto ab = st.read_tuple();
    if (ab.size() != 2)
      st.fail("split takes a thickness pair (a,b)");
    l.a = ab[0];
    l.b = ab[1];
  } else {
    throw ParseError(kw.line, kw.col,
                     "expected 'merge' or 'split', got '" + kw.text + "'");
  }
  if (!st.done()) st.fail("trailing tokens after layer directive");
  return l;
}

}  // namespace dsldetail

/// `web k=<level> source=(<parts>)` followed by one merge/split per
/// statement.  Strand indices are 1-based.
inline BlWeb parse_web(const std::string& text) {
  using namespace dsldetail;
  auto stmts = tokenize(text);
  if (stmts.empty()) throw ParseError(1, 1, "empty web description");
  Stmt head(stmts[0]);
  head.expect("web");
  head.expect("k");
  head.expect("=");
  int k = head.read_int();
  head.expect("source");
  head.expect("=");
  Composition src(head.read_tuple());
  if (!head.done()) head.fail("trailing tokens after web header");
  if (src.level() != k)
    head.fail("source " + src.str() + " has level " +
              std::to_string(src.level()) + ", header says k=" +
              std::to_string(k));
  std::vector<Layer> layers;
  for (size_t i = 1; i < stmts.size(); ++i) {
    Stmt st(stmts[i]);
    Layer l = parse_layer(st);
    layers.push_back(l);
    try {
      BlWeb(src, layers);
    } catch (const std::invalid_argument& e) {
      Stmt at(stmts[i]);
      at.fail(e.what());
    }
  }
  return BlWeb(src, std::move(layers));
}

/// Resolves a referenced web file to its text.
using FileLoader = std::function<std::string(const std::string& path)>;

namespace dsldetail {

/// Shared head handling for `foam on ...` and `trace on ...`: either a path
/// to a web file or an inline `web k=... source=...` header whose layer
/// statements follow (they are disjoint from the generator keywords).
inline BlWeb parse_on_clause(const std::vector<std::vector<Token>>& stmts,
                             size_t& first_body, const FileLoader& loader,
                             const std::string& full_text) {
  Stmt head(stmts[0]);
  head.next();  // foam | trace
  head.expect("on");
  const Token& what = head.peek();
  first_body = 1;
  if (what.text == "web") {
    // inline: re-parse from the header token onward, stopping the layer
    // scan at the first generator statement
    std::string sub = full_text.substr(what.offset);
    auto substmts = tokenize(sub);
    std::vector<std::vector<Token>> webpart{substmts[0]};
    size_t used = 1;
    for (; used < substmts.size(); ++used) {
      const std::string& kw = substmts[used].front().text;
      if (kw != "merge" && kw != "split") break;
      webpart.push_back(substmts[used]);
    }
    first_body = 1;
    // count how many original statements the web consumed: the header was a
    // suffix of stmts[0], and each layer statement maps one-to-one
    first_body += used - 1;
    std::string webtext;
    for (const auto& s : webpart) {
      for (const auto& t : s) webtext += t.text + " ";
      webtext += ";";
    }
    return parse_web(webtext);
  }
  if (!loader)
    throw ParseError(what.line, what.col, "no loader for web file reference");
  std::string path;
  while (!head.done()) path += head.next().text;
  std::string text;
  try {
    text = loader(path);
  } catch (const std::exception& e) {
    throw ParseError(what.line, what.col,
                     "cannot load '" + path + "': " + e.what());
  }
  return parse_web(text);
}

inline FoamGen parse_foam_gen(Stmt& st, const BlWeb& cur) {
  const Token& kw = st.next();
  const std::string& k = kw.text;
  auto read_pos = [&](bool with_slot_default) {
    int h = st.read_int();
    int s = 1;
    if (st.accept(",")) s = st.read_int();
    else if (!with_slot_default) st.fail("expected ',<strand>'");
    if (s < 1) throw ParseError(kw.line, kw.col, "strand indices are 1-based");
    return std::pair<int, int>{h, s - 1};
  };
  auto check_pair = [&](Stmt& s2, int a, int b) {
    if (s2.done() || s2.peek().text != "(") return;
    auto ab = s2.read_tuple();
    if (ab.size() != 2 || ab[0] != a || ab[1] != b)
      s2.fail("thickness annotation does not match the web: expected (" +
              std::to_string(a) + "," + std::to_string(b) + ")");
  };
  if (k == "exchange") {
    int h = st.read_int();
    if (!st.done()) st.fail("trailing tokens after exchange");
    return FoamGen::exchange(h);
  }
  if (k == "dot") {
    auto [h, s] = read_pos(true);
    if (h < 0 || h > cur.num_layers())
      throw ParseError(kw.line, kw.col, "dot height out of range");
    const Composition& c = cur.comp_at(h);
    if (s >= c.length())
      throw ParseError(kw.line, kw.col, "dot strand out of range");
    MultiPoly p = parse_expr(st, c[s]);
    if (!st.done()) st.fail("trailing tokens after dot polynomial");
    return FoamGen::dot(h, s, std::move(p));
  }
  if (k == "zip" || k == "unzip" || k == "death" || k == "birth") {
    auto [h, s] = read_pos(true);
    FoamGen g;
    if (k == "zip") {
      g = FoamGen::zip(h, s);
    } else if (k == "unzip") {
      g = FoamGen::unzip(h, s);
    } else if (k == "death") {
      g = FoamGen::digon_death(h, s);
    } else {
      if (st.done() || st.peek().text != "(")
        st.fail("birth takes a thickness pair (a,b)");
      auto ab = st.read_tuple();
      if (ab.size() != 2) st.fail("birth takes a thickness pair (a,b)");
      g = FoamGen::digon_birth(h, s, ab[0], ab[1]);
      if (!st.done()) st.fail("trailing tokens after birth");
      return g;
    }
    // optional thickness annotation, checked after the move applies
    apply_foam_gen(cur, g);
    check_pair(st, g.a, g.b);
    if (!st.done()) st.fail("trailing tokens after generator");
    return g;
  }
  throw ParseError(kw.line, kw.col, "unknown foam generator '" + k + "'");
}

}  // namespace dsldetail

/// `foam on <webfile>` (or an inline web) followed by generator statements:
/// zip/unzip/birth/death/dot/exchange at `<height>[,<strand>]`, with
/// optional `(a,b)` thickness annotations and polynomial decorations in
/// e1,e2,...  Strand indices are 1-based, heights 0-based.
inline FoamWord parse_foam(const std::string& text,
                           const FileLoader& loader = nullptr) {
  using namespace dsldetail;
  auto stmts = tokenize(text);
  if (stmts.empty() || stmts[0].front().text != "foam")
    throw ParseError(1, 1, "expected a 'foam on ...' header");
  size_t first_body = 1;
  BlWeb src = parse_on_clause(stmts, first_body, loader, text);
  BlWeb cur = src;
  std::vector<FoamGen> gens;
  for (size_t i = first_body; i < stmts.size(); ++i) {
    Stmt st(stmts[i]);
    FoamGen g;
    try {
      g = parse_foam_gen(st, cur);
      cur = apply_foam_gen(cur, g);
    } catch (const std::invalid_argument& e) {
      Stmt at(stmts[i]);
      at.fail(e.what());
    }
    gens.push_back(std::move(g));
  }
  return FoamWord(std::move(src), std::move(gens));
}

/// `trace on <webfile>` (or inline web) with `dot <height>,<strand> <expr>`
/// statements decorating the annular closure's edges.
inline CappedTraceFoam parse_trace(const std::string& text,
                                   const FileLoader& loader = nullptr) {
  using namespace dsldetail;
  auto stmts = tokenize(text);
  if (stmts.empty() || stmts[0].front().text != "trace")
    throw ParseError(1, 1, "expected a 'trace on ...' header");
  size_t first_body = 1;
  CappedTraceFoam G;
  G.web = parse_on_clause(stmts, first_body, loader, text);
  for (size_t i = first_body; i < stmts.size(); ++i) {
    Stmt st(stmts[i]);
    st.expect("dot");
    int h = st.read_int();
    st.expect(",");
    int s = st.read_int();
    if (s < 1) st.fail("strand indices are 1-based");
    --s;
    if (h < 0 || h > G.web.num_layers()) st.fail("dot height out of range");
    const Composition& c = G.web.comp_at(h);
    if (s >= c.length()) st.fail("dot strand out of range");
    MultiPoly p = parse_expr(st, c[s]);
    if (!st.done()) st.fail("trailing tokens after dot polynomial");
    auto it = G.dots.find({h, s});
    if (it == G.dots.end())
      G.dots.emplace(std::pair<int, int>{h, s}, std::move(p));
    else
      it->second = it->second * p;
  }
  try {
    validate_trace_dots(G);
  } catch (const std::invalid_argument& e) {
    throw ParseError(1, 1, e.what());
  }
  return G;
}

enum class DslKind { Web, Foam, Trace };

/// Dispatch on the first keyword of the file.
inline DslKind classify_dsl(const std::string& text) {
  auto stmts = dsldetail::tokenize(text);
  if (stmts.empty()) throw ParseError(1, 1, "empty input");
  const std::string& kw = stmts[0].front().text;
  if (kw == "web") return DslKind::Web;
  if (kw == "foam") return DslKind::Foam;
  if (kw == "trace") return DslKind::Trace;
  const auto& t = stmts[0].front();
  throw ParseError(t.line, t.col,
                   "expected 'web', 'foam', or 'trace', got '" + kw + "'");
}

}  // namespace foamcalc
