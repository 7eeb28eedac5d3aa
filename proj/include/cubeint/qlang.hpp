#pragma once

// Hand-written LL(1) front-end for the textual formats.
//
//   query     := "SELECT" agg ("," agg)* "BY" grouper ("," grouper)*
//                ["WHERE" atom ("AND" atom)*]
//   agg       := ("sum"|"avg"|"count"|"min"|"max") "(" ident ")"
//   grouper   := ident "." ident
//   atom      := ident "." ident "IN" "{" literal ("," literal)* "}"
//   condition := [atom ("AND" atom)*]
//   belief    := "P" "(" target ["|" anchor ("," anchor)*] ")" "=" number
//   target    := "label" "(" measure ")" "=" literal
//              | measure "IN" (interval | "{" number ("," number)* "}")
//              | measure "=" number
//   anchor    := ident ["." ident] "=" literal
//   interval  := ("[" | "(") number ".." number ("]" | ")")
//   labelrule := measure ":" interval "->" literal
//              | ("ORDER" | "SCALE") literal ("<" literal)*
//
// Keywords and aggregate names are case-insensitive. A literal is a bare
// word ([A-Za-z0-9_/+-] and non-ASCII bytes) or a double-quoted string.

#include <cctype>
#include <charconv>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "cubeint/beliefs.hpp"
#include "cubeint/engine.hpp"
#include "cubeint/error.hpp"

namespace cubeint {

/// Unresolvable dimension, level, member, or measure name, with its byte offset.
class UnknownIdentifierError : public Error {
 public:
  UnknownIdentifierError(std::size_t offset, const std::string& what)
      : Error(Errc::unknown_identifier, what + " at byte " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

namespace qlang {

enum class Tok { word, string, lparen, rparen, lbrace, rbrace, lbracket, rbracket, comma, dot, dotdot, pipe, eq, lt, colon, arrow, end };

struct Token {
  Tok kind = Tok::end;
  std::string text;
  std::size_t offset = 0;
};

inline const char* tok_name(Tok t) {
  switch (t) {
    case Tok::word: return "identifier";
    case Tok::string: return "string";
    case Tok::lparen: return "'('";
    case Tok::rparen: return "')'";
    case Tok::lbrace: return "'{'";
    case Tok::rbrace: return "'}'";
    case Tok::lbracket: return "'['";
    case Tok::rbracket: return "']'";
    case Tok::comma: return "','";
    case Tok::dot: return "'.'";
    case Tok::dotdot: return "'..'";
    case Tok::pipe: return "'|'";
    case Tok::eq: return "'='";
    case Tok::lt: return "'<'";
    case Tok::colon: return "':'";
    case Tok::arrow: return "'->'";
    case Tok::end: return "end of input";
  }
  return "?";
}

inline bool is_word_char(char ch) {
  auto u = static_cast<unsigned char>(ch);
  return std::isalnum(u) || ch == '_' || ch == '-' || ch == '/' || ch == '+' || u >= 0x80;
}

inline bool is_integer_text(std::string_view s) {
  std::size_t i = (!s.empty() && (s[0] == '-' || s[0] == '+')) ? 1 : 0;
  if (i == s.size()) return false;
  for (; i < s.size(); ++i)
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
  return true;
}

/// Splits input into tokens. `base` is added to every offset.
inline std::vector<Token> tokenize(std::string_view in, std::size_t base = 0) {
  std::vector<Token> out;
  std::size_t i = 0;
  auto single = [&](Tok k) {
    out.push_back({k, std::string(1, in[i]), base + i});
    ++i;
  };
  while (i < in.size()) {
    char ch = in[i];
    if (std::isspace(static_cast<unsigned char>(ch))) {
      ++i;
      continue;
    }
    switch (ch) {
      case '(': single(Tok::lparen); continue;
      case ')': single(Tok::rparen); continue;
      case '{': single(Tok::lbrace); continue;
      case '}': single(Tok::rbrace); continue;
      case '[': single(Tok::lbracket); continue;
      case ']': single(Tok::rbracket); continue;
      case ',': single(Tok::comma); continue;
      case '|': single(Tok::pipe); continue;
      case '=': single(Tok::eq); continue;
      case '<': single(Tok::lt); continue;
      case ':': single(Tok::colon); continue;
      default: break;
    }
    if (ch == '.') {
      if (i + 1 < in.size() && in[i + 1] == '.') {
        out.push_back({Tok::dotdot, "..", base + i});
        i += 2;
      } else {
        single(Tok::dot);
      }
      continue;
    }
    if (ch == '-' && i + 1 < in.size() && in[i + 1] == '>') {
      out.push_back({Tok::arrow, "->", base + i});
      i += 2;
      continue;
    }
    if (ch == '"') {
      std::size_t start = i++;
      std::string text;
      bool closed = false;
      while (i < in.size()) {
        char c = in[i++];
        if (c == '\\' && i < in.size()) {
          text += in[i++];
        } else if (c == '"') {
          closed = true;
          break;
        } else {
          text += c;
        }
      }
      if (!closed) throw SyntaxError(base + start, {"closing '\"'"}, "unterminated string");
      out.push_back({Tok::string, std::move(text), base + start});
      continue;
    }
    if (is_word_char(ch)) {
      std::size_t start = i;
      while (i < in.size() && is_word_char(in[i])) {
        if (in[i] == '-' && i + 1 < in.size() && in[i + 1] == '>' && i > start) break;
        ++i;
        // decimal point inside a number: 0.30 but not 100..200 or Dim.Level
        if (i + 1 < in.size() && in[i] == '.' && std::isdigit(static_cast<unsigned char>(in[i + 1])) &&
            is_integer_text(in.substr(start, i - start)))
          ++i;
      }
      out.push_back({Tok::word, std::string(in.substr(start, i - start)), base + start});
      continue;
    }
    throw SyntaxError(base + i, {"identifier", "string", "punctuation"}, "'" + std::string(1, ch) + "'");
  }
  out.push_back({Tok::end, "", base + in.size()});
  return out;
}

inline bool iequals(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::tolower(static_cast<unsigned char>(a[i])) != std::tolower(static_cast<unsigned char>(b[i]))) return false;
  return true;
}

inline std::string format_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline const char* const kKeywords[] = {"SELECT", "BY", "WHERE", "AND", "IN", "P", "LABEL", "ORDER", "SCALE", "SESSION"};

/// Renders a literal bare when it lexes back as one word, quoted otherwise.
inline std::string format_literal(std::string_view s) {
  bool bare = !s.empty();
  for (std::size_t i = 0; i < s.size() && bare; ++i) {
    if (!is_word_char(s[i])) bare = false;
    if (s[i] == '-' && i + 1 < s.size() && s[i + 1] == '>') bare = false;
  }
  if (bare) {
    for (const char* kw : kKeywords)
      if (iequals(s, kw)) bare = false;
  }
  if (bare) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

class Parser {
 public:
  Parser(const CubeSchema& schema, std::string_view text, std::size_t base = 0)
      : schema_(schema), toks_(tokenize(text, base)) {}

  const Token& peek(std::size_t ahead = 0) const { return toks_[std::min(pos_ + ahead, toks_.size() - 1)]; }
  bool at(Tok k) const { return peek().kind == k; }
  bool at_keyword(std::string_view kw) const { return peek().kind == Tok::word && iequals(peek().text, kw); }
  bool at_end() const { return at(Tok::end); }

  [[noreturn]] void fail(std::vector<std::string> expected) const {
    const Token& t = peek();
    std::string found = t.kind == Tok::end ? "end of input" : "'" + t.text + "'";
    throw SyntaxError(t.offset, std::move(expected), found);
  }

  Token expect(Tok k) {
    if (!at(k)) fail({tok_name(k)});
    return toks_[pos_++];
  }
  void expect_keyword(std::string_view kw) {
    if (!at_keyword(kw)) fail({"'" + std::string(kw) + "'"});
    ++pos_;
  }
  Token expect_name(const char* what = "identifier") {
    if (!at(Tok::word) && !at(Tok::string)) fail({what});
    return toks_[pos_++];
  }
  void expect_end() {
    if (!at_end()) fail({"end of input"});
  }

  double expect_number() {
    if (!at(Tok::word)) fail({"number"});
    const Token& t = peek();
    double v = 0;
    std::string_view s = t.text;
    if (!s.empty() && s[0] == '+') s.remove_prefix(1);
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) fail({"number"});
    ++pos_;
    return v;
  }

  // ---- schema resolution

  int resolve_dim(const Token& t) const {
    if (auto d = schema_.find_dim(t.text)) return *d;
    throw UnknownIdentifierError(t.offset, "unknown dimension '" + t.text + "'");
  }
  int resolve_level(int dim, const Token& t) const {
    if (auto l = schema_.dims[dim].find_level(t.text)) return *l;
    throw UnknownIdentifierError(t.offset, "unknown level '" + t.text + "' in dimension " + schema_.dims[dim].name());
  }
  MemberId resolve_member(int dim, int level, const Token& t) const {
    if (auto m = schema_.dims[dim].find_member(level, t.text)) return m->id;
    throw UnknownIdentifierError(t.offset, "unknown member '" + t.text + "' at " + schema_.dims[dim].name() + "." +
                                               schema_.dims[dim].level_name(level));
  }

  /// Dim.Level, or a bare level name when it is unique across dimensions.
  std::pair<int, int> level_ref(bool allow_bare) {
    Token first = expect_name();
    if (at(Tok::dot)) {
      ++pos_;
      int d = resolve_dim(first);
      Token lv = expect_name();
      return {d, resolve_level(d, lv)};
    }
    if (!allow_bare) fail({"'.'"});
    // exact spelling first, then case-insensitive (city=Athens)
    for (bool fold : {false, true}) {
      std::optional<std::pair<int, int>> hit;
      for (std::size_t d = 0; d < schema_.dim_count(); ++d) {
        const Dimension& dim = schema_.dims[d];
        for (int l = 0; l < dim.level_count(); ++l) {
          bool eq = fold ? iequals(dim.level_name(l), first.text) : dim.level_name(l) == first.text;
          if (!eq) continue;
          if (hit) throw UnknownIdentifierError(first.offset, "ambiguous level '" + first.text + "'");
          hit = std::make_pair(static_cast<int>(d), l);
        }
      }
      if (hit) return *hit;
    }
    throw UnknownIdentifierError(first.offset, "unknown level '" + first.text + "'");
  }

  // ---- grammar productions

  Aggregate aggregate() {
    if (!at(Tok::word)) fail({"aggregate function"});
    Token fn = toks_[pos_];
    auto f = parse_agg_fn(fn.text);
    if (!f) fail({"'sum'", "'avg'", "'count'", "'min'", "'max'"});
    ++pos_;
    expect(Tok::lparen);
    Token m = expect_name("measure");
    expect(Tok::rparen);
    auto mi = schema_.find_measure(m.text);
    if (!mi) throw UnknownIdentifierError(m.offset, "unknown measure '" + m.text + "'");
    return {*f, *mi};
  }

  AtomicFilter atom() {
    auto [d, l] = level_ref(false);
    expect_keyword("IN");
    expect(Tok::lbrace);
    AtomicFilter a{d, l, {}};
    while (true) {
      Token v = expect_name("literal");
      a.values.push_back(resolve_member(d, l, v));
      if (at(Tok::comma)) {
        ++pos_;
        continue;
      }
      if (at(Tok::rbrace)) break;
      fail({"','", "'}'"});
    }
    ++pos_;
    return a;
  }

  void conjunction(SelectionCondition& c) {
    while (true) {
      std::size_t off = peek().offset;
      AtomicFilter a = atom();
      if (c.find(a.dim))
        throw Error(Errc::duplicate_dimension_atom, "second atom on dimension " + schema_.dims[a.dim].name() +
                                                        " at byte " + std::to_string(off));
      c.add(std::move(a));
      if (!at_keyword("AND")) return;
      ++pos_;
    }
  }

  SelectionCondition condition() {
    SelectionCondition c;
    if (at_end()) return c;
    conjunction(c);
    if (!at_end()) fail({"'AND'", "end of input"});
    return c;
  }

  CubeQuery query() {
    CubeQuery q;
    q.groupers = schema_.all_levels();
    expect_keyword("SELECT");
    q.aggregates.push_back(aggregate());
    while (at(Tok::comma)) {
      ++pos_;
      q.aggregates.push_back(aggregate());
    }
    if (!at_keyword("BY")) fail({"','", "'BY'"});
    ++pos_;
    std::vector<bool> seen(schema_.dim_count(), false);
    while (true) {
      std::size_t off = peek().offset;
      auto [d, l] = level_ref(false);
      if (seen[d]) throw SyntaxError(off, {"grouper on another dimension"}, "repeated dimension");
      seen[d] = true;
      q.groupers[d] = l;
      if (!at(Tok::comma)) break;
      ++pos_;
    }
    if (at_keyword("WHERE")) {
      ++pos_;
      conjunction(q.condition);
      if (!at_end()) fail({"'AND'", "end of input"});
    } else if (!at_end()) {
      fail({"','", "'WHERE'", "end of input"});
    }
    return q;
  }

  std::string measure_ref() {
    Token m = expect_name("measure");
    std::string name = m.text;
    if (at(Tok::lparen)) {
      auto f = parse_agg_fn(m.text);
      if (!f) throw UnknownIdentifierError(m.offset, "unknown aggregate function '" + m.text + "'");
      ++pos_;
      Token inner = expect_name("measure");
      expect(Tok::rparen);
      if (!schema_.find_measure(inner.text))
        throw UnknownIdentifierError(inner.offset, "unknown measure '" + inner.text + "'");
      return std::string(agg_fn_name(*f)) + "(" + inner.text + ")";
    }
    if (!schema_.find_measure(name)) throw UnknownIdentifierError(m.offset, "unknown measure '" + name + "'");
    return name;
  }

  Interval interval() {
    Interval iv;
    const std::size_t open = peek().offset;
    if (at(Tok::lbracket)) iv.lo_closed = true;
    else if (at(Tok::lparen)) iv.lo_closed = false;
    else fail({"'['", "'('"});
    ++pos_;
    iv.lo = expect_number();
    expect(Tok::dotdot);
    iv.hi = expect_number();
    if (at(Tok::rbracket)) iv.hi_closed = true;
    else if (at(Tok::rparen)) iv.hi_closed = false;
    else fail({"']'", "')'"});
    ++pos_;
    if (iv.lo > iv.hi) throw SyntaxError(open, {"interval with lo <= hi"}, "inverted interval");
    return iv;
  }

  BeliefStatement belief() {
    BeliefStatement b;
    b.anchor.levels = schema_.all_levels();
    b.anchor.coord.assign(schema_.dim_count(), 0);
    expect_keyword("P");
    expect(Tok::lparen);
    if (at_keyword("label") && peek(1).kind == Tok::lparen) {
      pos_ += 2;
      b.kind = BeliefKind::label;
      b.measure = measure_ref();
      expect(Tok::rparen);
      expect(Tok::eq);
      b.label = expect_name("label").text;
    } else {
      b.measure = measure_ref();
      if (at_keyword("IN")) {
        ++pos_;
        if (at(Tok::lbrace)) {
          ++pos_;
          b.kind = BeliefKind::value_set;
          while (true) {
            b.values.push_back(expect_number());
            if (at(Tok::comma)) {
              ++pos_;
              continue;
            }
            if (at(Tok::rbrace)) break;
            fail({"','", "'}'"});
          }
          ++pos_;
          std::sort(b.values.begin(), b.values.end());
          b.values.erase(std::unique(b.values.begin(), b.values.end()), b.values.end());
        } else {
          b.kind = BeliefKind::range;
          b.range = interval();
        }
      } else if (at(Tok::eq)) {
        ++pos_;
        b.kind = BeliefKind::value_set;
        b.values.push_back(expect_number());
      } else {
        fail({"'IN'", "'='"});
      }
    }
    if (at(Tok::pipe)) {
      ++pos_;
      std::vector<bool> seen(schema_.dim_count(), false);
      while (true) {
        std::size_t off = peek().offset;
        auto [d, l] = level_ref(true);
        if (seen[d])
          throw Error(Errc::duplicate_dimension_atom, "dimension stated twice in anchor at byte " + std::to_string(off));
        seen[d] = true;
        expect(Tok::eq);
        Token v = expect_name("literal");
        b.anchor.levels[d] = l;
        b.anchor.coord[d] = resolve_member(d, l, v);
        if (!at(Tok::comma)) break;
        ++pos_;
      }
    }
    if (!at(Tok::rparen)) fail({"'|'", "','", "')'"});
    ++pos_;
    expect(Tok::eq);
    std::size_t poff = peek().offset;
    b.probability = expect_number();
    if (!(b.probability >= 0.0 && b.probability <= 1.0))
      throw Error(Errc::probability_out_of_range,
                  "probability " + format_number(b.probability) + " at byte " + std::to_string(poff));
    expect_end();
    return b;
  }

  std::size_t position() const { return pos_; }

 private:
  const CubeSchema& schema_;
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

}  // namespace qlang

inline CubeQuery parse_query(const CubeSchema& s, std::string_view text) {
  qlang::Parser p(s, text);
  return p.query();
}

inline SelectionCondition parse_condition(const CubeSchema& s, std::string_view text) {
  qlang::Parser p(s, text);
  return p.condition();
}

inline BeliefStatement parse_belief(const CubeSchema& s, std::string_view text) {
  qlang::Parser p(s, text);
  return p.belief();
}

// ---- printers (canonical forms; parse(print(x)) == x)

inline std::string print_condition(const CubeSchema& s, const SelectionCondition& c) {
  std::string out;
  for (const auto& a : c.atoms()) {
    if (!out.empty()) out += " AND ";
    const Dimension& d = s.dims[a.dim];
    out += qlang::format_literal(d.name()) + "." + qlang::format_literal(d.level_name(a.level)) + " IN {";
    for (std::size_t i = 0; i < a.values.size(); ++i) {
      if (i) out += ", ";
      out += qlang::format_literal(d.label({a.level, a.values[i]}));
    }
    out += "}";
  }
  return out;
}

inline std::string print_query(const CubeSchema& s, const CubeQuery& q) {
  std::string out = "SELECT ";
  for (std::size_t i = 0; i < q.aggregates.size(); ++i) {
    if (i) out += ", ";
    out += std::string(agg_fn_name(q.aggregates[i].fn)) + "(" + qlang::format_literal(s.measures[q.aggregates[i].measure]) + ")";
  }
  out += " BY ";
  for (std::size_t d = 0; d < s.dim_count(); ++d) {
    if (d) out += ", ";
    out += qlang::format_literal(s.dims[d].name()) + "." + qlang::format_literal(s.dims[d].level_name(q.groupers[d]));
  }
  if (!q.condition.empty()) out += " WHERE " + print_condition(s, q.condition);
  return out;
}

inline std::string print_measure_ref(std::string_view m) {
  auto open = m.find('(');
  if (open != std::string_view::npos && m.back() == ')')
    return std::string(m.substr(0, open)) + "(" + qlang::format_literal(m.substr(open + 1, m.size() - open - 2)) + ")";
  return qlang::format_literal(m);
}

inline std::string print_interval(const Interval& iv) {
  return std::string(iv.lo_closed ? "[" : "(") + qlang::format_number(iv.lo) + ".." + qlang::format_number(iv.hi) +
         (iv.hi_closed ? "]" : ")");
}

inline std::string print_belief(const CubeSchema& s, const BeliefStatement& b) {
  std::string out = "P(";
  switch (b.kind) {
    case BeliefKind::label:
      out += "label(" + print_measure_ref(b.measure) + ") = " + qlang::format_literal(b.label);
      break;
    case BeliefKind::range:
      out += print_measure_ref(b.measure) + " IN " + print_interval(b.range);
      break;
    case BeliefKind::value_set:
      out += print_measure_ref(b.measure) + " IN {";
      for (std::size_t i = 0; i < b.values.size(); ++i) {
        if (i) out += ", ";
        out += qlang::format_number(b.values[i]);
      }
      out += "}";
      break;
  }
  bool first = true;
  for (std::size_t d = 0; d < s.dim_count(); ++d) {
    if (b.anchor.levels[d] == s.dims[d].height()) continue;
    out += first ? " | " : ", ";
    first = false;
    const Dimension& dim = s.dims[d];
    out += qlang::format_literal(dim.name()) + "." + qlang::format_literal(dim.level_name(b.anchor.levels[d])) + "=" +
           qlang::format_literal(dim.label({b.anchor.levels[d], b.anchor.coord[d]}));
  }
  return out + ") = " + qlang::format_number(b.probability);
}

// ---- line-oriented files

namespace qlang {

/// Calls `fn(line, offset)` for each non-blank line that is not a # comment.
template <class Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    std::size_t first = line.find_first_not_of(" \t");
    if (first != std::string_view::npos && line[first] != '#') fn(line, start);
    if (end == text.size()) break;
    start = end + 1;
  }
}

}  // namespace qlang

struct SessionLine {
  CubeQuery query;
  std::string session;
};

/// One query per line; `SESSION <id>` switches the session id for following lines.
inline std::vector<SessionLine> parse_session(const CubeSchema& s, std::string_view text) {
  std::vector<SessionLine> out;
  std::string session = "default";
  qlang::for_each_line(text, [&](std::string_view line, std::size_t off) {
    auto toks = qlang::tokenize(line, off);
    if (toks[0].kind == qlang::Tok::word && qlang::iequals(toks[0].text, "SESSION")) {
      if (toks.size() != 3 || (toks[1].kind != qlang::Tok::word && toks[1].kind != qlang::Tok::string))
        throw SyntaxError(toks.size() > 1 ? toks[1].offset : off, {"session id"}, "malformed SESSION line");
      session = toks[1].text;
      return;
    }
    qlang::Parser p(s, line, off);
    out.push_back({p.query(), session});
  });
  return out;
}

inline std::vector<SelectionCondition> parse_goals(const CubeSchema& s, std::string_view text) {
  std::vector<SelectionCondition> out;
  qlang::for_each_line(text, [&](std::string_view line, std::size_t off) {
    qlang::Parser p(s, line, off);
    out.push_back(p.condition());
  });
  return out;
}

inline std::vector<BeliefStatement> parse_beliefs(const CubeSchema& s, std::string_view text) {
  std::vector<BeliefStatement> out;
  qlang::for_each_line(text, [&](std::string_view line, std::size_t off) {
    qlang::Parser p(s, line, off);
    out.push_back(p.belief());
  });
  return out;
}

/// Label rules file. Intervals of one measure must not overlap; with
/// `strict_coverage` they must also leave no gap between the lowest and
/// highest declared bound.
inline LabelingScheme parse_label_rules(const CubeSchema& s, std::string_view text, bool strict_coverage = false) {
  LabelingScheme scheme;
  std::vector<std::string> seen_labels;
  bool ordered = false;
  qlang::for_each_line(text, [&](std::string_view line, std::size_t off) {
    qlang::Parser p(s, line, off);
    if (p.at_keyword("ORDER") || p.at_keyword("SCALE")) {
      if (ordered) p.fail({"label rule"});
      scheme.domain.kind = p.at_keyword("ORDER") ? LabelKind::ordinal : LabelKind::interval;
      p.expect_name();
      scheme.domain.labels.push_back(p.expect_name("label").text);
      while (p.at(qlang::Tok::lt)) {
        p.expect(qlang::Tok::lt);
        scheme.domain.labels.push_back(p.expect_name("label").text);
      }
      p.expect_end();
      ordered = true;
      return;
    }
    std::string measure = p.measure_ref();
    p.expect(qlang::Tok::colon);
    Interval iv = p.interval();
    p.expect(qlang::Tok::arrow);
    std::string label = p.expect_name("label").text;
    p.expect_end();
    if (std::find(seen_labels.begin(), seen_labels.end(), label) == seen_labels.end()) seen_labels.push_back(label);
    scheme.rules[measure].push_back({iv, label});
  });
  if (ordered) {
    for (const auto& l : seen_labels)
      if (!scheme.domain.position(l))
        throw Error(Errc::unknown_identifier, "label '" + l + "' is used by a rule but missing from ORDER");
  } else {
    scheme.domain.labels = seen_labels;
    scheme.domain.kind = LabelKind::nominal;
  }
  for (auto& [m, rules] : scheme.rules) {
    std::sort(rules.begin(), rules.end(), [](const LabelRule& a, const LabelRule& b) {
      if (a.range.lo != b.range.lo) return a.range.lo < b.range.lo;
      return a.range.lo_closed && !b.range.lo_closed;
    });
    for (std::size_t i = 1; i < rules.size(); ++i) {
      if (rules[i - 1].range.overlaps(rules[i].range))
        throw Error(Errc::overlapping_intervals, "label intervals " + print_interval(rules[i - 1].range) + " and " +
                                                     print_interval(rules[i].range) + " of " + m + " overlap");
      if (strict_coverage) {
        const auto& a = rules[i - 1].range;
        const auto& b = rules[i].range;
        bool touching = a.hi == b.lo && (a.hi_closed || b.lo_closed);
        if (!touching)
          throw Error(Errc::gap_in_coverage, "gap between " + print_interval(a) + " and " + print_interval(b) + " of " + m);
      }
    }
  }
  return scheme;
}

inline std::string print_label_rules(const LabelingScheme& scheme) {
  std::string out;
  if (scheme.domain.kind != LabelKind::nominal) {
    out += scheme.domain.kind == LabelKind::ordinal ? "ORDER " : "SCALE ";
    for (std::size_t i = 0; i < scheme.domain.labels.size(); ++i) {
      if (i) out += " < ";
      out += qlang::format_literal(scheme.domain.labels[i]);
    }
    out += "\n";
  }
  for (const auto& [m, rules] : scheme.rules)
    for (const auto& r : rules)
      out += print_measure_ref(m) + ": " + print_interval(r.range) + " -> " + qlang::format_literal(r.label) + "\n";
  return out;
}

}  // namespace cubeint
