#pragma once

#include <charconv>
#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "koq/diagnostic.hpp"
#include "koq/koq_engine.hpp"

namespace koq {

// ---------------------------------------------------------------------------
// AST
// ---------------------------------------------------------------------------

struct Expr;
using ExprPtr = std::unique_ptr<Expr>;

// `16000 [kg*m^2]`, `10.5 cm`, or a bare scalar `0.5`.
struct NumberLit {
  double value = 0.0;
  std::optional<std::string> unit_text;
  Span unit_span;
};

struct Ident {
  std::string name;
};

struct Binary {
  char op = '+';  // one of + - * /
  Span op_span;
  ExprPtr lhs;
  ExprPtr rhs;
};

struct Power {
  ExprPtr base;
  int exponent = 1;
};

struct Negate {
  ExprPtr operand;
};

struct Expr {
  Span span;
  std::variant<NumberLit, Ident, Binary, Power, Negate> node;
};

struct RelationStmt {
  std::string target;
  Span target_span;
  std::string rhs_text;
  Span rhs_span;
};

struct LetStmt {
  std::string name;
  Span name_span;
  std::optional<std::string> koq;  // nullopt for `untyped`
  Span koq_span;
  std::optional<std::string> unit_text;
  Span unit_span;
  ExprPtr value;  // null when the expression failed to parse
};

struct CommentStmt {
  std::string text;
};

struct Statement {
  Span span;
  std::variant<RelationStmt, LetStmt, CommentStmt> node;
};

struct Script {
  std::vector<Statement> statements;
};

struct ParseResult {
  Script script;
  std::vector<Diagnostic> diagnostics;
};

// ---------------------------------------------------------------------------
// Lexer (one source line at a time)
// ---------------------------------------------------------------------------

namespace detail {

enum class Tok { kIdent, kNumber, kUnitText, kPunct, kEnd };

struct Token {
  Tok kind = Tok::kEnd;
  std::string_view text;  // for kUnitText: the text between the brackets
  std::size_t offset = 0;  // byte offset of `text` within the line
  double number = 0.0;
};

struct SyntaxError {
  std::size_t offset;
  std::size_t length;
  std::string message;
};

inline bool ident_start(char c) {
  return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_';
}
inline bool ident_char(char c) { return ident_start(c) || (c >= '0' && c <= '9'); }
inline bool digit(char c) { return c >= '0' && c <= '9'; }

inline std::vector<Token> lex_line(std::string_view line) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    const char c = line[i];
    if (c == ' ' || c == '\t' || c == '\r') {
      ++i;
      continue;
    }
    const std::size_t start = i;
    if (ident_start(c)) {
      while (i < line.size() && ident_char(line[i])) ++i;
      out.push_back({Tok::kIdent, line.substr(start, i - start), start});
    } else if (digit(c) || (c == '.' && i + 1 < line.size() && digit(line[i + 1]))) {
      while (i < line.size() && digit(line[i])) ++i;
      if (i < line.size() && line[i] == '.') {
        ++i;
        while (i < line.size() && digit(line[i])) ++i;
      }
      if (i < line.size() && (line[i] == 'e' || line[i] == 'E')) {
        std::size_t j = i + 1;
        if (j < line.size() && (line[j] == '+' || line[j] == '-')) ++j;
        if (j < line.size() && digit(line[j])) {
          while (j < line.size() && digit(line[j])) ++j;
          i = j;
        }
      }
      std::string_view lit = line.substr(start, i - start);
      std::string buf(lit);
      if (buf.back() == '.') buf.push_back('0');
      if (buf.front() == '.') buf.insert(buf.begin(), '0');
      const std::size_t dot_e = buf.find(".e");
      if (dot_e != std::string::npos) buf.insert(dot_e + 1, "0");
      const std::size_t dot_E = buf.find(".E");
      if (dot_E != std::string::npos) buf.insert(dot_E + 1, "0");
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(buf.data(), buf.data() + buf.size(), v);
      if (ec != std::errc() || ptr != buf.data() + buf.size()) {
        throw SyntaxError{start, lit.size(), "invalid number '" + std::string(lit) + "'"};
      }
      out.push_back({Tok::kNumber, lit, start, v});
    } else if (c == '[') {
      const std::size_t close = line.find(']', i + 1);
      if (close == std::string_view::npos) {
        throw SyntaxError{start, 1, "unterminated '[' in unit annotation"};
      }
      out.push_back({Tok::kUnitText, line.substr(i + 1, close - i - 1), i + 1});
      i = close + 1;
    } else if (std::string_view("=:()+-*/^").find(c) != std::string_view::npos) {
      out.push_back({Tok::kPunct, line.substr(i, 1), start});
      ++i;
    } else {
      throw SyntaxError{start, 1, std::string("unexpected character '") + c + "'"};
    }
  }
  out.push_back({Tok::kEnd, line.substr(line.size()), line.size()});
  return out;
}

class LineParser {
 public:
  LineParser(std::string_view line, int line_no)
      : line_(line), line_no_(line_no), toks_(lex_line(line)) {}

  Statement parse_statement() {
    const Token& head = peek();
    if (is_ident("relation")) return parse_relation();
    if (is_ident("let")) return parse_let();
    throw SyntaxError{head.offset, head.text.size(), "expected 'let' or 'relation'"};
  }

  // After a syntax error inside a let's expression: the header alone, so the
  // name keeps its declared unit and kind for later lines.
  std::optional<Statement> take_partial() { return std::move(partial_); }

 private:
  const Token& peek(std::size_t ahead = 0) const {
    return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
  }
  const Token& advance() {
    const Token& t = toks_[pos_];
    if (pos_ + 1 < toks_.size()) ++pos_;
    return t;
  }
  bool is_ident(std::string_view word) const {
    return peek().kind == Tok::kIdent && peek().text == word;
  }
  bool is_punct(char c, std::size_t ahead = 0) const {
    return peek(ahead).kind == Tok::kPunct && peek(ahead).text[0] == c;
  }

  Span span_of(std::size_t offset, std::size_t length) const {
    return {line_no_, static_cast<int>(offset) + 1, static_cast<int>(length)};
  }
  Span span_of(const Token& t) const { return span_of(t.offset, t.text.size()); }

  [[noreturn]] void fail(const std::string& what) const {
    const Token& t = peek();
    throw SyntaxError{t.offset, t.text.size(),
                      t.kind == Tok::kEnd ? what + " at end of line"
                                          : what + ", found '" + std::string(t.text) + "'"};
  }

  const Token& expect_ident(const std::string& what) {
    if (peek().kind != Tok::kIdent) fail("expected " + what);
    return advance();
  }
  void expect_punct(char c) {
    if (!is_punct(c)) fail(std::string("expected '") + c + "'");
    advance();
  }

  Statement parse_relation() {
    const Token& kw = advance();
    RelationStmt rel;
    const Token& target = expect_ident("KOQ name after 'relation'");
    rel.target = std::string(target.text);
    rel.target_span = span_of(target);
    expect_punct('=');
    const std::size_t rhs_start = peek().offset;
    std::string_view rhs = line_.substr(rhs_start);
    while (!rhs.empty() && (rhs.back() == ' ' || rhs.back() == '\t' || rhs.back() == '\r')) {
      rhs.remove_suffix(1);
    }
    rel.rhs_text = std::string(rhs);
    rel.rhs_span = span_of(rhs_start, rhs.size());
    try {
      parse_relation_expr(rel.rhs_text);
    } catch (const RelationError& e) {
      throw SyntaxError{rhs_start + e.offset, 1, e.what()};
    }
    return {span_of(kw.offset, line_.size() - kw.offset), std::move(rel)};
  }

  Statement parse_let() {
    const Token& kw = advance();
    LetStmt let;
    const Token& name = expect_ident("identifier after 'let'");
    let.name = std::string(name.text);
    let.name_span = span_of(name);
    expect_punct(':');
    const Token& kind = expect_ident("KOQ name or 'untyped'");
    let.koq_span = span_of(kind);
    if (kind.text != "untyped") {
      if (!valid_koq_name(kind.text)) fail("invalid KOQ name");
      let.koq = std::string(kind.text);
    }
    if (peek().kind == Tok::kUnitText) {
      const Token& u = advance();
      let.unit_text = std::string(u.text);
      let.unit_span = span_of(u);
    }
    expect_punct('=');
    const Span stmt_span = span_of(kw.offset, line_.size() - kw.offset);
    try {
      let.value = parse_expr();
      if (peek().kind != Tok::kEnd) fail("unexpected token after expression");
    } catch (const SyntaxError&) {
      let.value.reset();
      partial_ = Statement{stmt_span, std::move(let)};
      throw;
    }
    return {stmt_span, std::move(let)};
  }

  ExprPtr make_binary(char op, const Token& op_tok, ExprPtr lhs, ExprPtr rhs) {
    const int col = lhs->span.column;
    const int end = rhs->span.column + rhs->span.length;
    auto e = std::make_unique<Expr>();
    e->span = {line_no_, col, end - col};
    e->node = Binary{op, span_of(op_tok), std::move(lhs), std::move(rhs)};
    return e;
  }

  ExprPtr parse_expr() {
    ExprPtr lhs = parse_term();
    while (is_punct('+') || is_punct('-')) {
      const Token& op = advance();
      ExprPtr rhs = parse_term();
      lhs = make_binary(op.text[0], op, std::move(lhs), std::move(rhs));
    }
    return lhs;
  }

  ExprPtr parse_term() {
    ExprPtr lhs = parse_factor();
    while (is_punct('*') || is_punct('/')) {
      const Token& op = advance();
      ExprPtr rhs = parse_factor();
      lhs = make_binary(op.text[0], op, std::move(lhs), std::move(rhs));
    }
    return lhs;
  }

  int parse_int_exponent() {
    int sign = 1;
    if (is_punct('-')) {
      advance();
      sign = -1;
    } else if (is_punct('+')) {
      advance();
    }
    const Token& t = peek();
    if (t.kind != Tok::kNumber || t.text.find_first_not_of("0123456789") != std::string_view::npos) {
      fail("expected integer exponent");
    }
    advance();
    int v = 0;
    auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
    if (ec != std::errc()) throw SyntaxError{t.offset, t.text.size(), "exponent out of range"};
    return sign * v;
  }

  ExprPtr parse_factor() {
    ExprPtr base = parse_primary();
    while (is_punct('^')) {
      advance();
      const int n = parse_int_exponent();
      const std::size_t end = toks_[pos_ - 1].offset + toks_[pos_ - 1].text.size();
      auto e = std::make_unique<Expr>();
      e->span = {line_no_, base->span.column,
                 static_cast<int>(end) + 1 - base->span.column};
      e->node = Power{std::move(base), n};
      base = std::move(e);
    }
    return base;
  }

  ExprPtr parse_primary() {
    const Token& t = peek();
    auto e = std::make_unique<Expr>();
    if (t.kind == Tok::kNumber) {
      advance();
      NumberLit lit{t.number, std::nullopt, {}};
      std::size_t end = t.offset + t.text.size();
      if (peek().kind == Tok::kUnitText) {
        const Token& u = advance();
        lit.unit_text = std::string(u.text);
        lit.unit_span = span_of(u);
        end = u.offset + u.text.size() + 1;
      } else if (peek().kind == Tok::kIdent) {
        // Bare unit atom, optionally with an integer power: `3 m^2`.
        const Token& u = advance();
        std::size_t unit_end = u.offset + u.text.size();
        if (is_punct('^')) {
          advance();
          parse_int_exponent();
          unit_end = toks_[pos_ - 1].offset + toks_[pos_ - 1].text.size();
        }
        lit.unit_text = std::string(line_.substr(u.offset, unit_end - u.offset));
        lit.unit_span = span_of(u.offset, unit_end - u.offset);
        end = unit_end;
      }
      e->span = span_of(t.offset, end - t.offset);
      e->node = std::move(lit);
      return e;
    }
    if (t.kind == Tok::kIdent) {
      advance();
      e->span = span_of(t);
      e->node = Ident{std::string(t.text)};
      return e;
    }
    if (is_punct('(')) {
      const Token& open = advance();
      ExprPtr inner = parse_expr();
      if (!is_punct(')')) fail("expected ')'");
      const Token& close = advance();
      inner->span = span_of(open.offset, close.offset + 1 - open.offset);
      return inner;
    }
    if (is_punct('-')) {
      const Token& minus = advance();
      ExprPtr operand = parse_factor();
      const int end = operand->span.column + operand->span.length;
      e->span = {line_no_, static_cast<int>(minus.offset) + 1,
                 end - static_cast<int>(minus.offset) - 1};
      e->node = Negate{std::move(operand)};
      return e;
    }
    fail("expected number, identifier or '('");
  }

  std::string_view line_;
  int line_no_;
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::optional<Statement> partial_;
};

}  // namespace detail

// Never fails: a malformed line yields an E001 diagnostic and parsing
// resumes on the next line.
inline ParseResult parse_script(std::string_view text) {
  ParseResult out;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    std::string_view code = line;
    const std::size_t hash = line.find('#');
    if (hash != std::string_view::npos) {
      code = line.substr(0, hash);
      std::string_view rest = code;
      while (!rest.empty() && (rest.front() == ' ' || rest.front() == '\t')) rest.remove_prefix(1);
      if (rest.empty()) {
        out.script.statements.push_back(
            {{line_no, static_cast<int>(hash) + 1, static_cast<int>(line.size() - hash)},
             CommentStmt{std::string(line.substr(hash + 1))}});
        continue;
      }
    }
    if (code.find_first_not_of(" \t") == std::string_view::npos) continue;

    std::optional<detail::LineParser> parser;
    try {
      parser.emplace(code, line_no);
      out.script.statements.push_back(parser->parse_statement());
    } catch (const detail::SyntaxError& e) {
      if (parser) {
        if (auto partial = parser->take_partial()) out.script.statements.push_back(std::move(*partial));
      }
      const std::size_t off = std::min(e.offset, code.size());
      out.diagnostics.push_back({DiagCode::kParse,
                                 Severity::kError,
                                 {line_no, static_cast<int>(off) + 1,
                                  static_cast<int>(std::min(e.length, code.size() - off))},
                                 e.message,
                                 {}});
    }
  }
  return out;
}

}  // namespace koq
