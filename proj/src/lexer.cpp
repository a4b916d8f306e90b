#include "lom/lexer.hpp"

#include <array>
#include <cctype>

namespace lom {

namespace {

constexpr std::array<std::string_view, 11> kTwoCharPuncts = {
    "==", "!=", "<=", ">=", "&&", "||", "..", "+=", "-=", "->", "::"};

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

}  // namespace

std::vector<Token> tokenize(std::string_view text, const std::string& path) {
  std::vector<Token> out;
  std::size_t i = 0;
  int line = 1;
  int col = 1;

  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n && i < text.size(); ++k, ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  auto fail = [&](int l, int c, const std::string& msg) -> void {
    throw ParseError(SourceLoc{path, l, c}, msg);
  };

  while (i < text.size()) {
    char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '/' && i + 1 < text.size() && text[i + 1] == '/') {
      while (i < text.size() && text[i] != '\n') advance(1);
      continue;
    }
    if (c == '/' && i + 1 < text.size() && text[i + 1] == '*') {
      int sl = line, sc = col;
      advance(2);
      while (i + 1 < text.size() && !(text[i] == '*' && text[i + 1] == '/')) advance(1);
      if (i + 1 >= text.size()) fail(sl, sc, "unterminated block comment");
      advance(2);
      continue;
    }

    Token tok;
    tok.line = line;
    tok.column = col;

    if (is_ident_start(c)) {
      std::size_t j = i;
      while (j < text.size() && is_ident_char(text[j])) ++j;
      tok.kind = TokenKind::Ident;
      tok.text = std::string(text.substr(i, j - i));
      advance(j - i);
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
      tok.kind = TokenKind::Int;
      if (j + 1 < text.size() && text[j] == '.' &&
          std::isdigit(static_cast<unsigned char>(text[j + 1]))) {
        ++j;
        while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
        tok.kind = TokenKind::Float;
      }
      tok.text = std::string(text.substr(i, j - i));
      advance(j - i);
    } else if (c == '"') {
      std::string value;
      advance(1);
      bool closed = false;
      while (i < text.size()) {
        char d = text[i];
        if (d == '"') {
          closed = true;
          advance(1);
          break;
        }
        if (d == '\n') break;
        if (d == '\\' && i + 1 < text.size()) {
          char e = text[i + 1];
          switch (e) {
            case 'n': value += '\n'; break;
            case 't': value += '\t'; break;
            case '"': value += '"'; break;
            case '\\': value += '\\'; break;
            default: fail(line, col, std::string("unknown escape '\\") + e + "'");
          }
          advance(2);
          continue;
        }
        value += d;
        advance(1);
      }
      if (!closed) fail(tok.line, tok.column, "unterminated string literal");
      tok.kind = TokenKind::String;
      tok.text = std::move(value);
    } else {
      tok.kind = TokenKind::Punct;
      std::string_view two = text.substr(i, 2);
      bool matched = false;
      for (auto p : kTwoCharPuncts) {
        if (two == p) {
          tok.text = std::string(p);
          matched = true;
          break;
        }
      }
      if (!matched) {
        static constexpr std::string_view kSingles = "{}()[];,.:=<>+-*/%!&|@?";
        if (kSingles.find(c) == std::string_view::npos) {
          fail(line, col, std::string("unexpected character '") + c + "'");
        }
        tok.text = std::string(1, c);
      }
      advance(tok.text.size());
    }
    tok.end_column = (tok.line == line) ? col : tok.column + 1;
    out.push_back(std::move(tok));
  }

  Token end;
  end.kind = TokenKind::End;
  end.line = line;
  end.column = col;
  end.end_column = col;
  out.push_back(end);
  return out;
}

}  // namespace lom
