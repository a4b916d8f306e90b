#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "lom/diagnostics.hpp"

namespace lom {

enum class TokenKind { Ident, Int, Float, String, Punct, End };

struct Token {
  TokenKind kind = TokenKind::End;
  std::string text;  // identifier / punctuator / decoded string literal / number spelling
  int line = 0;
  int column = 0;
  int end_column = 0;  // one past the last column on `line`

  bool is(TokenKind k, std::string_view t) const { return kind == k && text == t; }
  bool is_punct(std::string_view t) const { return is(TokenKind::Punct, t); }
  bool is_ident(std::string_view t) const { return is(TokenKind::Ident, t); }
};

/// Shared tokenizer for .ml0, .ma0, .cool and .audit sources.
/// Skips `//` and `/* */` comments. Throws ParseError on bad input.
std::vector<Token> tokenize(std::string_view text, const std::string& path);

}  // namespace lom
