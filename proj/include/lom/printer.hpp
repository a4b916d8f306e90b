#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>

#include "lom/ast.hpp"

namespace lom {

/// Optional substitution for bare identifiers while printing. Returning
/// nullopt keeps the identifier as written.
using NameRewriter = std::function<std::optional<std::string>(const Expr& name)>;

/// MiniLang source for an expression; binary operands are parenthesised so
/// substitutions never change grouping.
std::string print_expr(const Expr& e, const NameRewriter& rewrite = {});

/// MiniLang source for a statement list, one statement per line.
std::string print_block(const Block& block, int indent, const NameRewriter& rewrite = {});

/// Double-quoted MiniLang string literal.
std::string quote_string(std::string_view s);

}  // namespace lom
