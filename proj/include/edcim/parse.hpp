#pragma once

#include "edcim/expr.hpp"

#include <string>
#include <string_view>
#include <variant>

namespace edcim {

struct ParseError {
    enum class Code { EmptyOutput, Syntax, UnsupportedSymbol };

    Code code = Code::Syntax;
    int line = 0;  // 1-based line in the original text, 0 when not line-specific
    int col = 0;   // 1-based byte column in that line
    std::string message;

    std::string describe() const;
};

using ParseResult = std::variant<EquationSystem, ParseError>;

inline bool parse_ok(const ParseResult& r) { return std::holds_alternative<EquationSystem>(r); }
inline const EquationSystem& parsed_system(const ParseResult& r) { return std::get<EquationSystem>(r); }
inline const ParseError& parse_error(const ParseResult& r) { return std::get<ParseError>(r); }

// Turns raw LLM output into an equation system. The cleanup pass drops
// markdown fences, "Equations:" style labels, enumeration prefixes, and any
// line that is not exactly one top-level '='; surviving candidate lines must
// parse under the +,-,*,/,= grammar or the whole response is rejected.
// Never throws, whatever the input bytes.
ParseResult parse_system(std::string_view text);

}  // namespace edcim
