#include "edcim/parse.hpp"

#include <cctype>
#include <optional>
#include <regex>
#include <utility>
#include <vector>

namespace edcim {

std::string ParseError::describe() const {
    std::string tag;
    switch (code) {
        case Code::EmptyOutput: tag = "empty output"; break;
        case Code::Syntax: tag = "syntax error"; break;
        case Code::UnsupportedSymbol: tag = "unsupported symbol"; break;
    }
    std::string where;
    if (line > 0) {
        where = " at line " + std::to_string(line);
        if (col > 0) where += ", col " + std::to_string(col);
    }
    return tag + where + ": " + message;
}

namespace {

struct ParseFailure {
    ParseError error;
};

[[noreturn]] void fail(ParseError::Code code, int line, int col, std::string message) {
    throw ParseFailure{ParseError{code, line, col, std::move(message)}};
}

struct Token {
    enum class Type { Number, Ident, Plus, Minus, Star, Slash, LParen, RParen, Eq, End };
    Type type;
    int col = 0;
    Rational value;    // Number
    std::string text;  // Ident
};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }
bool ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_';
}

std::vector<Token> tokenize(const std::string& s, int line) {
    std::vector<Token> tokens;
    size_t i = 0;
    while (i < s.size()) {
        char c = s[i];
        int col = static_cast<int>(i) + 1;
        if (c == ' ' || c == '\t') {
            ++i;
            continue;
        }
        if (c == '*' && i + 1 < s.size() && s[i + 1] == '*') {
            fail(ParseError::Code::UnsupportedSymbol, line, col, "'**' is not supported");
        }
        switch (c) {
            case '+': tokens.push_back({Token::Type::Plus, col}); ++i; continue;
            case '-': tokens.push_back({Token::Type::Minus, col}); ++i; continue;
            case '*': tokens.push_back({Token::Type::Star, col}); ++i; continue;
            case '/': tokens.push_back({Token::Type::Slash, col}); ++i; continue;
            case '(': tokens.push_back({Token::Type::LParen, col}); ++i; continue;
            case ')': tokens.push_back({Token::Type::RParen, col}); ++i; continue;
            case '=': tokens.push_back({Token::Type::Eq, col}); ++i; continue;
            case '^':
            case '%':
            case '<':
            case '>':
            case '!':
            case '&':
            case '|':
                fail(ParseError::Code::UnsupportedSymbol, line, col,
                     std::string("'") + c + "' is not supported");
            default:
                break;
        }
        if (ident_start(c)) {
            size_t j = i + 1;
            while (j < s.size() && ident_char(s[j])) ++j;
            tokens.push_back({Token::Type::Ident, col, Rational(0), s.substr(i, j - i)});
            i = j;
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            size_t j = i;
            while (j < s.size() &&
                   (std::isdigit(static_cast<unsigned char>(s[j])) || s[j] == '.')) {
                ++j;
            }
            auto value = rational_from_decimal(std::string_view(s).substr(i, j - i));
            if (!value) {
                fail(ParseError::Code::Syntax, line, col,
                     "invalid number '" + s.substr(i, j - i) + "'");
            }
            tokens.push_back({Token::Type::Number, col, *value});
            i = j;
            continue;
        }
        fail(ParseError::Code::Syntax, line, col,
             "unexpected character '" + std::string(1, c) + "'");
    }
    tokens.push_back({Token::Type::End, static_cast<int>(s.size()) + 1});
    return tokens;
}

constexpr int kMaxNestingDepth = 256;

class LineParser {
public:
    LineParser(std::vector<Token> tokens, int line)
        : tokens_(std::move(tokens)), line_(line) {}

    Equation parse_equation() {
        ExprPtr lhs = parse_expr(0);
        expect(Token::Type::Eq, "'='");
        ExprPtr rhs = parse_expr(0);
        expect(Token::Type::End, "end of line");
        return Equation{std::move(lhs), std::move(rhs)};
    }

private:
    const Token& peek() const { return tokens_[pos_]; }
    Token take() { return tokens_[pos_++]; }

    void expect(Token::Type type, const char* what) {
        if (peek().type != type) {
            fail(ParseError::Code::Syntax, line_, peek().col,
                 std::string("expected ") + what);
        }
        ++pos_;
    }

    // Constant-only subtrees fold to exact rationals; a literal zero
    // denominator is rejected here so normalized trees never carry one.
    ExprPtr combine(ExprKind kind, ExprPtr l, ExprPtr r, int col) {
        if (l->is_constant() && r->is_constant()) {
            switch (kind) {
                case ExprKind::Add: return Expr::constant(l->value() + r->value());
                case ExprKind::Sub: return Expr::constant(l->value() - r->value());
                case ExprKind::Mul: return Expr::constant(l->value() * r->value());
                case ExprKind::Div:
                    if (r->value() == 0) {
                        fail(ParseError::Code::Syntax, line_, col,
                             "constant division by zero");
                    }
                    return Expr::constant(l->value() / r->value());
                default: break;
            }
        }
        if (kind == ExprKind::Div && r->is_constant() && r->value() == 0) {
            fail(ParseError::Code::Syntax, line_, col, "constant division by zero");
        }
        return Expr::binary(kind, std::move(l), std::move(r));
    }

    ExprPtr parse_expr(int depth) {
        check_depth(depth);
        ExprPtr node = parse_term(depth + 1);
        while (peek().type == Token::Type::Plus || peek().type == Token::Type::Minus) {
            Token op = take();
            ExprPtr rhs = parse_term(depth + 1);
            node = combine(op.type == Token::Type::Plus ? ExprKind::Add : ExprKind::Sub,
                           std::move(node), std::move(rhs), op.col);
        }
        return node;
    }

    ExprPtr parse_term(int depth) {
        check_depth(depth);
        ExprPtr node = parse_factor(depth + 1);
        while (peek().type == Token::Type::Star || peek().type == Token::Type::Slash) {
            Token op = take();
            ExprPtr rhs = parse_factor(depth + 1);
            node = combine(op.type == Token::Type::Star ? ExprKind::Mul : ExprKind::Div,
                           std::move(node), std::move(rhs), op.col);
        }
        return node;
    }

    ExprPtr parse_factor(int depth) {
        check_depth(depth);
        if (peek().type == Token::Type::Minus) {
            Token op = take();
            ExprPtr child = parse_factor(depth + 1);
            if (child->is_constant()) return Expr::constant(-child->value());
            return Expr::neg(std::move(child));
        }
        if (peek().type == Token::Type::Plus) {
            take();  // unary plus is transparent
            return parse_factor(depth + 1);
        }
        return parse_primary(depth + 1);
    }

    ExprPtr parse_primary(int depth) {
        check_depth(depth);
        const Token& t = peek();
        switch (t.type) {
            case Token::Type::Number: {
                Token tok = take();
                return Expr::constant(std::move(tok.value));
            }
            case Token::Type::Ident: {
                Token tok = take();
                return Expr::variable(std::move(tok.text));
            }
            case Token::Type::LParen: {
                take();
                ExprPtr inner = parse_expr(depth + 1);
                expect(Token::Type::RParen, "')'");
                return inner;
            }
            default:
                fail(ParseError::Code::Syntax, line_, t.col, "expected expression");
        }
    }

    void check_depth(int depth) const {
        if (depth > kMaxNestingDepth) {
            fail(ParseError::Code::Syntax, line_, peek().col,
                 "expression too deeply nested");
        }
    }

    std::vector<Token> tokens_;
    int line_;
    size_t pos_ = 0;
};

// Cleanup: drop fences and labels, strip enumeration prefixes, join digit
// groups written with thousands separators. Returns the cleaned line or
// nullopt when the line carries no equation candidate.
std::optional<std::string> clean_line(std::string_view raw) {
    std::string s(raw);
    if (!s.empty() && s.back() == '\r') s.pop_back();

    static const std::regex fence(R"(^\s*```)");
    if (std::regex_search(s, fence)) return std::nullopt;

    static const std::regex enumeration(R"(^\s*\d+[.)]\s+)");
    s = std::regex_replace(s, enumeration, "");

    static const std::regex label(R"(^\s*(the\s+)?(corrected\s+)?equations?\s*:\s*)",
                                  std::regex::icase);
    s = std::regex_replace(s, label, "");

    // "1,000" -> "1000"
    std::string joined;
    joined.reserve(s.size());
    for (size_t i = 0; i < s.size(); ++i) {
        if (s[i] == ',' && i > 0 && i + 1 < s.size() &&
            std::isdigit(static_cast<unsigned char>(s[i - 1])) &&
            std::isdigit(static_cast<unsigned char>(s[i + 1]))) {
            continue;
        }
        joined.push_back(s[i]);
    }
    s = std::move(joined);

    bool blank = true;
    for (char c : s) {
        if (c != ' ' && c != '\t') {
            blank = false;
            break;
        }
    }
    if (blank) return std::nullopt;
    return s;
}

// Candidate lines contain exactly one '=' outside parentheses.
bool is_candidate(const std::string& s) {
    int depth = 0, eq = 0;
    for (char c : s) {
        if (c == '(') ++depth;
        else if (c == ')') --depth;
        else if (c == '=' && depth <= 0) ++eq;
    }
    return eq == 1;
}

}  // namespace

ParseResult parse_system(std::string_view text) {
    try {
        std::vector<std::pair<int, std::string>> candidates;  // (line no, cleaned)
        int line_no = 0;
        size_t start = 0;
        bool any_equals = false;
        while (start <= text.size()) {
            size_t end = text.find('\n', start);
            std::string_view raw = (end == std::string_view::npos)
                                       ? text.substr(start)
                                       : text.substr(start, end - start);
            ++line_no;
            auto cleaned = clean_line(raw);
            if (cleaned) {
                if (cleaned->find('=') != std::string::npos) any_equals = true;
                if (is_candidate(*cleaned)) candidates.emplace_back(line_no, *cleaned);
            }
            if (end == std::string_view::npos) break;
            start = end + 1;
        }

        if (candidates.empty()) {
            return ParseError{ParseError::Code::EmptyOutput, 0, 0,
                              any_equals ? "no well-formed equation line"
                                         : "no line contains '='"};
        }

        std::vector<Equation> equations;
        equations.reserve(candidates.size());
        for (auto& [line, body] : candidates) {
            LineParser parser(tokenize(body, line), line);
            equations.push_back(parser.parse_equation());
        }
        return EquationSystem::from_equations(std::move(equations));
    } catch (const ParseFailure& f) {
        return f.error;
    }
}

}  // namespace edcim
