#include "dfgeo/parser.hpp"

#include <cctype>

namespace dfgeo {

namespace {

class Parser {
public:
    Parser(const std::string& text, const CoordSystem& cs) : text_(text), cs_(cs) {}

    ScalarExpr run() {
        skip_ws();
        if (at_end()) throw ParseError("empty expression", 0);
        ScalarExpr e = expr();
        skip_ws();
        if (!at_end()) throw ParseError("unexpected trailing input '" + rest_preview() + "'", pos_);
        return e;
    }

private:
    const std::string& text_;
    const CoordSystem& cs_;
    std::size_t pos_ = 0;

    bool at_end() const { return pos_ >= text_.size(); }
    char peek() const { return text_[pos_]; }
    void skip_ws() {
        while (!at_end() && std::isspace(static_cast<unsigned char>(peek()))) ++pos_;
    }
    bool accept(char c) {
        skip_ws();
        if (!at_end() && peek() == c) {
            ++pos_;
            return true;
        }
        return false;
    }
    std::string rest_preview() const {
        return text_.substr(pos_, std::min<std::size_t>(8, text_.size() - pos_));
    }

    ScalarExpr expr() {
        ScalarExpr acc = term();
        while (true) {
            if (accept('+')) acc += term();
            else if (accept('-')) acc -= term();
            else return acc;
        }
    }

    ScalarExpr term() {
        ScalarExpr acc = factor();
        while (true) {
            skip_ws();
            if (accept('*')) acc *= factor();
            else if (accept('/')) {
                std::size_t at = pos_;
                ScalarExpr d = factor();
                if (d.is_zero()) throw ParseError("division by zero", at);
                acc /= d;
            } else return acc;
        }
    }

    ScalarExpr factor() {
        if (accept('-')) return -factor();
        return power();
    }

    ScalarExpr power() {
        ScalarExpr base = primary();
        skip_ws();
        if (!accept('^')) return base;
        std::size_t at = pos_;
        long e = exponent();
        if (e < 0 && base.is_zero()) throw ParseError("negative power of zero", at);
        return base.pow(static_cast<int>(e));
    }

    long exponent() {
        skip_ws();
        bool paren = accept('(');
        bool neg = accept('-');
        skip_ws();
        if (at_end() || !std::isdigit(static_cast<unsigned char>(peek())))
            throw ParseError("expected integer exponent", pos_);
        long v = 0;
        while (!at_end() && std::isdigit(static_cast<unsigned char>(peek()))) {
            v = v * 10 + (peek() - '0');
            if (v > 1000000) throw ParseError("exponent too large", pos_);
            ++pos_;
        }
        if (paren && !accept(')')) throw ParseError("expected ')' after exponent", pos_);
        return neg ? -v : v;
    }

    ScalarExpr primary() {
        skip_ws();
        if (at_end()) throw ParseError("unexpected end of expression", pos_);
        char c = peek();
        if (c == '(') {
            ++pos_;
            ScalarExpr e = expr();
            if (!accept(')')) throw ParseError("expected ')'", pos_);
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) return integer();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return coordinate();
        throw ParseError(std::string("unexpected character '") + c + "'", pos_);
    }

    ScalarExpr integer() {
        std::size_t start = pos_;
        while (!at_end() && std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
        Integer v(text_.substr(start, pos_ - start));
        return ScalarExpr::constant(cs_.dim(), Rational(v));
    }

    ScalarExpr coordinate() {
        std::size_t start = pos_;
        while (!at_end() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_'))
            ++pos_;
        std::string label = text_.substr(start, pos_ - start);
        auto idx = cs_.index_of(label);
        if (!idx)
            throw ParseError("unknown coordinate '" + label + "' (m = " + std::to_string(cs_.m()) +
                                 ")",
                             start);
        return ScalarExpr::variable(cs_.dim(), *idx);
    }
};

} // namespace

ScalarExpr parse_scalar(const std::string& text, const CoordSystem& cs) {
    return Parser(text, cs).run();
}

} // namespace dfgeo
