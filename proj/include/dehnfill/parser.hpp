#pragma once

#include "dehnfill/constraint.hpp"

#include <cctype>
#include <stdexcept>

namespace dehnfill {

// Parser for the canonical text form produced by render_system_text.
// Grammar (whitespace-insensitive inside lines):
//   system     := "_|_" | block ("or" block)*
//   block      := "clause" "{" constraint* "}"
//   constraint := poly ("= 0" | "<= 0" | "< 0" | "=" int "mod" int)
//   poly       := term (("+"|"-") term)*
//   term       := int | [int "*"] var ["*" var]
class SystemParser {
  public:
    explicit SystemParser(std::string text) : s_(std::move(text)) {}

    ConstraintSystem parse() {
        skip_ws();
        ConstraintSystem sys;
        if (peek_token("_|_")) {
            expect_token("_|_");
            skip_ws();
            if (pos_ != s_.size()) fail("trailing input after _|_");
            return sys;
        }
        sys.clauses.push_back(parse_clause());
        skip_ws();
        while (peek_token("or")) {
            expect_token("or");
            sys.clauses.push_back(parse_clause());
            skip_ws();
        }
        if (pos_ != s_.size()) fail("trailing input");
        return sys;
    }

  private:
    std::string s_;
    size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& msg) {
        size_t line = 1, col = 1;
        for (size_t i = 0; i < pos_ && i < s_.size(); ++i) {
            if (s_[i] == '\n') {
                ++line;
                col = 1;
            } else
                ++col;
        }
        throw std::runtime_error("parse error at line " + std::to_string(line) + ", col " +
                                 std::to_string(col) + ": " + msg);
    }

    void skip_ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool peek_token(const std::string& t) {
        skip_ws();
        return s_.compare(pos_, t.size(), t) == 0;
    }
    void expect_token(const std::string& t) {
        skip_ws();
        if (!peek_token(t)) fail("expected '" + t + "'");
        pos_ += t.size();
    }
    bool try_token(const std::string& t) {
        if (peek_token(t)) {
            pos_ += t.size();
            return true;
        }
        return false;
    }

    Int parse_int() {
        skip_ws();
        size_t start = pos_;
        if (pos_ < s_.size() && (s_[pos_] == '-' || s_[pos_] == '+')) ++pos_;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        if (pos_ == start || (pos_ == start + 1 && !std::isdigit(static_cast<unsigned char>(s_[start]))))
            fail("expected integer");
        return Int(s_.substr(start, pos_ - start));
    }

    bool at_ident() {
        skip_ws();
        if (pos_ >= s_.size()) return false;
        char c = s_[pos_];
        return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
    }
    std::string parse_ident() {
        skip_ws();
        size_t start = pos_;
        while (pos_ < s_.size() &&
               (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
            ++pos_;
        if (pos_ == start) fail("expected identifier");
        return s_.substr(start, pos_ - start);
    }

    // term := int | [int *] var [* var]  (returned as quadratic; affine if no pair)
    void parse_term(QuadraticForm& acc, int sign) {
        skip_ws();
        Int coeff = 1;
        bool have_num = false;
        if (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
            coeff = parse_int();
            have_num = true;
        }
        coeff *= sign;
        std::vector<VarId> vars;
        if (have_num) {
            while (try_token("*")) vars.emplace_back(parse_ident());
        } else if (at_ident()) {
            vars.emplace_back(parse_ident());
            while (try_token("*")) vars.emplace_back(parse_ident());
        } else {
            fail("expected term");
        }
        if (vars.size() > 2) fail("degree > 2 term");
        if (vars.empty())
            acc.linear().constant() += coeff;
        else if (vars.size() == 1)
            acc.linear().add_term(vars[0], coeff);
        else
            acc.add_quad_term(vars[0], vars[1], coeff);
    }

    QuadraticForm parse_poly() {
        QuadraticForm acc;
        int sign = 1;
        skip_ws();
        if (try_token("-"))
            sign = -1;
        else
            (void)try_token("+");
        parse_term(acc, sign);
        while (true) {
            skip_ws();
            if (try_token("+"))
                sign = 1;
            else if (peek_token("-") && !peek_token("->"))
                (void)try_token("-"), sign = -1;
            else
                break;
            parse_term(acc, sign);
        }
        return acc;
    }

    Constraint parse_constraint() {
        QuadraticForm poly = parse_poly();
        Constraint c;
        if (try_token("<=")) {
            expect_token("0");
            if (!poly.is_affine()) fail("quadratic inequality");
            c = Constraint::le(poly.linear());
        } else if (try_token("<")) {
            expect_token("0");
            if (!poly.is_affine()) fail("quadratic inequality");
            c = Constraint::lt(poly.linear());
        } else if (try_token("=")) {
            Int r = parse_int();
            skip_ws();
            if (try_token("mod")) {
                Int m = parse_int();
                if (!poly.is_affine()) fail("quadratic congruence");
                c = Constraint::mod_eq(poly.linear(), m, r);
            } else {
                if (r != 0) fail("expected '= 0'");
                if (poly.is_affine())
                    c = Constraint::eq(poly.linear());
                else
                    c = Constraint::eq(poly);
            }
        } else {
            fail("expected relation");
        }
        return c;
    }

    Clause parse_clause() {
        expect_token("clause");
        expect_token("{");
        Clause cl;
        while (!peek_token("}")) cl.add(parse_constraint());
        expect_token("}");
        return cl;
    }
};

inline ConstraintSystem parse_system_text(const std::string& text) {
    return SystemParser(text).parse();
}

}  // namespace dehnfill
