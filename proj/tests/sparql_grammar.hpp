#pragma once

// Recursive-descent recognizer for the SELECT subset of SPARQL 1.1 that the
// query builders emit: PREFIX declarations, SELECT [DISTINCT] with variables,
// a WHERE group of triple patterns and FILTER constraints, and LIMIT.
// Returns an empty string when the query is accepted, else an error message.

#include <cctype>
#include <string>
#include <string_view>

namespace sparql_grammar {

class Recognizer {
public:
    explicit Recognizer(std::string_view text) : s_(text) {}

    std::string check() {
        try {
            query();
            ws();
            if (i_ != s_.size()) fail("trailing input");
        } catch (const std::string& e) {
            return e + " at offset " + std::to_string(i_);
        }
        return {};
    }

private:
    [[noreturn]] void fail(const std::string& what) { throw what; }

    void ws() {
        while (i_ < s_.size()) {
            if (std::isspace(static_cast<unsigned char>(s_[i_]))) {
                ++i_;
            } else if (s_[i_] == '#') {
                while (i_ < s_.size() && s_[i_] != '\n') ++i_;
            } else {
                break;
            }
        }
    }

    bool keyword(std::string_view kw) {
        ws();
        if (s_.size() - i_ < kw.size()) return false;
        for (std::size_t k = 0; k < kw.size(); ++k) {
            if (std::toupper(static_cast<unsigned char>(s_[i_ + k])) != kw[k]) return false;
        }
        std::size_t end = i_ + kw.size();
        if (end < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[end])) || s_[end] == '_' || s_[end] == ':')) return false;
        i_ = end;
        return true;
    }

    void expect_keyword(std::string_view kw) {
        if (!keyword(kw)) fail("expected " + std::string(kw));
    }

    bool punct(char c) {
        ws();
        if (i_ < s_.size() && s_[i_] == c) {
            ++i_;
            return true;
        }
        return false;
    }

    void expect(char c) {
        if (!punct(c)) fail(std::string("expected '") + c + "'");
    }

    static bool pn_char(char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
    }

    bool iriref() {
        ws();
        if (i_ >= s_.size() || s_[i_] != '<') return false;
        std::size_t j = i_ + 1;
        while (j < s_.size() && s_[j] != '>') {
            char c = s_[j];
            if (std::isspace(static_cast<unsigned char>(c)) || c == '<' || c == '"' || c == '{' || c == '}' ||
                c == '|' || c == '^' || c == '`' || c == '\\') {
                return false;
            }
            ++j;
        }
        if (j >= s_.size()) return false;
        i_ = j + 1;
        return true;
    }

    // PNAME_NS: optional prefix then ':'.
    bool pname_ns(std::string* out = nullptr) {
        ws();
        std::size_t j = i_;
        if (j < s_.size() && std::isalpha(static_cast<unsigned char>(s_[j]))) {
            while (j < s_.size() && (pn_char(s_[j]) || s_[j] == '.')) ++j;
            if (s_[j - 1] == '.') return false;
        }
        if (j >= s_.size() || s_[j] != ':') return false;
        if (out) *out = std::string(s_.substr(i_, j - i_));
        i_ = j + 1;
        return true;
    }

    // Prefixed name: PNAME_NS then PN_LOCAL, which may contain inner dots.
    bool prefixed_name() {
        std::size_t save = i_;
        if (!pname_ns()) {
            i_ = save;
            return false;
        }
        std::size_t j = i_;
        while (j < s_.size() && (pn_char(s_[j]) || s_[j] == '.')) ++j;
        while (j > i_ && s_[j - 1] == '.') --j;
        i_ = j;
        return true;
    }

    bool var() {
        ws();
        if (i_ < s_.size() && (s_[i_] == '?' || s_[i_] == '$')) {
            std::size_t j = i_ + 1;
            while (j < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[j])) || s_[j] == '_')) ++j;
            if (j == i_ + 1) fail("empty variable name");
            i_ = j;
            return true;
        }
        return false;
    }

    bool string_literal() {
        ws();
        if (i_ >= s_.size() || s_[i_] != '"') return false;
        std::size_t j = i_ + 1;
        while (j < s_.size() && s_[j] != '"') {
            if (s_[j] == '\\') ++j;
            if (s_[j] == '\n') fail("newline in string");
            ++j;
        }
        if (j >= s_.size()) fail("unterminated string");
        i_ = j + 1;
        if (i_ < s_.size() && s_[i_] == '@') {
            ++i_;
            while (i_ < s_.size() && (std::isalpha(static_cast<unsigned char>(s_[i_])) || s_[i_] == '-')) ++i_;
        }
        return true;
    }

    bool integer() {
        ws();
        std::size_t j = i_;
        while (j < s_.size() && std::isdigit(static_cast<unsigned char>(s_[j]))) ++j;
        if (j == i_) return false;
        i_ = j;
        return true;
    }

    bool term() { return var() || iriref() || prefixed_name() || string_literal() || integer(); }

    void verb() {
        if (keyword("A")) return;
        if (!(var() || iriref() || prefixed_name())) fail("expected predicate");
    }

    void object_list() {
        if (!term()) fail("expected object");
        while (punct(',')) {
            if (!term()) fail("expected object");
        }
    }

    void triples() {
        if (!(var() || iriref() || prefixed_name())) fail("expected subject");
        verb();
        object_list();
        while (punct(';')) {
            ws();
            if (i_ < s_.size() && (s_[i_] == '.' || s_[i_] == '}')) break;
            verb();
            object_list();
        }
    }

    void primary() {
        if (punct('(')) {
            expression();
            expect(')');
            return;
        }
        if (punct('!')) {
            primary();
            return;
        }
        for (std::string_view fn : {"LANG", "STR", "BOUND", "ISIRI", "ISLITERAL", "LANGMATCHES", "REGEX", "CONTAINS"}) {
            std::size_t save = i_;
            if (keyword(fn)) {
                expect('(');
                expression();
                while (punct(',')) expression();
                expect(')');
                return;
            }
            i_ = save;
        }
        if (!term()) fail("expected expression");
    }

    void relational() {
        primary();
        ws();
        for (std::string_view op : {"!=", "<=", ">=", "=", "<", ">"}) {
            if (s_.substr(i_, op.size()) == op) {
                i_ += op.size();
                primary();
                return;
            }
        }
    }

    void expression() {
        relational();
        for (;;) {
            ws();
            if (s_.substr(i_, 2) == "&&" || s_.substr(i_, 2) == "||") {
                i_ += 2;
                relational();
            } else {
                return;
            }
        }
    }

    void group() {
        expect('{');
        for (;;) {
            ws();
            if (punct('}')) return;
            if (keyword("FILTER")) {
                expect('(');
                expression();
                expect(')');
                continue;
            }
            triples();
            ws();
            if (punct('.')) continue;
            expect('}');
            return;
        }
    }

    void query() {
        while (keyword("PREFIX")) {
            if (!pname_ns()) fail("expected prefix name");
            if (!iriref()) fail("expected IRI in PREFIX");
        }
        expect_keyword("SELECT");
        keyword("DISTINCT");
        if (!punct('*')) {
            if (!var()) fail("expected projection");
            while (var()) {
            }
        }
        expect_keyword("WHERE");
        group();
        if (keyword("LIMIT")) {
            if (!integer()) fail("expected LIMIT value");
        }
    }

    std::string_view s_;
    std::size_t i_ = 0;
};

inline std::string check(std::string_view query) { return Recognizer(query).check(); }

} // namespace sparql_grammar
