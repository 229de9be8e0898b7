#include "rulechain/text.hpp"

namespace rulechain {

std::string to_lower(std::string_view text) {
    std::string out(text);
    for (char& c : out) {
        if (c >= 'A' && c <= 'Z') {
            c = static_cast<char>(c - 'A' + 'a');
        }
    }
    return out;
}

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    auto flush = [&] {
        while (!current.empty()) {
            char c = current.back();
            if (c == '.' || c == ',' || c == ';' || c == ':' || c == '!' || c == '?') {
                current.pop_back();
            } else {
                break;
            }
        }
        if (!current.empty()) {
            tokens.push_back(std::move(current));
        }
        current.clear();
    };
    for (char c : text) {
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v') {
            flush();
        } else {
            current.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : c);
        }
    }
    flush();
    return tokens;
}

} // namespace rulechain
