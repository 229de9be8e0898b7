#include "rulechain/template.hpp"

#include <fstream>
#include <sstream>

#include "rulechain/error.hpp"

namespace rulechain {

PromptTemplate::PromptTemplate(std::string_view source) : source_(source) {
    std::string literal;
    for (std::size_t i = 0; i < source.size(); ++i) {
        char c = source[i];
        if (c == '{') {
            if (i + 1 < source.size() && source[i + 1] == '{') {
                literal.push_back('{');
                ++i;
                continue;
            }
            auto close = source.find('}', i + 1);
            if (close == std::string_view::npos) {
                throw invalid_input("template: unterminated slot at offset " + std::to_string(i));
            }
            std::string name(source.substr(i + 1, close - i - 1));
            if (name.empty() || name.find('{') != std::string::npos) {
                throw invalid_input("template: malformed slot at offset " + std::to_string(i));
            }
            if (!literal.empty()) {
                pieces_.emplace_back(std::move(literal));
                literal.clear();
            }
            pieces_.emplace_back(Slot{std::move(name)});
            i = close;
        } else if (c == '}') {
            if (i + 1 < source.size() && source[i + 1] == '}') {
                literal.push_back('}');
                ++i;
                continue;
            }
            throw invalid_input("template: stray '}' at offset " + std::to_string(i));
        } else {
            literal.push_back(c);
        }
    }
    if (!literal.empty()) {
        pieces_.emplace_back(std::move(literal));
    }
}

std::string PromptTemplate::render(
    const std::map<std::string, std::string, std::less<>>& values) const {
    std::string out;
    for (const auto& piece : pieces_) {
        if (const auto* text = std::get_if<std::string>(&piece)) {
            out += *text;
            continue;
        }
        const auto& name = std::get<Slot>(piece).name;
        auto it = values.find(name);
        if (it == values.end()) {
            throw invalid_input("template: no value for slot {" + name + "}");
        }
        out += it->second;
    }
    return out;
}

std::vector<std::string> PromptTemplate::slots() const {
    std::vector<std::string> names;
    for (const auto& piece : pieces_) {
        if (const auto* slot = std::get_if<Slot>(&piece)) {
            bool seen = false;
            for (const auto& n : names) {
                seen = seen || n == slot->name;
            }
            if (!seen) {
                names.push_back(slot->name);
            }
        }
    }
    return names;
}

PromptTemplate load_template(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorKind::io, "cannot read template " + path);
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    std::string text = buffer.str();
    while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) {
        text.pop_back();
    }
    return PromptTemplate(text);
}

} // namespace rulechain
