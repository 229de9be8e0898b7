#pragma once

#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace rulechain {

// Prompt template with named slots written as {name}. "{{" and "}}" produce
// literal braces. Slot values are inserted verbatim and never re-scanned, so
// a value that itself contains "{text}" is not expanded.
class PromptTemplate {
public:
    // Throws invalid_input on an unbalanced brace or an empty slot name.
    explicit PromptTemplate(std::string_view source);

    std::string render(const std::map<std::string, std::string, std::less<>>& values) const;

    /// Slot names in order of first appearance.
    std::vector<std::string> slots() const;

    const std::string& source() const noexcept { return source_; }

private:
    struct Slot {
        std::string name;
    };
    std::string source_;
    std::vector<std::variant<std::string, Slot>> pieces_;
};

// Loads a template file; throws Error(io) when unreadable.
PromptTemplate load_template(const std::string& path);

} // namespace rulechain
