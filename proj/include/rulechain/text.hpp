#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace rulechain {

// ASCII lowercase; bytes >= 0x80 pass through untouched so UTF-8 survives.
std::string to_lower(std::string_view text);

/// Evaluation tokenizer: lowercase, split on whitespace, strip trailing
/// punctuation (.,;:!?) from each token, drop tokens left empty.
std::vector<std::string> tokenize(std::string_view text);

} // namespace rulechain
