#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rulechain {

enum class ErrorKind {
    invalid_input,
    invalid_state,
    backend_unavailable,
    protocol,
    fixture_missing,
    parse,
    config,
    io,
};

std::string_view to_string(ErrorKind kind);

// Every failure surfaced by the library carries a category so callers (the
// CLI in particular) can map it onto an exit status without string matching.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

inline Error invalid_input(const std::string& message) {
    return Error(ErrorKind::invalid_input, message);
}

inline Error invalid_state(const std::string& message) {
    return Error(ErrorKind::invalid_state, message);
}

} // namespace rulechain
