#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace drawdown {

enum class ErrorCode {
    InvalidParams,
    IllPosed,
    WellPosed,
    RootNotBracketed,
    OrderingViolation,
    DomainError,
    ConfigError,
    Bankruptcy,
};

std::string_view to_string(ErrorCode code);

/// Numerical failures signal a coefficient or formula inconsistency rather than bad input.
inline bool is_numerical_failure(ErrorCode code) {
    return code == ErrorCode::RootNotBracketed || code == ErrorCode::OrderingViolation;
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace drawdown
