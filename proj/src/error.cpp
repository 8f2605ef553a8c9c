#include "drawdown/error.hpp"

namespace drawdown {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidParams: return "InvalidParams";
        case ErrorCode::IllPosed: return "IllPosed";
        case ErrorCode::WellPosed: return "WellPosed";
        case ErrorCode::RootNotBracketed: return "RootNotBracketed";
        case ErrorCode::OrderingViolation: return "OrderingViolation";
        case ErrorCode::DomainError: return "DomainError";
        case ErrorCode::ConfigError: return "ConfigError";
        case ErrorCode::Bankruptcy: return "Bankruptcy";
    }
    return "Unknown";
}

}  // namespace drawdown
