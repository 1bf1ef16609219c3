#include "bbo/error.hpp"

namespace bbo {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::EmptyInterval: return "EmptyInterval";
    case ErrorCode::BudgetExhausted: return "BudgetExhausted";
    case ErrorCode::OutOfDomain: return "OutOfDomain";
    case ErrorCode::StateNotInitialized: return "StateNotInitialized";
    case ErrorCode::NotSquare: return "NotSquare";
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::SingularDiagonal: return "SingularDiagonal";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::InternalConsistency: return "InternalConsistency";
    case ErrorCode::ClassTooLarge: return "ClassTooLarge";
    case ErrorCode::RevisitDetected: return "RevisitDetected";
    case ErrorCode::EvaluatorTimeout: return "EvaluatorTimeout";
    case ErrorCode::EvaluatorProtocol: return "EvaluatorProtocol";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

} // namespace bbo
