#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace bbo {

enum class ErrorCode {
    InvalidArgument,
    DimensionMismatch,
    EmptyInterval,
    BudgetExhausted,
    OutOfDomain,
    StateNotInitialized,
    NotSquare,
    NotSymmetric,
    NotPositiveDefinite,
    SingularDiagonal,
    InsufficientData,
    InternalConsistency,
    ClassTooLarge,
    RevisitDetected,
    EvaluatorTimeout,
    EvaluatorProtocol,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message);

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

} // namespace bbo
