#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace adbias {

enum class ErrorCode {
    invalid_argument,
    dimension_mismatch,
    singular_matrix,
    rank_deficient,
    zero_evidence,
    weight_underflow,
    infinite_divergence,
    non_finite_risk,
    replay_exhausted,
    config,
};

const char* to_string(ErrorCode code);

/// Location of a failure inside a simulation batch.
struct ErrorContext {
    std::optional<int> replication;
    std::optional<std::string> arm;
    std::optional<int> step;
};

/// Every recoverable failure in the library is reported through this type.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what, ErrorContext context = {});

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }
    [[nodiscard]] const ErrorContext& context() const noexcept { return context_; }
    /// Message without the context suffix.
    [[nodiscard]] const std::string& detail() const noexcept { return detail_; }

    /// Copy of this error with additional context fields filled in (existing fields win).
    [[nodiscard]] Error annotate(const ErrorContext& outer) const;

private:
    ErrorCode code_;
    std::string detail_;
    ErrorContext context_;
};

} // namespace adbias
