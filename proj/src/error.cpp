#include "adbias/error.hpp"

namespace adbias {

namespace {

std::string format_message(ErrorCode code, const std::string& detail, const ErrorContext& ctx) {
    std::string msg = std::string(to_string(code)) + ": " + detail;
    std::string where;
    auto append = [&where](const std::string& part) {
        where += where.empty() ? part : ", " + part;
    };
    if (ctx.replication) append("replication " + std::to_string(*ctx.replication));
    if (ctx.arm) append("arm " + *ctx.arm);
    if (ctx.step) append("t=" + std::to_string(*ctx.step));
    if (!where.empty()) msg += " [" + where + "]";
    return msg;
}

} // namespace

const char* to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::invalid_argument: return "invalid argument";
        case ErrorCode::dimension_mismatch: return "dimension mismatch";
        case ErrorCode::singular_matrix: return "singular matrix";
        case ErrorCode::rank_deficient: return "rank deficient";
        case ErrorCode::zero_evidence: return "zero evidence";
        case ErrorCode::weight_underflow: return "weight underflow";
        case ErrorCode::infinite_divergence: return "infinite divergence";
        case ErrorCode::non_finite_risk: return "non-finite risk";
        case ErrorCode::replay_exhausted: return "replay exhausted";
        case ErrorCode::config: return "config";
    }
    return "unknown";
}

Error::Error(ErrorCode code, const std::string& what, ErrorContext context)
    : std::runtime_error(format_message(code, what, context)),
      code_(code),
      detail_(what),
      context_(std::move(context)) {}

Error Error::annotate(const ErrorContext& outer) const {
    ErrorContext merged = context_;
    if (!merged.replication) merged.replication = outer.replication;
    if (!merged.arm) merged.arm = outer.arm;
    if (!merged.step) merged.step = outer.step;
    return Error(code_, detail_, merged);
}

} // namespace adbias
