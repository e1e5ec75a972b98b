#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace perigraph {

enum class ErrorCode {
    LoopEdge,
    AntiParallelEdge,
    DuplicateEdge,
    IsolatedVertex,
    NonPositiveLength,
    LatticeDegenerate,
    InconsistentEmbedding,
    UnknownVertex,
    RankMismatch,
    Unreachable,
    EpsilonTooLarge,
    MissingLimit,
    OutOfDomain,
    NoConvergentSubsequence,
    DerivativeUnavailable,
    GridTooCoarse,
    QuadratureDiverged,
    StripViolation,
    SymbolPole,
    PointIsVertex,
    BandRadiusTooSmall,
    DecayViolation,
    NotPeriodic,
    OffTorus,
    WeightOutOfClass,
    ParseError,
    InvalidArgument,
};

inline std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::LoopEdge: return "LoopEdge";
        case ErrorCode::AntiParallelEdge: return "AntiParallelEdge";
        case ErrorCode::DuplicateEdge: return "DuplicateEdge";
        case ErrorCode::IsolatedVertex: return "IsolatedVertex";
        case ErrorCode::NonPositiveLength: return "NonPositiveLength";
        case ErrorCode::LatticeDegenerate: return "LatticeDegenerate";
        case ErrorCode::InconsistentEmbedding: return "InconsistentEmbedding";
        case ErrorCode::UnknownVertex: return "UnknownVertex";
        case ErrorCode::RankMismatch: return "RankMismatch";
        case ErrorCode::Unreachable: return "Unreachable";
        case ErrorCode::EpsilonTooLarge: return "EpsilonTooLarge";
        case ErrorCode::MissingLimit: return "MissingLimit";
        case ErrorCode::OutOfDomain: return "OutOfDomain";
        case ErrorCode::NoConvergentSubsequence: return "NoConvergentSubsequence";
        case ErrorCode::DerivativeUnavailable: return "DerivativeUnavailable";
        case ErrorCode::GridTooCoarse: return "GridTooCoarse";
        case ErrorCode::QuadratureDiverged: return "QuadratureDiverged";
        case ErrorCode::StripViolation: return "StripViolation";
        case ErrorCode::SymbolPole: return "SymbolPole";
        case ErrorCode::PointIsVertex: return "PointIsVertex";
        case ErrorCode::BandRadiusTooSmall: return "BandRadiusTooSmall";
        case ErrorCode::DecayViolation: return "DecayViolation";
        case ErrorCode::NotPeriodic: return "NotPeriodic";
        case ErrorCode::OffTorus: return "OffTorus";
        case ErrorCode::WeightOutOfClass: return "WeightOutOfClass";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

/// Exception carrying a machine-readable code next to the human message.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace perigraph
