#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace sareo {

// Error taxonomy for the whole toolkit. CLI maps these onto exit codes:
// config errors -> 2, data errors -> 3, external command failures -> 4.
enum class Errc {
    // catalog / raster ingest
    MalformedCatalog,
    DuplicateSceneId,
    DecodeError,
    BandCountMismatch,
    NotSingleBand,
    // filters
    DimensionMismatch,
    MissingBand,
    WrongBandLayout,
    // scoring
    PatchTooLarge,
    EmptyStream,
    NotSymmetric,
    NotFiniteInput,
    EmptyScoreSet,
    // sar prep
    NonFinite,
    EvenKernel,
    PlaneTooSmall,
    // pairing
    NegativeWindow,
    // eval
    OutOfRange,
    EmptySet,
    // pipeline
    IoError,
    ConfigError,
    MissingUpstreamManifest,
    StageFailure,
    CommandFailed,
    IncompleteOutputs,
    // internal contract violations
    InvalidArgument,
};

inline const char* errc_name(Errc c) {
    switch (c) {
    case Errc::MalformedCatalog: return "MalformedCatalog";
    case Errc::DuplicateSceneId: return "DuplicateSceneId";
    case Errc::DecodeError: return "DecodeError";
    case Errc::BandCountMismatch: return "BandCountMismatch";
    case Errc::NotSingleBand: return "NotSingleBand";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::MissingBand: return "MissingBand";
    case Errc::WrongBandLayout: return "WrongBandLayout";
    case Errc::PatchTooLarge: return "PatchTooLarge";
    case Errc::EmptyStream: return "EmptyStream";
    case Errc::NotSymmetric: return "NotSymmetric";
    case Errc::NotFiniteInput: return "NotFiniteInput";
    case Errc::EmptyScoreSet: return "EmptyScoreSet";
    case Errc::NonFinite: return "NonFinite";
    case Errc::EvenKernel: return "EvenKernel";
    case Errc::PlaneTooSmall: return "PlaneTooSmall";
    case Errc::NegativeWindow: return "NegativeWindow";
    case Errc::OutOfRange: return "OutOfRange";
    case Errc::EmptySet: return "EmptySet";
    case Errc::IoError: return "IoError";
    case Errc::ConfigError: return "ConfigError";
    case Errc::MissingUpstreamManifest: return "MissingUpstreamManifest";
    case Errc::StageFailure: return "StageFailure";
    case Errc::CommandFailed: return "CommandFailed";
    case Errc::IncompleteOutputs: return "IncompleteOutputs";
    case Errc::InvalidArgument: return "InvalidArgument";
    }
    return "UnknownError";
}

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& msg)
        : std::runtime_error(std::string(errc_name(code)) + ": " + msg), code_(code) {}

    Errc code() const { return code_; }

private:
    Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& msg) {
    throw Error(code, msg);
}

inline void require(bool cond, Errc code, const std::string& msg) {
    if (!cond) raise(code, msg);
}

}  // namespace sareo
