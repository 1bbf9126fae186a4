#pragma once

#include <string>
#include <stdexcept>

namespace defirisk {

enum class Errc {
    // input / validation
    EmptyUniverse,
    DuplicateId,
    NonPositiveScore,
    InvalidWeights,
    InvalidSeries,
    InvalidMatrix,
    UniverseMismatch,
    AlreadyNormalized,
    NotNormalized,
    ZeroMatrix,
    NotDiagonal,
    EmptyVector,
    MissingTvl,
    ZeroTotalTvl,
    InvalidApy,
    InvalidArgument,
    NoActiveProtocols,
    MissingFx,
    DateRangeMismatch,
    ParseError,
    UnknownProtocol,
    DuplicateObservation,
    NonPositiveRate,
    MappingError,
    EmptyLedger,
    MonthMisalignment,
    ZeroRisk,
    // solver
    NotConverged,
    // I/O
    IoError,
    NetworkError,
};

const char* to_string(Errc code);

/// Base exception for every failure raised by the library. The message
/// carries the locating context (protocol id, path, line, field).
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what);

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

/// CLI exit code for an error: 2 input/validation, 3 solver, 4 I/O.
int exit_code_for(Errc code);

}  // namespace defirisk
