#include "defirisk/error.h"

namespace defirisk {

const char* to_string(Errc code) {
    switch (code) {
        case Errc::EmptyUniverse: return "EmptyUniverse";
        case Errc::DuplicateId: return "DuplicateId";
        case Errc::NonPositiveScore: return "NonPositiveScore";
        case Errc::InvalidWeights: return "InvalidWeights";
        case Errc::InvalidSeries: return "InvalidSeries";
        case Errc::InvalidMatrix: return "InvalidMatrix";
        case Errc::UniverseMismatch: return "UniverseMismatch";
        case Errc::AlreadyNormalized: return "AlreadyNormalized";
        case Errc::NotNormalized: return "NotNormalized";
        case Errc::ZeroMatrix: return "ZeroMatrix";
        case Errc::NotDiagonal: return "NotDiagonal";
        case Errc::EmptyVector: return "EmptyVector";
        case Errc::MissingTvl: return "MissingTvl";
        case Errc::ZeroTotalTvl: return "ZeroTotalTvl";
        case Errc::InvalidApy: return "InvalidApy";
        case Errc::InvalidArgument: return "InvalidArgument";
        case Errc::NoActiveProtocols: return "NoActiveProtocols";
        case Errc::MissingFx: return "MissingFx";
        case Errc::DateRangeMismatch: return "DateRangeMismatch";
        case Errc::ParseError: return "ParseError";
        case Errc::UnknownProtocol: return "UnknownProtocol";
        case Errc::DuplicateObservation: return "DuplicateObservation";
        case Errc::NonPositiveRate: return "NonPositiveRate";
        case Errc::MappingError: return "MappingError";
        case Errc::EmptyLedger: return "EmptyLedger";
        case Errc::MonthMisalignment: return "MonthMisalignment";
        case Errc::ZeroRisk: return "ZeroRisk";
        case Errc::NotConverged: return "NotConverged";
        case Errc::IoError: return "IoError";
        case Errc::NetworkError: return "NetworkError";
    }
    return "Unknown";
}

Error::Error(Errc code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

int exit_code_for(Errc code) {
    switch (code) {
        case Errc::NotConverged:
            return 3;
        case Errc::IoError:
        case Errc::NetworkError:
            return 4;
        default:
            return 2;
    }
}

}  // namespace defirisk
