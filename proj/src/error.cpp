#include "shiftcast/error.hpp"

namespace shiftcast {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::MissingDeposit: return "MissingDeposit";
        case ErrorKind::DuplicatePad: return "DuplicatePad";
        case ErrorKind::NonPositiveDimension: return "NonPositiveDimension";
        case ErrorKind::NonFiniteInput: return "NonFiniteInput";
        case ErrorKind::UnknownSpec: return "UnknownSpec";
        case ErrorKind::InvalidRecord: return "InvalidRecord";
        case ErrorKind::MixedSpec: return "MixedSpec";
        case ErrorKind::DimensionMismatch: return "DimensionMismatch";
        case ErrorKind::EmptyTrainingSet: return "EmptyTrainingSet";
        case ErrorKind::InvalidConfig: return "InvalidConfig";
        case ErrorKind::InfeasiblePoint: return "InfeasiblePoint";
        case ErrorKind::TooLarge: return "TooLarge";
        case ErrorKind::KTooLarge: return "KTooLarge";
        case ErrorKind::KTooSmall: return "KTooSmall";
        case ErrorKind::LengthMismatch: return "LengthMismatch";
        case ErrorKind::Empty: return "Empty";
        case ErrorKind::Schema: return "Schema";
        case ErrorKind::Io: return "Io";
    }
    return "Unknown";
}

}  // namespace shiftcast
