#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace shiftcast {

enum class ErrorKind {
    // domain
    MissingDeposit,
    DuplicatePad,
    NonPositiveDimension,
    NonFiniteInput,
    UnknownSpec,
    InvalidRecord,
    MixedSpec,
    // kernel-svr
    DimensionMismatch,
    EmptyTrainingSet,
    InvalidConfig,
    InfeasiblePoint,
    // oracle
    TooLarge,
    // modelsel
    KTooLarge,
    KTooSmall,
    LengthMismatch,
    Empty,
    // io
    Schema,
    Io,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library carries a machine-checkable kind.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace shiftcast
