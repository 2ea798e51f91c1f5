#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gafvit {

enum class Errc {
    DegenerateSeries,
    NonFiniteInput,
    OutOfRange,
    ChannelOutOfBounds,
    DimensionMismatch,
    IndivisibleImage,
    ShapeMismatch,
    LabelOutOfRange,
    NonFiniteGradient,
    TooFewSamples,
    ZeroVector,
    DegenerateCurve,
    SchemaError,
    NonMonotonicTime,
    EmptyFile,
    TooShort,
    LengthMismatch,
    EmptyMatrix,
    InvalidArgument,
    IoError,
    CheckpointFormat,
};

std::string_view errc_name(Errc code) noexcept;

// Data errors map to CLI exit code 2, numeric failures to 3.
enum class ErrorClass { Data, Numeric };
ErrorClass error_class(Errc code) noexcept;

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what);

    Errc code() const noexcept { return m_code; }

private:
    Errc m_code;
};

[[noreturn]] void raise(Errc code, const std::string& what);

} // namespace gafvit
