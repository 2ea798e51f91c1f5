#include "gafvit/error.hpp"

namespace gafvit {

std::string_view errc_name(Errc code) noexcept {
    switch (code) {
    case Errc::DegenerateSeries: return "DegenerateSeries";
    case Errc::NonFiniteInput: return "NonFiniteInput";
    case Errc::OutOfRange: return "OutOfRange";
    case Errc::ChannelOutOfBounds: return "ChannelOutOfBounds";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::IndivisibleImage: return "IndivisibleImage";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::LabelOutOfRange: return "LabelOutOfRange";
    case Errc::NonFiniteGradient: return "NonFiniteGradient";
    case Errc::TooFewSamples: return "TooFewSamples";
    case Errc::ZeroVector: return "ZeroVector";
    case Errc::DegenerateCurve: return "DegenerateCurve";
    case Errc::SchemaError: return "SchemaError";
    case Errc::NonMonotonicTime: return "NonMonotonicTime";
    case Errc::EmptyFile: return "EmptyFile";
    case Errc::TooShort: return "TooShort";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::EmptyMatrix: return "EmptyMatrix";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::IoError: return "IoError";
    case Errc::CheckpointFormat: return "CheckpointFormat";
    }
    return "Unknown";
}

ErrorClass error_class(Errc code) noexcept {
    switch (code) {
    case Errc::NonFiniteGradient:
    case Errc::NonFiniteInput:
        return ErrorClass::Numeric;
    default:
        return ErrorClass::Data;
    }
}

Error::Error(Errc code, const std::string& what)
    : std::runtime_error(std::string(errc_name(code)) + ": " + what), m_code(code) {}

void raise(Errc code, const std::string& what) { throw Error(code, what); }

} // namespace gafvit
