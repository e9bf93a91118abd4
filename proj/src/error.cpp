#include "asnm/error.hpp"

namespace asnm {

std::string_view to_string(Errc code) noexcept {
    switch (code) {
        case Errc::MalformedCapture:     return "MalformedCapture";
        case Errc::UnsupportedCapture:   return "UnsupportedCapture";
        case Errc::EmptyTrace:           return "EmptyTrace";
        case Errc::SchemaViolation:      return "SchemaViolation";
        case Errc::InvalidSpec:          return "InvalidSpec";
        case Errc::InfeasibleSpec:       return "InfeasibleSpec";
        case Errc::InvalidObfuscationId: return "InvalidObfuscationId";
        case Errc::DegenerateData:       return "DegenerateData";
        case Errc::DimensionMismatch:    return "DimensionMismatch";
        case Errc::TooFewSamples:        return "TooFewSamples";
        case Errc::NoDirectCounterpart:  return "NoDirectCounterpart";
        case Errc::InvalidConfig:        return "InvalidConfig";
        case Errc::IoError:              return "IoError";
    }
    return "Unknown";
}

Error::Error(Errc code, const std::string& what)
    : std::runtime_error(what), code_(code) {}

}  // namespace asnm
