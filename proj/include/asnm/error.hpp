#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace asnm {

/// Error categories surfaced by the library. The CLI prints the category name
/// verbatim so that scripts can match on it.
enum class Errc {
    MalformedCapture,
    UnsupportedCapture,
    EmptyTrace,
    SchemaViolation,
    InvalidSpec,
    InfeasibleSpec,
    InvalidObfuscationId,
    DegenerateData,
    DimensionMismatch,
    TooFewSamples,
    NoDirectCounterpart,
    InvalidConfig,
    IoError,
};

std::string_view to_string(Errc code) noexcept;

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what);

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

}  // namespace asnm
