#pragma once

#include <stdexcept>
#include <string>

namespace demsr {

// Base class for all errors raised by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed input text (ASCII grids, GeoJSON, model manifests).
struct ParseError : Error {
    using Error::Error;
};

// Dimension or channel mismatch between grids, tensors or parameters.
struct ShapeError : Error {
    using Error::Error;
};

// Invalid argument or configuration value, empty domains, unknown codes.
struct ValueError : Error {
    using Error::Error;
};

// File-level failures: missing files, truncated payloads, version mismatch.
struct IoError : Error {
    using Error::Error;
};

}  // namespace demsr
