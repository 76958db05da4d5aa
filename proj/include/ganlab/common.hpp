#pragma once

#include <stdexcept>
#include <string>

namespace ganlab {

// Base class for everything this library throws.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Shape or size disagreement between operands.
struct DimensionError : Error {
    using Error::Error;
};

// Malformed or unreadable files, fixtures, sample sets.
struct DataError : Error {
    using Error::Error;
};

// Bad configuration: unknown keys, invalid values, refused overwrites.
struct ConfigError : Error {
    using Error::Error;
};

// GAN training produced a non-finite loss; message carries the step.
struct TrainingDiverged : Error {
    using Error::Error;
};

}  // namespace ganlab
