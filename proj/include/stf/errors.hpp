#pragma once

#include <stdexcept>
#include <string>

namespace stf {

// Error taxonomy shared across the library. Everything derives from Error so
// the CLI boundary can catch a single type.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Shape disagreement between tensors or between a tensor and a layer.
struct DimensionError : Error {
    using Error::Error;
};

// A stated precondition was violated by the caller.
struct ContractError : Error {
    using Error::Error;
};

// Invalid configuration value (bad kernel width, unknown key, ...).
struct ConfigError : Error {
    using Error::Error;
};

// Malformed input text; the message carries the 1-based line number.
struct ParseError : Error {
    using Error::Error;
};

// Softmax over an empty support; the caller decides the fallback.
struct EmptyNeighborhoodError : Error {
    using Error::Error;
};

// A window with no valid agent at the anchor frame.
struct EmptyWindowError : Error {
    using Error::Error;
};

// A gradient contains NaN/Inf; the message names the parameter.
struct PoisonedGradientError : Error {
    using Error::Error;
};

// Metric evaluation with nothing to score.
struct EvaluationError : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

}  // namespace stf
