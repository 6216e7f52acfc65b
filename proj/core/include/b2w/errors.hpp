#pragma once

#include <stdexcept>
#include <string>

namespace b2w {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Incompatible tensor shapes (messages name both shapes).
struct ShapeError : Error {
    using Error::Error;
};

// Index or id out of the valid range.
struct IndexError : Error {
    using Error::Error;
};

// Caller violated an operation precondition.
struct ContractError : Error {
    using Error::Error;
};

// Bad vocabulary, config file, or flag combination.
struct ConfigError : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

// Non-finite values where finite ones are required.
struct NumericError : Error {
    using Error::Error;
};

// Checkpoint manifest/blob inconsistency.
struct CorruptionError : Error {
    using Error::Error;
};

}  // namespace b2w
