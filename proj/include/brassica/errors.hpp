#pragma once

#include <stdexcept>
#include <string>

namespace brassica {

// Base class for every error the engine raises on purpose.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Tensor/layer dimension mismatches.
struct ShapeError : Error {
    using Error::Error;
};

// Invalid argument values (bad ranges, bad ratios, bad labels).
struct ArgumentError : Error {
    using Error::Error;
};

// NaN/Inf surfaced by a numeric operation. Never masked.
struct NumericError : Error {
    using Error::Error;
};

// Bad configuration file or command line.
struct ConfigError : Error {
    using Error::Error;
};

// Dataset ingestion: missing directories, undecodable images, bad splits.
struct DataError : Error {
    using Error::Error;
};

// Filesystem failures.
struct IoError : Error {
    using Error::Error;
};

// Checkpoint load failures, with a named reason per failure mode.
struct CheckpointError : IoError {
    enum class Kind { BadMagic, BadVersion, BadCrc, Truncated, SpecMismatch, Malformed };

    CheckpointError(Kind kind, const std::string& msg) : IoError(msg), kind(kind) {}

    Kind kind;
};

}  // namespace brassica
