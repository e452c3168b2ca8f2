#pragma once

#include <stdexcept>
#include <string>

namespace framepipe {

// Base for all toolkit errors. The CLI maps subclasses to exit codes:
// ConfigError -> 2, InfeasibleError -> 3, EquivalenceError -> 4, rest -> 1.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad or missing configuration: schema violations, missing calibration
// constants, malformed input documents.
struct ConfigError : Error {
    using Error::Error;
};

// A constraint leaves no admissible solution (e.g. no feasible device split).
struct InfeasibleError : Error {
    using Error::Error;
};

// Rank-deficient or otherwise unsolvable calibration fit.
struct FitError : Error {
    using Error::Error;
};

// Not enough samples/frames to produce the requested statistic.
struct InsufficientDataError : Error {
    using Error::Error;
};

// Action token outside the configured embedding domain.
struct UnknownActionError : Error {
    using Error::Error;
};

// Structurally invalid operator graph (shape mismatch, cycle, dangling edge).
struct GraphError : Error {
    using Error::Error;
};

// Fusion plan inconsistent with the graph it claims to partition.
struct PlanError : Error {
    using Error::Error;
};

// A --check style verification failed (e.g. fused/unfused outputs diverge).
struct EquivalenceError : Error {
    using Error::Error;
};

// Filesystem-level failure while reading or writing artifacts.
struct IoError : Error {
    using Error::Error;
};

}  // namespace framepipe
