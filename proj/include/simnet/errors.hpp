#pragma once

#include <stdexcept>
#include <string>

namespace simnet {

// Shape/dimension mismatches (names the offending extents in the message).
struct shape_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Out-of-range coordinate or index.
struct index_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed file contents (dataset records, checkpoints, caches).
struct format_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Numerical failure: non-finite values where finite ones are required,
// failed eigensolve, diverged optimization.
struct numeric_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid configuration: unknown keys, out-of-range settings, unknown suite names.
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace simnet
