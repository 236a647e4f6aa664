#pragma once

#include <stdexcept>
#include <string>

namespace cogest {

// Error taxonomy. The CLI maps these onto exit codes, so new error sites
// should pick the closest class rather than throwing std::runtime_error.

// Dimension or size mismatch between two values that must agree.
struct ShapeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Input values outside the documented domain (bad config, overlapping
// intervals, out-of-vocabulary ids, ...).
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Numerically degenerate input (zero-norm or parallel rotation triples).
struct DegenerateInputError : ValidationError {
    using ValidationError::ValidationError;
};

// A prerequisite artifact or state is missing (untrained model, absent
// checkpoint, command run out of order).
struct StateError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// File could not be read, written, or parsed.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace cogest
