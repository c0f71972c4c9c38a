#pragma once

#include <stdexcept>
#include <string>

namespace ncrs {

/// Invalid user-supplied configuration (bad dims, unknown keys, out-of-range values).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed or mismatched data (genome files, checkpoints, archives).
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace ncrs
