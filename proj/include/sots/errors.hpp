#pragma once

#include <stdexcept>

namespace sots {

// A theorem's validity region was left: the requested bound does not exist
// or is vacuous at these parameters (for example q < c_max/4, or k < L·e·ln2).
struct bound_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Ciphertext values are inconsistent with the claimed parameters or probe
// structure (non-integer counts, parity violation, census mismatch, ...).
struct ciphertext_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace sots
