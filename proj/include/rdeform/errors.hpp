#pragma once

#include <stdexcept>
#include <string>

namespace rdeform {

// Invalid user input: malformed config, invalid metric, bad chart parameters.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A surface violates the admittance gate (k1, k2, H > 0) or the
// conjugate-isothermal requirement.
class AdmittanceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// The numerics cannot make a confident claim (no spectral gap, under-resolved
// boundary phase, ill-conditioned frame).
class IndeterminateError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Generic numerical failure: point outside the working region, singular
// matrix, degenerate immersion, smallness budget exceeded.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace rdeform
