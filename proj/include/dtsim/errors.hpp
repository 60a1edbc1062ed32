#pragma once

#include <stdexcept>
#include <string>

namespace dtsim {

/// Unusable parameters or inputs outside a function's domain.
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

/// Points that do not lie on the geometric sample grid.
struct GridError : std::domain_error {
    using std::domain_error::domain_error;
};

/// Time or lag indices outside the simulated range.
struct IndexError : std::out_of_range {
    using std::out_of_range::out_of_range;
};

/// A spectral series whose geometric ratio has modulus >= 1.
struct ConvergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A closed-form denominator that vanishes.
struct PoleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace dtsim
