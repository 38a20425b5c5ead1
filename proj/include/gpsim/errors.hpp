#pragma once

#include <stdexcept>
#include <string>

namespace gpsim {

// Error taxonomy used across the library. The CLI maps these onto exit
// codes: ConfigError -> 2, NumericalError -> 3, tolerance failures -> 1.

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Inputs outside an operation's mathematical domain (labels outside [0,1],
// empty samples, ...).
struct DomainError : std::runtime_error {
    explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

// Structurally incompatible operands: mismatched block measures, misaligned
// partitions, different time grids.
struct ShapeError : std::runtime_error {
    explicit ShapeError(const std::string& what) : std::runtime_error(what) {}
};

// A request the implementation refuses by design (e.g. exact cut-norm
// enumeration beyond the supported block count).
struct CapabilityError : std::runtime_error {
    explicit CapabilityError(const std::string& what) : std::runtime_error(what) {}
};

// Partition is malformed for the requested check (empty class, no coverage).
struct PartitionError : std::runtime_error {
    explicit PartitionError(const std::string& what) : std::runtime_error(what) {}
};

// Runtime numerical failures: quadrature non-convergence, NaN/Inf states,
// CFL violations, solver faults.
struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace gpsim
