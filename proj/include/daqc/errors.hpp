#pragma once

#include <stdexcept>
#include <string>

namespace daqc {

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A target coupling has no source counterpart (h = 0, g != 0).
struct UnsimulableError : std::runtime_error {
    int i = 0, j = 0;
    std::string pauli;  // e.g. "xx"
    UnsimulableError(int i_, int j_, std::string pauli_, const std::string& msg)
        : std::runtime_error(msg), i(i_), j(j_), pauli(std::move(pauli_)) {}
};

struct SingularSystemError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Raw solve produced negative block times; the caller should fall back to
/// the non-negative solver.
struct NegativeTimesError : std::runtime_error {
    int negative_count = 0;
    NegativeTimesError(int count, const std::string& msg)
        : std::runtime_error(msg), negative_count(count) {}
};

struct OptimizationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace daqc
