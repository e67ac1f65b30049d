#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tomo {

// One exception type per named failure condition of the library contracts.
// All of them derive from std::runtime_error so callers can catch broadly.

struct NodeNotFound : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct MetricIncomplete : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct LabelMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct TooFewLeaves : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidRate : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidLength : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DegenerateDistribution : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SingularTransition : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct PermutationLike : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidCoefficients : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ZeroCountError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct TopologyMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Carries the byte offset of the first offending character.
struct ParseError : std::runtime_error {
    ParseError(const std::string& what, std::size_t position)
        : std::runtime_error(what + " (at position " + std::to_string(position) + ")"),
          position(position) {}
    std::size_t position;
};

}  // namespace tomo
