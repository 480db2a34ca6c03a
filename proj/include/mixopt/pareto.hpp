#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "mixopt/linalg.hpp"

namespace mixopt {

enum class Direction { maximize, minimize };

// canonical form: every objective maximized (minimized coordinates negated)
Vector canonicalize(const Vector& point, const std::vector<Direction>& directions);

// strict dominance: >= in every coordinate, > in at least one
bool dominates(const Vector& a, const Vector& b);

// Non-dominated subset, ordered by first objective descending. Duplicate
// vectors keep their first occurrence.
std::vector<Vector> pareto_front(const std::vector<Vector>& points);

// Exact hypervolume for m <= 3 (sweep for m = 2, slicing for m = 3). Points
// that do not strictly dominate the reference contribute nothing.
double hypervolume_exact(const std::vector<Vector>& points, const Vector& ref);

struct McEstimate {
    double value = 0.0;
    double std_error = 0.0;
};

// Uniform sampling over [ref, max(P)]; deterministic under seed and thread
// count (per-sample streams, integer hit reduction).
McEstimate hypervolume_mc(const std::vector<Vector>& points, const Vector& ref,
                          std::size_t n_samples, std::uint64_t seed);

// m <= 3 exact, otherwise Monte Carlo (2^16 samples) with a routing notice.
double hypervolume(const std::vector<Vector>& points, const Vector& ref,
                   const std::function<void(const std::string&)>& notice = nullptr);

namespace reference {
McEstimate hypervolume_mc(const std::vector<Vector>& points, const Vector& ref,
                          std::size_t n_samples, std::uint64_t seed);
}  // namespace reference

}  // namespace mixopt
