#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace mixopt {

// splitmix64 finalizer; the workhorse behind every seeded stream in the
// project. Stateless per (seed, counter) so parallel consumers stay
// deterministic regardless of thread count.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t value) {
    return mix64(seed ^ (value + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2)));
}

// uniform double in [0, 1) from 53 random bits
inline double to_unit_double(std::uint64_t bits) {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// Stateless uniform: sample `index` of the stream identified by `seed`.
inline double stateless_uniform(std::uint64_t seed, std::uint64_t index) {
    return to_unit_double(mix64(seed + index * 0x9e3779b97f4a7c15ULL));
}

// Standard normal quantile, Wichura's AS 241 (double precision).
double normal_quantile(double p);

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

inline double normal_pdf(double z) {
    return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI);
}

// Stateless standard normal via inverse CDF.
inline double stateless_normal(std::uint64_t seed, std::uint64_t index) {
    double u = stateless_uniform(seed, index);
    // keep away from 0 so the quantile stays finite
    return normal_quantile(u + 0x1.0p-54);
}

// Small sequential generator for shuffles, rejection sampling and the like.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(mix64(seed ^ 0x2545f4914f6cdd1dULL)) {}

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        return mix64(state_);
    }

    double next_double() { return to_unit_double(next_u64()); }

    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    double normal() { return normal_quantile(next_double() + 0x1.0p-54); }

    // integer in [0, n)
    std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    // independent child stream
    Rng derive(std::uint64_t tag) const { return Rng(hash_combine(state_, tag)); }

  private:
    std::uint64_t state_;
};

// van der Corput radical inverse of `index` in the given base
double radical_inverse(std::uint64_t base, std::uint64_t index);

// prime base for low-discrepancy dimension d (first 64 primes)
std::uint64_t nth_prime_base(std::size_t d);

// Halton sequence point, dimensions taken from the first primes.
// index is 1-based internally so the first point is not the origin.
std::vector<double> halton_point(std::uint64_t index, std::size_t dim);

}  // namespace mixopt
