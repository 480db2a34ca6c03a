#pragma once

#include <cstdint>
#include <vector>

#include "mixopt/dataset.hpp"

namespace mixopt {

// Hill-curve ground truth used by the end-to-end rehearsals: zero at casting,
// monotone in time, saturating at a composition-dependent ceiling.
struct SyntheticOracle {
    double hill_exponent = 1.5;
    double sigma_obs = 0.3;  // ksi, observation noise

    double ceiling_ksi(const MixComposition& mix) const;   // S_max(x)
    double half_time_days(const MixComposition& mix) const;  // t50(x)
    double strength(const MixComposition& mix, double age_days) const;
};

struct SyntheticConfig {
    std::size_t n_mortar = 69;
    std::vector<std::size_t> concrete_phase_sizes = {7, 5, 10, 4, 16};  // phases II..VI
    std::size_t n_extra_concrete = 12;  // distributed round-robin over II..VI
    double sigma_obs = 0.3;
    long replicates = 3;
};

// Phase-structured dataset from the oracle. Mortar rows carry ages
// {1,3,5,28}, concrete rows {1,3,5,14,28}. Deterministic under seed.
Dataset generate_synthetic(const SyntheticConfig& cfg, std::uint64_t seed);

}  // namespace mixopt
