#pragma once

#include <array>
#include <string>

#include "mixopt/dataset.hpp"

namespace mixopt {

// mass-bearing constituents of a mix (curing temperature carries no mass)
constexpr std::size_t kNumConstituents = 8;
extern const std::array<const char*, kNumConstituents> kConstituentNames;

std::array<double, kNumConstituents> constituent_masses(const MixComposition& mix);

// exact: 1 yd = 0.9144 m
constexpr double kCubicMetersPerCubicYard = 0.764554857984;

enum class VolumeBasis { per_yd3, per_m3 };

double convert_volume_basis(double value, VolumeBasis from, VolumeBasis to);

// Cradle-to-gate emission factors, kg CO2e per lb of constituent, split into
// material production, transport, and plant production stages. Factors are
// user-supplied configuration; the bundled factors.example.csv is a labeled
// example, not a reference dataset.
struct EmissionFactors {
    std::array<double, kNumConstituents> material{};
    std::array<double, kNumConstituents> transport{};
    std::array<double, kNumConstituents> production{};
    std::array<bool, kNumConstituents> present{};

    double combined(std::size_t c) const { return material[c] + transport[c] + production[c]; }
};

struct GwpResult {
    double total = 0.0;                                         // kg CO2e per yd3
    std::array<double, kNumConstituents> by_constituent{};
    std::array<double, 3> by_stage{};                           // material, transport, production
    std::array<std::array<double, 3>, kNumConstituents> cells{};

    double total_per_m3() const;
};

// GWP(z) = g_m.z + g_t.z + g_p.z on the mix's per-yd3 masses.
// Missing factors are only an error for constituents with nonzero mass.
GwpResult gwp(const MixComposition& mix, const EmissionFactors& f);

// factors.csv schema: constituent,g_m,g_t,g_p
EmissionFactors load_factors(const std::string& csv_text);
EmissionFactors read_factors_file(const std::string& path);

// design-space search touches every constituent, so factors must be complete
void require_all_factors(const EmissionFactors& f);

}  // namespace mixopt
