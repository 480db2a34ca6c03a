#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mixopt/acquisition.hpp"
#include "mixopt/gp.hpp"
#include "mixopt/gwp.hpp"

namespace mixopt {

struct InverseQuery {
    std::vector<double> thresholds_psi = {5000.0, 6000.0, 7000.0, 8000.0};
    std::vector<double> ages = {28.0};
    double gwp_bin_width = 50.0;  // kg CO2e per m3
    double confidence_k = 0.0;    // feasibility uses mean - k * sigma
    std::size_t candidates_per_bin = 50;
    std::size_t budget_per_cell = 20000;  // quasi-random points before shortfall
    bool local_refinement = true;         // perturb found candidates on shortfall

    void validate() const;
};

struct CellKey {
    double threshold_psi;
    double bin_lo;  // m3 basis, half-open [lo, hi)
    double bin_hi;

    bool operator<(const CellKey& o) const {
        if (threshold_psi != o.threshold_psi) return threshold_psi < o.threshold_psi;
        return bin_lo < o.bin_lo;
    }
};

struct CandidateRecord {
    std::string id;
    MixComposition mix;
    std::array<double, DesignSpace::kDim> design{};
    std::vector<double> pred_mean_ksi;   // per query age
    std::vector<double> pred_sigma_ksi;  // per query age
    double gwp_m3 = 0.0;
};

struct CellResult {
    std::vector<CandidateRecord> candidates;
    bool shortfall = false;
    std::size_t points_scanned = 0;
};

using InverseResult = std::map<CellKey, CellResult>;

// mean - k sigma >= threshold at every queried age, for one already-predicted
// candidate
bool feasible(const CandidateRecord& cand, double threshold_psi, double confidence_k);

// Rejection sampling over quasi-random space points with local refinement on
// shortfall. The rejection stream is a function of (seed, bin) so threshold
// tightening scans identical points; refinement streams additionally key on
// the threshold. Cells are independent and run concurrently.
InverseResult generate_candidates(const GpModel& model, const EmissionFactors& factors,
                                  const DesignSpace& space, const InverseQuery& query,
                                  std::uint64_t seed);

// observed GWP range of the space (quasi-random probe), snapped to bin edges
std::vector<std::pair<double, double>> derive_gwp_bins(const EmissionFactors& factors,
                                                       const DesignSpace& space,
                                                       double bin_width, std::uint64_t seed,
                                                       std::size_t n_probe = 4096);

std::string serialize_candidates(const InverseResult& result, const std::vector<double>& ages);

// per-cell min/median/max of cement, total fly ash, slag, w/b, hrwr
std::string bin_sweep_report(const InverseResult& result);

}  // namespace mixopt
