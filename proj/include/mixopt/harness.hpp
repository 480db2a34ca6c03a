#pragma once

#include <map>
#include <string>
#include <vector>

#include "mixopt/config.hpp"
#include "mixopt/dataset.hpp"
#include "mixopt/gp.hpp"
#include "mixopt/inverse.hpp"
#include "mixopt/metrics.hpp"
#include "mixopt/synthetic.hpp"

namespace mixopt {

// Command implementations behind the CLI. Each writes plain delimited tables
// (first line: "# config_hash=... seed=...") plus one JSON summary into
// cfg.out_dir and returns the data the tests assert on.

struct IngestSummary {
    std::size_t n_mixes = 0;
    std::size_t n_mortar = 0;
    std::size_t n_concrete = 0;
    std::size_t n_observations = 0;
    std::map<int, std::size_t> mixes_per_phase;
};

IngestSummary run_ingest(const RunConfig& cfg);

Dataset run_generate_synthetic(const RunConfig& cfg);

struct PhaseCell {
    std::uint64_t testing_seed = 0;
    int phase = 0;  // 1..6
    std::size_t n_train_rows = 0;
    double lml = 0.0;
    EvalTable table;
};

struct PhasewiseResult {
    std::vector<PhaseCell> cells;  // 6 phases x testing seeds
    std::map<std::uint64_t, EvalTable> final_phase;  // seed -> phase VI table
    double mean_r2_all = 0.0;   // across seeds, final phase, pooled row
    double mean_rmse_all = 0.0;
};

PhasewiseResult run_train_phasewise(const RunConfig& cfg);

std::vector<CurvePoint> run_predict(const RunConfig& cfg, const std::string& mix_id,
                                    const std::vector<double>& ages);

EvalTable run_evaluate(const RunConfig& cfg);

struct SuggestResult {
    AcquisitionResult acquisition;
    std::string candidates_path;
};

SuggestResult run_suggest(const RunConfig& cfg);

struct CampaignRound {
    std::size_t round = 0;
    double hv_observed = 0.0;         // front of everything evaluated so far
    double hv_after_predicted = 0.0;  // model's predicted front after the batch
    double acq_log_value = 0.0;
};

struct CampaignResult {
    std::vector<CampaignRound> rounds;
    double hv_final = 0.0;
    double hv_random_baseline = 0.0;  // same evaluation budget, uniform designs
    std::string trajectory_path;
};

// Closed-loop rehearsal against the synthetic oracle: fit, suggest q, have
// the oracle "cast" the batch, repeat. The baseline spends the identical
// budget on uniform random designs from the same space.
CampaignResult run_bo_campaign(const RunConfig& cfg);

struct InverseRunResult {
    InverseResult cells;
    std::string candidates_path;
    std::string report_path;
};

InverseRunResult run_inverse(const RunConfig& cfg);

std::string run_gwp_report(const RunConfig& cfg);  // returns output path

// shared helpers
std::string report_header(const RunConfig& cfg);
std::vector<Vector> observed_objectives(const Dataset& d, const EmissionFactors& factors,
                                        double age_days);

}  // namespace mixopt
