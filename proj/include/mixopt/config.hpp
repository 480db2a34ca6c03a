#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "mixopt/acquisition.hpp"
#include "mixopt/dataset.hpp"
#include "mixopt/gp.hpp"
#include "mixopt/inverse.hpp"
#include "mixopt/synthetic.hpp"

namespace mixopt {

struct SplitConfig {
    std::size_t n_holdout = 12;
    MixKind kind = MixKind::concrete;
    std::vector<std::uint64_t> testing_seeds = {1, 2, 3, 4, 5};
};

struct FitConfig {
    int restarts = 8;
    int max_iters = 150;
    double tol = 1e-4;
    double jitter_start_rel = 1e-8;
    double jitter_max_rel = 1e-2;
    long n_virtual = -1;  // -1: one virtual composition per observed mix
    bool warm_start_phases = true;
    bool band_includes_noise = false;

    FitOptions to_fit_options(std::uint64_t seed) const;
};

struct BoConfig {
    // reference point: minimum acceptable strength and maximum acceptable
    // GWP; required for suggest (no defensible default exists)
    double ref_strength_ksi = std::numeric_limits<double>::quiet_NaN();
    double ref_gwp_yd3 = std::numeric_limits<double>::quiet_NaN();
    std::size_t q = 4;
    std::size_t mc_samples = 1u << 14;
    double tau = 1e-3;
    int restarts = 8;
    int max_sweeps = 40;
    std::size_t rounds = 1;
    double age_days = 28.0;
    std::size_t n_init = 8;  // synthetic campaign initial designs

    bool has_reference() const;
    Vector reference() const;  // canonical (strength, -gwp)
};

struct RunConfig {
    std::string mixes_path;
    std::string strengths_path;
    std::string factors_path;
    std::string model_path;
    std::string out_dir = "out";
    std::uint64_t seed = 0;
    double delta_days = 1.0 / 24.0;

    SplitConfig split;
    FitConfig fit;
    BoConfig bo;
    InverseQuery inverse;
    DesignSpace space = DesignSpace::defaults();
    SyntheticConfig synthetic;

    // resolved-config serialization; embedded into every report
    std::string to_json_text() const;
    std::uint64_t config_hash() const;  // FNV-1a over to_json_text()

    static RunConfig from_json_text(const std::string& text);
    static RunConfig load(const std::string& path);
};

std::string hash_hex(std::uint64_t h);

}  // namespace mixopt
