#include "mixopt/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "mixopt/errors.hpp"
#include "mixopt/rng.hpp"

namespace mixopt {

namespace {
// normalized feature set for the ground-truth surfaces
struct Z {
    double binder, wb, scm, hrwr, temp, coarse;
};

Z normalize(const MixComposition& mix) {
    return {mix.binder() / 1000.0,
            mix.water_binder_ratio(),
            mix.scm_replacement(),
            mix.hrwr / 5.0,
            (mix.curing_temp - 20.0) / 20.0,
            mix.coarse_agg / 2000.0};
}
}  // namespace

double SyntheticOracle::ceiling_ksi(const MixComposition& mix) const {
    const Z z = normalize(mix);
    double s = 13.5 - 16.0 * z.wb + 2.0 * z.binder - 2.5 * z.scm + 1.2 * z.hrwr +
               6.0 * z.wb * z.scm - 3.0 * z.binder * z.wb + 0.8 * z.temp * z.scm -
               2.2 * z.coarse + 3.0 * z.temp * z.coarse + 2.5 * z.hrwr * z.coarse +
               1.5 * z.scm * z.coarse - 2.0 * z.binder * z.coarse;
    return std::clamp(s, 0.5, 18.0);
}

double SyntheticOracle::half_time_days(const MixComposition& mix) const {
    const Z z = normalize(mix);
    double t = 2.2 + 3.5 * z.scm + 2.5 * z.wb - 2.5 * z.temp - 0.8 * z.hrwr +
               2.0 * z.wb * z.scm - 2.5 * z.temp * z.coarse;
    return std::clamp(t, 0.4, 12.0);
}

double SyntheticOracle::strength(const MixComposition& mix, double age_days) const {
    if (age_days <= 0.0) return 0.0;
    const double th = std::pow(age_days, hill_exponent);
    const double t50h = std::pow(half_time_days(mix), hill_exponent);
    return ceiling_ksi(mix) * th / (th + t50h);
}

namespace {

struct PhaseRanges {
    double binder_lo, binder_hi;
    double wb_lo, wb_hi;
    double repl_lo, repl_hi;  // total SCM fraction of binder
    double hrwr_lo, hrwr_hi;
    double temp_lo, temp_hi;
    double ratio_lo, ratio_hi;  // fine/coarse, concrete only
};

// each concrete phase owns a distinctive slice of the design space: first
// scale-up, SCM-rich blends, high binder contents, dispersant-heavy blends,
// then low-binder mixes over a wide curing-temperature window
const PhaseRanges kConcretePhases[5] = {
    {650, 850, 0.30, 0.45, 0.00, 0.30, 0.0, 1.0, 21, 23, 0.3, 0.9},
    {650, 850, 0.30, 0.40, 0.30, 0.80, 0.0, 1.5, 21, 23, 0.4, 0.9},
    {850, 1125, 0.35, 0.50, 0.00, 0.80, 0.0, 1.3, 21, 23, 0.4, 0.9},
    {625, 755, 0.30, 0.45, 0.29, 0.60, 2.2, 3.4, 21, 23, 0.4, 0.9},
    {440, 760, 0.39, 0.50, 0.29, 0.52, 0.0, 3.4, 10, 22, 0.4, 0.9},
};

const PhaseRanges kMortarPhase = {240, 2150, 0.20, 0.50, 0.00, 1.00,
                                  0.0, 22.5, 4.5, 22, 0.0, 0.0};

// split a total SCM fraction across class C ash, class F ash, and slag
void split_scm(Rng& rng, double repl, double& fc, double& ff, double& fs) {
    const double a = rng.next_double();
    const double b = rng.next_double();
    double w1 = std::min(a, b), w2 = std::max(a, b);
    fc = repl * w1;
    ff = repl * (w2 - w1);
    fs = repl * (1.0 - w2);
}

MixComposition draw_mortar(Rng& rng) {
    const PhaseRanges& pr = kMortarPhase;
    MixComposition mix;
    for (int attempt = 0; attempt < 1000; ++attempt) {
        const double binder = rng.uniform(pr.binder_lo, pr.binder_hi);
        const double wb = rng.uniform(pr.wb_lo, pr.wb_hi);
        const double repl = rng.uniform(pr.repl_lo, pr.repl_hi);
        double fc, ff, fs;
        split_scm(rng, repl, fc, ff, fs);
        mix.cement = binder * (1.0 - fc - ff - fs);
        mix.fly_ash_c = binder * fc;
        mix.fly_ash_f = binder * ff;
        mix.slag = binder * fs;
        mix.water = binder * wb;
        mix.hrwr = rng.uniform(pr.hrwr_lo, pr.hrwr_hi);
        mix.curing_temp = rng.uniform(pr.temp_lo, pr.temp_hi);
        mix.coarse_agg = 0.0;
        const double fine = 3650.0 - binder - mix.water - mix.hrwr;
        mix.fine_agg = std::max(fine, 0.0);
        mix.kind = MixKind::mortar;
        if (mix.water_binder_ratio() < 1.5 && mix.binder() > 0.0) return mix;
    }
    throw NumericalError("draw_mortar: rejection sampling exhausted");
}

MixComposition draw_concrete(Rng& rng, const PhaseRanges& pr) {
    MixComposition mix;
    const double total_mass = 3900.0;
    const double binder = rng.uniform(pr.binder_lo, pr.binder_hi);
    const double wb = rng.uniform(pr.wb_lo, pr.wb_hi);
    const double repl = rng.uniform(pr.repl_lo, pr.repl_hi);
    double fc, ff, fs;
    split_scm(rng, repl, fc, ff, fs);
    mix.cement = binder * (1.0 - fc - ff - fs);
    mix.fly_ash_c = binder * fc;
    mix.fly_ash_f = binder * ff;
    mix.slag = binder * fs;
    mix.water = binder * wb;
    mix.hrwr = rng.uniform(pr.hrwr_lo, pr.hrwr_hi);
    mix.curing_temp = rng.uniform(pr.temp_lo, pr.temp_hi);
    const double agg = total_mass - binder - mix.water - mix.hrwr;
    const double ratio = rng.uniform(pr.ratio_lo, pr.ratio_hi);
    mix.fine_agg = agg * ratio / (1.0 + ratio);
    mix.coarse_agg = agg / (1.0 + ratio);
    mix.kind = MixKind::concrete;
    return mix;
}

std::string padded_id(const char* prefix, std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%s%03zu", prefix, i);
    return buf;
}

}  // namespace

Dataset generate_synthetic(const SyntheticConfig& cfg, std::uint64_t seed) {
    if (cfg.concrete_phase_sizes.size() != 5)
        throw ConfigError("generate_synthetic: expected 5 concrete phase sizes (II..VI)");

    SyntheticOracle oracle;
    oracle.sigma_obs = cfg.sigma_obs;

    Dataset d;
    Rng mix_rng(hash_combine(seed, 0x313Fu));
    Rng obs_rng(hash_combine(seed, 0x0B5Eu));

    std::vector<std::pair<std::string, int>> planned;  // (id, phase)
    for (std::size_t i = 0; i < cfg.n_mortar; ++i)
        planned.emplace_back(padded_id("m", i + 1), 1);

    std::size_t concrete_count = 0;
    for (std::size_t p = 0; p < 5; ++p)
        for (std::size_t i = 0; i < cfg.concrete_phase_sizes[p]; ++i)
            planned.emplace_back(padded_id("c", ++concrete_count), static_cast<int>(p + 2));
    for (std::size_t i = 0; i < cfg.n_extra_concrete; ++i)
        planned.emplace_back(padded_id("c", ++concrete_count), static_cast<int>(i % 5 + 2));

    for (const auto& [id, phase] : planned) {
        MixComposition mix = phase == 1 ? draw_mortar(mix_rng)
                                        : draw_concrete(mix_rng, kConcretePhases[phase - 2]);
        mix.validate("generate_synthetic (" + id + "): ");
        d.mixes.emplace(id, mix);
        d.phase_tags.emplace(id, phase);

        const std::vector<double> ages = mix.kind == MixKind::mortar
                                             ? std::vector<double>{1, 3, 5, 28}
                                             : std::vector<double>{1, 3, 5, 14, 28};
        for (double age : ages) {
            StrengthObservation obs;
            obs.mix_id = id;
            obs.age_days = age;
            const double truth = oracle.strength(mix, age);
            const double noise = cfg.sigma_obs > 0.0 ? cfg.sigma_obs * obs_rng.normal() : 0.0;
            obs.mean_ksi = std::max(truth + noise, 0.0);
            obs.std_ksi = cfg.sigma_obs;
            obs.replicates = cfg.replicates;
            d.observations.push_back(std::move(obs));
        }
    }
    return d;
}

}  // namespace mixopt
