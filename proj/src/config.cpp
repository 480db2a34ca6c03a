#include "mixopt/config.hpp"

#include <cmath>
#include <cstdio>

#include <json.hpp>

#include "mixopt/csv.hpp"
#include "mixopt/errors.hpp"

namespace mixopt {

using nlohmann::json;

FitOptions FitConfig::to_fit_options(std::uint64_t seed) const {
    FitOptions opts;
    opts.restarts = restarts;
    opts.max_iters = max_iters;
    opts.tol = tol;
    opts.jitter.start_rel = jitter_start_rel;
    opts.jitter.max_rel = jitter_max_rel;
    opts.seed = seed;
    return opts;
}

bool BoConfig::has_reference() const {
    return std::isfinite(ref_strength_ksi) && std::isfinite(ref_gwp_yd3);
}

Vector BoConfig::reference() const {
    if (!has_reference())
        throw ConfigError("bo.ref_strength_ksi and bo.ref_gwp_yd3 must be set "
                          "(reference point has no defensible default)");
    return {ref_strength_ksi, -ref_gwp_yd3};
}

namespace {

void check_keys(const json& j, const std::vector<std::string>& allowed,
                const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const auto& k : allowed)
            if (it.key() == k) ok = true;
        if (!ok) throw ConfigError("config: unknown key '" + where + it.key() + "'");
    }
}

template <typename T>
void maybe(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

std::string RunConfig::to_json_text() const {
    json j;
    j["paths"] = {{"mixes", mixes_path},
                  {"strengths", strengths_path},
                  {"factors", factors_path},
                  {"model", model_path}};
    j["out"] = out_dir;
    j["seed"] = seed;
    j["delta_days"] = delta_days;
    j["split"] = {{"n_holdout", split.n_holdout},
                  {"kind", to_string(split.kind)},
                  {"testing_seeds", split.testing_seeds}};
    j["fit"] = {{"restarts", fit.restarts},
                {"max_iters", fit.max_iters},
                {"tol", fit.tol},
                {"jitter_start_rel", fit.jitter_start_rel},
                {"jitter_max_rel", fit.jitter_max_rel},
                {"n_virtual", fit.n_virtual},
                {"warm_start_phases", fit.warm_start_phases},
                {"band_includes_noise", fit.band_includes_noise}};
    json bo_j = {{"q", bo.q},
                 {"mc_samples", bo.mc_samples},
                 {"tau", bo.tau},
                 {"restarts", bo.restarts},
                 {"max_sweeps", bo.max_sweeps},
                 {"rounds", bo.rounds},
                 {"age_days", bo.age_days},
                 {"n_init", bo.n_init}};
    if (bo.has_reference()) {
        bo_j["ref_strength_ksi"] = bo.ref_strength_ksi;
        bo_j["ref_gwp_yd3"] = bo.ref_gwp_yd3;
    }
    j["bo"] = bo_j;
    j["inverse"] = {{"thresholds_psi", inverse.thresholds_psi},
                    {"ages", inverse.ages},
                    {"gwp_bin_width", inverse.gwp_bin_width},
                    {"confidence_k", inverse.confidence_k},
                    {"candidates_per_bin", inverse.candidates_per_bin},
                    {"budget_per_cell", inverse.budget_per_cell},
                    {"local_refinement", inverse.local_refinement}};
    j["space"] = {{"lo", space.lo}, {"hi", space.hi}, {"total_mass", space.total_mass}};
    j["synthetic"] = {{"n_mortar", synthetic.n_mortar},
                      {"concrete_phase_sizes", synthetic.concrete_phase_sizes},
                      {"n_extra_concrete", synthetic.n_extra_concrete},
                      {"sigma_obs", synthetic.sigma_obs},
                      {"replicates", synthetic.replicates}};
    return j.dump(2);
}

RunConfig RunConfig::from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }

    RunConfig cfg;
    try {
        check_keys(j, {"paths", "out", "seed", "delta_days", "split", "fit", "bo", "inverse",
                       "space", "synthetic"},
                   "");
        if (j.contains("paths")) {
            const auto& p = j.at("paths");
            check_keys(p, {"mixes", "strengths", "factors", "model"}, "paths.");
            maybe(p, "mixes", cfg.mixes_path);
            maybe(p, "strengths", cfg.strengths_path);
            maybe(p, "factors", cfg.factors_path);
            maybe(p, "model", cfg.model_path);
        }
        maybe(j, "out", cfg.out_dir);
        maybe(j, "seed", cfg.seed);
        maybe(j, "delta_days", cfg.delta_days);
        if (j.contains("split")) {
            const auto& s = j.at("split");
            check_keys(s, {"n_holdout", "kind", "testing_seeds"}, "split.");
            maybe(s, "n_holdout", cfg.split.n_holdout);
            if (s.contains("kind")) cfg.split.kind = mix_kind_from_string(s.at("kind"));
            maybe(s, "testing_seeds", cfg.split.testing_seeds);
        }
        if (j.contains("fit")) {
            const auto& f = j.at("fit");
            check_keys(f, {"restarts", "max_iters", "tol", "jitter_start_rel", "jitter_max_rel",
                           "n_virtual", "warm_start_phases", "band_includes_noise"},
                       "fit.");
            maybe(f, "restarts", cfg.fit.restarts);
            maybe(f, "max_iters", cfg.fit.max_iters);
            maybe(f, "tol", cfg.fit.tol);
            maybe(f, "jitter_start_rel", cfg.fit.jitter_start_rel);
            maybe(f, "jitter_max_rel", cfg.fit.jitter_max_rel);
            maybe(f, "n_virtual", cfg.fit.n_virtual);
            maybe(f, "warm_start_phases", cfg.fit.warm_start_phases);
            maybe(f, "band_includes_noise", cfg.fit.band_includes_noise);
        }
        if (j.contains("bo")) {
            const auto& b = j.at("bo");
            check_keys(b, {"ref_strength_ksi", "ref_gwp_yd3", "q", "mc_samples", "tau",
                           "restarts", "max_sweeps", "rounds", "age_days", "n_init"},
                       "bo.");
            maybe(b, "ref_strength_ksi", cfg.bo.ref_strength_ksi);
            maybe(b, "ref_gwp_yd3", cfg.bo.ref_gwp_yd3);
            maybe(b, "q", cfg.bo.q);
            maybe(b, "mc_samples", cfg.bo.mc_samples);
            maybe(b, "tau", cfg.bo.tau);
            maybe(b, "restarts", cfg.bo.restarts);
            maybe(b, "max_sweeps", cfg.bo.max_sweeps);
            maybe(b, "rounds", cfg.bo.rounds);
            maybe(b, "age_days", cfg.bo.age_days);
            maybe(b, "n_init", cfg.bo.n_init);
        }
        if (j.contains("inverse")) {
            const auto& v = j.at("inverse");
            check_keys(v, {"thresholds_psi", "ages", "gwp_bin_width", "confidence_k",
                           "candidates_per_bin", "budget_per_cell", "local_refinement"},
                       "inverse.");
            maybe(v, "thresholds_psi", cfg.inverse.thresholds_psi);
            maybe(v, "ages", cfg.inverse.ages);
            maybe(v, "gwp_bin_width", cfg.inverse.gwp_bin_width);
            maybe(v, "confidence_k", cfg.inverse.confidence_k);
            maybe(v, "candidates_per_bin", cfg.inverse.candidates_per_bin);
            maybe(v, "budget_per_cell", cfg.inverse.budget_per_cell);
            maybe(v, "local_refinement", cfg.inverse.local_refinement);
        }
        if (j.contains("space")) {
            const auto& s = j.at("space");
            check_keys(s, {"lo", "hi", "total_mass"}, "space.");
            maybe(s, "lo", cfg.space.lo);
            maybe(s, "hi", cfg.space.hi);
            maybe(s, "total_mass", cfg.space.total_mass);
        }
        if (j.contains("synthetic")) {
            const auto& s = j.at("synthetic");
            check_keys(s, {"n_mortar", "concrete_phase_sizes", "n_extra_concrete", "sigma_obs",
                           "replicates"},
                       "synthetic.");
            maybe(s, "n_mortar", cfg.synthetic.n_mortar);
            maybe(s, "concrete_phase_sizes", cfg.synthetic.concrete_phase_sizes);
            maybe(s, "n_extra_concrete", cfg.synthetic.n_extra_concrete);
            maybe(s, "sigma_obs", cfg.synthetic.sigma_obs);
            maybe(s, "replicates", cfg.synthetic.replicates);
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return cfg;
}

RunConfig RunConfig::load(const std::string& path) {
    std::string text;
    try {
        text = read_file_text(path);
    } catch (const DataError& e) {
        throw ConfigError(e.what());
    }
    return from_json_text(text);
}

std::uint64_t RunConfig::config_hash() const {
    const std::string text = to_json_text();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hash_hex(std::uint64_t h) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace mixopt
