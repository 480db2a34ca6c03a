#include "mixopt/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include <json.hpp>

#include "mixopt/csv.hpp"
#include "mixopt/errors.hpp"
#include "mixopt/gwp.hpp"
#include "mixopt/pareto.hpp"
#include "mixopt/rng.hpp"

namespace mixopt {

namespace fs = std::filesystem;
using nlohmann::json;

std::string report_header(const RunConfig& cfg) {
    return "# config_hash=" + hash_hex(cfg.config_hash()) + " seed=" + std::to_string(cfg.seed) +
           "\n";
}

namespace {

void ensure_out_dir(const RunConfig& cfg) {
    std::error_code ec;
    fs::create_directories(cfg.out_dir, ec);
    if (ec) throw ConfigError("cannot create output directory '" + cfg.out_dir + "'");
}

std::string out_path(const RunConfig& cfg, const std::string& name) {
    return (fs::path(cfg.out_dir) / name).string();
}

Dataset load_input_dataset(const RunConfig& cfg) {
    if (cfg.mixes_path.empty() || cfg.strengths_path.empty())
        throw ConfigError("paths.mixes and paths.strengths are required");
    return load_dataset(cfg.mixes_path, cfg.strengths_path);
}

EmissionFactors load_input_factors(const RunConfig& cfg) {
    if (cfg.factors_path.empty()) throw ConfigError("paths.factors is required");
    return read_factors_file(cfg.factors_path);
}

std::size_t resolve_n_virtual(const FitConfig& fit, const Dataset& d) {
    return fit.n_virtual < 0 ? d.mixes.size() : static_cast<std::size_t>(fit.n_virtual);
}

GpModel fit_on_dataset(const RunConfig& cfg, const Dataset& train, std::uint64_t fit_seed,
                       const std::optional<KernelHyperparams>& init = std::nullopt,
                       int restarts_override = -1) {
    Dataset aug = augment_zero_strength(train, resolve_n_virtual(cfg.fit, train), fit_seed);
    Scaler scaler = Scaler::fit(aug);
    FitOptions opts = cfg.fit.to_fit_options(fit_seed);
    if (init) {
        opts.init = init;
        opts.restarts = restarts_override > 0 ? restarts_override : std::max(1, opts.restarts / 4);
    }
    return GpModel::fit(aug, scaler, cfg.delta_days, opts);
}

void write_report(const RunConfig& cfg, const std::string& name, const std::string& body) {
    write_file_text(out_path(cfg, name), report_header(cfg) + body);
}

}  // namespace

std::vector<Vector> observed_objectives(const Dataset& d, const EmissionFactors& factors,
                                        double age_days) {
    std::vector<Vector> points;
    for (const auto& obs : d.observations) {
        if (obs.age_days != age_days || obs.synthetic) continue;
        const auto& mix = d.mixes.at(obs.mix_id);
        points.push_back({obs.mean_ksi, -gwp(mix, factors).total});
    }
    return points;
}

IngestSummary run_ingest(const RunConfig& cfg) {
    ensure_out_dir(cfg);
    Dataset d = load_input_dataset(cfg);

    IngestSummary s;
    s.n_mixes = d.mixes.size();
    s.n_mortar = d.n_mixes(MixKind::mortar);
    s.n_concrete = d.n_mixes(MixKind::concrete);
    s.n_observations = d.observations.size();
    for (const auto& [id, phase] : d.phase_tags) ++s.mixes_per_phase[phase];

    write_report(cfg, "mixes_normalized.csv", serialize_mixes(d));
    write_report(cfg, "strengths_normalized.csv", serialize_strengths(d));

    json j;
    j["config_hash"] = hash_hex(cfg.config_hash());
    j["config"] = json::parse(cfg.to_json_text());
    j["n_mixes"] = s.n_mixes;
    j["n_mortar"] = s.n_mortar;
    j["n_concrete"] = s.n_concrete;
    j["n_observations"] = s.n_observations;
    for (const auto& [phase, count] : s.mixes_per_phase)
        j["mixes_per_phase"][std::to_string(phase)] = count;
    write_file_text(out_path(cfg, "ingest_summary.json"), j.dump(2) + "\n");
    return s;
}

Dataset run_generate_synthetic(const RunConfig& cfg) {
    ensure_out_dir(cfg);
    Dataset d = generate_synthetic(cfg.synthetic, cfg.seed);
    write_report(cfg, "mixes.csv", serialize_mixes(d));
    write_report(cfg, "strengths.csv", serialize_strengths(d));
    return d;
}

PhasewiseResult run_train_phasewise(const RunConfig& cfg) {
    ensure_out_dir(cfg);
    Dataset d = load_input_dataset(cfg);

    PhasewiseResult result;
    std::ostringstream table1_rows;

    for (std::uint64_t test_seed : cfg.split.testing_seeds) {
        auto [train_full, test] = split_holdout(d, cfg.split.n_holdout, cfg.split.kind, test_seed);
        if (test.observations.empty())
            throw DataError("train-phasewise: held-out set has no observations (seed " +
                            std::to_string(test_seed) + ")");
        std::vector<Dataset> phases = phase_schedule(train_full);

        std::ostringstream trajectory;
        trajectory << "phase,age,n,r2,rmse_ksi\n";
        std::optional<KernelHyperparams> warm;

        for (int phase = 1; phase <= 6; ++phase) {
            const Dataset& train_k = phases[static_cast<std::size_t>(phase - 1)];
            if (train_k.observations.size() < 2)
                throw DataError("train-phasewise: phase " + std::to_string(phase) +
                                " has fewer than 2 observations");
            const std::uint64_t fit_seed =
                hash_combine(hash_combine(cfg.seed, test_seed), static_cast<std::uint64_t>(phase));

            GpModel model = [&] {
                try {
                    return fit_on_dataset(cfg, train_k, fit_seed,
                                          cfg.fit.warm_start_phases ? warm : std::nullopt);
                } catch (const NumericalError& e) {
                    throw NumericalError("train-phasewise seed " + std::to_string(test_seed) +
                                         " phase " + std::to_string(phase) + ": " + e.what());
                }
            }();
            warm = model.hyper();

            EvalTable table = evaluate_by_age(model, test);

            // parity table: one row per held-out (mix, age)
            Design test_design = build_design(test, model.scaler(), model.delta_days());
            PredictResult pred = model.predict(test_design.x);
            std::ostringstream parity;
            parity << "mix_id,age_days,y_ksi,yhat_ksi,sigma_ksi\n";
            for (std::size_t i = 0; i < test_design.y.size(); ++i) {
                parity << test_design.mix_id[i] << ',' << format_double(test_design.age_days[i])
                       << ',' << format_double(test_design.y[i]) << ','
                       << format_double(pred.mean[i]) << ','
                       << format_double(std::sqrt(std::max(pred.variance[i], 0.0))) << '\n';
            }
            const std::string tag =
                "s" + std::to_string(test_seed) + "_p" + std::to_string(phase);
            write_report(cfg, "parity_" + tag + ".csv", parity.str());
            write_report(cfg, "eval_" + tag + ".csv", serialize_eval_table(table));
            model.save(out_path(cfg, "model_" + tag + ".txt"));

            for (const auto& row : table.rows) {
                trajectory << phase << ',' << row.age_label << ',' << row.n << ',';
                if (row.r2) trajectory << format_double(*row.r2);
                trajectory << ',';
                if (row.rmse_ksi) trajectory << format_double(*row.rmse_ksi);
                trajectory << '\n';
            }

            PhaseCell cell;
            cell.testing_seed = test_seed;
            cell.phase = phase;
            cell.n_train_rows = train_k.observations.size();
            cell.lml = model.lml();
            cell.table = table;
            if (phase == 6) result.final_phase.emplace(test_seed, table);
            result.cells.push_back(std::move(cell));
        }
        write_report(cfg, "trajectory_s" + std::to_string(test_seed) + ".csv", trajectory.str());
    }

    // final-phase metric table across testing sets
    std::ostringstream table1;
    table1 << "metric,age";
    for (std::uint64_t s : cfg.split.testing_seeds) table1 << ",set_" << s;
    table1 << ",mean,std\n";
    const std::vector<std::string> ages = {"1", "3", "5", "14", "28", "all"};
    for (const char* metric : {"r2", "rmse_ksi"}) {
        for (const auto& age : ages) {
            std::vector<double> vals;
            table1 << metric << ',' << age;
            for (std::uint64_t s : cfg.split.testing_seeds) {
                const EvalTable& t = result.final_phase.at(s);
                std::optional<double> v;
                for (const auto& row : t.rows) {
                    if (row.age_label != age) continue;
                    v = std::string(metric) == "r2" ? row.r2 : row.rmse_ksi;
                }
                table1 << ',';
                if (v) {
                    table1 << format_double(*v);
                    vals.push_back(*v);
                }
            }
            double mean = 0.0, sd = 0.0;
            if (!vals.empty()) {
                for (double v : vals) mean += v;
                mean /= static_cast<double>(vals.size());
                for (double v : vals) sd += (v - mean) * (v - mean);
                sd = vals.size() > 1 ? std::sqrt(sd / static_cast<double>(vals.size() - 1)) : 0.0;
            }
            table1 << ',' << format_double(mean) << ',' << format_double(sd) << '\n';
        }
    }
    write_report(cfg, "table1.csv", table1.str());

    double mean_r2 = 0.0, mean_rmse = 0.0;
    for (const auto& [s, t] : result.final_phase) {
        mean_r2 += t.all().r2.value_or(0.0);
        mean_rmse += t.all().rmse_ksi.value_or(0.0);
    }
    const double n_seeds = static_cast<double>(result.final_phase.size());
    result.mean_r2_all = mean_r2 / n_seeds;
    result.mean_rmse_all = mean_rmse / n_seeds;

    json j;
    j["config_hash"] = hash_hex(cfg.config_hash());
    j["config"] = json::parse(cfg.to_json_text());
    j["mean_r2_all_ages"] = result.mean_r2_all;
    j["mean_rmse_all_ages"] = result.mean_rmse_all;
    for (const auto& [s, t] : result.final_phase) {
        json row;
        row["seed"] = s;
        if (t.all().r2) row["r2_all"] = *t.all().r2;
        if (t.all().rmse_ksi) row["rmse_all"] = *t.all().rmse_ksi;
        j["final_phase"].push_back(row);
    }
    write_file_text(out_path(cfg, "summary.json"), j.dump(2) + "\n");
    return result;
}

std::vector<CurvePoint> run_predict(const RunConfig& cfg, const std::string& mix_id,
                                    const std::vector<double>& ages) {
    if (cfg.model_path.empty()) throw ConfigError("predict: paths.model is required");
    GpModel model = GpModel::load(cfg.model_path);
    Dataset d = load_input_dataset(cfg);
    auto it = d.mixes.find(mix_id);
    if (it == d.mixes.end()) throw DataError("predict: unknown mix id '" + mix_id + "'");

    auto curve = model.predict_strength_curve(it->second, ages, cfg.fit.band_includes_noise);
    ensure_out_dir(cfg);
    std::ostringstream out;
    out << "mix_id,age_days,mean_ksi,sigma_ksi,lower95_ksi,upper95_ksi\n";
    for (const auto& p : curve)
        out << mix_id << ',' << format_double(p.age_days) << ',' << format_double(p.mean_ksi)
            << ',' << format_double(p.sigma_ksi) << ',' << format_double(p.lower95) << ','
            << format_double(p.upper95) << '\n';
    write_report(cfg, "curve_" + mix_id + ".csv", out.str());
    return curve;
}

EvalTable run_evaluate(const RunConfig& cfg) {
    if (cfg.model_path.empty()) throw ConfigError("evaluate: paths.model is required");
    GpModel model = GpModel::load(cfg.model_path);
    Dataset d = load_input_dataset(cfg);
    EvalTable table = evaluate_by_age(model, d);
    ensure_out_dir(cfg);
    write_report(cfg, "eval.csv", serialize_eval_table(table));
    return table;
}

namespace {

std::string padded_id_campaign(const std::string& prefix, std::size_t i) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%03zu", i);
    return prefix + buf;
}

std::string candidates_csv(const std::vector<BatchCandidate>& batch, std::uint64_t seed,
                           std::size_t round) {
    std::ostringstream out;
    out << "mix_id,kind,cement,fly_ash_c,fly_ash_f,slag,water,fine_agg,coarse_agg,hrwr,"
           "curing_temp,phase,suggested_by,pred_mean_ksi,pred_sigma_ksi,gwp_yd3\n";
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const auto& m = batch[i].mix;
        out << "bo_r" << round << "_" << i << ',' << to_string(m.kind) << ','
            << format_double(m.cement) << ',' << format_double(m.fly_ash_c) << ','
            << format_double(m.fly_ash_f) << ',' << format_double(m.slag) << ','
            << format_double(m.water) << ',' << format_double(m.fine_agg) << ','
            << format_double(m.coarse_agg) << ',' << format_double(m.hrwr) << ','
            << format_double(m.curing_temp) << ",VI,"
            << "bo:seed=" << seed << ":iter=" << round << ','
            << format_double(batch[i].pred_mean_ksi) << ','
            << format_double(batch[i].pred_sigma_ksi) << ',' << format_double(batch[i].gwp_yd3)
            << '\n';
    }
    return out.str();
}

}  // namespace

SuggestResult run_suggest(const RunConfig& cfg) {
    ensure_out_dir(cfg);
    Dataset d = load_input_dataset(cfg);
    EmissionFactors factors = load_input_factors(cfg);
    const Vector ref = cfg.bo.reference();

    GpModel model = fit_on_dataset(cfg, d, hash_combine(cfg.seed, 0xF17u));

    auto points = observed_objectives(d, factors, cfg.bo.age_days);
    if (points.empty())
        throw DataError("suggest: no observations at age " + std::to_string(cfg.bo.age_days));

    AcqOptions aopts;
    aopts.restarts = cfg.bo.restarts;
    aopts.seed = hash_combine(cfg.seed, 0xACCu);
    aopts.n_samples = cfg.bo.mc_samples;
    aopts.tau = cfg.bo.tau;
    aopts.max_sweeps = cfg.bo.max_sweeps;
    aopts.age_days = cfg.bo.age_days;

    SuggestResult result;
    result.acquisition =
        optimize_acquisition(model, factors, pareto_front(points), ref, cfg.space, cfg.bo.q, aopts);

    const std::string name = "candidates_round0.csv";
    write_report(cfg, name, candidates_csv(result.acquisition.batch, cfg.seed, 0));
    result.candidates_path = out_path(cfg, name);

    json j;
    j["config_hash"] = hash_hex(cfg.config_hash());
    j["seed"] = cfg.seed;
    j["acq_log_value"] = result.acquisition.acq_log_value;
    j["hv_before"] = result.acquisition.hv_before;
    j["hv_after_predicted"] = result.acquisition.hv_after_predicted;
    for (const auto& p : result.acquisition.front_before)
        j["pareto_front"].push_back({{"strength_ksi", p[0]}, {"gwp_yd3", -p[1]}});
    write_file_text(out_path(cfg, "suggest_log.json"), j.dump(2) + "\n");
    return result;
}

CampaignResult run_bo_campaign(const RunConfig& cfg) {
    ensure_out_dir(cfg);
    EmissionFactors factors = load_input_factors(cfg);
    const Vector ref = cfg.bo.reference();
    cfg.space.validate();

    SyntheticOracle oracle;
    oracle.sigma_obs = cfg.synthetic.sigma_obs;
    Rng noise_rng(hash_combine(cfg.seed, 0xCA3Fu));

    const std::vector<double> ages = {1, 3, 5, 14, 28};
    auto observe = [&](Dataset& data, const MixComposition& mix, const std::string& id) {
        data.mixes.emplace(id, mix);
        data.phase_tags.emplace(id, 6);
        for (double age : ages) {
            StrengthObservation obs;
            obs.mix_id = id;
            obs.age_days = age;
            const double noise =
                oracle.sigma_obs > 0.0 ? oracle.sigma_obs * noise_rng.normal() : 0.0;
            obs.mean_ksi = std::max(oracle.strength(mix, age) + noise, 0.0);
            obs.std_ksi = oracle.sigma_obs;
            obs.replicates = 3;
            data.observations.push_back(std::move(obs));
        }
    };

    // shared initial designs: a rotated Halton sweep of the space
    Dataset data;
    std::array<double, DesignSpace::kDim> rot{};
    for (std::size_t d = 0; d < DesignSpace::kDim; ++d)
        rot[d] = stateless_uniform(hash_combine(cfg.seed, 0x171Fu), d);
    for (std::size_t i = 0; i < cfg.bo.n_init; ++i) {
        auto u = halton_point(i, DesignSpace::kDim);
        for (std::size_t d = 0; d < DesignSpace::kDim; ++d) u[d] = std::fmod(u[d] + rot[d], 1.0);
        observe(data, cfg.space.to_mix(cfg.space.from_unit(u)), padded_id_campaign("init", i));
    }
    Dataset baseline_data = data;

    CampaignResult result;
    std::ostringstream trajectory;
    trajectory << "round,hv_observed,hv_after_predicted,acq_log_value,n_evaluated\n";

    for (std::size_t round = 0; round < cfg.bo.rounds; ++round) {
        GpModel model =
            fit_on_dataset(cfg, data, hash_combine(cfg.seed, 0xF17u + round));
        auto points = observed_objectives(data, factors, cfg.bo.age_days);

        AcqOptions aopts;
        aopts.restarts = cfg.bo.restarts;
        aopts.seed = hash_combine(cfg.seed, 0xACC0u + round);
        aopts.n_samples = cfg.bo.mc_samples;
        aopts.tau = cfg.bo.tau;
        aopts.max_sweeps = cfg.bo.max_sweeps;
        aopts.age_days = cfg.bo.age_days;

        AcquisitionResult acq = optimize_acquisition(model, factors, pareto_front(points), ref,
                                                     cfg.space, cfg.bo.q, aopts);
        write_report(cfg, "candidates_round" + std::to_string(round) + ".csv",
                     candidates_csv(acq.batch, cfg.seed, round));

        for (std::size_t i = 0; i < acq.batch.size(); ++i)
            observe(data, acq.batch[i].mix,
                    "bo_r" + std::to_string(round) + "_" + std::to_string(i));

        const double hv_obs =
            hypervolume_exact(pareto_front(observed_objectives(data, factors, cfg.bo.age_days)),
                              ref);
        CampaignRound r;
        r.round = round;
        r.hv_observed = hv_obs;
        r.hv_after_predicted = acq.hv_after_predicted;
        r.acq_log_value = acq.acq_log_value;
        result.rounds.push_back(r);
        trajectory << round << ',' << format_double(hv_obs) << ','
                   << format_double(acq.hv_after_predicted) << ','
                   << format_double(acq.acq_log_value) << ',' << data.mixes.size() << '\n';
    }
    result.hv_final = result.rounds.empty() ? 0.0 : result.rounds.back().hv_observed;

    // random baseline at the same evaluation budget
    Rng base_rng(hash_combine(cfg.seed, 0xBA5Eu));
    const std::size_t budget = cfg.bo.rounds * cfg.bo.q;
    for (std::size_t i = 0; i < budget; ++i) {
        std::array<double, DesignSpace::kDim> v{};
        for (std::size_t d = 0; d < DesignSpace::kDim; ++d)
            v[d] = base_rng.uniform(cfg.space.lo[d], cfg.space.hi[d]);
        observe(baseline_data, cfg.space.to_mix(v), padded_id_campaign("rand", i));
    }
    result.hv_random_baseline = hypervolume_exact(
        pareto_front(observed_objectives(baseline_data, factors, cfg.bo.age_days)), ref);

    trajectory << "baseline," << format_double(result.hv_random_baseline) << ",,,"
               << baseline_data.mixes.size() << '\n';
    write_report(cfg, "hv_trajectory.csv", trajectory.str());
    result.trajectory_path = out_path(cfg, "hv_trajectory.csv");
    return result;
}

InverseRunResult run_inverse(const RunConfig& cfg) {
    ensure_out_dir(cfg);
    EmissionFactors factors = load_input_factors(cfg);

    GpModel model = cfg.model_path.empty()
                        ? fit_on_dataset(cfg, load_input_dataset(cfg),
                                         hash_combine(cfg.seed, 0xF17u))
                        : GpModel::load(cfg.model_path);

    InverseRunResult result;
    result.cells = generate_candidates(model, factors, cfg.space, cfg.inverse, cfg.seed);

    write_report(cfg, "inverse_candidates.csv",
                 serialize_candidates(result.cells, cfg.inverse.ages));
    write_report(cfg, "inverse_report.csv", bin_sweep_report(result.cells));
    result.candidates_path = out_path(cfg, "inverse_candidates.csv");
    result.report_path = out_path(cfg, "inverse_report.csv");
    return result;
}

std::string run_gwp_report(const RunConfig& cfg) {
    ensure_out_dir(cfg);
    Dataset d = load_input_dataset(cfg);
    EmissionFactors factors = load_input_factors(cfg);

    std::ostringstream out;
    out << "mix_id,kind,gwp_yd3,gwp_m3,material_yd3,transport_yd3,production_yd3\n";
    for (const auto& [id, mix] : d.mixes) {
        const GwpResult g = gwp(mix, factors);
        out << id << ',' << to_string(mix.kind) << ',' << format_double(g.total) << ','
            << format_double(g.total_per_m3()) << ',' << format_double(g.by_stage[0]) << ','
            << format_double(g.by_stage[1]) << ',' << format_double(g.by_stage[2]) << '\n';
    }
    write_report(cfg, "gwp_report.csv", out.str());
    return out_path(cfg, "gwp_report.csv");
}

}  // namespace mixopt
