#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mixopt/errors.hpp"
#include "mixopt/harness.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumerical = 4;

struct GlobalArgs {
    std::string config_path;
    std::string out_dir;
    long long seed = -1;
};

mixopt::RunConfig resolve_config(const GlobalArgs& g) {
    mixopt::RunConfig cfg;
    if (!g.config_path.empty()) cfg = mixopt::RunConfig::load(g.config_path);
    if (!g.out_dir.empty()) cfg.out_dir = g.out_dir;
    if (g.seed >= 0) cfg.seed = static_cast<std::uint64_t>(g.seed);
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"mixopt: probabilistic concrete mix design toolkit"};
    app.require_subcommand(1);

    GlobalArgs g;
    app.add_option("--config", g.config_path, "JSON run configuration")->expected(1);
    app.add_option("--seed", g.seed, "override config seed");
    app.add_option("--out", g.out_dir, "override output directory");

    auto* ingest = app.add_subcommand("ingest", "validate and normalize the input tables");
    auto* gen = app.add_subcommand("generate-synthetic", "emit a synthetic oracle dataset");
    auto* train = app.add_subcommand("train-phasewise",
                                  "cumulative phase training with held-out evaluation");
    auto* predict = app.add_subcommand("predict", "strength curve for one mix from a saved model");
    std::string predict_mix;
    std::vector<double> predict_ages = {1, 3, 5, 14, 28};
    predict->add_option("--mix", predict_mix, "mix id")->required();
    predict->add_option("--ages", predict_ages, "query ages in days");
    auto* evaluate = app.add_subcommand("evaluate", "R2/RMSE table for a saved model on a dataset");
    auto* suggest = app.add_subcommand("suggest", "propose a candidate batch via qLogEHVI");
    std::size_t suggest_rounds = 0;
    suggest->add_option("--rounds", suggest_rounds,
                        "synthetic closed-loop rounds (default: single batch)");
    auto* inverse = app.add_subcommand("inverse", "feasible mixes per strength threshold and GWP bin");
    auto* gwp_cmd = app.add_subcommand("gwp", "cradle-to-gate GWP report for a mix table");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitConfig;
    }

    try {
        mixopt::RunConfig cfg = resolve_config(g);

        if (app.got_subcommand(ingest)) {
            auto s = mixopt::run_ingest(cfg);
            std::printf("ingested %zu mixes (%zu mortar, %zu concrete), %zu observations\n",
                        s.n_mixes, s.n_mortar, s.n_concrete, s.n_observations);
        } else if (app.got_subcommand(gen)) {
            auto d = mixopt::run_generate_synthetic(cfg);
            std::printf("wrote synthetic dataset: %zu mixes, %zu observations -> %s\n",
                        d.mixes.size(), d.observations.size(), cfg.out_dir.c_str());
        } else if (app.got_subcommand(train)) {
            auto r = mixopt::run_train_phasewise(cfg);
            std::printf("train-phasewise done: mean all-ages R2=%.4f RMSE=%.4f ksi -> %s\n",
                        r.mean_r2_all, r.mean_rmse_all, cfg.out_dir.c_str());
        } else if (app.got_subcommand(predict)) {
            auto curve = mixopt::run_predict(cfg, predict_mix, predict_ages);
            for (const auto& p : curve)
                std::printf("%s t=%g d: %.3f ksi [%.3f, %.3f]\n", predict_mix.c_str(), p.age_days,
                            p.mean_ksi, p.lower95, p.upper95);
        } else if (app.got_subcommand(evaluate)) {
            auto table = mixopt::run_evaluate(cfg);
            std::fputs(mixopt::serialize_eval_table(table).c_str(), stdout);
        } else if (app.got_subcommand(suggest)) {
            if (suggest_rounds > 1) {
                mixopt::RunConfig c2 = cfg;
                c2.bo.rounds = suggest_rounds;
                auto r = mixopt::run_bo_campaign(c2);
                std::printf("campaign: final HV=%.4f (random baseline %.4f) -> %s\n", r.hv_final,
                            r.hv_random_baseline, r.trajectory_path.c_str());
            } else {
                auto r = mixopt::run_suggest(cfg);
                std::printf("suggested %zu candidates, predicted HV %.4f -> %.4f; %s\n",
                            r.acquisition.batch.size(), r.acquisition.hv_before,
                            r.acquisition.hv_after_predicted, r.candidates_path.c_str());
            }
        } else if (app.got_subcommand(inverse)) {
            auto r = mixopt::run_inverse(cfg);
            std::size_t total = 0, short_cells = 0;
            for (const auto& [key, cell] : r.cells) {
                total += cell.candidates.size();
                if (cell.shortfall) ++short_cells;
            }
            std::printf("inverse design: %zu candidates across %zu cells (%zu short) -> %s\n",
                        total, r.cells.size(), short_cells, r.candidates_path.c_str());
        } else if (app.got_subcommand(gwp_cmd)) {
            auto path = mixopt::run_gwp_report(cfg);
            std::printf("gwp report -> %s\n", path.c_str());
        }
    } catch (const mixopt::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const mixopt::DataError& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return kExitData;
    } catch (const mixopt::NumericalError& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return kExitNumerical;
    }
    return kExitOk;
}
