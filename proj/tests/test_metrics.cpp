#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "mixopt/metrics.hpp"
#include "mixopt/rng.hpp"
#include "mixopt/synthetic.hpp"

using namespace mixopt;

TEST_CASE("r_squared worked examples") {
    Vector y = {1, 2, 3};
    CHECK(r_squared(y, y) == 1.0);

    Vector mean_pred(3, 2.0);  // predicting the mean scores zero
    CHECK(r_squared(y, mean_pred) == 0.0);

    // SS_res = 0.01 + 0.01 + 0.04 = 0.06, SS_tot = 2
    Vector yhat = {1.1, 1.9, 3.2};
    CHECK(r_squared(y, yhat) == doctest::Approx(0.97).epsilon(1e-12));

    // raw value is negative: clamped to zero
    CHECK(r_squared({0, 1}, {2, -1}) == 0.0);

    CHECK_THROWS_AS(r_squared({2, 2, 2}, {1, 2, 3}), UndefinedMetricError);
    CHECK_THROWS_AS(r_squared({1}, {1}), UndefinedMetricError);
}

TEST_CASE("rmse worked examples and homogeneity") {
    Vector y = {1, 2, 3};
    CHECK(rmse(y, y) == 0.0);
    CHECK(rmse(y, {1.1, 1.9, 3.2}) == doctest::Approx(std::sqrt(0.02)).epsilon(1e-12));
    CHECK(std::sqrt(0.02) == doctest::Approx(0.14142).epsilon(1e-4));

    Rng rng(21);
    for (int trial = 0; trial < 20; ++trial) {
        Vector a(6), b(6);
        for (std::size_t i = 0; i < 6; ++i) {
            a[i] = rng.uniform(-3, 3);
            b[i] = rng.uniform(-3, 3);
        }
        const double c = rng.uniform(-4, 4);
        Vector ac = a, bc = b;
        for (std::size_t i = 0; i < 6; ++i) {
            ac[i] *= c;
            bc[i] *= c;
        }
        CHECK(rmse(ac, bc) == doctest::Approx(std::fabs(c) * rmse(a, b)).epsilon(1e-10));
    }

    CHECK_THROWS_AS(rmse({}, {}), DataError);
}

TEST_CASE("r2 equals 1 - rmse^2 N / SS_tot before clamping") {
    Rng rng(22);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 4 + static_cast<std::size_t>(rng.below(20));
        Vector y(n), yhat(n);
        for (std::size_t i = 0; i < n; ++i) {
            y[i] = rng.uniform(0, 8);
            yhat[i] = y[i] + rng.uniform(-0.5, 0.5);
        }
        double mean = 0.0;
        for (double v : y) mean += v;
        mean /= static_cast<double>(n);
        double ss_tot = 0.0;
        for (double v : y) ss_tot += (v - mean) * (v - mean);

        const double e = rmse(y, yhat);
        const double identity = 1.0 - e * e * static_cast<double>(n) / ss_tot;
        CHECK(r_squared(y, yhat) == doctest::Approx(std::max(identity, 0.0)).epsilon(1e-10));
    }
}

namespace {
// model + test set where predictions are exactly the oracle values
struct PerfectSetup {
    Dataset test;
    GpModel model;
};

PerfectSetup perfect_setup() {
    SyntheticConfig cfg;
    cfg.n_mortar = 4;
    cfg.concrete_phase_sizes = {3, 2, 2, 2, 3};
    cfg.n_extra_concrete = 0;
    cfg.sigma_obs = 0.0;  // noiseless: a tight fit can interpolate
    Dataset d = generate_synthetic(cfg, 55);
    Dataset aug = augment_zero_strength(d, 0, 55);
    Scaler scaler = Scaler::fit(aug);
    FitOptions opts;
    opts.restarts = 2;
    opts.max_iters = 150;
    opts.seed = 56;
    GpModel model = GpModel::fit(aug, scaler, 1.0 / 24.0, opts);
    return {d, model};
}
}  // namespace

TEST_CASE("evaluate_by_age buckets, pools, and ignores row order") {
    auto setup = perfect_setup();
    EvalTable table = evaluate_by_age(setup.model, setup.test);

    // 4 mortar x 4 ages + 12 concrete x 5 ages
    CHECK(table.all().n == 4 * 4 + 12 * 5);
    REQUIRE(table.age(28.0) != nullptr);
    CHECK(table.age(28.0)->n == 16);
    REQUIRE(table.age(14.0) != nullptr);
    CHECK(table.age(14.0)->n == 12);  // mortars skip 14 days

    // pooled rmse^2 equals the n-weighted mean of per-age rmse^2
    double weighted = 0.0;
    std::size_t total = 0;
    for (const auto& row : table.rows) {
        if (row.age_label == "all") continue;
        weighted +=
            static_cast<double>(row.n) * (*row.rmse_ksi) * (*row.rmse_ksi);
        total += row.n;
    }
    CHECK(total == table.all().n);
    const double pooled = *table.all().rmse_ksi;
    CHECK(pooled * pooled ==
          doctest::Approx(weighted / static_cast<double>(total)).epsilon(1e-10));

    // shuffling the test rows changes nothing
    Dataset shuffled = setup.test;
    std::reverse(shuffled.observations.begin(), shuffled.observations.end());
    EvalTable table2 = evaluate_by_age(setup.model, shuffled);
    CHECK(serialize_eval_table(table2) == serialize_eval_table(table));

    CHECK_THROWS_AS(evaluate_by_age(setup.model, Dataset{}), DataError);
}

TEST_CASE("near-perfect model scores r2 near 1 and rmse near 0") {
    auto setup = perfect_setup();
    EvalTable table = evaluate_by_age(setup.model, setup.test);
    REQUIRE(table.all().r2.has_value());
    CHECK(*table.all().r2 > 0.99);
    CHECK(*table.all().rmse_ksi < 0.2);
}

TEST_CASE("tiny age buckets mark r2 undefined but keep pooling") {
    auto setup = perfect_setup();
    // keep exactly one 28-day observation plus the full 1-day bucket
    Dataset small = setup.test;
    small.observations.clear();
    bool kept28 = false;
    for (const auto& obs : setup.test.observations) {
        if (obs.age_days == 1.0) small.observations.push_back(obs);
        if (obs.age_days == 28.0 && !kept28) {
            small.observations.push_back(obs);
            kept28 = true;
        }
    }
    EvalTable table = evaluate_by_age(setup.model, small);
    REQUIRE(table.age(28.0) != nullptr);
    CHECK(table.age(28.0)->n == 1);
    CHECK(!table.age(28.0)->r2.has_value());
    CHECK(table.age(28.0)->rmse_ksi.has_value());
    CHECK(table.all().n == table.age(1.0)->n + 1);
    CHECK(table.all().r2.has_value());
}

TEST_CASE("eval table serializes to a diffable csv") {
    auto setup = perfect_setup();
    EvalTable table = evaluate_by_age(setup.model, setup.test);
    const std::string text = serialize_eval_table(table);
    CHECK(text.rfind("age,n,r2,rmse_ksi\n", 0) == 0);
    CHECK(text.find("\nall,") != std::string::npos);
}
