#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "mixopt/acquisition.hpp"
#include "mixopt/errors.hpp"
#include "mixopt/gwp.hpp"
#include "mixopt/pareto.hpp"
#include "mixopt/rng.hpp"

using namespace mixopt;

namespace {

Matrix row2(double m0, double m1) {
    Matrix m(1, 2);
    m(0, 0) = m0;
    m(0, 1) = m1;
    return m;
}

EmissionFactors test_factors() {
    return load_factors(
        "constituent,g_m,g_t,g_p\n"
        "cement,0.42,0.012,0.02\n"
        "fly_ash_c,0.01,0.011,0.004\n"
        "fly_ash_f,0.01,0.011,0.004\n"
        "slag,0.07,0.013,0.01\n"
        "water,0.0002,0,0.0001\n"
        "fine_agg,0.0023,0.0035,0.001\n"
        "coarse_agg,0.0021,0.0032,0.001\n"
        "hrwr,0.9,0.02,0.05\n");
}

}  // namespace

TEST_CASE("ehvi degenerate cases are exact") {
    std::vector<Vector> front = {{2, 1}, {1, 2}};
    const Vector ref = {0, 0};
    EhviSampler sampler(front, ref, 4096, 17);
    CHECK(sampler.front_hypervolume() == doctest::Approx(3.0));

    // zero-variance candidate dominated by the front: exactly 0
    CHECK(sampler.ehvi(row2(0.5, 0.5), row2(0, 0)) == 0.0);

    // zero-variance candidate at y_new: exact hypervolume gain
    const double hvi = sampler.ehvi(row2(1.5, 1.5), row2(0, 0));
    const double expected =
        hypervolume_exact({{2, 1}, {1, 2}, {1.5, 1.5}}, ref) - 3.0;
    CHECK(hvi == doctest::Approx(expected).epsilon(1e-12));
    CHECK(expected == doctest::Approx(0.25).epsilon(1e-12));

    CHECK_THROWS_AS(sampler.ehvi(row2(1, 1), row2(-0.5, 0)), DataError);
}

TEST_CASE("m=1 ehvi matches the closed-form expected improvement") {
    double worst = 0.0;
    for (std::uint64_t trial = 0; trial < 50; ++trial) {
        Rng rng(4000 + trial);
        const double f_star = rng.uniform(-2, 2);
        const double sigma = rng.uniform(0.5, 2.0);
        const double z = rng.uniform(0.0, 1.5);
        const double mu = f_star + z * sigma;

        std::vector<Vector> front = {{f_star}};
        EhviSampler sampler(front, {f_star - 1000.0}, 1u << 14, 5000 + trial);

        Matrix means(1, 1), vars(1, 1);
        means(0, 0) = mu;
        vars(0, 0) = sigma * sigma;
        const double mc = sampler.ehvi(means, vars);
        const double closed = sigma * (normal_pdf(z) + z * normal_cdf(z));
        const double rel = std::fabs(mc - closed) / closed;
        CAPTURE(trial);
        CHECK(rel <= 0.02);
        worst = std::max(worst, rel);
    }
    MESSAGE("worst m=1 EI relative error: ", worst);
}

TEST_CASE("ehvi is deterministic and nonnegative") {
    std::vector<Vector> front = {{2, 1}, {1, 2}};
    EhviSampler a(front, {0, 0}, 8192, 7);
    EhviSampler b(front, {0, 0}, 8192, 7);
    Matrix means = row2(1.6, 1.2), vars = row2(0.09, 0.04);
    CHECK(a.ehvi(means, vars) == b.ehvi(means, vars));
    CHECK(a.ehvi(means, vars) >= 0.0);

    // common random numbers: base samples do not depend on the candidate
    CHECK(a.base_normal(3, 0, 1) == b.base_normal(3, 0, 1));
}

TEST_CASE("qlog_ehvi stays finite where raw ehvi underflows") {
    std::vector<Vector> front = {{10, 10}};
    EhviSampler sampler(front, {0, 0}, 4096, 3);

    // far-dominated candidate with tiny variance: raw EHVI is one long
    // underflow but the log value is a finite large negative number
    Matrix means = row2(1.0, 1.0), vars = row2(1e-12, 0.0);
    CHECK(sampler.ehvi(means, vars) == 0.0);
    const double qlog = sampler.qlog_ehvi(means, vars, 1e-3);
    CHECK(std::isfinite(qlog));
    CHECK(qlog < -100.0);  // ln(1e-30) scale or below

    // batch version stays finite too
    Matrix means_q(3, 2), vars_q(3, 2);
    for (int j = 0; j < 3; ++j) {
        means_q(j, 0) = 0.5 + 0.1 * j;
        means_q(j, 1) = 0.5;
        vars_q(j, 0) = 1e-14;
        vars_q(j, 1) = 0.0;
    }
    CHECK(std::isfinite(sampler.qlog_ehvi(means_q, vars_q, 1e-3)));
}

TEST_CASE("exp(qlog_ehvi) tracks ehvi on well-scaled cases") {
    std::vector<Vector> front = {{2, 1}, {1, 2}};
    EhviSampler sampler(front, {0, 0}, 1u << 14, 9);
    for (int c = 0; c < 8; ++c) {
        Matrix means = row2(1.2 + 0.2 * c, 1.3), vars = row2(0.25, 0.09);
        const double ehvi = sampler.ehvi(means, vars);
        if (ehvi <= 1e-3) continue;
        const double qlog = sampler.qlog_ehvi(means, vars, 1e-3);
        CHECK(std::fabs(std::exp(qlog) - ehvi) / ehvi <= 0.05);
    }
}

TEST_CASE("qlog_ehvi approaches log(ehvi) monotonically as tau shrinks") {
    std::vector<Vector> front = {{2, 1}, {1, 2}};
    EhviSampler sampler(front, {0, 0}, 8192, 13);
    Matrix means = row2(1.8, 1.6), vars = row2(0.04, 0.01);
    const double log_ehvi = std::log(sampler.ehvi(means, vars));

    double prev_gap = std::numeric_limits<double>::infinity();
    for (double tau : {1e-1, 1e-2, 1e-3}) {
        const double gap = std::fabs(sampler.qlog_ehvi(means, vars, tau) - log_ehvi);
        CHECK(gap <= prev_gap + 1e-12);
        prev_gap = gap;
    }
    CHECK(prev_gap < 1e-3);

    CHECK_THROWS_AS(sampler.qlog_ehvi(means, vars, 0.0), ConfigError);
}

TEST_CASE("design space maps every box point to a valid mix") {
    DesignSpace space = DesignSpace::defaults();
    CHECK_NOTHROW(space.validate());

    Rng rng(31);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> u(DesignSpace::kDim);
        for (auto& v : u) v = rng.next_double();
        const auto v = space.from_unit(u);
        MixComposition mix = space.to_mix(v);
        CHECK_NOTHROW(mix.validate());
        // mass balance at the configured total
        const double total = mix.cement + mix.fly_ash_c + mix.fly_ash_f + mix.slag + mix.water +
                             mix.fine_agg + mix.coarse_agg + mix.hrwr;
        CHECK(total == doctest::Approx(space.total_mass).epsilon(1e-9));
        CHECK(mix.kind == MixKind::concrete);
    }

    DesignSpace bad = space;
    bad.hi[0] = 3900.0;  // binder swallows the whole batch
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    DesignSpace bad2 = space;
    bad2.hi[1] = 0.7;
    bad2.hi[2] = 0.2;
    bad2.hi[3] = 0.4;  // fractions can exceed 1
    CHECK_THROWS_AS(bad2.validate(), ConfigError);
}

namespace {

// deterministic surrogate over a 2-variable slice of the design box: a dense
// noiseless grid makes the GP posterior essentially exact inside the box
GpModel grid_conditioned_model(const DesignSpace& space, const Scaler& scaler) {
    const std::size_t grid = 7;
    std::vector<std::array<double, DesignSpace::kDim>> designs;
    for (std::size_t a = 0; a < grid; ++a)
        for (std::size_t b = 0; b < grid; ++b) {
            auto v = space.lo;
            v[0] = space.lo[0] + (space.hi[0] - space.lo[0]) * a / double(grid - 1);
            v[4] = space.lo[4] + (space.hi[4] - space.lo[4]) * b / double(grid - 1);
            designs.push_back(v);
        }
    Matrix x(designs.size(), kGpDim);
    Vector y(designs.size());
    for (std::size_t i = 0; i < designs.size(); ++i) {
        const MixComposition mix = space.to_mix(designs[i]);
        auto row = encode_row(mix, 28.0, scaler, 1.0 / 24.0);
        for (std::size_t c = 0; c < kGpDim; ++c) x(i, c) = row[c];
        // strength falls with binder and w/b: the cheap corner wins both ways
        y[i] = 10.0 - 3.0 * (designs[i][0] - space.lo[0]) / (space.hi[0] - space.lo[0]) -
               2.0 * (designs[i][4] - space.lo[4]) / (space.hi[4] - space.lo[4]);
    }
    KernelHyperparams h;
    h.alpha = 0.0;
    h.beta = 25.0;
    h.ell_time = 1.0;
    h.ell_joint.fill(3.0);
    h.noise_var = 0.0;
    h.mean_const = 0.0;
    return GpModel::condition(x, y, h, scaler, 1.0 / 24.0);
}

}  // namespace

TEST_CASE("optimizer finds the dominating corner of a 2-variable toy space") {
    // only binder and w/b vary; the (lo, lo) corner maximizes strength and,
    // with the lowest cement and water load, minimizes GWP
    DesignSpace space = DesignSpace::defaults();
    for (std::size_t d = 0; d < DesignSpace::kDim; ++d)
        if (d != 0 && d != 4) space.hi[d] = space.lo[d];
    space.validate();

    // scaler over the active corners
    Dataset corner_set;
    {
        auto v_lo = space.lo;
        auto v_hi = space.hi;
        corner_set.mixes.emplace("lo", space.to_mix(v_lo));
        corner_set.mixes.emplace("hi", space.to_mix(v_hi));
    }
    Scaler scaler = Scaler::fit(corner_set);
    GpModel model = grid_conditioned_model(space, scaler);
    EmissionFactors factors = test_factors();

    // sanity: posterior variance is negligible inside the box
    {
        auto mid = space.lo;
        mid[0] = 0.5 * (space.lo[0] + space.hi[0]);
        mid[4] = 0.5 * (space.lo[4] + space.hi[4]);
        PredictResult p = model.predict(space.to_mix(mid), {28.0});
        CHECK(p.variance[0] < 1e-6);
    }

    std::vector<Vector> front = {{6.0, -gwp(space.to_mix(space.hi), factors).total}};
    const Vector ref = {0.0, -600.0};

    AcqOptions opts;
    opts.restarts = 4;
    opts.seed = 77;
    opts.n_samples = 2048;
    opts.max_sweeps = 60;
    AcquisitionResult res = optimize_acquisition(model, factors, front, ref, space, 1, opts);
    REQUIRE(res.batch.size() == 1);

    // exhaustive grid oracle over the two active variables, same acquisition
    EhviSampler sampler(pareto_front(front), ref, opts.n_samples,
                        hash_combine(opts.seed, 0xEB51u));
    double best_val = -1e300;
    std::array<double, DesignSpace::kDim> best_v{};
    const std::size_t grid = 41;
    for (std::size_t a = 0; a < grid; ++a)
        for (std::size_t b = 0; b < grid; ++b) {
            auto v = space.lo;
            v[0] = space.lo[0] + (space.hi[0] - space.lo[0]) * a / double(grid - 1);
            v[4] = space.lo[4] + (space.hi[4] - space.lo[4]) * b / double(grid - 1);
            const MixComposition mix = space.to_mix(v);
            PredictResult p = model.predict(mix, {28.0});
            Matrix means(1, 2), vars(1, 2);
            means(0, 0) = p.mean[0];
            means(0, 1) = -gwp(mix, factors).total;
            vars(0, 0) = std::max(p.variance[0], 0.0);
            vars(0, 1) = 0.0;
            const double val = sampler.qlog_ehvi(means, vars, opts.tau);
            if (val > best_val) {
                best_val = val;
                best_v = v;
            }
        }

    // grid argmax should be the cheap-strong corner
    CHECK(best_v[0] == doctest::Approx(space.lo[0]));
    CHECK(best_v[4] == doctest::Approx(space.lo[4]));

    // optimizer lands within 1% of the box diagonal of the oracle optimum
    double dist2 = 0.0, diag2 = 0.0;
    for (std::size_t d : {std::size_t(0), std::size_t(4)}) {
        const double range = space.hi[d] - space.lo[d];
        dist2 += std::pow((res.batch[0].design[d] - best_v[d]) / range, 2);
        diag2 += 1.0;
    }
    CHECK(std::sqrt(dist2) <= 0.01 * std::sqrt(diag2));
}

TEST_CASE("acquisition batches are deterministic and feasible") {
    DesignSpace space = DesignSpace::defaults();
    Dataset corner_set;
    corner_set.mixes.emplace("lo", space.to_mix(space.lo));
    corner_set.mixes.emplace("hi", space.to_mix(space.hi));
    Scaler scaler = Scaler::fit(corner_set);
    GpModel model = grid_conditioned_model(space, scaler);
    EmissionFactors factors = test_factors();

    std::vector<Vector> front = {{7.0, -300.0}, {8.5, -420.0}};
    const Vector ref = {0.0, -600.0};
    AcqOptions opts;
    opts.restarts = 2;
    opts.seed = 3;
    opts.n_samples = 1024;
    opts.max_sweeps = 12;

    AcquisitionResult a = optimize_acquisition(model, factors, front, ref, space, 3, opts);
    AcquisitionResult b = optimize_acquisition(model, factors, front, ref, space, 3, opts);
    REQUIRE(a.batch.size() == 3);
    for (std::size_t j = 0; j < 3; ++j) {
        CHECK(a.batch[j].design == b.batch[j].design);
        CHECK_NOTHROW(a.batch[j].mix.validate());
        for (std::size_t d = 0; d < DesignSpace::kDim; ++d) {
            CHECK(a.batch[j].design[d] >= space.lo[d]);
            CHECK(a.batch[j].design[d] <= space.hi[d]);
        }
    }
    CHECK(a.acq_log_value == b.acq_log_value);
    CHECK(a.hv_after_predicted >= a.hv_before - 1e-12);

    CHECK_THROWS_AS(optimize_acquisition(model, factors, {}, ref, space, 1, opts), DataError);
}
