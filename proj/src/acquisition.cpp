#include "mixopt/acquisition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mixopt/errors.hpp"
#include "mixopt/rng.hpp"

namespace mixopt {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
// scale of the softplus tail relative to tau; keeps the smoothing bias on
// well-scaled EHVI values negligible while still grading dominated regions
constexpr double kTailScale = 1e-3;

double log_softplus(double x) {
    // log(log1p(exp(x))) for x <= 0
    if (x < -30.0) return x;
    return std::log(std::log1p(std::exp(x)));
}

double logsumexp2(double a, double b) {
    if (a == kNegInf) return b;
    if (b == kNegInf) return a;
    const double m = std::max(a, b);
    return m + std::log1p(std::exp(std::min(a, b) - m));
}

// m = 2 joint improvement of a batch against a static staircase.
// Front arrives sorted by x descending (y ascending); batch is sorted in
// place. One desc-x merge accumulates horizontal strips.
double hvi2_merged(const std::vector<Vector>& front, double hv_front, const Vector& ref,
                   double* bx, double* by, std::size_t q) {
    // insertion sort, q is small
    for (std::size_t a = 1; a < q; ++a) {
        const double x = bx[a], y = by[a];
        std::size_t b = a;
        while (b > 0 && bx[b - 1] < x) {
            bx[b] = bx[b - 1];
            by[b] = by[b - 1];
            --b;
        }
        bx[b] = x;
        by[b] = y;
    }
    double area = 0.0;
    double cur = ref[1];
    std::size_t i = 0, j = 0;
    const std::size_t k = front.size();
    while (i < k || j < q) {
        double x, y;
        if (j >= q || (i < k && front[i][0] >= bx[j])) {
            x = front[i][0];
            y = front[i][1];
            ++i;
        } else {
            x = bx[j];
            y = by[j];
            ++j;
        }
        if (x <= ref[0]) continue;
        if (y > cur) {
            area += (y - cur) * (x - ref[0]);
            cur = y;
        }
    }
    return std::max(area - hv_front, 0.0);
}

double hvi_generic(const std::vector<Vector>& front, double hv_front, const Vector& ref,
                   const std::vector<Vector>& batch) {
    std::vector<Vector> combined = front;
    combined.insert(combined.end(), batch.begin(), batch.end());
    return std::max(hypervolume_exact(combined, ref) - hv_front, 0.0);
}

// signed domination distance of the best batch point: positive when some
// point escapes both the front and the reference, negative otherwise
double signed_distance(const std::vector<Vector>& front, const Vector& ref, const double* y,
                       std::size_t m) {
    double rdist = std::numeric_limits<double>::infinity();
    for (std::size_t d = 0; d < m; ++d) rdist = std::min(rdist, y[d] - ref[d]);
    double ndist = std::numeric_limits<double>::infinity();
    for (const auto& p : front) {
        double worst = kNegInf;
        for (std::size_t d = 0; d < m; ++d) worst = std::max(worst, y[d] - p[d]);
        ndist = std::min(ndist, worst);
    }
    return std::min(rdist, ndist);
}

}  // namespace

EhviSampler::EhviSampler(std::vector<Vector> front, Vector ref, std::size_t n_samples,
                         std::uint64_t seed)
    : ref_(std::move(ref)), n_samples_(n_samples), stream_(hash_combine(seed, 0xEB51u)) {
    if (ref_.size() < 1 || ref_.size() > 3)
        throw NumericalError("EhviSampler: exact per-sample hypervolume needs 1 <= m <= 3");
    if (n_samples_ == 0) throw ConfigError("EhviSampler: n_samples must be positive");
    front_ = pareto_front(front);
    for (const auto& p : front_)
        if (p.size() != ref_.size()) throw DataError("EhviSampler: front/ref dimension mismatch");
    hv_front_ = hypervolume_exact(front_, ref_);
    // per-sample improvements subtract the sweep's own value of the bare
    // front so a dominated draw yields exactly zero
    hv_front_strips_ = hv_front_;
    if (ref_.size() == 2)
        hv_front_strips_ = hvi2_merged(front_, 0.0, ref_, nullptr, nullptr, 0);
}

double EhviSampler::base_normal(std::size_t s, std::size_t j, std::size_t k) const {
    // shifted radical-inverse stream per batch/objective dimension: a
    // low-discrepancy draw whose index never depends on the candidate values
    const std::size_t dim = j * ref_.size() + k;
    const std::uint64_t base = nth_prime_base(dim);
    double u;
    if (base != 0) {
        const double shift = stateless_uniform(stream_, dim);
        u = radical_inverse(base, s + 1) + shift;
        if (u >= 1.0) u -= 1.0;
    } else {
        u = stateless_uniform(hash_combine(stream_, dim), s);
    }
    u = std::clamp(u, 0x1.0p-53, 1.0 - 0x1.0p-53);
    return normal_quantile(u);
}

struct EhviSampler::SampleScratch {
    std::vector<double> y;
    std::vector<double> bx, by;
    std::vector<Vector> batch;
};

void EhviSampler::check_batch(const Matrix& means, const Matrix& vars) const {
    const std::size_t q = means.rows();
    const std::size_t m = ref_.size();
    if (vars.rows() != q || means.cols() != m || vars.cols() != m)
        throw DataError("EhviSampler: means/vars must be q x m");
    if (q == 0 || q > 64) throw ConfigError("EhviSampler: batch size must be in [1, 64]");
    for (std::size_t j = 0; j < q; ++j)
        for (std::size_t k = 0; k < m; ++k)
            if (!(vars(j, k) >= 0.0)) throw DataError("EhviSampler: negative variance");
}

double EhviSampler::improvement_of(std::size_t s, const Matrix& means, const Matrix& vars,
                                   SampleScratch& scratch, double* signed_dist) const {
    const std::size_t q = means.rows();
    const std::size_t m = ref_.size();
    auto& y = scratch.y;
    y.resize(q * m);
    for (std::size_t j = 0; j < q; ++j)
        for (std::size_t k = 0; k < m; ++k) {
            const double v = vars(j, k);
            y[j * m + k] = v == 0.0 ? means(j, k)
                                    : means(j, k) + std::sqrt(v) * base_normal(s, j, k);
        }

    double hvi = 0.0;
    if (m == 1) {
        const double incumbent = front_.empty() ? ref_[0] : std::max(front_[0][0], ref_[0]);
        double best = kNegInf;
        for (std::size_t j = 0; j < q; ++j) best = std::max(best, y[j]);
        hvi = std::max(best - incumbent, 0.0);
    } else if (m == 2) {
        scratch.bx.resize(q);
        scratch.by.resize(q);
        for (std::size_t j = 0; j < q; ++j) {
            scratch.bx[j] = y[j * 2];
            scratch.by[j] = y[j * 2 + 1];
        }
        hvi = hvi2_merged(front_, hv_front_strips_, ref_, scratch.bx.data(), scratch.by.data(),
                          q);
    } else {
        scratch.batch.clear();
        for (std::size_t j = 0; j < q; ++j)
            scratch.batch.emplace_back(y.begin() + static_cast<long>(j * m),
                                       y.begin() + static_cast<long>((j + 1) * m));
        hvi = hvi_generic(front_, hv_front_, ref_, scratch.batch);
    }

    if (signed_dist) {
        *signed_dist = 1.0;  // only informative when the sample does not improve
        if (hvi <= 0.0) {
            double sgn = kNegInf;
            for (std::size_t j = 0; j < q; ++j)
                sgn = std::max(sgn, signed_distance(front_, ref_, y.data() + j * m, m));
            *signed_dist = sgn;
        }
    }
    return hvi;
}

double EhviSampler::sample_improvement(std::size_t s, const Matrix& means,
                                       const Matrix& vars) const {
    check_batch(means, vars);
    SampleScratch scratch;
    return improvement_of(s, means, vars, scratch, nullptr);
}

template <typename PerSample>
void EhviSampler::for_each_sample(const Matrix& means, const Matrix& vars,
                                  PerSample&& fn) const {
    check_batch(means, vars);
#pragma omp parallel
    {
        SampleScratch scratch;
#pragma omp for schedule(static)
        for (long long ss = 0; ss < static_cast<long long>(n_samples_); ++ss) {
            const std::size_t s = static_cast<std::size_t>(ss);
            double sgn = 1.0;
            const double hvi = improvement_of(s, means, vars, scratch, &sgn);
            fn(s, hvi, sgn);
        }
    }
}

double EhviSampler::ehvi(const Matrix& means, const Matrix& vars) const {
    std::vector<double> improvement(n_samples_);
    for_each_sample(means, vars,
                    [&](std::size_t s, double hvi, double) { improvement[s] = hvi; });
    double sum = 0.0;
    for (double v : improvement) sum += v;  // fixed order, thread-count independent
    return sum / static_cast<double>(n_samples_);
}

double EhviSampler::qlog_ehvi(const Matrix& means, const Matrix& vars, double tau) const {
    if (!(tau > 0.0)) throw ConfigError("qlog_ehvi: tau must be > 0");
    std::vector<double> logs(n_samples_);
    const double log_tail_base = std::log(kTailScale * tau);
    for_each_sample(means, vars, [&](std::size_t s, double hvi, double sgn) {
        const double t_improve = hvi > 0.0 ? std::log(hvi) : kNegInf;
        const double x = std::min(sgn, 0.0) / tau;
        const double t_tail = log_tail_base + log_softplus(x);
        logs[s] = logsumexp2(t_improve, t_tail);
    });
    double mx = kNegInf;
    for (double v : logs) mx = std::max(mx, v);
    if (mx == kNegInf) return kNegInf;  // unreachable: tail term is always finite
    double sum = 0.0;
    for (double v : logs) sum += std::exp(v - mx);
    return mx + std::log(sum) - std::log(static_cast<double>(n_samples_));
}

const std::array<const char*, DesignSpace::kDim> DesignSpace::kVarNames = {
    "binder", "frac_fly_ash_c", "frac_fly_ash_f", "frac_slag",
    "wb",     "hrwr",           "fine_coarse_ratio", "curing_temp"};

void DesignSpace::validate() const {
    for (std::size_t d = 0; d < kDim; ++d) {
        if (!(lo[d] <= hi[d]))
            throw ConfigError(std::string("DesignSpace: lo > hi for ") + kVarNames[d]);
    }
    if (!(lo[0] > 0.0)) throw ConfigError("DesignSpace: binder lower bound must be > 0");
    if (lo[1] < 0.0 || lo[2] < 0.0 || lo[3] < 0.0)
        throw ConfigError("DesignSpace: SCM fractions must be >= 0");
    if (hi[1] + hi[2] + hi[3] > 1.0)
        throw ConfigError("DesignSpace: SCM fraction upper bounds exceed 1 in combination");
    if (lo[4] < 0.0 || hi[4] >= 1.5) throw ConfigError("DesignSpace: w/b bounds out of [0, 1.5)");
    if (lo[5] < 0.0) throw ConfigError("DesignSpace: hrwr must be >= 0");
    if (!(lo[6] > 0.0)) throw ConfigError("DesignSpace: fine/coarse ratio must be > 0");
    // aggregate mass at the heaviest paste corner must stay positive
    const double paste_max = hi[0] * (1.0 + hi[4]) + hi[5];
    if (!(total_mass - paste_max > 0.0))
        throw ConfigError("DesignSpace: total_mass leaves no aggregate at max binder/water/hrwr");
}

MixComposition DesignSpace::to_mix(const std::array<double, kDim>& v) const {
    const double binder = v[0];
    const double fc = v[1], ff = v[2], fs = v[3];
    MixComposition mix;
    mix.cement = binder * (1.0 - fc - ff - fs);
    mix.fly_ash_c = binder * fc;
    mix.fly_ash_f = binder * ff;
    mix.slag = binder * fs;
    mix.water = binder * v[4];
    mix.hrwr = v[5];
    const double agg = total_mass - binder - mix.water - mix.hrwr;
    const double ratio = v[6];
    mix.fine_agg = agg * ratio / (1.0 + ratio);
    mix.coarse_agg = agg / (1.0 + ratio);
    mix.curing_temp = v[7];
    mix.kind = MixKind::concrete;
    return mix;
}

std::array<double, DesignSpace::kDim> DesignSpace::clamp(
    const std::array<double, kDim>& v) const {
    std::array<double, kDim> out{};
    for (std::size_t d = 0; d < kDim; ++d) out[d] = std::clamp(v[d], lo[d], hi[d]);
    return out;
}

std::array<double, DesignSpace::kDim> DesignSpace::from_unit(const std::vector<double>& u) const {
    std::array<double, kDim> out{};
    for (std::size_t d = 0; d < kDim; ++d) out[d] = lo[d] + u[d] * (hi[d] - lo[d]);
    return out;
}

DesignSpace DesignSpace::defaults() {
    DesignSpace s;
    //                binder  fa_c  fa_f  slag   w/b   hrwr  f/c   temp
    s.lo = {500.0, 0.00, 0.00, 0.00, 0.25, 0.0, 0.5, 10.0};
    s.hi = {900.0, 0.30, 0.20, 0.40, 0.50, 4.0, 1.2, 23.0};
    s.total_mass = 3900.0;
    s.validate();
    return s;
}

namespace {

struct ObjectiveEval {
    double mean_strength;
    double sigma_strength;
    double gwp_yd3;
};

ObjectiveEval eval_objectives(const GpModel& model, const EmissionFactors& factors,
                              const DesignSpace& space,
                              const std::array<double, DesignSpace::kDim>& v, double age) {
    const MixComposition mix = space.to_mix(v);
    PredictResult pred = model.predict(mix, {age});
    const double gwp_total = gwp(mix, factors).total;
    return {pred.mean[0], std::sqrt(std::max(pred.variance[0], 0.0)), gwp_total};
}

}  // namespace

AcquisitionResult optimize_acquisition(const GpModel& model, const EmissionFactors& factors,
                                       const std::vector<Vector>& pareto_front_pts,
                                       const Vector& ref, const DesignSpace& space,
                                       std::size_t q, const AcqOptions& opts) {
    if (pareto_front_pts.empty())
        throw DataError("optimize_acquisition: Pareto set must be nonempty");
    if (q == 0) throw ConfigError("optimize_acquisition: q must be >= 1");
    space.validate();
    require_all_factors(factors);

    EhviSampler sampler(pareto_front_pts, ref, opts.n_samples, opts.seed);

    // Cranley-Patterson rotation seeds the quasi-random starts
    std::array<double, DesignSpace::kDim> rot{};
    for (std::size_t d = 0; d < DesignSpace::kDim; ++d)
        rot[d] = stateless_uniform(hash_combine(opts.seed, 0xC9u), d);

    std::vector<std::array<double, DesignSpace::kDim>> chosen;
    std::vector<ObjectiveEval> chosen_eval;

    auto batch_acq = [&](const std::array<double, DesignSpace::kDim>& v,
                         ObjectiveEval* out_eval) {
        const std::size_t nb = chosen.size() + 1;
        Matrix means(nb, 2), vars(nb, 2);
        for (std::size_t j = 0; j + 1 < nb; ++j) {
            means(j, 0) = chosen_eval[j].mean_strength;
            means(j, 1) = -chosen_eval[j].gwp_yd3;
            vars(j, 0) = chosen_eval[j].sigma_strength * chosen_eval[j].sigma_strength;
            vars(j, 1) = 0.0;
        }
        const ObjectiveEval e = eval_objectives(model, factors, space, v, opts.age_days);
        means(nb - 1, 0) = e.mean_strength;
        means(nb - 1, 1) = -e.gwp_yd3;
        vars(nb - 1, 0) = e.sigma_strength * e.sigma_strength;
        vars(nb - 1, 1) = 0.0;
        if (out_eval) *out_eval = e;
        return sampler.qlog_ehvi(means, vars, opts.tau);
    };

    double final_acq = kNegInf;
    for (std::size_t slot = 0; slot < q; ++slot) {
        std::array<double, DesignSpace::kDim> best_v{};
        double best_val = kNegInf;

        for (int restart = 0; restart < std::max(1, opts.restarts); ++restart) {
            auto u = halton_point(slot * static_cast<std::size_t>(opts.restarts) +
                                      static_cast<std::size_t>(restart),
                                  DesignSpace::kDim);
            for (std::size_t d = 0; d < DesignSpace::kDim; ++d)
                u[d] = std::fmod(u[d] + rot[d], 1.0);
            auto v = space.from_unit(u);
            double val = batch_acq(v, nullptr);

            double step = opts.step_init;
            int sweeps = 0;
            while (step >= opts.step_min && sweeps < opts.max_sweeps) {
                ++sweeps;
                bool improved = false;
                for (std::size_t d = 0; d < DesignSpace::kDim; ++d) {
                    const double range = space.hi[d] - space.lo[d];
                    if (range == 0.0) continue;
                    for (double dir : {1.0, -1.0}) {
                        auto v_try = v;
                        v_try[d] = std::clamp(v[d] + dir * step * range, space.lo[d], space.hi[d]);
                        if (v_try[d] == v[d]) continue;
                        const double val_try = batch_acq(v_try, nullptr);
                        if (val_try > val) {
                            v = v_try;
                            val = val_try;
                            improved = true;
                            break;
                        }
                    }
                }
                if (!improved) step *= 0.5;
            }

            if (val > best_val) {
                best_val = val;
                best_v = v;
            }
        }

        ObjectiveEval e{};
        final_acq = batch_acq(best_v, &e);
        chosen.push_back(best_v);
        chosen_eval.push_back(e);
    }

    AcquisitionResult result;
    result.acq_log_value = final_acq;
    result.front_before = sampler.front();
    result.hv_before = sampler.front_hypervolume();

    std::vector<Vector> predicted = sampler.front();
    for (std::size_t j = 0; j < q; ++j) {
        BatchCandidate cand;
        cand.design = chosen[j];
        cand.mix = space.to_mix(chosen[j]);
        cand.mix.validate("optimize_acquisition candidate: ");
        cand.pred_mean_ksi = chosen_eval[j].mean_strength;
        cand.pred_sigma_ksi = chosen_eval[j].sigma_strength;
        cand.gwp_yd3 = chosen_eval[j].gwp_yd3;
        predicted.push_back({cand.pred_mean_ksi, -cand.gwp_yd3});
        result.batch.push_back(std::move(cand));
    }
    result.hv_after_predicted = hypervolume_exact(pareto_front(predicted), ref);
    return result;
}

namespace reference {
double ehvi(const EhviSampler& sampler, const Matrix& means, const Matrix& vars) {
    // serial loop over the same per-sample contract the parallel path uses
    double sum = 0.0;
    for (std::size_t s = 0; s < sampler.n_samples(); ++s)
        sum += sampler.sample_improvement(s, means, vars);
    return sum / static_cast<double>(sampler.n_samples());
}
}  // namespace reference

}  // namespace mixopt
