#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "mixopt/dataset.hpp"
#include "mixopt/gp.hpp"
#include "mixopt/gwp.hpp"
#include "mixopt/linalg.hpp"
#include "mixopt/pareto.hpp"

namespace mixopt {

// Monte Carlo expected-hypervolume-improvement over a fixed Pareto front and
// reference point. Base samples are a pure function of (seed, sample, point,
// objective), which gives common random numbers across every candidate
// evaluated within one optimization run.
class EhviSampler {
  public:
    EhviSampler(std::vector<Vector> front, Vector ref, std::size_t n_samples,
                std::uint64_t seed);

    // means/vars are q x m: per batch point, per objective (independent
    // Gaussians; a deterministic objective has variance 0)
    double ehvi(const Matrix& means, const Matrix& vars) const;

    // Log-domain smoothed estimator. Per-sample hypervolume improvements have
    // their hard positive part replaced by a softplus floor at temperature
    // tau driven by a signed domination distance, then samples aggregate by
    // log-sum-exp. Finite even when the raw EHVI underflows; converges to
    // log(ehvi) as tau -> 0.
    double qlog_ehvi(const Matrix& means, const Matrix& vars, double tau) const;

    double front_hypervolume() const { return hv_front_; }
    const std::vector<Vector>& front() const { return front_; }
    const Vector& ref() const { return ref_; }
    std::size_t n_samples() const { return n_samples_; }

    // base sample (j, k) of draw s; the common-random-numbers contract
    double base_normal(std::size_t s, std::size_t j, std::size_t k) const;

    // hypervolume improvement of one draw; the parallel estimators are sums
    // of exactly these values, so a serial loop over them is bit-identical
    double sample_improvement(std::size_t s, const Matrix& means, const Matrix& vars) const;

  private:
    std::vector<Vector> front_;
    Vector ref_;
    std::size_t n_samples_;
    std::uint64_t stream_;
    double hv_front_ = 0.0;
    double hv_front_strips_ = 0.0;  // same value via the m=2 sweep used per sample

    struct SampleScratch;
    void check_batch(const Matrix& means, const Matrix& vars) const;
    double improvement_of(std::size_t s, const Matrix& means, const Matrix& vars,
                          SampleScratch& scratch, double* signed_dist) const;

    template <typename PerSample>
    void for_each_sample(const Matrix& means, const Matrix& vars, PerSample&& fn) const;
};

// Box-constrained concrete design space. A design vector maps one-to-one to a
// MixComposition at a fixed total batch mass per cubic yard.
struct DesignSpace {
    static constexpr std::size_t kDim = 8;
    // binder lb/yd3, class C fly ash fraction, class F fly ash fraction,
    // slag fraction (of binder), w/b ratio, hrwr lb/yd3, fine/coarse ratio,
    // curing temp C
    static const std::array<const char*, kDim> kVarNames;

    std::array<double, kDim> lo{};
    std::array<double, kDim> hi{};
    double total_mass = 3900.0;  // lb/yd3 across all constituents

    // throws ConfigError unless every box point maps to a valid mix
    void validate() const;

    MixComposition to_mix(const std::array<double, kDim>& v) const;

    std::array<double, kDim> clamp(const std::array<double, kDim>& v) const;
    std::array<double, kDim> from_unit(const std::vector<double>& u) const;

    static DesignSpace defaults();
};

struct AcqOptions {
    int restarts = 8;
    std::uint64_t seed = 0;
    std::size_t n_samples = 1u << 14;
    double tau = 1e-3;
    int max_sweeps = 40;
    double step_init = 0.25;  // fraction of each variable's range
    double step_min = 1e-3;
    double age_days = 28.0;   // strength objective age
};

struct BatchCandidate {
    MixComposition mix;
    std::array<double, DesignSpace::kDim> design{};
    double pred_mean_ksi = 0.0;
    double pred_sigma_ksi = 0.0;
    double gwp_yd3 = 0.0;
};

struct AcquisitionResult {
    std::vector<BatchCandidate> batch;
    double acq_log_value = 0.0;       // qlog_ehvi of the full batch
    double hv_before = 0.0;
    double hv_after_predicted = 0.0;  // posterior means treated as outcomes
    std::vector<Vector> front_before;
};

// Sequential-greedy batch construction; each slot runs a multi-start pattern
// search over the design box maximizing qlog_ehvi of the partial batch.
// Objectives: (28-day strength via GP posterior, -GWP as a zero-variance
// deterministic objective). Deterministic under opts.seed.
AcquisitionResult optimize_acquisition(const GpModel& model, const EmissionFactors& factors,
                                       const std::vector<Vector>& pareto_front_pts,
                                       const Vector& ref, const DesignSpace& space,
                                       std::size_t q, const AcqOptions& opts);

namespace reference {
// serial twin of the EHVI sample loop
double ehvi(const EhviSampler& sampler, const Matrix& means, const Matrix& vars);
}  // namespace reference

}  // namespace mixopt
