#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mixopt/dataset.hpp"
#include "mixopt/kernels.hpp"
#include "mixopt/linalg.hpp"

namespace mixopt {

// optimizer parametrization: log alpha, log beta, log ell_time,
// log ell_joint[kGpDim], log noise_var, mean_const
constexpr std::size_t kNumOptParams = kGpDim + 5;

std::array<double, kNumOptParams> theta_from_hyper(const KernelHyperparams& h);
KernelHyperparams hyper_from_theta(const std::array<double, kNumOptParams>& theta);

// Encoded training/query block. Rows are sorted by (mix_id, age) so results
// do not depend on observation order.
struct Design {
    Matrix x;  // n x kGpDim
    Vector y;  // ksi
    std::vector<std::string> mix_id;
    std::vector<double> age_days;
};

Design build_design(const Dataset& d, const Scaler& scaler, double delta_days);

// single encoded row for a (mix, age) query
std::array<double, kGpDim> encode_row(const MixComposition& mix, double age_days,
                                      const Scaler& scaler, double delta_days);

struct JitterOptions {
    double start_rel = 1e-8;  // relative to mean(diag K)
    double max_rel = 1e-2;
};

struct LmlResult {
    double value = 0.0;
    std::array<double, kNumOptParams> grad{};
    double jitter = 0.0;  // absolute jitter that was added
};

// Marginal likelihood of the centered targets under the composite kernel.
// The jitter ladder escalates by x10 until the factorization succeeds;
// exhaustion raises NumericalError with condition diagnostics.
double log_marginal_likelihood(const KernelHyperparams& h, const Matrix& x, const Vector& y,
                               const JitterOptions& jopts = {});

LmlResult lml_with_gradient(const KernelHyperparams& h, const Matrix& x, const Vector& y,
                            const JitterOptions& jopts = {});

struct FitOptions {
    int restarts = 8;
    int max_iters = 150;
    double tol = 1e-4;  // max-norm of the gradient
    JitterOptions jitter;
    std::uint64_t seed = 0;
    std::optional<KernelHyperparams> init;  // warm start for restart 0
};

struct FitReport {
    double lml = 0.0;
    double grad_norm = 0.0;
    bool converged = false;  // gradient norm below tol (vs. max_iters hit)
    int iters = 0;
    int restart = 0;
    int failed_restarts = 0;
};

struct PredictResult {
    Vector mean;      // ksi
    Vector variance;  // ksi^2, clamped at zero
};

struct CurvePoint {
    double age_days;
    double mean_ksi;
    double sigma_ksi;
    double lower95;
    double upper95;
};

class GpModel {
  public:
    // fits by multi-start Rprop ascent on the log marginal likelihood
    static GpModel fit(const Matrix& x, const Vector& y, const FitOptions& opts,
                       const Scaler& scaler = {}, double delta_days = 1.0 / 24.0);
    static GpModel fit(const Dataset& train, const Scaler& scaler, double delta_days,
                       const FitOptions& opts);

    // data-free prior (predict returns mean_const and alpha+beta)
    static GpModel prior(const KernelHyperparams& h, const Scaler& scaler, double delta_days);

    // exact conditioning with the given hyperparameters (no optimization)
    static GpModel condition(const Matrix& x, const Vector& y, const KernelHyperparams& h,
                             const Scaler& scaler = {}, double delta_days = 1.0 / 24.0,
                             const JitterOptions& jopts = {});

    PredictResult predict(const Matrix& xstar) const;
    PredictResult predict(const MixComposition& mix, const std::vector<double>& ages) const;

    // 95% band is mean +/- 2 sigma; epistemic by default, observation noise
    // added when include_noise is set
    std::vector<CurvePoint> predict_strength_curve(const MixComposition& mix,
                                                   const std::vector<double>& ages,
                                                   bool include_noise = false) const;

    const KernelHyperparams& hyper() const { return hyper_; }
    const FitReport& report() const { return report_; }
    double lml() const { return report_.lml; }
    double jitter() const { return jitter_; }
    const Scaler& scaler() const { return scaler_; }
    double delta_days() const { return delta_days_; }
    std::size_t train_size() const { return x_.rows(); }
    const Matrix& train_x() const { return x_; }
    const Vector& train_y() const { return y_; }
    const Matrix& chol() const { return chol_; }

    void save(const std::string& path) const;
    static GpModel load(const std::string& path);

    std::string serialize() const;
    static GpModel deserialize(const std::string& text);

  private:
    GpModel() = default;
    void finalize();  // factor K + noise + jitter, precompute alpha vector

    Matrix x_;
    Vector y_;
    KernelHyperparams hyper_;
    Matrix chol_;
    Vector alpha_vec_;  // (K + noise I + jitter I)^{-1} (y - mean)
    double jitter_ = 0.0;
    FitReport report_;
    Scaler scaler_;
    double delta_days_ = 1.0 / 24.0;
};

}  // namespace mixopt
