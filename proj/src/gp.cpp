#include "mixopt/gp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "mixopt/csv.hpp"
#include "mixopt/errors.hpp"
#include "mixopt/rng.hpp"

namespace mixopt {

std::array<double, kNumOptParams> theta_from_hyper(const KernelHyperparams& h) {
    std::array<double, kNumOptParams> t{};
    t[0] = std::log(h.alpha);
    t[1] = std::log(h.beta);
    t[2] = std::log(h.ell_time);
    for (std::size_t d = 0; d < kGpDim; ++d) t[3 + d] = std::log(h.ell_joint[d]);
    t[3 + kGpDim] = std::log(h.noise_var);
    t[4 + kGpDim] = h.mean_const;
    return t;
}

KernelHyperparams hyper_from_theta(const std::array<double, kNumOptParams>& t) {
    KernelHyperparams h;
    h.alpha = std::exp(t[0]);
    h.beta = std::exp(t[1]);
    h.ell_time = std::exp(t[2]);
    for (std::size_t d = 0; d < kGpDim; ++d) h.ell_joint[d] = std::exp(t[3 + d]);
    h.noise_var = std::exp(t[3 + kGpDim]);
    h.mean_const = t[4 + kGpDim];
    return h;
}

Design build_design(const Dataset& d, const Scaler& scaler, double delta_days) {
    std::vector<std::size_t> order(d.observations.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto& oa = d.observations[a];
        const auto& ob = d.observations[b];
        if (oa.mix_id != ob.mix_id) return oa.mix_id < ob.mix_id;
        return oa.age_days < ob.age_days;
    });

    Design design;
    design.x = Matrix(d.observations.size(), kGpDim);
    design.y.resize(d.observations.size());
    design.mix_id.resize(d.observations.size());
    design.age_days.resize(d.observations.size());
    for (std::size_t r = 0; r < order.size(); ++r) {
        const auto& obs = d.observations[order[r]];
        auto it = d.mixes.find(obs.mix_id);
        if (it == d.mixes.end())
            throw DataError("build_design: observation references unknown mix '" + obs.mix_id + "'");
        auto row = encode_row(it->second, obs.age_days, scaler, delta_days);
        for (std::size_t c = 0; c < kGpDim; ++c) design.x(r, c) = row[c];
        design.y[r] = obs.mean_ksi;
        design.mix_id[r] = obs.mix_id;
        design.age_days[r] = obs.age_days;
    }
    return design;
}

std::array<double, kGpDim> encode_row(const MixComposition& mix, double age_days,
                                      const Scaler& scaler, double delta_days) {
    std::array<double, kGpDim> row{};
    auto scaled = scaler.transform(mix.features());
    for (std::size_t k = 0; k < kNumFeatures; ++k) row[k] = scaled[k];
    row[kNumFeatures] = time_warp(age_days, delta_days);
    return row;
}

namespace {

struct Factorization {
    Matrix chol;
    double jitter = 0.0;
};

Factorization factor_with_jitter(const Matrix& k, double noise_var, const JitterOptions& jopts) {
    const std::size_t n = k.rows();
    double mean_diag = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean_diag += k(i, i);
    mean_diag = n > 0 ? mean_diag / static_cast<double>(n) : 1.0;
    const double scale = mean_diag > 0.0 ? mean_diag : 1.0;

    for (double rel = jopts.start_rel; rel <= jopts.max_rel * 1.0000001; rel *= 10.0) {
        const double jitter = rel * scale;
        Matrix kn = k;
        for (std::size_t i = 0; i < n; ++i) kn(i, i) += noise_var + jitter;
        if (auto l = cholesky(kn)) return {std::move(*l), jitter};
    }
    std::ostringstream msg;
    msg << "Cholesky failed after jitter escalation to " << jopts.max_rel
        << " * mean(diag K); n=" << n << " mean_diag=" << mean_diag << " noise_var=" << noise_var;
    throw NumericalError(msg.str());
}

Vector centered_targets(const Vector& y, double mean_const) {
    Vector yc(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) yc[i] = y[i] - mean_const;
    return yc;
}

double lml_from_factor(const Matrix& l, const Vector& yc, const Vector& alpha_vec) {
    const std::size_t n = yc.size();
    double logdet = 0.0;
    for (std::size_t i = 0; i < n; ++i) logdet += std::log(l(i, i));
    return -0.5 * dot(yc, alpha_vec) - logdet -
           0.5 * static_cast<double>(n) * std::log(2.0 * M_PI);
}

}  // namespace

double log_marginal_likelihood(const KernelHyperparams& h, const Matrix& x, const Vector& y,
                               const JitterOptions& jopts) {
    h.validate();
    Matrix k = gram_matrix(x, h);
    auto fac = factor_with_jitter(k, h.noise_var, jopts);
    Vector yc = centered_targets(y, h.mean_const);
    Vector alpha_vec = solve_cholesky(fac.chol, yc);
    return lml_from_factor(fac.chol, yc, alpha_vec);
}

LmlResult lml_with_gradient(const KernelHyperparams& h, const Matrix& x, const Vector& y,
                            const JitterOptions& jopts) {
    h.validate();
    const std::size_t n = x.rows();

    Matrix t_unit, j_unit, r_dist;
    gram_components(x, h, t_unit, j_unit, r_dist);

    Matrix k(n, n);
#pragma omp parallel for schedule(static)
    for (long long ii = 0; ii < static_cast<long long>(n); ++ii) {
        const std::size_t i = static_cast<std::size_t>(ii);
        for (std::size_t j = 0; j < n; ++j)
            k(i, j) = h.alpha * t_unit(i, j) + h.beta * j_unit(i, j);
    }

    auto fac = factor_with_jitter(k, h.noise_var, jopts);
    Vector yc = centered_targets(y, h.mean_const);
    Vector alpha_vec = solve_cholesky(fac.chol, yc);
    Matrix m = inverse_from_cholesky(fac.chol);

    LmlResult res;
    res.value = lml_from_factor(fac.chol, yc, alpha_vec);
    res.jitter = fac.jitter;

    // Row partials keep the reduction order fixed so results do not depend on
    // the thread count.
    constexpr std::size_t kG = 3 + kGpDim;  // log alpha, log beta, log ell_time, ARD
    Matrix partials(n, kG, 0.0);
    const double sqrt5 = std::sqrt(5.0);
    const double inv_ellt2 = 1.0 / (h.ell_time * h.ell_time);

#pragma omp parallel for schedule(dynamic, 16)
    for (long long ii = 0; ii < static_cast<long long>(n); ++ii) {
        const std::size_t i = static_cast<std::size_t>(ii);
        double* p = partials.row(i);
        for (std::size_t j = 0; j <= i; ++j) {
            const double w = (alpha_vec[i] * alpha_vec[j] - m(i, j)) * (i == j ? 1.0 : 2.0);
            const double tij = t_unit(i, j);
            const double jij = j_unit(i, j);
            const double r = r_dist(i, j);
            p[0] += w * h.alpha * tij;
            p[1] += w * h.beta * jij;
            const double dt = x(i, kGpDim - 1) - x(j, kGpDim - 1);
            p[2] += w * h.alpha * tij * dt * dt * inv_ellt2;
            // d matern / d log ell_d = (5/3) (1 + sqrt5 r) exp(-sqrt5 r) * dd^2/ell_d^2
            const double poly = 1.0 + sqrt5 * r + 5.0 * r * r / 3.0;
            const double expterm = jij / poly;
            const double gfac = (5.0 / 3.0) * (1.0 + sqrt5 * r) * expterm * w * h.beta;
            for (std::size_t d = 0; d < kGpDim; ++d) {
                const double dd = x(i, d) - x(j, d);
                const double z2 = dd * dd / (h.ell_joint[d] * h.ell_joint[d]);
                p[3 + d] += gfac * z2;
            }
        }
    }

    for (std::size_t g = 0; g < kG; ++g) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += partials(i, g);
        res.grad[g] = 0.5 * s;
    }

    double trace_noise = 0.0;
    double sum_alpha = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        trace_noise += alpha_vec[i] * alpha_vec[i] - m(i, i);
        sum_alpha += alpha_vec[i];
    }
    res.grad[3 + kGpDim] = 0.5 * h.noise_var * trace_noise;
    res.grad[4 + kGpDim] = sum_alpha;
    return res;
}

namespace {

KernelHyperparams default_init(const Vector& y) {
    const std::size_t n = y.size();
    double mean = 0.0;
    for (double v : y) mean += v;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double v : y) var += (v - mean) * (v - mean);
    var = n > 1 ? var / static_cast<double>(n - 1) : 1.0;
    if (!(var > 0.0)) var = 1.0;

    KernelHyperparams h;
    h.alpha = var / 2.0;
    h.beta = var / 2.0;
    h.ell_time = 1.0;
    h.ell_joint.fill(1.0);
    h.noise_var = 0.01 * var;
    h.mean_const = mean;
    return h;
}

struct RpropState {
    std::array<double, kNumOptParams> theta;
    std::array<double, kNumOptParams> step;
    std::array<double, kNumOptParams> prev_grad{};

    explicit RpropState(const std::array<double, kNumOptParams>& t0) : theta(t0) {
        step.fill(0.05);
    }
};

double max_abs(const std::array<double, kNumOptParams>& g) {
    double m = 0.0;
    for (double v : g) m = std::max(m, std::fabs(v));
    return m;
}

}  // namespace

GpModel GpModel::fit(const Matrix& x, const Vector& y, const FitOptions& opts,
                     const Scaler& scaler, double delta_days) {
    if (x.rows() < 2) throw DataError("GpModel::fit: need at least 2 training rows");
    if (x.rows() != y.size()) throw DataError("GpModel::fit: X/y size mismatch");

    const KernelHyperparams base = opts.init ? *opts.init : default_init(y);
    const auto theta_base = theta_from_hyper(base);

    bool have_best = false;
    std::array<double, kNumOptParams> best_theta{};
    FitReport best_report;
    double best_jitter = 0.0;
    int failed = 0;

    const int restarts = std::max(1, opts.restarts);
    for (int r = 0; r < restarts; ++r) {
        auto theta0 = theta_base;
        if (r > 0) {
            Rng rng(hash_combine(opts.seed, static_cast<std::uint64_t>(r)));
            for (std::size_t i = 0; i + 1 < kNumOptParams; ++i)
                theta0[i] += rng.uniform(-1.0, 1.0);
            theta0[kNumOptParams - 1] += rng.uniform(-0.5, 0.5);
        }

        RpropState st(theta0);
        LmlResult cur;
        try {
            cur = lml_with_gradient(hyper_from_theta(st.theta), x, y, opts.jitter);
        } catch (const NumericalError&) {
            ++failed;
            continue;
        }

        double local_best_lml = cur.value;
        auto local_best_theta = st.theta;
        double local_best_gnorm = max_abs(cur.grad);
        double local_best_jitter = cur.jitter;
        bool converged = local_best_gnorm <= opts.tol;
        int iter = 0;

        // iRprop-: sign-adaptive steps, invalid proposals shrink and retreat
        while (!converged && iter < opts.max_iters) {
            ++iter;
            auto prev_theta = st.theta;
            for (std::size_t i = 0; i < kNumOptParams; ++i) {
                double g = cur.grad[i];
                const double prod = g * st.prev_grad[i];
                if (prod > 0.0)
                    st.step[i] = std::min(st.step[i] * 1.2, 0.5);
                else if (prod < 0.0) {
                    st.step[i] = std::max(st.step[i] * 0.5, 1e-8);
                    g = 0.0;
                }
                st.prev_grad[i] = g;
                if (g > 0.0)
                    st.theta[i] += st.step[i];
                else if (g < 0.0)
                    st.theta[i] -= st.step[i];
            }
            try {
                cur = lml_with_gradient(hyper_from_theta(st.theta), x, y, opts.jitter);
            } catch (const NumericalError&) {
                st.theta = prev_theta;
                for (auto& s : st.step) s *= 0.5;
                st.prev_grad.fill(0.0);
                continue;
            }
            const double gnorm = max_abs(cur.grad);
            if (cur.value > local_best_lml) {
                local_best_lml = cur.value;
                local_best_theta = st.theta;
                local_best_gnorm = gnorm;
                local_best_jitter = cur.jitter;
            }
            converged = gnorm <= opts.tol;
        }

        if (!have_best || local_best_lml > best_report.lml) {
            have_best = true;
            best_theta = local_best_theta;
            best_report.lml = local_best_lml;
            best_report.grad_norm = local_best_gnorm;
            best_report.converged = converged;
            best_report.iters = iter;
            best_report.restart = r;
            best_jitter = local_best_jitter;
        }
    }

    if (!have_best)
        throw NumericalError("GpModel::fit: every restart failed the Cholesky factorization");

    best_report.failed_restarts = failed;

    GpModel model;
    model.x_ = x;
    model.y_ = y;
    model.hyper_ = hyper_from_theta(best_theta);
    model.report_ = best_report;
    model.scaler_ = scaler;
    model.delta_days_ = delta_days;
    model.jitter_ = best_jitter;
    model.finalize();
    return model;
}

GpModel GpModel::fit(const Dataset& train, const Scaler& scaler, double delta_days,
                     const FitOptions& opts) {
    Design design = build_design(train, scaler, delta_days);
    return fit(design.x, design.y, opts, scaler, delta_days);
}

GpModel GpModel::prior(const KernelHyperparams& h, const Scaler& scaler, double delta_days) {
    h.validate();
    GpModel model;
    model.hyper_ = h;
    model.scaler_ = scaler;
    model.delta_days_ = delta_days;
    model.report_.lml = 0.0;
    return model;
}

GpModel GpModel::condition(const Matrix& x, const Vector& y, const KernelHyperparams& h,
                           const Scaler& scaler, double delta_days, const JitterOptions& jopts) {
    h.validate();
    if (x.rows() != y.size()) throw DataError("GpModel::condition: X/y size mismatch");
    GpModel model;
    model.x_ = x;
    model.y_ = y;
    model.hyper_ = h;
    model.scaler_ = scaler;
    model.delta_days_ = delta_days;

    Matrix k = gram_matrix(x, h);
    auto fac = factor_with_jitter(k, h.noise_var, jopts);
    model.chol_ = std::move(fac.chol);
    model.jitter_ = fac.jitter;
    Vector yc = centered_targets(y, h.mean_const);
    model.alpha_vec_ = solve_cholesky(model.chol_, yc);
    model.report_.lml = lml_from_factor(model.chol_, yc, model.alpha_vec_);
    return model;
}

void GpModel::finalize() {
    Matrix k = gram_matrix(x_, hyper_);
    const std::size_t n = x_.rows();
    Matrix kn = k;
    for (std::size_t i = 0; i < n; ++i) kn(i, i) += hyper_.noise_var + jitter_;
    auto l = cholesky(kn);
    if (!l) {
        // stored jitter was too small for this assembly; escalate once more
        auto fac = factor_with_jitter(k, hyper_.noise_var, JitterOptions{});
        chol_ = std::move(fac.chol);
        jitter_ = fac.jitter;
    } else {
        chol_ = std::move(*l);
    }
    Vector yc = centered_targets(y_, hyper_.mean_const);
    alpha_vec_ = solve_cholesky(chol_, yc);
}

PredictResult GpModel::predict(const Matrix& xstar) const {
    if (xstar.cols() != kGpDim) throw DataError("predict: query rows must have " +
                                                std::to_string(kGpDim) + " columns");
    const std::size_t m = xstar.rows();
    const std::size_t n = x_.rows();
    PredictResult out;
    out.mean.resize(m);
    out.variance.resize(m);

    const double prior_var = hyper_.alpha + hyper_.beta;
    if (n == 0) {
        std::fill(out.mean.begin(), out.mean.end(), hyper_.mean_const);
        std::fill(out.variance.begin(), out.variance.end(), prior_var);
        return out;
    }

    Matrix kxs = cross_covariance(x_, xstar, hyper_);

#pragma omp parallel
    {
        Vector col(n), v(n);
#pragma omp for schedule(static)
        for (long long jj = 0; jj < static_cast<long long>(m); ++jj) {
            const std::size_t j = static_cast<std::size_t>(jj);
            double mean = hyper_.mean_const;
            for (std::size_t i = 0; i < n; ++i) {
                col[i] = kxs(i, j);
                mean += col[i] * alpha_vec_[i];
            }
            // forward solve; posterior var = k** - ||v||^2
            for (std::size_t i = 0; i < n; ++i) {
                double s = col[i];
                const double* li = chol_.row(i);
                for (std::size_t k = 0; k < i; ++k) s -= li[k] * v[k];
                v[i] = s / li[i];
            }
            double reduction = 0.0;
            for (std::size_t i = 0; i < n; ++i) reduction += v[i] * v[i];
            out.mean[j] = mean;
            out.variance[j] = std::max(prior_var - reduction, 0.0);
        }
    }
    return out;
}

PredictResult GpModel::predict(const MixComposition& mix, const std::vector<double>& ages) const {
    Matrix xstar(ages.size(), kGpDim);
    for (std::size_t r = 0; r < ages.size(); ++r) {
        auto row = encode_row(mix, ages[r], scaler_, delta_days_);
        for (std::size_t c = 0; c < kGpDim; ++c) xstar(r, c) = row[c];
    }
    return predict(xstar);
}

std::vector<CurvePoint> GpModel::predict_strength_curve(const MixComposition& mix,
                                                        const std::vector<double>& ages,
                                                        bool include_noise) const {
    for (double a : ages)
        if (!(a > 0.0)) throw DataError("predict_strength_curve: ages must be > 0");
    PredictResult pred = predict(mix, ages);
    std::vector<CurvePoint> curve(ages.size());
    for (std::size_t i = 0; i < ages.size(); ++i) {
        double var = pred.variance[i];
        if (include_noise) var += hyper_.noise_var;
        const double sigma = std::sqrt(std::max(var, 0.0));
        curve[i] = {ages[i], pred.mean[i], sigma, pred.mean[i] - 2.0 * sigma,
                    pred.mean[i] + 2.0 * sigma};
    }
    return curve;
}

std::string GpModel::serialize() const {
    std::ostringstream out;
    out << "mixopt-gp-model v1\n";
    out << "delta_days " << format_double(delta_days_) << '\n';
    out << "jitter " << format_double(jitter_) << '\n';
    out << "lml " << format_double(report_.lml) << '\n';
    out << "mean_const " << format_double(hyper_.mean_const) << '\n';
    out << "alpha " << format_double(hyper_.alpha) << '\n';
    out << "beta " << format_double(hyper_.beta) << '\n';
    out << "ell_time " << format_double(hyper_.ell_time) << '\n';
    out << "noise_var " << format_double(hyper_.noise_var) << '\n';
    out << "ell_joint";
    for (double e : hyper_.ell_joint) out << ' ' << format_double(e);
    out << '\n';
    out << "scaler_min";
    for (double v : scaler_.mins()) out << ' ' << format_double(v);
    out << '\n';
    out << "scaler_max";
    for (double v : scaler_.maxs()) out << ' ' << format_double(v);
    out << '\n';
    out << "n " << x_.rows() << '\n';
    for (std::size_t i = 0; i < x_.rows(); ++i) {
        out << "x";
        for (std::size_t c = 0; c < kGpDim; ++c) out << ' ' << format_double(x_(i, c));
        out << '\n';
    }
    out << "y";
    for (double v : y_) out << ' ' << format_double(v);
    out << '\n';
    return out.str();
}

GpModel GpModel::deserialize(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "mixopt-gp-model v1")
        throw DataError("model file: unknown header '" + line + "'");

    GpModel model;
    std::array<double, kNumFeatures> smin{}, smax{};
    std::size_t n = 0;
    std::vector<Vector> xrows;
    std::string key;
    while (in >> key) {
        if (key == "delta_days") in >> model.delta_days_;
        else if (key == "jitter") in >> model.jitter_;
        else if (key == "lml") in >> model.report_.lml;
        else if (key == "mean_const") in >> model.hyper_.mean_const;
        else if (key == "alpha") in >> model.hyper_.alpha;
        else if (key == "beta") in >> model.hyper_.beta;
        else if (key == "ell_time") in >> model.hyper_.ell_time;
        else if (key == "noise_var") in >> model.hyper_.noise_var;
        else if (key == "ell_joint")
            for (auto& e : model.hyper_.ell_joint) in >> e;
        else if (key == "scaler_min")
            for (auto& v : smin) in >> v;
        else if (key == "scaler_max")
            for (auto& v : smax) in >> v;
        else if (key == "n") in >> n;
        else if (key == "x") {
            Vector row(kGpDim);
            for (auto& v : row) in >> v;
            xrows.push_back(std::move(row));
        } else if (key == "y") {
            model.y_.resize(xrows.size());
            for (auto& v : model.y_) in >> v;
        } else {
            throw DataError("model file: unknown key '" + key + "'");
        }
        if (in.fail()) throw DataError("model file: malformed value after '" + key + "'");
    }
    if (xrows.size() != n) throw DataError("model file: row count mismatch");
    model.scaler_ = Scaler::from_bounds(smin, smax);
    model.x_ = Matrix(n, kGpDim);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t c = 0; c < kGpDim; ++c) model.x_(i, c) = xrows[i][c];
    model.hyper_.validate();

    if (n > 0) {
        Matrix k = gram_matrix(model.x_, model.hyper_);
        Matrix kn = k;
        for (std::size_t i = 0; i < n; ++i) kn(i, i) += model.hyper_.noise_var + model.jitter_;
        auto l = cholesky(kn);
        if (!l) throw NumericalError("model file: stored jitter no longer factorizes");
        model.chol_ = std::move(*l);
        Vector yc = centered_targets(model.y_, model.hyper_.mean_const);
        model.alpha_vec_ = solve_cholesky(model.chol_, yc);
    }
    return model;
}

void GpModel::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path + "'");
    out << serialize();
}

GpModel GpModel::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return deserialize(buf.str());
}

}  // namespace mixopt
