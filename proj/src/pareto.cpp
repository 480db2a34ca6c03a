#include "mixopt/pareto.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mixopt/errors.hpp"
#include "mixopt/rng.hpp"

namespace mixopt {

Vector canonicalize(const Vector& point, const std::vector<Direction>& directions) {
    if (point.size() != directions.size())
        throw DataError("canonicalize: dimension mismatch");
    Vector out(point.size());
    for (std::size_t d = 0; d < point.size(); ++d)
        out[d] = directions[d] == Direction::maximize ? point[d] : -point[d];
    return out;
}

bool dominates(const Vector& a, const Vector& b) {
    bool strict = false;
    for (std::size_t d = 0; d < a.size(); ++d) {
        if (a[d] < b[d]) return false;
        if (a[d] > b[d]) strict = true;
    }
    return strict;
}

std::vector<Vector> pareto_front(const std::vector<Vector>& points) {
    if (points.empty()) return {};
    const std::size_t m = points[0].size();
    for (const auto& p : points)
        if (p.size() != m) throw DataError("pareto_front: mixed dimensionality");

    // stable sort by first objective descending keeps ties in input order, so
    // duplicate vectors retain their first occurrence
    std::vector<std::size_t> order(points.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return points[a][0] > points[b][0]; });

    std::vector<Vector> front;
    for (std::size_t idx : order) {
        const Vector& cand = points[idx];
        bool keep = true;
        for (const auto& f : front) {
            if (f == cand || dominates(f, cand)) {
                keep = false;
                break;
            }
        }
        if (keep) front.push_back(cand);
    }
    return front;
}

namespace {

// keep only points strictly above the reference in every coordinate
std::vector<Vector> strict_dominators(const std::vector<Vector>& points, const Vector& ref) {
    std::vector<Vector> kept;
    for (const auto& p : points) {
        bool above = true;
        for (std::size_t d = 0; d < ref.size(); ++d)
            if (!(p[d] > ref[d])) {
                above = false;
                break;
            }
        if (above) kept.push_back(p);
    }
    return kept;
}

double hv1(const std::vector<Vector>& pts, double ref) {
    double best = 0.0;
    for (const auto& p : pts) best = std::max(best, p[0] - ref);
    return best;
}

// sweep over the 2D front sorted by first coordinate descending
double hv2(const std::vector<Vector>& pts, const Vector& ref) {
    auto front = pareto_front(pts);
    double hv = 0.0;
    for (std::size_t i = 0; i < front.size(); ++i) {
        const double next_x = (i + 1 < front.size()) ? front[i + 1][0] : ref[0];
        hv += (front[i][0] - next_x) * (front[i][1] - ref[1]);
    }
    return hv;
}

double hv3(const std::vector<Vector>& pts, const Vector& ref) {
    // slice along the third coordinate
    std::vector<double> levels;
    for (const auto& p : pts) levels.push_back(p[2]);
    std::sort(levels.begin(), levels.end(), std::greater<>());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());

    double hv = 0.0;
    for (std::size_t i = 0; i < levels.size(); ++i) {
        const double z_hi = levels[i];
        const double z_lo = (i + 1 < levels.size()) ? levels[i + 1] : ref[2];
        std::vector<Vector> slice;
        for (const auto& p : pts)
            if (p[2] >= z_hi) slice.push_back({p[0], p[1]});
        hv += (z_hi - z_lo) * hv2(slice, {ref[0], ref[1]});
    }
    return hv;
}

}  // namespace

double hypervolume_exact(const std::vector<Vector>& points, const Vector& ref) {
    const std::size_t m = ref.size();
    for (const auto& p : points)
        if (p.size() != m) throw DataError("hypervolume: point/reference dimension mismatch");
    auto pts = strict_dominators(points, ref);
    if (pts.empty()) return 0.0;
    switch (m) {
        case 1: return hv1(pts, ref[0]);
        case 2: return hv2(pts, ref);
        case 3: return hv3(pts, ref);
        default:
            throw NumericalError("hypervolume_exact: only m <= 3 supported (use hypervolume_mc)");
    }
}

McEstimate hypervolume_mc(const std::vector<Vector>& points, const Vector& ref,
                          std::size_t n_samples, std::uint64_t seed) {
    const std::size_t m = ref.size();
    if (m > 8) throw NumericalError("hypervolume_mc: m > 8 unsupported");
    if (points.empty() || n_samples == 0) return {0.0, 0.0};

    Vector ub = points[0];
    for (const auto& p : points) {
        if (p.size() != m) throw DataError("hypervolume_mc: dimension mismatch");
        for (std::size_t d = 0; d < m; ++d) ub[d] = std::max(ub[d], p[d]);
    }
    double volume = 1.0;
    for (std::size_t d = 0; d < m; ++d) {
        if (!(ub[d] > ref[d])) return {0.0, 0.0};  // degenerate bounding box
        volume *= ub[d] - ref[d];
    }

    const std::uint64_t stream = hash_combine(seed, 0x4876u);
    long long hits = 0;
#pragma omp parallel for schedule(static) reduction(+ : hits)
    for (long long s = 0; s < static_cast<long long>(n_samples); ++s) {
        bool dominated = false;
        double sample[8];  // m <= 8, guarded above
        for (std::size_t d = 0; d < m; ++d)
            sample[d] = ref[d] + (ub[d] - ref[d]) *
                                     stateless_uniform(stream, static_cast<std::uint64_t>(s) * m + d);
        for (const auto& p : points) {
            bool below = true;
            for (std::size_t d = 0; d < m; ++d)
                if (sample[d] > p[d]) {
                    below = false;
                    break;
                }
            if (below) {
                dominated = true;
                break;
            }
        }
        if (dominated) ++hits;
    }

    const double p_hat = static_cast<double>(hits) / static_cast<double>(n_samples);
    McEstimate est;
    est.value = volume * p_hat;
    est.std_error = volume * std::sqrt(p_hat * (1.0 - p_hat) / static_cast<double>(n_samples));
    return est;
}

double hypervolume(const std::vector<Vector>& points, const Vector& ref,
                   const std::function<void(const std::string&)>& notice) {
    if (ref.size() <= 3) return hypervolume_exact(points, ref);
    if (notice)
        notice("hypervolume: m = " + std::to_string(ref.size()) +
               " > 3, routing to Monte Carlo estimate (65536 samples)");
    return hypervolume_mc(points, ref, 1u << 16, 0x48563ULL).value;
}

namespace reference {
McEstimate hypervolume_mc(const std::vector<Vector>& points, const Vector& ref,
                          std::size_t n_samples, std::uint64_t seed) {
    const std::size_t m = ref.size();
    if (points.empty() || n_samples == 0) return {0.0, 0.0};
    Vector ub = points[0];
    for (const auto& p : points)
        for (std::size_t d = 0; d < m; ++d) ub[d] = std::max(ub[d], p[d]);
    double volume = 1.0;
    for (std::size_t d = 0; d < m; ++d) {
        if (!(ub[d] > ref[d])) return {0.0, 0.0};
        volume *= ub[d] - ref[d];
    }
    const std::uint64_t stream = hash_combine(seed, 0x4876u);
    long long hits = 0;
    Vector sample(m);
    for (std::size_t s = 0; s < n_samples; ++s) {
        for (std::size_t d = 0; d < m; ++d)
            sample[d] = ref[d] + (ub[d] - ref[d]) * stateless_uniform(stream, s * m + d);
        for (const auto& p : points) {
            bool below = true;
            for (std::size_t d = 0; d < m; ++d)
                if (sample[d] > p[d]) {
                    below = false;
                    break;
                }
            if (below) {
                ++hits;
                break;
            }
        }
    }
    const double p_hat = static_cast<double>(hits) / static_cast<double>(n_samples);
    return {volume * p_hat,
            volume * std::sqrt(p_hat * (1.0 - p_hat) / static_cast<double>(n_samples))};
}
}  // namespace reference

}  // namespace mixopt
