#include "mixopt/inverse.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <sstream>

#include "mixopt/csv.hpp"
#include "mixopt/errors.hpp"
#include "mixopt/rng.hpp"

namespace mixopt {

void InverseQuery::validate() const {
    if (thresholds_psi.empty()) throw ConfigError("InverseQuery: no strength thresholds");
    for (double t : thresholds_psi)
        if (!(t > 0.0)) throw ConfigError("InverseQuery: thresholds must be > 0");
    if (ages.empty()) throw ConfigError("InverseQuery: no query ages");
    for (double a : ages)
        if (!(a > 0.0)) throw ConfigError("InverseQuery: ages must be > 0");
    if (!(gwp_bin_width > 0.0)) throw ConfigError("InverseQuery: bin width must be > 0");
    if (!(confidence_k >= 0.0)) throw ConfigError("InverseQuery: confidence_k must be >= 0");
    if (candidates_per_bin == 0) throw ConfigError("InverseQuery: candidates_per_bin must be >= 1");
}

bool feasible(const CandidateRecord& cand, double threshold_psi, double confidence_k) {
    const double threshold_ksi = threshold_psi / 1000.0;
    for (std::size_t a = 0; a < cand.pred_mean_ksi.size(); ++a) {
        if (cand.pred_mean_ksi[a] - confidence_k * cand.pred_sigma_ksi[a] < threshold_ksi)
            return false;
    }
    return true;
}

namespace {

std::uint64_t double_bits(double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    return bits;
}

std::array<double, DesignSpace::kDim> rotated_halton(const DesignSpace& space,
                                                     const std::array<double, DesignSpace::kDim>& rot,
                                                     std::uint64_t index) {
    auto u = halton_point(index, DesignSpace::kDim);
    for (std::size_t d = 0; d < DesignSpace::kDim; ++d) u[d] = std::fmod(u[d] + rot[d], 1.0);
    return space.from_unit(u);
}

CandidateRecord make_record(const GpModel& model, const EmissionFactors& factors,
                            const DesignSpace& space,
                            const std::array<double, DesignSpace::kDim>& v,
                            const std::vector<double>& ages) {
    CandidateRecord rec;
    rec.design = v;
    rec.mix = space.to_mix(v);
    rec.gwp_m3 = convert_volume_basis(gwp(rec.mix, factors).total, VolumeBasis::per_yd3,
                                      VolumeBasis::per_m3);
    PredictResult pred = model.predict(rec.mix, ages);
    rec.pred_mean_ksi = pred.mean;
    rec.pred_sigma_ksi.resize(pred.variance.size());
    for (std::size_t i = 0; i < pred.variance.size(); ++i)
        rec.pred_sigma_ksi[i] = std::sqrt(std::max(pred.variance[i], 0.0));
    return rec;
}

}  // namespace

std::vector<std::pair<double, double>> derive_gwp_bins(const EmissionFactors& factors,
                                                       const DesignSpace& space,
                                                       double bin_width, std::uint64_t seed,
                                                       std::size_t n_probe) {
    std::array<double, DesignSpace::kDim> rot{};
    const std::uint64_t rot_stream = hash_combine(seed, 0xB195u);
    for (std::size_t d = 0; d < DesignSpace::kDim; ++d)
        rot[d] = stateless_uniform(rot_stream, d);

    double gmin = std::numeric_limits<double>::infinity();
    double gmax = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n_probe; ++i) {
        const auto v = rotated_halton(space, rot, i);
        const double g = convert_volume_basis(gwp(space.to_mix(v), factors).total,
                                              VolumeBasis::per_yd3, VolumeBasis::per_m3);
        gmin = std::min(gmin, g);
        gmax = std::max(gmax, g);
    }
    if (!(gmin <= gmax)) throw NumericalError("derive_gwp_bins: empty probe");

    const double lo0 = std::floor(gmin / bin_width) * bin_width;
    std::vector<std::pair<double, double>> bins;
    for (double lo = lo0; lo < gmax && bins.size() < 64; lo += bin_width)
        bins.emplace_back(lo, lo + bin_width);
    return bins;
}

InverseResult generate_candidates(const GpModel& model, const EmissionFactors& factors,
                                  const DesignSpace& space, const InverseQuery& query,
                                  std::uint64_t seed) {
    query.validate();
    space.validate();
    require_all_factors(factors);

    const auto bins = derive_gwp_bins(factors, space, query.gwp_bin_width, seed);

    struct Cell {
        double threshold;
        std::pair<double, double> bin;
    };
    std::vector<Cell> cells;
    for (double threshold : query.thresholds_psi)
        for (const auto& bin : bins) cells.push_back({threshold, bin});

    std::vector<CellResult> results(cells.size());

#pragma omp parallel for schedule(dynamic)
    for (long long ci = 0; ci < static_cast<long long>(cells.size()); ++ci) {
        const Cell& cell = cells[static_cast<std::size_t>(ci)];
        CellResult& out = results[static_cast<std::size_t>(ci)];

        // rejection stream shared across thresholds of the same bin
        const std::uint64_t bin_stream = hash_combine(seed, double_bits(cell.bin.first));
        std::array<double, DesignSpace::kDim> rot{};
        for (std::size_t d = 0; d < DesignSpace::kDim; ++d)
            rot[d] = stateless_uniform(hash_combine(bin_stream, 0xC0DEu), d);

        auto in_bin = [&](double g) { return g >= cell.bin.first && g < cell.bin.second; };

        for (std::size_t i = 0; i < query.budget_per_cell &&
                                out.candidates.size() < query.candidates_per_bin;
             ++i) {
            ++out.points_scanned;
            const auto v = rotated_halton(space, rot, i);
            const MixComposition mix = space.to_mix(v);
            const double g = convert_volume_basis(gwp(mix, factors).total, VolumeBasis::per_yd3,
                                                  VolumeBasis::per_m3);
            if (!in_bin(g)) continue;
            CandidateRecord rec = make_record(model, factors, space, v, query.ages);
            if (feasible(rec, cell.threshold, query.confidence_k))
                out.candidates.push_back(std::move(rec));
        }

        // local refinement: perturb found candidates with shrinking radius
        if (query.local_refinement && out.candidates.size() < query.candidates_per_bin &&
            !out.candidates.empty()) {
            Rng refine(hash_combine(hash_combine(bin_stream, double_bits(cell.threshold)),
                                    0x10CAu));
            const std::size_t extra_budget = query.budget_per_cell / 4;
            double radius = 0.05;
            for (std::size_t i = 0; i < extra_budget &&
                                    out.candidates.size() < query.candidates_per_bin;
                 ++i) {
                const auto& anchor = out.candidates[i % out.candidates.size()].design;
                std::array<double, DesignSpace::kDim> v{};
                for (std::size_t d = 0; d < DesignSpace::kDim; ++d) {
                    const double range = space.hi[d] - space.lo[d];
                    v[d] = std::clamp(anchor[d] + refine.uniform(-radius, radius) * range,
                                      space.lo[d], space.hi[d]);
                }
                ++out.points_scanned;
                const MixComposition mix = space.to_mix(v);
                const double g = convert_volume_basis(gwp(mix, factors).total,
                                                      VolumeBasis::per_yd3, VolumeBasis::per_m3);
                if (!in_bin(g)) continue;
                CandidateRecord rec = make_record(model, factors, space, v, query.ages);
                if (feasible(rec, cell.threshold, query.confidence_k))
                    out.candidates.push_back(std::move(rec));
                radius = std::max(radius * 0.999, 0.01);
            }
        }

        out.shortfall = out.candidates.size() < query.candidates_per_bin;
    }

    InverseResult result;
    for (std::size_t c = 0; c < cells.size(); ++c) {
        CellKey key{cells[c].threshold, cells[c].bin.first, cells[c].bin.second};
        auto& cell_out = results[c];
        for (std::size_t i = 0; i < cell_out.candidates.size(); ++i) {
            std::ostringstream id;
            id << "inv_t" << cells[c].threshold << "_b" << cells[c].bin.first << "_" << i;
            cell_out.candidates[i].id = id.str();
        }
        result.emplace(key, std::move(cell_out));
    }
    return result;
}

std::string serialize_candidates(const InverseResult& result, const std::vector<double>& ages) {
    std::ostringstream out;
    out << "mix_id,kind,cement,fly_ash_c,fly_ash_f,slag,water,fine_agg,coarse_agg,hrwr,"
           "curing_temp,phase,threshold_psi,bin_lo,bin_hi";
    for (double a : ages)
        out << ",pred_mean_ksi_" << format_double(a) << "d,pred_sigma_ksi_" << format_double(a)
            << "d";
    out << ",gwp_m3\n";
    for (const auto& [key, cell] : result) {
        for (const auto& rec : cell.candidates) {
            const auto& m = rec.mix;
            out << rec.id << ',' << to_string(m.kind) << ',' << format_double(m.cement) << ','
                << format_double(m.fly_ash_c) << ',' << format_double(m.fly_ash_f) << ','
                << format_double(m.slag) << ',' << format_double(m.water) << ','
                << format_double(m.fine_agg) << ',' << format_double(m.coarse_agg) << ','
                << format_double(m.hrwr) << ',' << format_double(m.curing_temp) << ",VI,"
                << format_double(key.threshold_psi) << ',' << format_double(key.bin_lo) << ','
                << format_double(key.bin_hi);
            for (std::size_t a = 0; a < ages.size(); ++a)
                out << ',' << format_double(rec.pred_mean_ksi[a]) << ','
                    << format_double(rec.pred_sigma_ksi[a]);
            out << ',' << format_double(rec.gwp_m3) << '\n';
        }
    }
    return out.str();
}

namespace {
struct Stats {
    double min, median, max;
};

Stats stats_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    const double median = (n % 2 == 1) ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
    return {v.front(), median, v.back()};
}
}  // namespace

std::string bin_sweep_report(const InverseResult& result) {
    if (result.empty()) throw DataError("bin_sweep_report: empty result map");
    std::ostringstream out;
    const char* params[] = {"cement", "fly_ash", "slag", "wb", "hrwr"};
    out << "threshold_psi,bin_lo,bin_hi,n,shortfall";
    for (const char* p : params) out << ',' << p << "_min," << p << "_median," << p << "_max";
    out << '\n';

    for (const auto& [key, cell] : result) {
        out << format_double(key.threshold_psi) << ',' << format_double(key.bin_lo) << ','
            << format_double(key.bin_hi) << ',' << cell.candidates.size() << ','
            << (cell.shortfall ? 1 : 0);
        if (cell.candidates.empty()) {
            for (int p = 0; p < 5; ++p) out << ",,,";
        } else {
            std::vector<double> cols[5];
            for (const auto& rec : cell.candidates) {
                cols[0].push_back(rec.mix.cement);
                cols[1].push_back(rec.mix.fly_ash_c + rec.mix.fly_ash_f);
                cols[2].push_back(rec.mix.slag);
                cols[3].push_back(rec.mix.water_binder_ratio());
                cols[4].push_back(rec.mix.hrwr);
            }
            for (auto& col : cols) {
                const Stats s = stats_of(col);
                out << ',' << format_double(s.min) << ',' << format_double(s.median) << ','
                    << format_double(s.max);
            }
        }
        out << '\n';
    }
    return out.str();
}

}  // namespace mixopt
