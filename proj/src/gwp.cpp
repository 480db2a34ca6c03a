#include "mixopt/gwp.hpp"

#include <cmath>

#include "mixopt/csv.hpp"
#include "mixopt/errors.hpp"

namespace mixopt {

const std::array<const char*, kNumConstituents> kConstituentNames = {
    "cement", "fly_ash_c", "fly_ash_f", "slag", "water", "fine_agg", "coarse_agg", "hrwr"};

std::array<double, kNumConstituents> constituent_masses(const MixComposition& mix) {
    return {mix.cement, mix.fly_ash_c, mix.fly_ash_f, mix.slag,
            mix.water,  mix.fine_agg,  mix.coarse_agg, mix.hrwr};
}

double convert_volume_basis(double value, VolumeBasis from, VolumeBasis to) {
    if (!std::isfinite(value)) throw DataError("convert_volume_basis: value not finite");
    if (from == to) return value;
    // X per yd3 = X / 0.764554857984 per m3
    return from == VolumeBasis::per_yd3 ? value / kCubicMetersPerCubicYard
                                        : value * kCubicMetersPerCubicYard;
}

double GwpResult::total_per_m3() const {
    return convert_volume_basis(total, VolumeBasis::per_yd3, VolumeBasis::per_m3);
}

GwpResult gwp(const MixComposition& mix, const EmissionFactors& f) {
    const auto masses = constituent_masses(mix);
    GwpResult res;
    for (std::size_t c = 0; c < kNumConstituents; ++c) {
        if (masses[c] == 0.0) continue;
        if (!f.present[c])
            throw DataError(std::string("gwp: missing emission factor for nonzero constituent '") +
                            kConstituentNames[c] + "'");
        const double stage[3] = {f.material[c] * masses[c], f.transport[c] * masses[c],
                                 f.production[c] * masses[c]};
        for (int s = 0; s < 3; ++s) {
            res.cells[c][s] = stage[s];
            res.by_stage[s] += stage[s];
            res.by_constituent[c] += stage[s];
        }
        res.total += res.by_constituent[c];
    }
    return res;
}

EmissionFactors load_factors(const std::string& csv_text) {
    CsvTable table = parse_csv(csv_text);
    const std::size_t c_name = table.column("constituent");
    const std::size_t c_m = table.column("g_m");
    const std::size_t c_t = table.column("g_t");
    const std::size_t c_p = table.column("g_p");

    EmissionFactors f;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const std::size_t line = table.line_numbers[r];
        const std::string& name = row[c_name];
        std::size_t idx = kNumConstituents;
        for (std::size_t c = 0; c < kNumConstituents; ++c)
            if (name == kConstituentNames[c]) idx = c;
        if (idx == kNumConstituents)
            throw DataError("line " + std::to_string(line) + ": unknown constituent '" + name + "'");
        if (f.present[idx])
            throw DataError("line " + std::to_string(line) + ": duplicate constituent '" + name + "'");
        const double gm = parse_double_cell(row[c_m], line, "g_m");
        const double gt = parse_double_cell(row[c_t], line, "g_t");
        const double gp = parse_double_cell(row[c_p], line, "g_p");
        if (gm < 0.0 || gt < 0.0 || gp < 0.0)
            throw DataError("line " + std::to_string(line) + ": negative factor for '" + name + "'");
        f.material[idx] = gm;
        f.transport[idx] = gt;
        f.production[idx] = gp;
        f.present[idx] = true;
    }
    return f;
}

void require_all_factors(const EmissionFactors& f) {
    for (std::size_t c = 0; c < kNumConstituents; ++c)
        if (!f.present[c])
            throw DataError(std::string("emission factor table is missing '") +
                            kConstituentNames[c] + "'");
}

EmissionFactors read_factors_file(const std::string& path) {
    try {
        return load_factors(read_file_text(path));
    } catch (const DataError& e) {
        throw DataError(path + ": " + e.what());
    }
}

}  // namespace mixopt
