#include "mixopt/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "mixopt/csv.hpp"
#include "mixopt/errors.hpp"
#include "mixopt/rng.hpp"

namespace mixopt {

const std::array<const char*, kNumFeatures> kFeatureNames = {
    "cement", "fly_ash_c", "fly_ash_f", "slag",        "water",
    "fine_agg", "coarse_agg", "hrwr",   "curing_temp", "wb"};

std::string to_string(MixKind kind) { return kind == MixKind::mortar ? "mortar" : "concrete"; }

MixKind mix_kind_from_string(const std::string& s) {
    if (s == "mortar") return MixKind::mortar;
    if (s == "concrete") return MixKind::concrete;
    throw DataError("unknown mix kind '" + s + "' (expected mortar|concrete)");
}

std::array<double, kNumFeatures> MixComposition::features() const {
    return {cement,     fly_ash_c, fly_ash_f, slag,        water,
            fine_agg,   coarse_agg, hrwr,     curing_temp, water_binder_ratio()};
}

void MixComposition::validate(const std::string& context) const {
    auto fail = [&](const std::string& msg) { throw DataError(context + msg); };
    const std::pair<const char*, double> masses[] = {
        {"cement", cement},     {"fly_ash_c", fly_ash_c}, {"fly_ash_f", fly_ash_f},
        {"slag", slag},         {"water", water},         {"fine_agg", fine_agg},
        {"coarse_agg", coarse_agg}, {"hrwr", hrwr}};
    for (const auto& [name, v] : masses) {
        if (!(v >= 0.0) || !std::isfinite(v)) fail(std::string(name) + " >= 0 violated");
    }
    if (!(binder() > 0.0)) fail("binder = cement + fly_ash_c + fly_ash_f + slag > 0 violated");
    const double wb = water_binder_ratio();
    if (!std::isfinite(wb) || wb < 0.0 || wb >= 1.5) fail("w/b in [0, 1.5) violated");
    const double scm = scm_replacement();
    if (scm < 0.0 || scm > 1.0) fail("scm_replacement in [0, 1] violated");
    if (kind == MixKind::concrete && !(coarse_agg > 0.0))
        fail("concrete mix requires coarse_agg > 0");
    if (kind == MixKind::mortar && coarse_agg != 0.0)
        fail("mortar mix requires coarse_agg = 0");
    if (!std::isfinite(curing_temp)) fail("curing_temp must be finite");
}

bool on_observed_age_grid(double age_days) {
    for (double a : {1.0, 3.0, 5.0, 14.0, 28.0})
        if (age_days == a) return true;
    return false;
}

std::size_t Dataset::n_mixes(MixKind kind) const {
    std::size_t n = 0;
    for (const auto& [id, mix] : mixes)
        if (mix.kind == kind) ++n;
    return n;
}

std::vector<std::string> Dataset::mix_ids() const {
    std::vector<std::string> ids;
    ids.reserve(mixes.size());
    for (const auto& [id, mix] : mixes) ids.push_back(id);
    return ids;
}

std::vector<std::string> Dataset::mix_ids(MixKind kind) const {
    std::vector<std::string> ids;
    for (const auto& [id, mix] : mixes)
        if (mix.kind == kind) ids.push_back(id);
    return ids;
}

Dataset Dataset::subset(const std::set<std::string>& ids) const {
    Dataset out;
    for (const auto& id : ids) {
        auto it = mixes.find(id);
        if (it == mixes.end()) throw DataError("subset: unknown mix id '" + id + "'");
        out.mixes.emplace(*it);
        auto pt = phase_tags.find(id);
        if (pt != phase_tags.end()) out.phase_tags.emplace(*pt);
        if (synthetic_mixes.count(id)) out.synthetic_mixes.insert(id);
    }
    for (const auto& obs : observations)
        if (ids.count(obs.mix_id)) out.observations.push_back(obs);
    return out;
}

namespace {

int parse_phase_tag(const std::string& cell, std::size_t line) {
    static const std::map<std::string, int> roman = {{"I", 1},  {"II", 2}, {"III", 3},
                                                     {"IV", 4}, {"V", 5},  {"VI", 6}};
    auto it = roman.find(cell);
    if (it != roman.end()) return it->second;
    if (cell.size() == 1 && cell[0] >= '1' && cell[0] <= '6') return cell[0] - '0';
    throw DataError("line " + std::to_string(line) + ": unknown phase '" + cell +
                    "' (expected I..VI)");
}

std::string phase_to_string(int phase) {
    static const char* names[] = {"I", "II", "III", "IV", "V", "VI"};
    return names[phase - 1];
}

}  // namespace

Dataset parse_mix_table(const std::string& mixes_csv, const std::string& strengths_csv) {
    Dataset d;

    CsvTable mixes = parse_csv(mixes_csv);
    const std::size_t c_id = mixes.column("mix_id");
    const std::size_t c_kind = mixes.column("kind");
    const std::size_t c_phase = mixes.column("phase");
    std::array<std::size_t, 9> c_num{};
    const char* numeric_cols[] = {"cement", "fly_ash_c", "fly_ash_f", "slag",       "water",
                                  "fine_agg", "coarse_agg", "hrwr",   "curing_temp"};
    for (std::size_t i = 0; i < 9; ++i) c_num[i] = mixes.column(numeric_cols[i]);

    for (std::size_t r = 0; r < mixes.rows.size(); ++r) {
        const auto& row = mixes.rows[r];
        const std::size_t line = mixes.line_numbers[r];
        const std::string& id = row[c_id];
        if (id.empty()) throw DataError("line " + std::to_string(line) + ": empty mix_id");
        if (d.mixes.count(id))
            throw DataError("line " + std::to_string(line) + ": duplicate mix_id '" + id + "'");

        MixComposition mix;
        double* fields[] = {&mix.cement, &mix.fly_ash_c, &mix.fly_ash_f,
                            &mix.slag,   &mix.water,     &mix.fine_agg,
                            &mix.coarse_agg, &mix.hrwr,  &mix.curing_temp};
        for (std::size_t i = 0; i < 9; ++i)
            *fields[i] = parse_double_cell(row[c_num[i]], line, numeric_cols[i]);
        mix.kind = mix_kind_from_string(row[c_kind]);
        mix.validate("line " + std::to_string(line) + " (mix '" + id + "'): ");

        d.mixes.emplace(id, mix);
        d.phase_tags.emplace(id, parse_phase_tag(row[c_phase], line));
    }

    CsvTable strengths = parse_csv(strengths_csv);
    const std::size_t s_id = strengths.column("mix_id");
    const std::size_t s_age = strengths.column("age_days");
    const std::size_t s_mean = strengths.column("mean_ksi");
    const std::size_t s_std = strengths.column("std_ksi");
    const std::size_t s_n = strengths.column("n");

    std::set<std::pair<std::string, double>> seen;
    for (std::size_t r = 0; r < strengths.rows.size(); ++r) {
        const auto& row = strengths.rows[r];
        const std::size_t line = strengths.line_numbers[r];
        StrengthObservation obs;
        obs.mix_id = row[s_id];
        obs.age_days = parse_double_cell(row[s_age], line, "age_days");
        obs.mean_ksi = parse_double_cell(row[s_mean], line, "mean_ksi");
        obs.std_ksi = parse_double_cell(row[s_std], line, "std_ksi");
        obs.replicates = parse_long_cell(row[s_n], line, "n");

        if (!d.mixes.count(obs.mix_id))
            throw DataError("line " + std::to_string(line) + ": observation references unknown mix '" +
                            obs.mix_id + "'");
        if (!(obs.age_days > 0.0) || !on_observed_age_grid(obs.age_days))
            throw DataError("line " + std::to_string(line) +
                            ": age_days must be one of {1,3,5,14,28}");
        if (!(obs.mean_ksi >= 0.0))
            throw DataError("line " + std::to_string(line) + ": mean_ksi >= 0 violated");
        if (!(obs.std_ksi >= 0.0))
            throw DataError("line " + std::to_string(line) + ": std_ksi >= 0 violated");
        if (obs.replicates < 1)
            throw DataError("line " + std::to_string(line) + ": n >= 1 violated");
        if (!seen.insert({obs.mix_id, obs.age_days}).second)
            throw DataError("line " + std::to_string(line) + ": duplicate (mix_id, age) pair ('" +
                            obs.mix_id + "', " + format_double(obs.age_days) + ")");
        d.observations.push_back(std::move(obs));
    }
    return d;
}

Dataset load_dataset(const std::string& mixes_path, const std::string& strengths_path) {
    return parse_mix_table(read_file_text(mixes_path), read_file_text(strengths_path));
}

std::string serialize_mixes(const Dataset& d) {
    std::ostringstream out;
    out << "mix_id,kind,cement,fly_ash_c,fly_ash_f,slag,water,fine_agg,coarse_agg,hrwr,"
           "curing_temp,phase\n";
    for (const auto& [id, m] : d.mixes) {
        auto pt = d.phase_tags.find(id);
        out << id << ',' << to_string(m.kind) << ',' << format_double(m.cement) << ','
            << format_double(m.fly_ash_c) << ',' << format_double(m.fly_ash_f) << ','
            << format_double(m.slag) << ',' << format_double(m.water) << ','
            << format_double(m.fine_agg) << ',' << format_double(m.coarse_agg) << ','
            << format_double(m.hrwr) << ',' << format_double(m.curing_temp) << ','
            << (pt == d.phase_tags.end() ? std::string("I") : phase_to_string(pt->second))
            << '\n';
    }
    return out.str();
}

std::string serialize_strengths(const Dataset& d) {
    std::ostringstream out;
    out << "mix_id,age_days,mean_ksi,std_ksi,n\n";
    for (const auto& obs : d.observations) {
        out << obs.mix_id << ',' << format_double(obs.age_days) << ','
            << format_double(obs.mean_ksi) << ',' << format_double(obs.std_ksi) << ','
            << obs.replicates << '\n';
    }
    return out.str();
}

Dataset augment_zero_strength(const Dataset& d, std::size_t n_virtual, std::uint64_t seed) {
    if (d.mixes.empty()) throw DataError("augment_zero_strength: empty dataset");

    Dataset out = d;
    for (const auto& [id, mix] : d.mixes) {
        StrengthObservation zero;
        zero.mix_id = id;
        zero.age_days = 0.0;
        zero.mean_ksi = 0.0;
        zero.std_ksi = 0.0;
        zero.replicates = 1;
        zero.synthetic = true;
        out.observations.push_back(std::move(zero));
    }

    if (n_virtual == 0) return out;

    // per-feature bounds over the raw constituent masses and curing temp
    std::array<double, kNumFeatures> lo{}, hi{};
    bool first = true;
    for (const auto& [id, mix] : d.mixes) {
        auto f = mix.features();
        for (std::size_t k = 0; k < kNumFeatures; ++k) {
            if (first || f[k] < lo[k]) lo[k] = f[k];
            if (first || f[k] > hi[k]) hi[k] = f[k];
        }
        first = false;
    }

    Rng rng(hash_combine(seed, 0x7a0du));
    for (std::size_t v = 0; v < n_virtual; ++v) {
        MixComposition mix;
        // rejection until the derived invariants (w/b range, binder > 0) hold
        for (int attempt = 0;; ++attempt) {
            mix.cement = rng.uniform(lo[0], hi[0]);
            mix.fly_ash_c = rng.uniform(lo[1], hi[1]);
            mix.fly_ash_f = rng.uniform(lo[2], hi[2]);
            mix.slag = rng.uniform(lo[3], hi[3]);
            mix.water = rng.uniform(lo[4], hi[4]);
            mix.fine_agg = rng.uniform(lo[5], hi[5]);
            mix.coarse_agg = rng.uniform(lo[6], hi[6]);
            mix.hrwr = rng.uniform(lo[7], hi[7]);
            mix.curing_temp = rng.uniform(lo[8], hi[8]);
            mix.kind = mix.coarse_agg > 0.0 ? MixKind::concrete : MixKind::mortar;
            if (mix.binder() > 0.0 && mix.water_binder_ratio() < 1.5) break;
            if (attempt > 10000)
                throw NumericalError("augment_zero_strength: cannot sample a valid composition");
        }
        mix.validate("augment_zero_strength virtual mix: ");

        std::string id = "virtual_" + std::to_string(v);
        for (std::size_t bump = 0; out.mixes.count(id); ++bump)
            id = "virtual_" + std::to_string(v) + "_" + std::to_string(bump);
        out.mixes.emplace(id, mix);
        out.synthetic_mixes.insert(id);

        StrengthObservation zero;
        zero.mix_id = id;
        zero.age_days = 0.0;
        zero.mean_ksi = 0.0;
        zero.std_ksi = 0.0;
        zero.replicates = 1;
        zero.synthetic = true;
        out.observations.push_back(std::move(zero));
    }
    return out;
}

std::pair<Dataset, Dataset> split_holdout(const Dataset& d, std::size_t n_holdout_mixes,
                                          MixKind kind, std::uint64_t seed) {
    auto candidates = d.mix_ids(kind);
    if (candidates.size() < n_holdout_mixes)
        throw DataError("split_holdout: only " + std::to_string(candidates.size()) + " " +
                        to_string(kind) + " mixes, need " + std::to_string(n_holdout_mixes));

    Rng rng(hash_combine(seed, 0x5317u));
    rng.shuffle(candidates);
    std::set<std::string> test_ids(candidates.begin(),
                                   candidates.begin() + static_cast<long>(n_holdout_mixes));

    std::set<std::string> train_ids;
    for (const auto& id : d.mix_ids())
        if (!test_ids.count(id)) train_ids.insert(id);

    return {d.subset(train_ids), d.subset(test_ids)};
}

std::vector<Dataset> phase_schedule(const Dataset& d, const std::set<std::string>& exclude) {
    for (const auto& [id, mix] : d.mixes) {
        if (exclude.count(id)) continue;
        if (!d.phase_tags.count(id))
            throw DataError("phase_schedule: mix '" + id + "' has no phase tag");
    }

    std::vector<Dataset> cumulative;
    std::set<std::string> ids;
    for (int phase = 1; phase <= 6; ++phase) {
        for (const auto& [id, tag] : d.phase_tags) {
            if (tag == phase && d.mixes.count(id) && !exclude.count(id)) ids.insert(id);
        }
        cumulative.push_back(d.subset(ids));
    }
    return cumulative;
}

Scaler Scaler::fit(const Dataset& train) {
    if (train.mixes.empty()) throw DataError("Scaler::fit: empty dataset");
    Scaler s;
    bool first = true;
    for (const auto& [id, mix] : train.mixes) {
        auto f = mix.features();
        for (std::size_t k = 0; k < kNumFeatures; ++k) {
            if (first || f[k] < s.mins_[k]) s.mins_[k] = f[k];
            if (first || f[k] > s.maxs_[k]) s.maxs_[k] = f[k];
        }
        first = false;
    }
    return s;
}

Scaler Scaler::from_bounds(const std::array<double, kNumFeatures>& mins,
                           const std::array<double, kNumFeatures>& maxs) {
    Scaler s;
    s.mins_ = mins;
    s.maxs_ = maxs;
    return s;
}

std::array<double, kNumFeatures> Scaler::transform(
    const std::array<double, kNumFeatures>& raw) const {
    std::array<double, kNumFeatures> out{};
    for (std::size_t k = 0; k < kNumFeatures; ++k) {
        const double span = maxs_[k] - mins_[k];
        out[k] = span > 0.0 ? (raw[k] - mins_[k]) / span : 0.0;
    }
    return out;
}

std::array<double, kNumFeatures> Scaler::inverse(
    const std::array<double, kNumFeatures>& scaled) const {
    std::array<double, kNumFeatures> out{};
    for (std::size_t k = 0; k < kNumFeatures; ++k)
        out[k] = mins_[k] + scaled[k] * (maxs_[k] - mins_[k]);
    return out;
}

}  // namespace mixopt
