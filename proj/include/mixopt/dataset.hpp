#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace mixopt {

enum class MixKind { mortar, concrete };

std::string to_string(MixKind kind);
MixKind mix_kind_from_string(const std::string& s);

constexpr std::size_t kNumFeatures = 10;  // 9 raw constituents/temp + w/b

extern const std::array<const char*, kNumFeatures> kFeatureNames;

// One mix design. Masses are lb/yd3 as batched, curing temperature in C.
struct MixComposition {
    double cement = 0.0;
    double fly_ash_c = 0.0;
    double fly_ash_f = 0.0;
    double slag = 0.0;
    double water = 0.0;
    double fine_agg = 0.0;
    double coarse_agg = 0.0;
    double hrwr = 0.0;
    double curing_temp = 20.0;
    MixKind kind = MixKind::concrete;

    double binder() const { return cement + fly_ash_c + fly_ash_f + slag; }
    double water_binder_ratio() const { return water / binder(); }
    double scm_replacement() const { return (fly_ash_c + fly_ash_f + slag) / binder(); }

    // 10-feature raw vector: constituents, curing temp, w/b
    std::array<double, kNumFeatures> features() const;

    // throws DataError naming the offending field; context prefixes the message
    void validate(const std::string& context = "") const;
};

struct StrengthObservation {
    std::string mix_id;
    double age_days = 0.0;
    double mean_ksi = 0.0;
    double std_ksi = 0.0;
    long replicates = 1;
    bool synthetic = false;  // zero-strength augmentation rows
};

// ages at which ingested observations are accepted
bool on_observed_age_grid(double age_days);

struct Dataset {
    std::map<std::string, MixComposition> mixes;
    std::vector<StrengthObservation> observations;
    std::map<std::string, int> phase_tags;       // 1..6
    std::set<std::string> synthetic_mixes;       // virtual compositions from augmentation

    std::size_t n_mixes(MixKind kind) const;
    std::vector<std::string> mix_ids() const;
    std::vector<std::string> mix_ids(MixKind kind) const;

    // mixes plus their observations and tags
    Dataset subset(const std::set<std::string>& ids) const;
};

// --- ingestion -------------------------------------------------------------

// Parses the two delimited tables (see README for the column schemas) into a
// validated Dataset. Error messages carry the physical line number.
Dataset parse_mix_table(const std::string& mixes_csv, const std::string& strengths_csv);
Dataset load_dataset(const std::string& mixes_path, const std::string& strengths_path);

std::string serialize_mixes(const Dataset& d);
std::string serialize_strengths(const Dataset& d);

// --- schedule / split / augmentation ---------------------------------------

// Adds one zero-strength observation at t=0 per mix, plus n_virtual virtual
// compositions (uniform within the per-feature bounds of d, re-validated)
// each with a single zero observation. Deterministic under seed.
Dataset augment_zero_strength(const Dataset& d, std::size_t n_virtual, std::uint64_t seed);

// Holds out whole mixes of the given kind; train/test mix id sets partition d.
std::pair<Dataset, Dataset> split_holdout(const Dataset& d, std::size_t n_holdout_mixes,
                                          MixKind kind, std::uint64_t seed);

// Cumulative datasets for phases I..VI, excluding the given mix ids.
std::vector<Dataset> phase_schedule(const Dataset& d,
                                    const std::set<std::string>& exclude = {});

// --- feature scaling --------------------------------------------------------

// Min-max scaler fitted on training mixes only. Constant features map to 0
// and invert back to their stored minimum.
class Scaler {
  public:
    static Scaler fit(const Dataset& train);

    std::array<double, kNumFeatures> transform(const std::array<double, kNumFeatures>& raw) const;
    std::array<double, kNumFeatures> inverse(const std::array<double, kNumFeatures>& scaled) const;

    const std::array<double, kNumFeatures>& mins() const { return mins_; }
    const std::array<double, kNumFeatures>& maxs() const { return maxs_; }

    static Scaler from_bounds(const std::array<double, kNumFeatures>& mins,
                              const std::array<double, kNumFeatures>& maxs);

  private:
    std::array<double, kNumFeatures> mins_{};
    std::array<double, kNumFeatures> maxs_{};
};

}  // namespace mixopt
