#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "mixopt/dataset.hpp"
#include "mixopt/errors.hpp"

using namespace mixopt;

namespace {

const char* kMixHeader =
    "mix_id,kind,cement,fly_ash_c,fly_ash_f,slag,water,fine_agg,coarse_agg,hrwr,curing_temp,"
    "phase\n";

std::string one_mix(const std::string& id = "c1", const std::string& kind = "concrete",
                    const std::string& phase = "II") {
    return kMixHeader + id + "," + kind + ",600,50,0,100,250,1300,1600,2.5,21," + phase + "\n";
}

Dataset small_dataset(std::size_t n_mixes = 3) {
    std::string mixes = kMixHeader;
    std::string strengths = "mix_id,age_days,mean_ksi,std_ksi,n\n";
    for (std::size_t i = 1; i <= n_mixes; ++i) {
        const std::string id = "c" + std::to_string(i);
        mixes += id + ",concrete," + std::to_string(500 + 50 * i) +
                 ",50,0,100,250,1300,1600,2.5,21,II\n";
        strengths += id + ",1,1.5,0.1,3\n" + id + ",28,7.2,0.2,3\n";
    }
    return parse_mix_table(mixes, strengths);
}

}  // namespace

TEST_CASE("parse round trip: 1 mix, 2 observations") {
    const std::string strengths =
        "mix_id,age_days,mean_ksi,std_ksi,n\n"
        "c1,1,1.52,0.11,3\n"
        "c1,28,7.45,0.21,3\n";
    Dataset d = parse_mix_table(one_mix(), strengths);
    CHECK(d.mixes.size() == 1);
    CHECK(d.observations.size() == 2);
    CHECK(d.phase_tags.at("c1") == 2);
    CHECK(d.mixes.at("c1").water_binder_ratio() == doctest::Approx(250.0 / 750.0));

    // serialize(parse(x)) preserves every numeric field exactly
    Dataset d2 = parse_mix_table(serialize_mixes(d), serialize_strengths(d));
    CHECK(d2.mixes.at("c1").cement == d.mixes.at("c1").cement);
    CHECK(d2.mixes.at("c1").water == d.mixes.at("c1").water);
    CHECK(d2.observations[1].mean_ksi == d.observations[1].mean_ksi);
    CHECK(d2.observations[1].std_ksi == d.observations[1].std_ksi);
    CHECK(serialize_mixes(d2) == serialize_mixes(d));
    CHECK(serialize_strengths(d2) == serialize_strengths(d));
}

TEST_CASE("water=0 is an accepted w/b boundary") {
    const std::string mixes =
        kMixHeader + std::string("m1,mortar,600,0,0,0,0,2000,0,0,21,I\n");
    Dataset d = parse_mix_table(mixes, "mix_id,age_days,mean_ksi,std_ksi,n\n");
    CHECK(d.mixes.at("m1").water_binder_ratio() == 0.0);
}

TEST_CASE("negative cement is rejected with row and field") {
    const std::string mixes =
        kMixHeader + std::string("c1,concrete,-10,0,0,600,250,1300,1600,2.5,21,II\n");
    try {
        parse_mix_table(mixes, "mix_id,age_days,mean_ksi,std_ksi,n\n");
        FAIL("expected DataError");
    } catch (const DataError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("line 2") != std::string::npos);
        CHECK(msg.find("cement >= 0") != std::string::npos);
    }
}

TEST_CASE("parse rejects schema and referential problems") {
    CHECK_THROWS_AS(parse_mix_table("mix_id,kind\n", ""), DataError);  // missing columns
    CHECK_THROWS_AS(
        parse_mix_table(one_mix(), "mix_id,age_days,mean_ksi,std_ksi,n\nc9,1,1,0,3\n"),
        DataError);  // unknown mix
    CHECK_THROWS_AS(
        parse_mix_table(one_mix(), "mix_id,age_days,mean_ksi,std_ksi,n\nc1,2,1,0,3\n"),
        DataError);  // off-grid age
    CHECK_THROWS_AS(
        parse_mix_table(one_mix(),
                        "mix_id,age_days,mean_ksi,std_ksi,n\nc1,1,1,0,3\nc1,1,1.1,0,3\n"),
        DataError);  // duplicate (mix, age)
    CHECK_THROWS_AS(
        parse_mix_table(one_mix(), "mix_id,age_days,mean_ksi,std_ksi,n\nc1,1,abc,0,3\n"),
        DataError);  // non-numeric cell
    // mortar with coarse aggregate
    CHECK_THROWS_AS(parse_mix_table(one_mix("m1", "mortar"), "mix_id,age_days,mean_ksi,std_ksi,n\n"),
                    DataError);
}

TEST_CASE("augment adds one zero row per mix plus virtual compositions") {
    Dataset d = small_dataset(3);

    Dataset a0 = augment_zero_strength(d, 0, 11);
    CHECK(a0.observations.size() == d.observations.size() + 3);
    std::size_t zeros = 0;
    for (const auto& obs : a0.observations)
        if (obs.synthetic) {
            CHECK(obs.age_days == 0.0);
            CHECK(obs.mean_ksi == 0.0);
            ++zeros;
        }
    CHECK(zeros == 3);

    Dataset a5 = augment_zero_strength(d, 5, 7);
    CHECK(a5.mixes.size() == 8);
    CHECK(a5.observations.size() == d.observations.size() + 3 + 5);
    CHECK(a5.synthetic_mixes.size() == 5);

    // determinism
    Dataset a5b = augment_zero_strength(d, 5, 7);
    CHECK(serialize_mixes(a5) == serialize_mixes(a5b));
    CHECK(serialize_strengths(a5) == serialize_strengths(a5b));

    // every virtual composition revalidates
    for (const auto& id : a5.synthetic_mixes) {
        CHECK_NOTHROW(a5.mixes.at(id).validate());
    }

    CHECK_THROWS_AS(augment_zero_strength(Dataset{}, 0, 1), DataError);
}

TEST_CASE("split_holdout partitions whole mixes deterministically") {
    Dataset d = small_dataset(10);
    auto [train, test] = split_holdout(d, 4, MixKind::concrete, 1);
    CHECK(test.mixes.size() == 4);
    CHECK(train.mixes.size() == 6);
    for (const auto& obs : test.observations) CHECK(test.mixes.count(obs.mix_id) == 1);

    // disjoint and covering
    std::set<std::string> all_ids;
    for (const auto& id : train.mix_ids()) all_ids.insert(id);
    for (const auto& id : test.mix_ids()) {
        CHECK(all_ids.insert(id).second);  // no overlap
    }
    CHECK(all_ids.size() == 10);

    auto [train2, test2] = split_holdout(d, 4, MixKind::concrete, 1);
    CHECK(test2.mix_ids() == test.mix_ids());

    // different seeds give different test sets (with 10 choose 4 room)
    auto [train3, test3] = split_holdout(d, 4, MixKind::concrete, 2);
    CHECK(test3.mix_ids() != test.mix_ids());

    auto [train0, test0] = split_holdout(d, 0, MixKind::concrete, 1);
    CHECK(test0.mixes.empty());
    CHECK(train0.mixes.size() == 10);

    // disjoint and covering for any seed
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        auto [tr, te] = split_holdout(d, 4, MixKind::concrete, seed);
        std::set<std::string> ids;
        for (const auto& id : tr.mix_ids()) ids.insert(id);
        for (const auto& id : te.mix_ids()) CHECK(ids.insert(id).second);
        CHECK(ids.size() == 10);
        CHECK(te.mixes.size() == 4);
    }

    CHECK_THROWS_AS(split_holdout(d, 11, MixKind::concrete, 1), DataError);
    CHECK_THROWS_AS(split_holdout(d, 1, MixKind::mortar, 1), DataError);
}

TEST_CASE("phase_schedule accumulates and excludes held-out mixes") {
    std::string mixes = kMixHeader;
    std::string strengths = "mix_id,age_days,mean_ksi,std_ksi,n\n";
    const char* phases[] = {"I", "II", "III", "IV", "V", "VI"};
    for (int p = 0; p < 6; ++p)
        for (int i = 0; i < 2; ++i) {
            const std::string id = "x" + std::to_string(p) + std::to_string(i);
            mixes += id + ",concrete,600,50,0,100,250,1300,1600,2.5,21," + phases[p] + "\n";
            strengths += id + ",28,5,0.1,3\n";
        }
    Dataset d = parse_mix_table(mixes, strengths);

    auto cumulative = phase_schedule(d);
    REQUIRE(cumulative.size() == 6);
    for (int p = 0; p < 6; ++p) CHECK(cumulative[p].mixes.size() == 2 * (p + 1));
    CHECK(cumulative[5].mixes.size() == d.mixes.size());

    // a held-out phase III mix never appears
    auto excluded = phase_schedule(d, {"x20"});
    for (const auto& ds : excluded) CHECK(ds.mixes.count("x20") == 0);
    CHECK(excluded[5].mixes.size() == d.mixes.size() - 1);

    // sizes nondecreasing
    for (int p = 1; p < 6; ++p)
        CHECK(excluded[p].mixes.size() >= excluded[p - 1].mixes.size());

    Dataset untagged = d;
    untagged.phase_tags.erase("x00");
    CHECK_THROWS_AS(phase_schedule(untagged), DataError);
}

TEST_CASE("scaler fits train bounds only and round-trips") {
    Dataset train = small_dataset(5);
    Scaler s = Scaler::fit(train);

    // bounds equal train min/max exactly
    double cmin = 1e30, cmax = -1e30;
    for (const auto& [id, m] : train.mixes) {
        cmin = std::min(cmin, m.cement);
        cmax = std::max(cmax, m.cement);
    }
    CHECK(s.mins()[0] == cmin);
    CHECK(s.maxs()[0] == cmax);

    for (const auto& [id, m] : train.mixes) {
        auto raw = m.features();
        auto t = s.transform(raw);
        for (double v : t) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
        auto back = s.inverse(t);
        for (std::size_t k = 0; k < kNumFeatures; ++k)
            CHECK(back[k] == doctest::Approx(raw[k]).epsilon(1e-12));
    }

    // constant feature (fly_ash_f is 0 everywhere) maps to 0 and inverts to it
    auto t = s.transform(train.mixes.begin()->second.features());
    CHECK(t[2] == 0.0);
    auto back = s.inverse(t);
    CHECK(back[2] == 0.0);
}
