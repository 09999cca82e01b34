#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "common.hpp"
#include "data_model.hpp"

using namespace buildflex;

namespace {

std::string temp_file(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

void write_file(const std::string& path, const std::string& body) {
    std::ofstream out(path);
    out << body;
}

const char* kTwoDayCsv =
    "day,hour,load_kw,indoor_temp_c,outdoor_temp_c,solar_wm2,day_of_week\n"
    "1,0,,22.5,,,mon\n"
    "1,1,4.0,22.1,28.0,100,mon\n"
    "1,2,5.5,21.9,29.0,200,mon\n"
    "2,0,,23.0,,,tue\n"
    "2,1,3.0,22.8,27.0,90,tue\n"
    "2,2,3.5,22.6,27.5,150,tue\n";

TrainingDataset synthetic_days(int days, int periods, std::uint64_t seed) {
    Rng rng(seed);
    TrainingDataset ds;
    ds.periods = periods;
    for (int d = 0; d < days; ++d) {
        DayRecord day;
        day.day_id = d + 1;
        day.initial_indoor_temp_c = rng.uniform(20, 24);
        for (int t = 0; t < periods; ++t) {
            day.load_kw.push_back(rng.uniform(0, 10));
            day.indoor_temp_c.push_back(rng.uniform(20, 26));
            day.outdoor_temp_c.push_back(rng.uniform(15, 35));
            day.explanatory.push_back(
                ExplanatoryRecord{static_cast<DayOfWeek>(d % 7), day.outdoor_temp_c[t], rng.uniform(0, 900), {}});
        }
        ds.days.push_back(std::move(day));
    }
    return ds;
}

}  // namespace

TEST_CASE("well-formed file ingests into complete days") {
    std::string path = temp_file("bflex_two_day.csv");
    write_file(path, kTwoDayCsv);
    TrainingDataset ds = load_dataset(path, 2);
    REQUIRE(ds.num_days() == 2);
    CHECK(ds.days[0].initial_indoor_temp_c == 22.5);
    CHECK(ds.days[0].load_kw[1] == 5.5);
    CHECK(ds.days[1].explanatory[0].day_of_week == DayOfWeek::tue);
    CHECK(ds.days[1].explanatory[1].solar_wm2 == 150);
}

TEST_CASE("ingestion errors carry the offending location") {
    std::string path = temp_file("bflex_bad.csv");

    // incomplete day: day 5 missing one hourly row
    write_file(path,
               "day,hour,load_kw,indoor_temp_c,outdoor_temp_c,solar_wm2,day_of_week\n"
               "5,0,,22.5,,,mon\n"
               "5,1,4.0,22.1,28.0,100,mon\n");
    CHECK_THROWS_WITH_AS(load_dataset(path, 2), doctest::Contains("incomplete day 5"), Error);

    // duplicate (day, hour)
    write_file(path,
               "day,hour,load_kw,indoor_temp_c,outdoor_temp_c,solar_wm2,day_of_week\n"
               "1,0,,22.5,,,mon\n"
               "1,1,4.0,22.1,28.0,100,mon\n"
               "1,1,4.5,22.2,28.0,100,mon\n");
    CHECK_THROWS_WITH_AS(load_dataset(path, 2), doctest::Contains("duplicate"), Error);

    // malformed numeric field, reported with line number
    write_file(path,
               "day,hour,load_kw,indoor_temp_c,outdoor_temp_c,solar_wm2,day_of_week\n"
               "1,0,,22.5,,,mon\n"
               "1,1,oops,22.1,28.0,100,mon\n"
               "1,2,4.0,22.0,28.0,100,mon\n");
    CHECK_THROWS_WITH_AS(load_dataset(path, 2), doctest::Contains(":3"), Error);

    // non-finite value
    write_file(path,
               "day,hour,load_kw,indoor_temp_c,outdoor_temp_c,solar_wm2,day_of_week\n"
               "1,0,,22.5,,,mon\n"
               "1,1,inf,22.1,28.0,100,mon\n"
               "1,2,4.0,22.0,28.0,100,mon\n");
    CHECK_THROWS_AS(load_dataset(path, 2), Error);

    // negative load violates the invariant
    write_file(path,
               "day,hour,load_kw,indoor_temp_c,outdoor_temp_c,solar_wm2,day_of_week\n"
               "1,0,,22.5,,,mon\n"
               "1,1,-1.0,22.1,28.0,100,mon\n"
               "1,2,4.0,22.0,28.0,100,mon\n");
    CHECK_THROWS_AS(load_dataset(path, 2), Error);

    // temperature outside the sanity bounds
    write_file(path,
               "day,hour,load_kw,indoor_temp_c,outdoor_temp_c,solar_wm2,day_of_week\n"
               "1,0,,22.5,,,mon\n"
               "1,1,1.0,95.0,28.0,100,mon\n"
               "1,2,4.0,22.0,28.0,100,mon\n");
    CHECK_THROWS_AS(load_dataset(path, 2), Error);
}

TEST_CASE("ingest -> serialize -> ingest round-trips bit-exactly") {
    TrainingDataset ds = synthetic_days(20, 24, 99);
    std::string path = temp_file("bflex_roundtrip.csv");
    save_dataset(ds, path);
    TrainingDataset back = load_dataset(path, 24);
    REQUIRE(back.num_days() == ds.num_days());
    for (int k = 0; k < ds.num_days(); ++k) {
        CHECK(back.days[k].day_id == ds.days[k].day_id);
        CHECK(back.days[k].initial_indoor_temp_c == ds.days[k].initial_indoor_temp_c);
        for (int t = 0; t < 24; ++t) {
            CHECK(back.days[k].load_kw[t] == ds.days[k].load_kw[t]);
            CHECK(back.days[k].indoor_temp_c[t] == ds.days[k].indoor_temp_c[t]);
            CHECK(back.days[k].outdoor_temp_c[t] == ds.days[k].outdoor_temp_c[t]);
            CHECK(back.days[k].explanatory[t].solar_wm2 == ds.days[k].explanatory[t].solar_wm2);
            CHECK(back.days[k].explanatory[t].day_of_week == ds.days[k].explanatory[t].day_of_week);
        }
    }
}

TEST_CASE("split_dataset partitions deterministically") {
    TrainingDataset ds = synthetic_days(500, 4, 7);
    SplitResult a = split_dataset(ds, SplitSizes{300, 100, 100}, 1);
    SplitResult b = split_dataset(ds, SplitSizes{300, 100, 100}, 1);
    CHECK(a.train.num_days() == 300);
    CHECK(a.cross_validation.num_days() == 100);
    CHECK(a.test.num_days() == 100);
    CHECK(a.train.role == DatasetRole::train);
    CHECK(a.cross_validation.role == DatasetRole::cross_validation);
    CHECK(a.test.role == DatasetRole::test);

    std::set<std::int64_t> seen;
    for (const auto& part : {a.train, a.cross_validation, a.test})
        for (const auto& day : part.days) CHECK(seen.insert(day.day_id).second);

    for (int k = 0; k < 300; ++k) CHECK(a.train.days[k].day_id == b.train.days[k].day_id);

    SplitResult c = split_dataset(ds, SplitSizes{300, 100, 100}, 2);
    bool differs = false;
    for (int k = 0; k < 300 && !differs; ++k) differs = a.train.days[k].day_id != c.train.days[k].day_id;
    CHECK(differs);
}

TEST_CASE("split of everything into train leaves cv/test empty") {
    TrainingDataset ds = synthetic_days(10, 3, 2);
    SplitResult r = split_dataset(ds, SplitSizes{10, 0, 0}, 5);
    CHECK(r.train.num_days() == 10);
    CHECK(r.cross_validation.num_days() == 0);
    CHECK(r.test.num_days() == 0);
    CHECK_THROWS_AS(split_dataset(ds, SplitSizes{8, 2, 1}, 5), Error);
}

TEST_CASE("feature vector layout and bounds") {
    TrainingDataset ds = synthetic_days(3, 24, 31);
    Eigen::VectorXd w1 = build_feature_vector(ds, 0, 1);
    REQUIRE(w1.size() == 4);
    CHECK(w1[0] == ds.days[0].load_kw[0]);
    CHECK(w1[1] == ds.days[0].initial_indoor_temp_c);
    CHECK(w1[2] == ds.days[0].indoor_temp_c[0]);
    CHECK(w1[3] == ds.days[0].outdoor_temp_c[0]);

    CHECK(build_feature_vector(ds, 1, 24).size() == 27);

    // element-by-element match against manual concatenation
    int t = 5, k = 2;
    Eigen::VectorXd w = build_feature_vector(ds, k, t);
    REQUIRE(w.size() == t + 3);
    for (int j = 0; j < t; ++j) CHECK(w[j] == ds.days[k].load_kw[j]);
    CHECK(w[t] == ds.days[k].initial_indoor_temp_c);
    CHECK(w[t + 1] == ds.days[k].indoor_temp_c[t - 1]);
    CHECK(w[t + 2] == ds.days[k].outdoor_temp_c[t - 1]);

    CHECK_THROWS_AS(build_feature_vector(ds, 0, 0), Error);
    CHECK_THROWS_AS(build_feature_vector(ds, 0, 25), Error);
}
