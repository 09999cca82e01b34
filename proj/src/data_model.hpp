#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace buildflex {

enum class DayOfWeek { mon, tue, wed, thu, fri, sat, sun };

DayOfWeek day_of_week_from_string(const std::string& token);
const char* to_string(DayOfWeek d);
inline bool is_weekend(DayOfWeek d) { return d == DayOfWeek::sat || d == DayOfWeek::sun; }

// Exogenous per-period features used by the model selector. Categorical and
// numeric features live in separate fields; numeric features must be present.
struct ExplanatoryRecord {
    DayOfWeek day_of_week = DayOfWeek::mon;
    double outdoor_temp_c = 0.0;
    double solar_wm2 = 0.0;
    std::vector<double> extra;
};

// One day of coarse building data: total load, volume-averaged indoor
// temperature, outdoor temperature, and the explanatory features.
struct DayRecord {
    std::int64_t day_id = 0;
    double initial_indoor_temp_c = 0.0;
    std::vector<double> load_kw;
    std::vector<double> indoor_temp_c;
    std::vector<double> outdoor_temp_c;
    std::vector<ExplanatoryRecord> explanatory;

    int periods() const { return static_cast<int>(load_kw.size()); }
    double mean_outdoor_temp() const;
};

enum class DatasetRole { train, cross_validation, test };
const char* to_string(DatasetRole role);

struct TrainingDataset {
    std::vector<DayRecord> days;
    int periods = 0;
    DatasetRole role = DatasetRole::train;

    int num_days() const { return static_cast<int>(days.size()); }
};

// Validates a record against the sanity bounds (finite, loads >= 0,
// temperatures within [-60, 80] C, consistent lengths). `where` prefixes
// error messages.
void validate_day_record(const DayRecord& day, int periods, const std::string& where);

// CSV ingestion per the documented schema:
//   day,hour,load_kw,indoor_temp_c,outdoor_temp_c,solar_wm2,day_of_week
// hour in {1..T}, plus one hour=0 row per day carrying the initial indoor
// temperature (load/solar empty). Reports the offending line on error.
TrainingDataset load_dataset(const std::string& path, int periods);

// Writes a dataset in the same schema; load_dataset(save_dataset(ds)) is a
// bit-exact round trip.
void save_dataset(const TrainingDataset& ds, const std::string& path);

struct SplitSizes {
    int train = 0;
    int cross_validation = 0;
    int test = 0;
};

struct SplitResult {
    TrainingDataset train;
    TrainingDataset cross_validation;
    TrainingDataset test;
};

// Disjoint partition of the dataset's days, deterministic per seed.
SplitResult split_dataset(const TrainingDataset& ds, const SplitSizes& sizes, std::uint64_t seed);

// Clustering feature vector for (day k, period t), 1-based t:
// [load_1..load_t, initial indoor, indoor_t, outdoor_t], length t + 3.
Eigen::VectorXd build_feature_vector(const TrainingDataset& ds, int day_index, int period);

}  // namespace buildflex
