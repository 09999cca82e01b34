#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "bundle.hpp"
#include "data_model.hpp"
#include "scheduler.hpp"
#include "synthetic_plant.hpp"

namespace buildflex::pipeline {

struct ClusterSelection {
    bool fixed = false;
    int fixed_count = 2;
    int min_clusters = 1;
    int max_clusters = 4;
    int selection_grid_size = 20;  // coarser beta grid while comparing cluster counts
};

struct TrainParams {
    double alpha = 0.05;
    int grid_size = 100;
    ClusterSelection clusters;
    selector::TreeParams tree;
    band::FitMode mode = band::FitMode::cooling;
    bool shared_beta = false;
    int kmeans_restarts = 10;
    double qp_tolerance = 1e-8;
};

struct SelectionResult {
    int best = 1;
    std::vector<bundle::CvPoint> curve;
};

// Fits the whole pipeline for every candidate cluster count (same seeds, so
// the comparison isolates the count) and scores each by the band RMSE on the
// cross-validation days under tree-predicted clusters. Ties go to the
// smaller count.
SelectionResult select_num_clusters(const TrainingDataset& train, const TrainingDataset& cv,
                                    const TrainParams& params, std::uint64_t seed);

bundle::ModelBundle train_model(const TrainingDataset& train, const TrainingDataset& cv,
                                const TrainParams& params, std::uint64_t seed);

// Forecast context of a day outside the training set.
struct DayForecast {
    DayOfWeek day_of_week = DayOfWeek::tue;
    double initial_indoor_c = 22.5;
    std::vector<double> outdoor_c;
    std::vector<double> solar_wm2;
};

selector::FeatureRow forecast_features(const DayForecast& f, int period);

// Instantiates the feasible region for the forecast day: the tree picks the
// cluster per period, the stored sweep supplies the band (re-selected when an
// alpha override is given).
region::FeasibleRegion region_for_day(const bundle::ModelBundle& b, const DayForecast& f,
                                      double alpha_override = -1.0);

struct ValidationResult {
    double out_of_band_fraction = 0.0;
    double band_rmse = 0.0;
    double mean_band_width = 0.0;
    double tree_accuracy = 0.0;  // against nearest-centroid labels
    double rc_rmse = 0.0;
    double central_rmse = 0.0;
    std::vector<double> per_period_out_fraction;
    std::vector<double> per_period_band_rmse;
    std::vector<double> per_period_width;
    std::vector<double> per_period_central_rmse;
    std::vector<double> per_period_rc_rmse;  // transitions, indexed by target period - 2
};

ValidationResult validate_model(const bundle::ModelBundle& b, const TrainingDataset& test,
                                const TrainingDataset& train);

// ---- operator configuration ----------------------------------------------

struct BuildingConfig {
    std::string name;
    plant::PlantConfig plant;
    double initial_indoor_c = -1000.0;  // sentinel: use the comfort midpoint
};

struct GenerateConfig {
    int days = 500;
    SplitSizes split{300, 100, 100};
    DayOfWeek start = DayOfWeek::mon;
};

struct WindConfig {
    std::string csv;  // empty: generate synthetically
    double capacity_kwh = -1.0;  // explicit capacity, or derived:
    double capacity_fraction_of_peak = 1.0 / 3.0;
    int scenarios = 100;
    scheduler::WindGenParams shape;
};

struct NoiseConfig {
    int scenarios = 10;
    double sigma_kw = 0.5;  // per-building diagonal std per period
};

struct TargetDayConfig {
    DayOfWeek day_of_week = DayOfWeek::tue;
    std::vector<double> outdoor_c;  // empty: sample from the plant's weather model
    std::vector<double> solar_wm2;
};

struct ScheduleConfig {
    WindConfig wind;
    NoiseConfig noise;
    std::vector<double> prices;  // empty: flat price_flat
    double price_flat = 1.0;
    double balancing_price = 2.0;  // reference v
    std::vector<double> v_grid;
    std::vector<double> alpha_grid;
    std::vector<int> n_grid;  // optional timing sweep over building counts
    TargetDayConfig target;
    double lp_tolerance = 1e-8;
};

struct RunConfig {
    int periods = 24;
    std::uint64_t seed = 1;
    std::vector<BuildingConfig> buildings;
    GenerateConfig generate;
    TrainParams train;
    ScheduleConfig schedule;
    struct Paths {
        std::string data_dir = "data";
        std::string bundle_dir = "models";
        std::string report_dir = "reports";
    } paths;
    std::string config_hash;
};

RunConfig run_config_from_json(const nlohmann::json& j);
RunConfig load_run_config(const std::string& path);

// ---- commands -------------------------------------------------------------
// Empty out_dir means the config's directory for that command. All outputs
// are reproducible byte for byte from (config, seed), except the timing file
// written by the schedule command.

void cmd_generate_data(const RunConfig& cfg, const std::string& out_dir, std::uint64_t seed);
void cmd_train(const RunConfig& cfg, const std::string& out_dir, std::uint64_t seed);
void cmd_validate(const RunConfig& cfg, const std::string& out_dir);
void cmd_schedule(const RunConfig& cfg, const std::string& out_dir, std::uint64_t seed);
std::string cmd_report(const RunConfig& cfg);

}  // namespace buildflex::pipeline
