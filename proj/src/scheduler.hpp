#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "optim.hpp"
#include "region_builder.hpp"
#include "synthetic_plant.hpp"

namespace buildflex::scheduler {

// Wind generation scenarios (kWh per period) with probabilities and the
// derived deviations from the probability-weighted mean.
struct WindScenarioSet {
    Eigen::MatrixXd generation;   // T x num_scenarios, >= 0
    Eigen::VectorXd probabilities;
    Eigen::VectorXd expected;     // T
    Eigen::MatrixXd deviations;   // generation - expected, column-wise

    int periods() const { return static_cast<int>(generation.rows()); }
    int count() const { return static_cast<int>(generation.cols()); }
};

// Validates and completes a scenario matrix; uniform probabilities unless
// given. The weighted deviations sum to zero by construction.
WindScenarioSet make_wind_scenarios(Eigen::MatrixXd generation,
                                    Eigen::VectorXd probabilities = Eigen::VectorXd());

// CSV with columns scenario,hour,generation_kwh.
WindScenarioSet load_wind_csv(const std::string& path, int periods);

struct WindGenParams {
    double capacity_kwh = 10.0;
    double mean_level = 0.45;     // fraction of capacity
    double diurnal_swing = 0.2;   // fraction of capacity
    double deviation_std = 0.3;   // relative AR(1) deviation
    double ar_coef = 0.8;
};

// Seeded AR(1)-shaped synthetic scenarios, used when no scenario file is
// supplied.
WindScenarioSet generate_wind_scenarios(const WindGenParams& params, int periods, int count,
                                        std::uint64_t seed);

// Covariance of one building's stochastic load component.
struct CovarianceSpec {
    bool diagonal = true;
    Eigen::VectorXd diag;  // variances per period
    Eigen::MatrixXd full;  // used when diagonal == false
};

struct LoadNoiseSet {
    Eigen::MatrixXd noise;  // T x num_scenarios, aggregate over buildings
    Eigen::VectorXd probabilities;

    int count() const { return static_cast<int>(noise.cols()); }
};

// Independent buildings: the aggregate covariance is the sum. Draws are
// deterministic per seed; rejects non-PSD input.
LoadNoiseSet sample_load_noise(const std::vector<CovarianceSpec>& covariances, int periods,
                               int num_scenarios, std::uint64_t seed);

// Two-stage program over N building regions:
//   min  tau . p_agg  +  E[ v * | p_agg - p_scen + wind_deviation |_1 ]
// First stage picks each building's base load, second stage one recourse
// profile per wind scenario; load noise enters the aggregate scenario load
// only. Region membership uses the ordered constraint export.
struct ProgramLayout {
    int num_buildings = 0, periods = 0, wind_count = 0, noise_count = 0;
    int num_vars = 0;

    int base_first(int building) const { return building * periods; }
    int base_recourse(int building, int wind) const {
        return num_buildings * periods + (building * wind_count + wind) * periods;
    }
    int base_aggregate() const { return num_buildings * periods * (1 + wind_count); }
    int base_scenario_load(int wind, int noise) const {
        return base_aggregate() + periods + (wind * noise_count + noise) * periods;
    }
    int base_residual_bound(int wind, int noise) const {
        return base_scenario_load(wind_count - 1, noise_count - 1) + periods +
               (wind * noise_count + noise) * periods;
    }
};

struct BuiltProgram {
    optim::ConvexProgram lp;
    ProgramLayout layout;
};

BuiltProgram build_program(const std::vector<const region::FeasibleRegion*>& regions,
                           const Eigen::VectorXd& prices, double balancing_price,
                           const WindScenarioSet& wind, const LoadNoiseSet& noise);

struct Schedule {
    int periods = 0;
    std::vector<Eigen::VectorXd> first_stage;                // per building
    std::vector<std::vector<Eigen::VectorXd>> second_stage;  // [building][wind]
    Eigen::VectorXd aggregate_first_stage;
    double objective = 0.0;
    double energy_cost = 0.0;             // tau . p_agg
    double expected_balancing_cost = 0.0; // recomputed from the profiles
    int lp_iterations = 0;
};

Schedule solve_program(const BuiltProgram& program, const Eigen::VectorXd& prices,
                       double balancing_price, const WindScenarioSet& wind, const LoadNoiseSet& noise,
                       double tolerance = 1e-8);

// 1 - E|residual|_1 / E|deviation|_1, residual = p_agg - p_scen + deviation.
double mitigation_metric(const Schedule& schedule, const WindScenarioSet& wind, const LoadNoiseSet& noise);

// Expected ground-truth temperature violation (degree-hours) when a building
// executes its scheduled per-scenario load on the actual day. Loads are
// clamped into the plant's physical envelope before evaluation.
double violation_metric(const Schedule& schedule, int building, const plant::PlantConfig& cfg,
                        const plant::PlantState& x0, const plant::DayContext& ctx,
                        const WindScenarioSet& wind);

}  // namespace buildflex::scheduler
