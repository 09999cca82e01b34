#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "common.hpp"
#include "data_model.hpp"

namespace buildflex::plant {

enum class HvacMode { cooling, heating };

// Diurnal weather generator parameters (summer defaults).
struct WeatherModel {
    double peak_low_c = 26.0;
    double peak_high_c = 34.0;
    double diurnal_range_c = 8.0;
    double peak_hour = 15.0;
    double hourly_noise_c = 0.3;
    double solar_clear_peak_wm2 = 900.0;
    double cloud_attenuation_low = 0.6;
    double cloud_attenuation_high = 1.0;
};

// Multi-zone RC network with a saturating HVAC stage. Stands in for the
// building: generates data in closed loop and answers open-loop feasibility
// queries for commanded load profiles.
struct PlantConfig {
    int zones = 3;
    std::vector<double> capacitance_kwh_per_c = {3.5, 2.8, 1.8};  // thermal
    std::vector<double> volume_share = {0.45, 0.35, 0.2};
    std::vector<double> ambient_conductance_kw_per_c = {0.5, 0.4, 0.3};
    double zone_coupling_kw_per_c = 0.8;  // chain topology between adjacent zones
    double hvac_capacity_kw = 14.0;       // electrical
    double cop = 3.0;
    double saturation_knee_kw = 10.0;  // tanh knee, electrical
    HvacMode mode = HvacMode::cooling;

    double comfort_min_c = 21.0;
    double comfort_max_c = 24.0;
    double setback_min_c = 16.0;
    double setback_max_c = 29.0;
    double occupied_start_hour = 8.0;  // weekdays only
    double occupied_end_hour = 18.0;

    double base_load_day_kw = 7.0;
    double base_load_night_kw = 3.2;
    double weekend_base_scale = 0.6;
    double internal_gain_day_kw = 7.0;
    double internal_gain_night_kw = 1.0;
    double weekend_gain_scale = 0.25;
    double solar_gain_kw_per_kwm2 = 1.5;

    double thermostat_margin_c = 0.6;
    double noise_std_c = 0.05;
    int integration_substeps = 4;

    WeatherModel weather;

    void validate() const;
};

PlantConfig plant_config_from_json(const nlohmann::json& j);
nlohmann::json plant_config_to_json(const PlantConfig& cfg);

// Zone temperatures, length = zones.
struct PlantState {
    std::vector<double> zone_temp_c;
};

// Exogenous conditions for one day.
struct DayContext {
    DayOfWeek day_of_week = DayOfWeek::mon;
    std::vector<double> outdoor_temp_c;
    std::vector<double> solar_wm2;
};

double volume_average(const PlantConfig& cfg, const PlantState& state);
PlantState comfort_midpoint_state(const PlantConfig& cfg);

// Schedules derived from the config for a given day type / hour (1-based t).
double base_load_at(const PlantConfig& cfg, DayOfWeek dow, int t, int periods);
bool occupied_at(const PlantConfig& cfg, DayOfWeek dow, int t, int periods);
// Hourly temperature limits: comfort band while occupied, setback otherwise.
void temperature_band_at(const PlantConfig& cfg, DayOfWeek dow, int t, int periods, double& lo, double& hi);

// Closed-loop thermostat simulation of one day. Produces the coarse data
// record (total load, volume-averaged indoor temperature, explanatory
// features). Deterministic per rng state; noise_std_c = 0 gives runs that
// open-loop evaluation reproduces exactly.
DayRecord simulate_thermostat_day(const PlantConfig& cfg, const DayContext& ctx, const PlantState& x0,
                                  Rng& rng, std::int64_t day_id);

// Open-loop oracle: volume-averaged indoor temperatures under a commanded
// total load profile (noise off). HVAC power is load minus base load; errors
// if the load dips below the base load, saturates above capacity.
std::vector<double> evaluate_temperature(const PlantConfig& cfg, const PlantState& x0,
                                         const std::vector<double>& load_kw, const DayContext& ctx);

struct FeasibilityCheck {
    bool feasible = true;
    double temperature_violation_ch = 0.0;  // degree-hours outside the band
    bool load_limits_ok = true;
};

// Ground-truth membership test for a load profile: load within
// [base, base + capacity] each hour and resulting temperatures within the
// hourly band. Violation sums the band exceedances in degree-hours.
FeasibilityCheck check_feasible(const PlantConfig& cfg, const PlantState& x0,
                                const std::vector<double>& load_kw, const DayContext& ctx);

// Samples a plausible summer day (outdoor curve + solar, hotter days
// sunnier).
DayContext sample_day_context(const PlantConfig& cfg, DayOfWeek dow, int periods, Rng& rng);

// Generates `num_days` seeded days cycling the day of week from `start`.
TrainingDataset generate_dataset(const PlantConfig& cfg, int num_days, int periods, std::uint64_t seed,
                                 DayOfWeek start = DayOfWeek::mon);

}  // namespace buildflex::plant
