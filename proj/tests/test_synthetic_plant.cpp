#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "common.hpp"
#include "synthetic_plant.hpp"

using namespace buildflex;
using namespace buildflex::plant;

namespace {

PlantConfig quiet_config() {
    PlantConfig cfg;
    cfg.noise_std_c = 0.0;
    cfg.weather.hourly_noise_c = 0.0;
    return cfg;
}

DayContext flat_context(DayOfWeek dow, int periods, double outdoor) {
    DayContext ctx;
    ctx.day_of_week = dow;
    ctx.outdoor_temp_c.assign(periods, outdoor);
    ctx.solar_wm2.assign(periods, 0.0);
    return ctx;
}

}  // namespace

TEST_CASE("isolated system holds its temperature") {
    PlantConfig cfg = quiet_config();
    cfg.ambient_conductance_kw_per_c = {0.0, 0.0, 0.0};
    cfg.internal_gain_day_kw = cfg.internal_gain_night_kw = 0.0;
    cfg.weekend_gain_scale = 1.0;
    cfg.solar_gain_kw_per_kwm2 = 0.0;
    cfg.hvac_capacity_kw = 0.0;
    // equal capacitance-to-volume ratio keeps the volume average invariant
    // under inter-zone exchange
    cfg.capacitance_kwh_per_c = {3.0, 3.0, 3.0};
    cfg.volume_share = {1.0 / 3, 1.0 / 3, 1.0 / 3};
    DayContext ctx = flat_context(DayOfWeek::tue, 24, 35.0);
    Rng rng(1);
    PlantState x0{{21.0, 23.0, 25.0}};
    DayRecord rec = simulate_thermostat_day(cfg, ctx, x0, rng, 1);
    double start = volume_average(cfg, x0);
    for (double temp : rec.indoor_temp_c) CHECK(temp == doctest::Approx(start).epsilon(1e-12));
}

TEST_CASE("hot day without capacity drifts toward outdoor, load is base only") {
    PlantConfig cfg = quiet_config();
    cfg.hvac_capacity_kw = 0.0;
    cfg.internal_gain_day_kw = cfg.internal_gain_night_kw = 0.0;
    cfg.solar_gain_kw_per_kwm2 = 0.0;
    DayContext ctx = flat_context(DayOfWeek::tue, 24, 38.0);
    Rng rng(1);
    PlantState x0 = comfort_midpoint_state(cfg);
    DayRecord rec = simulate_thermostat_day(cfg, ctx, x0, rng, 1);
    for (int t = 1; t <= 24; ++t)
        CHECK(rec.load_kw[t - 1] == doctest::Approx(base_load_at(cfg, DayOfWeek::tue, t, 24)));
    for (int t = 1; t < 24; ++t) CHECK(rec.indoor_temp_c[t] > rec.indoor_temp_c[t - 1]);
    CHECK(rec.indoor_temp_c[23] < 38.0);
}

TEST_CASE("nominal summer days have a plausible peak-to-average ratio") {
    PlantConfig cfg;  // default, with noise
    TrainingDataset ds = generate_dataset(cfg, 300, 24, 2024);
    double peak = 0.0, total = 0.0;
    long count = 0;
    for (const auto& day : ds.days) {
        for (double load : day.load_kw) {
            peak = std::max(peak, load);
            total += load;
            ++count;
        }
    }
    double ratio = peak / (total / count);
    CHECK(ratio >= 1.5);
    CHECK(ratio <= 4.0);
}

TEST_CASE("open-loop evaluation reproduces a noise-free thermostat day") {
    PlantConfig cfg = quiet_config();
    Rng rng(3);
    DayContext ctx = sample_day_context(cfg, DayOfWeek::wed, 24, rng);
    PlantState x0 = comfort_midpoint_state(cfg);
    DayRecord rec = simulate_thermostat_day(cfg, ctx, x0, rng, 1);
    std::vector<double> temps = evaluate_temperature(cfg, x0, rec.load_kw, ctx);
    for (int t = 0; t < 24; ++t) CHECK(temps[t] == doctest::Approx(rec.indoor_temp_c[t]).epsilon(1e-9));
}

TEST_CASE("more cooling never raises the trajectory") {
    PlantConfig cfg = quiet_config();
    DayContext ctx = flat_context(DayOfWeek::thu, 24, 33.0);
    PlantState x0 = comfort_midpoint_state(cfg);
    std::vector<double> low(24), high(24);
    for (int t = 1; t <= 24; ++t) {
        low[t - 1] = base_load_at(cfg, DayOfWeek::thu, t, 24);
        high[t - 1] = low[t - 1] + cfg.hvac_capacity_kw;
    }
    std::vector<double> cold = evaluate_temperature(cfg, x0, high, ctx);
    std::vector<double> warm = evaluate_temperature(cfg, x0, low, ctx);
    for (int t = 0; t < 24; ++t) CHECK(cold[t] <= warm[t] + 1e-12);
}

TEST_CASE("open-loop trajectory matches a manual recursion") {
    // Single zone so the update is easy to replay by hand.
    PlantConfig cfg = quiet_config();
    cfg.zones = 1;
    cfg.capacitance_kwh_per_c = {5.0};
    cfg.volume_share = {1.0};
    cfg.ambient_conductance_kw_per_c = {0.7};
    cfg.zone_coupling_kw_per_c = 0.0;
    cfg.integration_substeps = 2;
    cfg.saturation_knee_kw = 9.0;
    DayContext ctx = flat_context(DayOfWeek::fri, 8, 31.0);
    Rng rng(9);
    std::vector<double> load(8);
    for (int t = 1; t <= 8; ++t)
        load[t - 1] = base_load_at(cfg, DayOfWeek::fri, t, 8) + rng.uniform(0.0, cfg.hvac_capacity_kw);
    std::vector<double> temps = evaluate_temperature(cfg, PlantState{{23.0}}, load, ctx);

    double x = 23.0;
    for (int t = 1; t <= 8; ++t) {
        double hvac = load[t - 1] - base_load_at(cfg, DayOfWeek::fri, t, 8);
        double thermal = cfg.cop * cfg.saturation_knee_kw * std::tanh(hvac / cfg.saturation_knee_kw);
        double h = (t - 0.5) * 24.0 / 8;
        bool business = h >= cfg.occupied_start_hour && h < cfg.occupied_end_hour;
        double gain = business ? cfg.internal_gain_day_kw : cfg.internal_gain_night_kw;
        for (int s = 0; s < 2; ++s) {
            double flow = 0.7 * (31.0 - x) + gain - thermal;
            x += 0.5 * flow / 5.0;
        }
        CHECK(temps[t - 1] == doctest::Approx(x).epsilon(1e-12));
    }
}

TEST_CASE("loads below the base load are rejected") {
    PlantConfig cfg = quiet_config();
    DayContext ctx = flat_context(DayOfWeek::mon, 4, 30.0);
    std::vector<double> load(4, 0.0);  // below any base
    CHECK_THROWS_AS((void)evaluate_temperature(cfg, comfort_midpoint_state(cfg), load, ctx), Error);
}

TEST_CASE("thermostat day is feasible with zero violation") {
    PlantConfig cfg = quiet_config();
    Rng rng(17);
    for (int rep = 0; rep < 4; ++rep) {
        DayContext ctx = sample_day_context(cfg, rep % 2 ? DayOfWeek::sat : DayOfWeek::tue, 24, rng);
        PlantState x0 = comfort_midpoint_state(cfg);
        DayRecord rec = simulate_thermostat_day(cfg, ctx, x0, rng, rep);
        FeasibilityCheck check = check_feasible(cfg, x0, rec.load_kw, ctx);
        CHECK(check.feasible);
        CHECK(check.temperature_violation_ch == 0.0);
    }
}

TEST_CASE("base load on a very hot day is infeasible with positive violation") {
    PlantConfig cfg = quiet_config();
    DayContext ctx = flat_context(DayOfWeek::tue, 24, 40.0);
    std::vector<double> load(24);
    for (int t = 1; t <= 24; ++t) load[t - 1] = base_load_at(cfg, DayOfWeek::tue, t, 24);
    FeasibilityCheck check = check_feasible(cfg, comfort_midpoint_state(cfg), load, ctx);
    CHECK(!check.feasible);
    CHECK(check.temperature_violation_ch > 0.0);
}

TEST_CASE("violation equals hand-summed exceedances") {
    PlantConfig cfg = quiet_config();
    Rng rng(23);
    DayContext ctx = sample_day_context(cfg, DayOfWeek::tue, 24, rng);
    ctx.outdoor_temp_c.assign(24, 39.0);
    std::vector<double> load(24);
    for (int t = 1; t <= 24; ++t)
        load[t - 1] = base_load_at(cfg, DayOfWeek::tue, t, 24) + rng.uniform(0.0, 3.0);
    PlantState x0 = comfort_midpoint_state(cfg);
    FeasibilityCheck check = check_feasible(cfg, x0, load, ctx);
    std::vector<double> temps = evaluate_temperature(cfg, x0, load, ctx);
    double manual = 0.0;
    for (int t = 1; t <= 24; ++t) {
        double lo, hi;
        temperature_band_at(cfg, DayOfWeek::tue, t, 24, lo, hi);
        manual += std::max(0.0, temps[t - 1] - hi) + std::max(0.0, lo - temps[t - 1]);
    }
    CHECK(check.temperature_violation_ch == doctest::Approx(manual).epsilon(1e-12));
}

TEST_CASE("energy balance with no exchange paths") {
    // Equal zones so the stored energy is readable from the volume average:
    // total capacitance times the average temperature change must equal the
    // internal gain energy each hour.
    PlantConfig cfg = quiet_config();
    cfg.capacitance_kwh_per_c = {2.5, 2.5, 2.5};
    cfg.volume_share = {1.0 / 3, 1.0 / 3, 1.0 / 3};
    cfg.ambient_conductance_kw_per_c = {0.0, 0.0, 0.0};
    cfg.zone_coupling_kw_per_c = 0.0;
    cfg.hvac_capacity_kw = 0.0;
    cfg.solar_gain_kw_per_kwm2 = 0.0;
    DayContext ctx = flat_context(DayOfWeek::tue, 24, 30.0);
    Rng rng(4);
    PlantState x0 = comfort_midpoint_state(cfg);
    DayRecord rec = simulate_thermostat_day(cfg, ctx, x0, rng, 1);
    double total_capacitance = 7.5;
    double prev = rec.initial_indoor_temp_c;
    for (int t = 1; t <= 24; ++t) {
        double h = t - 0.5;
        double gain = (h >= cfg.occupied_start_hour && h < cfg.occupied_end_hour)
                          ? cfg.internal_gain_day_kw
                          : cfg.internal_gain_night_kw;
        double stored = total_capacitance * (rec.indoor_temp_c[t - 1] - prev);
        CHECK(stored == doctest::Approx(gain).epsilon(1e-9));
        prev = rec.indoor_temp_c[t - 1];
    }
}

TEST_CASE("determinism per seed") {
    PlantConfig cfg;  // noisy
    TrainingDataset a = generate_dataset(cfg, 10, 24, 77);
    TrainingDataset b = generate_dataset(cfg, 10, 24, 77);
    for (int k = 0; k < 10; ++k)
        for (int t = 0; t < 24; ++t) {
            CHECK(a.days[k].load_kw[t] == b.days[k].load_kw[t]);
            CHECK(a.days[k].indoor_temp_c[t] == b.days[k].indoor_temp_c[t]);
        }
}

TEST_CASE("config validation rejects bad setups") {
    PlantConfig cfg;
    cfg.comfort_min_c = 25.0;
    cfg.comfort_max_c = 22.0;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = PlantConfig{};
    cfg.capacitance_kwh_per_c = {1.0};  // wrong zone count
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = PlantConfig{};
    cfg.capacitance_kwh_per_c = {1.0, -1.0, 2.0};
    CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("plant config json round-trip") {
    PlantConfig cfg;
    cfg.hvac_capacity_kw = 12.5;
    cfg.mode = HvacMode::heating;
    cfg.weather.peak_low_c = 20.0;
    nlohmann::json j = plant_config_to_json(cfg);
    PlantConfig back = plant_config_from_json(j);
    CHECK(back.hvac_capacity_kw == 12.5);
    CHECK(back.mode == HvacMode::heating);
    CHECK(back.weather.peak_low_c == 20.0);
}
