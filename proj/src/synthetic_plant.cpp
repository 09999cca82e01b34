#include "synthetic_plant.hpp"

#include <algorithm>
#include <cmath>

namespace buildflex::plant {

namespace {

double hour_of_day(int t, int periods) { return (t - 0.5) * 24.0 / periods; }

// Thermal power drawn from (cooling) or injected into (heating) the zones for
// a given electrical HVAC power. tanh bend above the knee, hard clamp at
// capacity.
double hvac_thermal_kw(const PlantConfig& cfg, double hvac_electrical_kw) {
    double p = std::clamp(hvac_electrical_kw, 0.0, cfg.hvac_capacity_kw);
    if (cfg.saturation_knee_kw <= 0.0) return cfg.cop * p;
    return cfg.cop * cfg.saturation_knee_kw * std::tanh(p / cfg.saturation_knee_kw);
}

// Inverse of hvac_thermal_kw on [0, capacity]; clamps outside the range.
double hvac_electrical_for(const PlantConfig& cfg, double thermal_kw) {
    if (thermal_kw <= 0.0) return 0.0;
    if (cfg.saturation_knee_kw <= 0.0) return std::min(thermal_kw / cfg.cop, cfg.hvac_capacity_kw);
    double ratio = thermal_kw / (cfg.cop * cfg.saturation_knee_kw);
    if (ratio >= std::tanh(cfg.hvac_capacity_kw / cfg.saturation_knee_kw)) return cfg.hvac_capacity_kw;
    return cfg.saturation_knee_kw * std::atanh(ratio);
}

double internal_gain_at(const PlantConfig& cfg, DayOfWeek dow, int t, int periods, double solar_wm2) {
    double h = hour_of_day(t, periods);
    bool business = h >= cfg.occupied_start_hour && h < cfg.occupied_end_hour;
    double gain = business ? cfg.internal_gain_day_kw : cfg.internal_gain_night_kw;
    if (is_weekend(dow)) gain *= cfg.weekend_gain_scale;
    return gain + cfg.solar_gain_kw_per_kwm2 * solar_wm2 / 1000.0;
}

// One hour of zone dynamics under fixed thermal HVAC power, split into
// substeps. `noise` is added once at the end of the hour.
void step_hour(const PlantConfig& cfg, std::vector<double>& x, double outdoor_c, double gain_total_kw,
               double hvac_thermal, const double* noise) {
    const int z = cfg.zones;
    const double dt = 1.0 / cfg.integration_substeps;
    const double sign = cfg.mode == HvacMode::cooling ? -1.0 : 1.0;
    std::vector<double> next(z);
    for (int step = 0; step < cfg.integration_substeps; ++step) {
        for (int j = 0; j < z; ++j) {
            double flow = cfg.ambient_conductance_kw_per_c[j] * (outdoor_c - x[j]);
            if (j > 0) flow += cfg.zone_coupling_kw_per_c * (x[j - 1] - x[j]);
            if (j + 1 < z) flow += cfg.zone_coupling_kw_per_c * (x[j + 1] - x[j]);
            flow += cfg.volume_share[j] * (gain_total_kw + sign * hvac_thermal);
            next[j] = x[j] + dt * flow / cfg.capacitance_kwh_per_c[j];
        }
        x = next;
    }
    if (noise) {
        for (int j = 0; j < z; ++j) x[j] += noise[j];
    }
}

void check_day_context(const PlantConfig& cfg, const DayContext& ctx) {
    (void)cfg;
    if (ctx.outdoor_temp_c.empty())
        fail(ErrorKind::invalid_argument, "day context has no outdoor series");
    if (!ctx.solar_wm2.empty() && ctx.solar_wm2.size() != ctx.outdoor_temp_c.size())
        fail(ErrorKind::invalid_argument, "solar series length differs from outdoor series");
}

double solar_at(const DayContext& ctx, int t) {
    return ctx.solar_wm2.empty() ? 0.0 : ctx.solar_wm2[t - 1];
}

}  // namespace

void PlantConfig::validate() const {
    if (zones < 1) fail(ErrorKind::validation, "plant: zones must be >= 1");
    auto zcount = static_cast<std::size_t>(zones);
    if (capacitance_kwh_per_c.size() != zcount || volume_share.size() != zcount ||
        ambient_conductance_kw_per_c.size() != zcount)
        fail(ErrorKind::validation, "plant: per-zone arrays must have `zones` entries");
    for (double c : capacitance_kwh_per_c)
        if (!(c > 0)) fail(ErrorKind::validation, "plant: capacitances must be > 0");
    for (double v : volume_share)
        if (!(v > 0)) fail(ErrorKind::validation, "plant: volume shares must be > 0");
    for (double u : ambient_conductance_kw_per_c)
        if (u < 0) fail(ErrorKind::validation, "plant: conductances must be >= 0");
    if (zone_coupling_kw_per_c < 0) fail(ErrorKind::validation, "plant: zone coupling must be >= 0");
    if (hvac_capacity_kw < 0) fail(ErrorKind::validation, "plant: hvac capacity must be >= 0");
    if (!(cop > 0)) fail(ErrorKind::validation, "plant: cop must be > 0");
    if (!(comfort_min_c < comfort_max_c)) fail(ErrorKind::validation, "plant: comfort band is empty");
    if (!(setback_min_c <= comfort_min_c && setback_max_c >= comfort_max_c))
        fail(ErrorKind::validation, "plant: setback band must contain the comfort band");
    if (integration_substeps < 1) fail(ErrorKind::validation, "plant: integration substeps must be >= 1");
    if (noise_std_c < 0) fail(ErrorKind::validation, "plant: noise std must be >= 0");
}

double volume_average(const PlantConfig& cfg, const PlantState& state) {
    double total = 0.0, weight = 0.0;
    for (int j = 0; j < cfg.zones; ++j) {
        total += cfg.volume_share[j] * state.zone_temp_c[j];
        weight += cfg.volume_share[j];
    }
    return total / weight;
}

PlantState comfort_midpoint_state(const PlantConfig& cfg) {
    PlantState s;
    s.zone_temp_c.assign(cfg.zones, 0.5 * (cfg.comfort_min_c + cfg.comfort_max_c));
    return s;
}

double base_load_at(const PlantConfig& cfg, DayOfWeek dow, int t, int periods) {
    double h = hour_of_day(t, periods);
    bool business = h >= cfg.occupied_start_hour && h < cfg.occupied_end_hour;
    double base = business ? cfg.base_load_day_kw : cfg.base_load_night_kw;
    if (is_weekend(dow)) base *= cfg.weekend_base_scale;
    return base;
}

bool occupied_at(const PlantConfig& cfg, DayOfWeek dow, int t, int periods) {
    if (is_weekend(dow)) return false;
    double h = hour_of_day(t, periods);
    return h >= cfg.occupied_start_hour && h < cfg.occupied_end_hour;
}

void temperature_band_at(const PlantConfig& cfg, DayOfWeek dow, int t, int periods, double& lo, double& hi) {
    if (occupied_at(cfg, dow, t, periods)) {
        lo = cfg.comfort_min_c;
        hi = cfg.comfort_max_c;
    } else {
        lo = cfg.setback_min_c;
        hi = cfg.setback_max_c;
    }
}

DayRecord simulate_thermostat_day(const PlantConfig& cfg, const DayContext& ctx, const PlantState& x0,
                                  Rng& rng, std::int64_t day_id) {
    cfg.validate();
    check_day_context(cfg, ctx);
    if (static_cast<int>(x0.zone_temp_c.size()) != cfg.zones)
        fail(ErrorKind::invalid_argument, "initial state has wrong zone count");
    const int periods = static_cast<int>(ctx.outdoor_temp_c.size());
    const bool cooling = cfg.mode == HvacMode::cooling;

    // Hour-response of the volume-averaged temperature to one unit of thermal
    // HVAC power; used by the controller to size the actuation.
    double response = 0.0, weight = 0.0;
    for (int j = 0; j < cfg.zones; ++j) {
        response += cfg.volume_share[j] * cfg.volume_share[j] / cfg.capacitance_kwh_per_c[j];
        weight += cfg.volume_share[j];
    }
    response /= weight;

    DayRecord rec;
    rec.day_id = day_id;
    rec.initial_indoor_temp_c = volume_average(cfg, x0);
    rec.load_kw.resize(periods);
    rec.indoor_temp_c.resize(periods);
    rec.outdoor_temp_c = ctx.outdoor_temp_c;
    rec.explanatory.resize(periods);

    std::vector<double> x = x0.zone_temp_c;
    std::vector<double> noise(cfg.zones);
    for (int t = 1; t <= periods; ++t) {
        double outdoor = ctx.outdoor_temp_c[t - 1];
        double gain = internal_gain_at(cfg, ctx.day_of_week, t, periods, solar_at(ctx, t));
        double lo, hi;
        temperature_band_at(cfg, ctx.day_of_week, t, periods, lo, hi);

        std::vector<double> free_x = x;
        step_hour(cfg, free_x, outdoor, gain, 0.0, nullptr);
        PlantState free_state{free_x};
        double free_avg = volume_average(cfg, free_state);

        double thermal_needed = 0.0;
        if (cooling && free_avg > hi - cfg.thermostat_margin_c)
            thermal_needed = (free_avg - (hi - cfg.thermostat_margin_c)) / response;
        else if (!cooling && free_avg < lo + cfg.thermostat_margin_c)
            thermal_needed = ((lo + cfg.thermostat_margin_c) - free_avg) / response;
        double hvac_kw = hvac_electrical_for(cfg, thermal_needed);

        for (int j = 0; j < cfg.zones; ++j)
            noise[j] = cfg.noise_std_c > 0 ? rng.normal(0.0, cfg.noise_std_c) : 0.0;
        step_hour(cfg, x, outdoor, gain, hvac_thermal_kw(cfg, hvac_kw),
                  cfg.noise_std_c > 0 ? noise.data() : nullptr);

        rec.load_kw[t - 1] = base_load_at(cfg, ctx.day_of_week, t, periods) + hvac_kw;
        PlantState state{x};
        rec.indoor_temp_c[t - 1] = volume_average(cfg, state);
        rec.explanatory[t - 1] = ExplanatoryRecord{ctx.day_of_week, outdoor, solar_at(ctx, t), {}};
    }
    return rec;
}

std::vector<double> evaluate_temperature(const PlantConfig& cfg, const PlantState& x0,
                                         const std::vector<double>& load_kw, const DayContext& ctx) {
    cfg.validate();
    check_day_context(cfg, ctx);
    const int periods = static_cast<int>(ctx.outdoor_temp_c.size());
    if (static_cast<int>(load_kw.size()) != periods)
        fail(ErrorKind::invalid_argument, "load profile length differs from weather series");
    if (static_cast<int>(x0.zone_temp_c.size()) != cfg.zones)
        fail(ErrorKind::invalid_argument, "initial state has wrong zone count");

    std::vector<double> result(periods);
    std::vector<double> x = x0.zone_temp_c;
    for (int t = 1; t <= periods; ++t) {
        double base = base_load_at(cfg, ctx.day_of_week, t, periods);
        double hvac = load_kw[t - 1] - base;
        if (hvac < -1e-9)
            fail(ErrorKind::invalid_argument, "load at hour " + std::to_string(t) + " (" +
                                                  format_double(load_kw[t - 1]) + " kW) is below the base load (" +
                                                  format_double(base) + " kW)");
        hvac = std::clamp(hvac, 0.0, cfg.hvac_capacity_kw);
        double gain = internal_gain_at(cfg, ctx.day_of_week, t, periods, solar_at(ctx, t));
        step_hour(cfg, x, ctx.outdoor_temp_c[t - 1], gain, hvac_thermal_kw(cfg, hvac), nullptr);
        PlantState state{x};
        result[t - 1] = volume_average(cfg, state);
    }
    return result;
}

FeasibilityCheck check_feasible(const PlantConfig& cfg, const PlantState& x0,
                                const std::vector<double>& load_kw, const DayContext& ctx) {
    const int periods = static_cast<int>(ctx.outdoor_temp_c.size());
    std::vector<double> temps = evaluate_temperature(cfg, x0, load_kw, ctx);
    FeasibilityCheck out;
    for (int t = 1; t <= periods; ++t) {
        double base = base_load_at(cfg, ctx.day_of_week, t, periods);
        if (load_kw[t - 1] < base - 1e-9 || load_kw[t - 1] > base + cfg.hvac_capacity_kw + 1e-9)
            out.load_limits_ok = false;
        double lo, hi;
        temperature_band_at(cfg, ctx.day_of_week, t, periods, lo, hi);
        out.temperature_violation_ch +=
            std::max(0.0, temps[t - 1] - hi) + std::max(0.0, lo - temps[t - 1]);
    }
    out.feasible = out.load_limits_ok && out.temperature_violation_ch == 0.0;
    return out;
}

DayContext sample_day_context(const PlantConfig& cfg, DayOfWeek dow, int periods, Rng& rng) {
    const WeatherModel& wm = cfg.weather;
    DayContext ctx;
    ctx.day_of_week = dow;
    ctx.outdoor_temp_c.resize(periods);
    ctx.solar_wm2.resize(periods);
    double peak = rng.uniform(wm.peak_low_c, wm.peak_high_c);
    double hot_frac = wm.peak_high_c > wm.peak_low_c ? (peak - wm.peak_low_c) / (wm.peak_high_c - wm.peak_low_c) : 0.5;
    // Hotter days tend to be sunnier; small independent jitter on top.
    double attenuation = wm.cloud_attenuation_low +
                         hot_frac * (wm.cloud_attenuation_high - wm.cloud_attenuation_low);
    attenuation = std::clamp(attenuation + 0.05 * rng.normal(), 0.0, 1.0);
    double drift = 0.0;
    for (int t = 1; t <= periods; ++t) {
        double h = hour_of_day(t, periods);
        double shape = 0.5 - 0.5 * std::cos(2.0 * M_PI * (h - wm.peak_hour) / 24.0);
        drift = 0.7 * drift + (wm.hourly_noise_c > 0 ? rng.normal(0.0, wm.hourly_noise_c) : 0.0);
        ctx.outdoor_temp_c[t - 1] = peak - wm.diurnal_range_c * shape + drift;
        double sun = h >= 6.0 && h <= 18.0 ? std::sin(M_PI * (h - 6.0) / 12.0) : 0.0;
        ctx.solar_wm2[t - 1] = wm.solar_clear_peak_wm2 * attenuation * std::max(0.0, sun);
    }
    return ctx;
}

TrainingDataset generate_dataset(const PlantConfig& cfg, int num_days, int periods, std::uint64_t seed,
                                 DayOfWeek start) {
    cfg.validate();
    if (num_days < 1) fail(ErrorKind::invalid_argument, "num_days must be >= 1");
    if (periods < 1) fail(ErrorKind::invalid_argument, "periods must be >= 1");
    TrainingDataset ds;
    ds.periods = periods;
    Rng rng(seed);
    for (int d = 0; d < num_days; ++d) {
        auto dow = static_cast<DayOfWeek>((static_cast<int>(start) + d) % 7);
        DayContext ctx = sample_day_context(cfg, dow, periods, rng);
        PlantState x0 = comfort_midpoint_state(cfg);
        for (double& temp : x0.zone_temp_c) temp += rng.uniform(-0.5, 0.5);
        ds.days.push_back(simulate_thermostat_day(cfg, ctx, x0, rng, d + 1));
    }
    return ds;
}

PlantConfig plant_config_from_json(const nlohmann::json& j) {
    PlantConfig cfg;
    auto get = [&](const char* key, auto& field) {
        if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    get("zones", cfg.zones);
    get("capacitance_kwh_per_c", cfg.capacitance_kwh_per_c);
    get("volume_share", cfg.volume_share);
    get("ambient_conductance_kw_per_c", cfg.ambient_conductance_kw_per_c);
    get("zone_coupling_kw_per_c", cfg.zone_coupling_kw_per_c);
    get("hvac_capacity_kw", cfg.hvac_capacity_kw);
    get("cop", cfg.cop);
    get("saturation_knee_kw", cfg.saturation_knee_kw);
    if (j.contains("mode")) {
        std::string m = j.at("mode").get<std::string>();
        if (m == "cooling")
            cfg.mode = HvacMode::cooling;
        else if (m == "heating")
            cfg.mode = HvacMode::heating;
        else
            fail(ErrorKind::parse, "plant: mode must be 'cooling' or 'heating'");
    }
    get("comfort_min_c", cfg.comfort_min_c);
    get("comfort_max_c", cfg.comfort_max_c);
    get("setback_min_c", cfg.setback_min_c);
    get("setback_max_c", cfg.setback_max_c);
    get("occupied_start_hour", cfg.occupied_start_hour);
    get("occupied_end_hour", cfg.occupied_end_hour);
    get("base_load_day_kw", cfg.base_load_day_kw);
    get("base_load_night_kw", cfg.base_load_night_kw);
    get("weekend_base_scale", cfg.weekend_base_scale);
    get("internal_gain_day_kw", cfg.internal_gain_day_kw);
    get("internal_gain_night_kw", cfg.internal_gain_night_kw);
    get("weekend_gain_scale", cfg.weekend_gain_scale);
    get("solar_gain_kw_per_kwm2", cfg.solar_gain_kw_per_kwm2);
    get("thermostat_margin_c", cfg.thermostat_margin_c);
    get("noise_std_c", cfg.noise_std_c);
    get("integration_substeps", cfg.integration_substeps);
    if (j.contains("weather")) {
        const auto& w = j.at("weather");
        auto getw = [&](const char* key, double& field) {
            if (w.contains(key)) field = w.at(key).get<double>();
        };
        getw("peak_low_c", cfg.weather.peak_low_c);
        getw("peak_high_c", cfg.weather.peak_high_c);
        getw("diurnal_range_c", cfg.weather.diurnal_range_c);
        getw("peak_hour", cfg.weather.peak_hour);
        getw("hourly_noise_c", cfg.weather.hourly_noise_c);
        getw("solar_clear_peak_wm2", cfg.weather.solar_clear_peak_wm2);
        getw("cloud_attenuation_low", cfg.weather.cloud_attenuation_low);
        getw("cloud_attenuation_high", cfg.weather.cloud_attenuation_high);
    }
    cfg.validate();
    return cfg;
}

nlohmann::json plant_config_to_json(const PlantConfig& cfg) {
    nlohmann::json j;
    j["zones"] = cfg.zones;
    j["capacitance_kwh_per_c"] = cfg.capacitance_kwh_per_c;
    j["volume_share"] = cfg.volume_share;
    j["ambient_conductance_kw_per_c"] = cfg.ambient_conductance_kw_per_c;
    j["zone_coupling_kw_per_c"] = cfg.zone_coupling_kw_per_c;
    j["hvac_capacity_kw"] = cfg.hvac_capacity_kw;
    j["cop"] = cfg.cop;
    j["saturation_knee_kw"] = cfg.saturation_knee_kw;
    j["mode"] = cfg.mode == HvacMode::cooling ? "cooling" : "heating";
    j["comfort_min_c"] = cfg.comfort_min_c;
    j["comfort_max_c"] = cfg.comfort_max_c;
    j["setback_min_c"] = cfg.setback_min_c;
    j["setback_max_c"] = cfg.setback_max_c;
    j["occupied_start_hour"] = cfg.occupied_start_hour;
    j["occupied_end_hour"] = cfg.occupied_end_hour;
    j["base_load_day_kw"] = cfg.base_load_day_kw;
    j["base_load_night_kw"] = cfg.base_load_night_kw;
    j["weekend_base_scale"] = cfg.weekend_base_scale;
    j["internal_gain_day_kw"] = cfg.internal_gain_day_kw;
    j["internal_gain_night_kw"] = cfg.internal_gain_night_kw;
    j["weekend_gain_scale"] = cfg.weekend_gain_scale;
    j["solar_gain_kw_per_kwm2"] = cfg.solar_gain_kw_per_kwm2;
    j["thermostat_margin_c"] = cfg.thermostat_margin_c;
    j["noise_std_c"] = cfg.noise_std_c;
    j["integration_substeps"] = cfg.integration_substeps;
    j["weather"] = {{"peak_low_c", cfg.weather.peak_low_c},
                    {"peak_high_c", cfg.weather.peak_high_c},
                    {"diurnal_range_c", cfg.weather.diurnal_range_c},
                    {"peak_hour", cfg.weather.peak_hour},
                    {"hourly_noise_c", cfg.weather.hourly_noise_c},
                    {"solar_clear_peak_wm2", cfg.weather.solar_clear_peak_wm2},
                    {"cloud_attenuation_low", cfg.weather.cloud_attenuation_low},
                    {"cloud_attenuation_high", cfg.weather.cloud_attenuation_high}};
    return j;
}

}  // namespace buildflex::plant
