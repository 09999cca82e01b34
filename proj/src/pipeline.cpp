#include "pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "baselines.hpp"
#include "common.hpp"
#include "csv.hpp"

namespace buildflex::pipeline {

namespace fs = std::filesystem;

namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t h = seed ^ (salt + 0x9e3779b97f4a7c15ull);
    h ^= h >> 30;
    h *= 0xbf58476d1ce4e5b9ull;
    h ^= h >> 27;
    h *= 0x94d049bb133111ebull;
    h ^= h >> 31;
    return h;
}

// One pipeline fit at a fixed cluster count. Seeds are pure functions of
// (seed, period) so different cluster counts see identical draws.
std::vector<bundle::PeriodModel> fit_periods(const TrainingDataset& train, int num_clusters,
                                             const TrainParams& params, int grid_size,
                                             std::uint64_t seed) {
    std::vector<bundle::PeriodModel> out;
    out.reserve(train.periods);
    for (int t = 1; t <= train.periods; ++t) {
        bundle::PeriodModel pm;
        pm.cluster_model =
            clustering::cluster_period(train, t, num_clusters, mix_seed(seed, t), params.kmeans_restarts);
        for (int c = 0; c < num_clusters; ++c) {
            const std::vector<int>& members = pm.cluster_model.assignments[c];
            pm.limits.push_back(region::estimate_limits(train, members, t));
            band::BandData data = band::collect_band_data(train, members, t);
            pm.reports.push_back(
                band::blse_sweep(data, params.alpha, grid_size, params.mode, params.qp_tolerance));
        }
        if (params.shared_beta) {
            std::vector<band::BlseFitReport*> reps;
            std::vector<int> sizes;
            for (int c = 0; c < num_clusters; ++c) {
                reps.push_back(&pm.reports[c]);
                sizes.push_back(static_cast<int>(pm.cluster_model.assignments[c].size()));
            }
            band::reselect_shared(reps, sizes, params.alpha);
        }
        std::vector<selector::FeatureRow> rows;
        std::vector<int> labels(train.num_days(), 0);
        for (int k = 0; k < train.num_days(); ++k) rows.push_back(selector::explanatory_features(train.days[k], t));
        for (int c = 0; c < num_clusters; ++c)
            for (int k : pm.cluster_model.assignments[c]) labels[k] = c;
        pm.tree = selector::train_tree(rows, labels, params.tree, t);
        out.push_back(std::move(pm));
    }
    return out;
}

struct CvScore {
    double rmse = 0.0;
    double mean_tree_accuracy = 0.0;
};

CvScore score_on(const std::vector<bundle::PeriodModel>& per_period, const TrainingDataset& ds) {
    double sum_sq = 0.0;
    long count = 0;
    double acc_sum = 0.0;
    const int T = static_cast<int>(per_period.size());
    for (int t = 1; t <= T; ++t) {
        const bundle::PeriodModel& pm = per_period[t - 1];
        long correct = 0;
        for (int k = 0; k < ds.num_days(); ++k) {
            const DayRecord& day = ds.days[k];
            selector::FeatureRow row = selector::explanatory_features(day, t);
            int c = pm.tree.predict(row);
            const band::BandParameters& bp = pm.reports[c].chosen();
            Eigen::VectorXd prefix = Eigen::Map<const Eigen::VectorXd>(day.load_kw.data(), t);
            band::BandPrediction pred =
                band::predict_band(bp, day.initial_indoor_temp_c, day.outdoor_temp_c[t - 1], prefix);
            double ju = std::max(0.0, day.indoor_temp_c[t - 1] - pred.upper);
            double jl = std::max(0.0, pred.lower - day.indoor_temp_c[t - 1]);
            sum_sq += (ju + jl) * (ju + jl);
            ++count;
            if (pm.cluster_model.label(build_feature_vector(ds, k, t)) == c) ++correct;
        }
        acc_sum += static_cast<double>(correct) / std::max(1, ds.num_days());
    }
    CvScore score;
    score.rmse = count ? std::sqrt(sum_sq / static_cast<double>(count)) : 0.0;
    score.mean_tree_accuracy = T ? acc_sum / T : 0.0;
    return score;
}

}  // namespace

SelectionResult select_num_clusters(const TrainingDataset& train, const TrainingDataset& cv,
                                    const TrainParams& params, std::uint64_t seed) {
    if (cv.num_days() == 0)
        fail(ErrorKind::invalid_argument, "cluster selection needs a cross-validation set");
    int lo = std::max(1, params.clusters.min_clusters);
    int hi = std::min(params.clusters.max_clusters, train.num_days());
    if (lo > hi) fail(ErrorKind::invalid_argument, "cluster range is empty");
    SelectionResult result;
    double best_rmse = 0.0;
    for (int c = lo; c <= hi; ++c) {
        auto per_period = fit_periods(train, c, params, params.clusters.selection_grid_size, seed);
        CvScore score = score_on(per_period, cv);
        result.curve.push_back({c, score.rmse, score.mean_tree_accuracy});
        if (result.curve.size() == 1 || score.rmse < best_rmse) {
            best_rmse = score.rmse;
            result.best = c;
        }
    }
    return result;
}

bundle::ModelBundle train_model(const TrainingDataset& train, const TrainingDataset& cv,
                                const TrainParams& params, std::uint64_t seed) {
    if (train.num_days() == 0) fail(ErrorKind::invalid_argument, "training set is empty");
    if (!(params.alpha > 0.0 && params.alpha < 1.0))
        fail(ErrorKind::invalid_argument, "alpha must be within (0, 1)");
    if (params.grid_size < 2) fail(ErrorKind::invalid_argument, "beta grid needs at least 2 points");

    bundle::ModelBundle b;
    b.periods = train.periods;
    b.mode = params.mode;
    b.alpha = params.alpha;
    b.grid_size = params.grid_size;
    b.shared_beta = params.shared_beta;
    if (params.clusters.fixed) {
        b.num_clusters = std::min(params.clusters.fixed_count, train.num_days());
    } else {
        SelectionResult sel = select_num_clusters(train, cv, params, seed);
        b.num_clusters = sel.best;
        b.cv_curve = std::move(sel.curve);
    }
    b.per_period = fit_periods(train, b.num_clusters, params, params.grid_size, seed);
    return b;
}

selector::FeatureRow forecast_features(const DayForecast& f, int period) {
    if (period < 1 || period > static_cast<int>(f.outdoor_c.size()))
        fail(ErrorKind::invalid_argument, "forecast_features: period out of range");
    double mean = 0.0;
    for (double v : f.outdoor_c) mean += v;
    mean /= static_cast<double>(f.outdoor_c.size());
    selector::FeatureRow row;
    row.category = static_cast<int>(f.day_of_week);
    row.numeric.resize(3);
    row.numeric[0] = f.outdoor_c[period - 1];
    row.numeric[1] = mean;
    row.numeric[2] = f.solar_wm2.empty() ? 0.0 : f.solar_wm2[period - 1];
    return row;
}

region::FeasibleRegion region_for_day(const bundle::ModelBundle& b, const DayForecast& f,
                                      double alpha_override) {
    if (static_cast<int>(f.outdoor_c.size()) != b.periods)
        fail(ErrorKind::invalid_argument, "forecast outdoor series length differs from the bundle horizon");
    std::vector<region::RegionParameters> phi;
    for (int t = 1; t <= b.periods; ++t) {
        int c = b.per_period[t - 1].tree.predict(forecast_features(f, t));
        phi.push_back(b.region_params(t, c, alpha_override));
    }
    return region::assemble_region(std::move(phi), f.initial_indoor_c, f.outdoor_c);
}

ValidationResult validate_model(const bundle::ModelBundle& b, const TrainingDataset& test,
                                const TrainingDataset& train) {
    if (test.num_days() == 0) fail(ErrorKind::invalid_argument, "validation set is empty");
    if (test.periods != b.periods) fail(ErrorKind::validation, "test set horizon differs from the bundle");
    const int T = b.periods;

    // Central (collapsed-band) fits per cluster, trained on the same
    // partition the bands used.
    std::vector<std::vector<band::BandParameters>> central(T);
    for (int t = 1; t <= T; ++t) {
        const bundle::PeriodModel& pm = b.per_period[t - 1];
        for (std::size_t c = 0; c < pm.cluster_model.assignments.size(); ++c) {
            band::BandData data = band::collect_band_data(train, pm.cluster_model.assignments[c], t);
            central[t - 1].push_back(band::fit_central(data, b.mode));
        }
    }

    ValidationResult out;
    out.per_period_out_fraction.assign(T, 0.0);
    out.per_period_band_rmse.assign(T, 0.0);
    out.per_period_width.assign(T, 0.0);
    out.per_period_central_rmse.assign(T, 0.0);
    long total = 0, total_out = 0, tree_correct = 0;
    double sum_sq = 0.0, width_sum = 0.0, central_sq = 0.0;
    for (int t = 1; t <= T; ++t) {
        const bundle::PeriodModel& pm = b.per_period[t - 1];
        double t_sq = 0.0, t_width = 0.0, t_central = 0.0;
        long t_out = 0;
        for (int k = 0; k < test.num_days(); ++k) {
            const DayRecord& day = test.days[k];
            selector::FeatureRow row = selector::explanatory_features(day, t);
            int c = pm.tree.predict(row);
            if (pm.cluster_model.label(build_feature_vector(test, k, t)) == c) ++tree_correct;
            Eigen::VectorXd prefix = Eigen::Map<const Eigen::VectorXd>(day.load_kw.data(), t);
            const band::BandParameters& bp = pm.reports[c].chosen();
            band::BandPrediction pred =
                band::predict_band(bp, day.initial_indoor_temp_c, day.outdoor_temp_c[t - 1], prefix);
            double measured = day.indoor_temp_c[t - 1];
            if (pred.upper <= measured || pred.lower >= measured) ++t_out;
            double ju = std::max(0.0, measured - pred.upper);
            double jl = std::max(0.0, pred.lower - measured);
            t_sq += (ju + jl) * (ju + jl);
            t_width += pred.upper - pred.lower;
            band::BandPrediction cp = band::predict_band(central[t - 1][c], day.initial_indoor_temp_c,
                                                         day.outdoor_temp_c[t - 1], prefix);
            double resid = 0.5 * (cp.upper + cp.lower) - measured;
            t_central += resid * resid;
            ++total;
        }
        long n = test.num_days();
        out.per_period_out_fraction[t - 1] = static_cast<double>(t_out) / n;
        out.per_period_band_rmse[t - 1] = std::sqrt(t_sq / n);
        out.per_period_width[t - 1] = t_width / n;
        out.per_period_central_rmse[t - 1] = std::sqrt(t_central / n);
        total_out += t_out;
        sum_sq += t_sq;
        width_sum += t_width;
        central_sq += t_central;
    }
    out.out_of_band_fraction = static_cast<double>(total_out) / total;
    out.band_rmse = std::sqrt(sum_sq / total);
    out.mean_band_width = width_sum / total;
    out.tree_accuracy = static_cast<double>(tree_correct) / total;
    out.central_rmse = std::sqrt(central_sq / total);

    baselines::RcParameters rc = baselines::fit_rc(train, baselines::HvacSource::base_estimate);
    out.rc_rmse = baselines::rc_rmse(rc, test);
    for (int t = 1; t < T; ++t) {
        double sq = 0.0;
        for (const auto& day : test.days) {
            double hvac = baselines::hvac_power_for(rc, day, t, T);
            double pred =
                baselines::predict_rc(rc, t, day.indoor_temp_c[t - 1], day.outdoor_temp_c[t - 1], hvac);
            double err = pred - day.indoor_temp_c[t];
            sq += err * err;
        }
        out.per_period_rc_rmse.push_back(std::sqrt(sq / test.num_days()));
    }
    return out;
}

// ---- configuration ----------------------------------------------------------

namespace {

template <typename T>
void get_if(const nlohmann::json& j, const char* key, T& field) {
    if (j.contains(key)) field = j.at(key).get<T>();
}

DayOfWeek dow_from_json(const nlohmann::json& j, const char* key, DayOfWeek fallback) {
    if (!j.contains(key)) return fallback;
    return day_of_week_from_string(j.at(key).get<std::string>());
}

}  // namespace

RunConfig run_config_from_json(const nlohmann::json& j) {
    RunConfig cfg;
    get_if(j, "periods", cfg.periods);
    if (cfg.periods < 1) fail(ErrorKind::validation, "config: periods must be >= 1");
    get_if(j, "seed", cfg.seed);

    if (j.contains("buildings")) {
        for (const auto& e : j.at("buildings")) {
            BuildingConfig bc;
            bc.name = e.value("name", "building" + std::to_string(cfg.buildings.size() + 1));
            bc.plant = e.contains("plant") ? plant::plant_config_from_json(e.at("plant")) : plant::PlantConfig{};
            get_if(e, "initial_indoor_c", bc.initial_indoor_c);
            cfg.buildings.push_back(std::move(bc));
        }
    }
    if (cfg.buildings.empty()) cfg.buildings.push_back(BuildingConfig{"building1", plant::PlantConfig{}, -1000.0});

    if (j.contains("generate")) {
        const auto& g = j.at("generate");
        get_if(g, "days", cfg.generate.days);
        if (g.contains("split")) {
            auto split = g.at("split").get<std::vector<int>>();
            if (split.size() != 3) fail(ErrorKind::validation, "config: split must have 3 entries");
            cfg.generate.split = SplitSizes{split[0], split[1], split[2]};
        }
        cfg.generate.start = dow_from_json(g, "start_day_of_week", DayOfWeek::mon);
        long total = static_cast<long>(cfg.generate.split.train) + cfg.generate.split.cross_validation +
                     cfg.generate.split.test;
        if (total > cfg.generate.days)
            fail(ErrorKind::validation, "config: split sizes exceed generated days");
    }

    if (j.contains("train")) {
        const auto& t = j.at("train");
        get_if(t, "alpha", cfg.train.alpha);
        get_if(t, "grid_size", cfg.train.grid_size);
        get_if(t, "shared_beta", cfg.train.shared_beta);
        get_if(t, "kmeans_restarts", cfg.train.kmeans_restarts);
        get_if(t, "qp_tolerance", cfg.train.qp_tolerance);
        if (t.contains("fit_mode")) cfg.train.mode = band::fit_mode_from_string(t.at("fit_mode").get<std::string>());
        if (t.contains("clusters")) {
            const auto& c = t.at("clusters");
            std::string mode = c.value("mode", "select");
            if (mode == "fixed") {
                cfg.train.clusters.fixed = true;
                get_if(c, "count", cfg.train.clusters.fixed_count);
            } else if (mode == "select") {
                cfg.train.clusters.fixed = false;
                get_if(c, "min", cfg.train.clusters.min_clusters);
                get_if(c, "max", cfg.train.clusters.max_clusters);
                get_if(c, "selection_grid_size", cfg.train.clusters.selection_grid_size);
            } else {
                fail(ErrorKind::validation, "config: clusters.mode must be 'fixed' or 'select'");
            }
        }
        if (t.contains("tree")) {
            get_if(t.at("tree"), "max_depth", cfg.train.tree.max_depth);
            get_if(t.at("tree"), "min_leaf", cfg.train.tree.min_leaf);
        }
    }
    if (!(cfg.train.alpha > 0.0 && cfg.train.alpha < 1.0))
        fail(ErrorKind::validation, "config: alpha must be within (0, 1)");
    if (cfg.train.grid_size < 2) fail(ErrorKind::validation, "config: grid_size must be >= 2");

    if (j.contains("schedule")) {
        const auto& s = j.at("schedule");
        if (s.contains("wind")) {
            const auto& w = s.at("wind");
            get_if(w, "csv", cfg.schedule.wind.csv);
            get_if(w, "capacity_kwh", cfg.schedule.wind.capacity_kwh);
            get_if(w, "capacity_fraction_of_peak", cfg.schedule.wind.capacity_fraction_of_peak);
            get_if(w, "scenarios", cfg.schedule.wind.scenarios);
            get_if(w, "mean_level", cfg.schedule.wind.shape.mean_level);
            get_if(w, "diurnal_swing", cfg.schedule.wind.shape.diurnal_swing);
            get_if(w, "deviation_std", cfg.schedule.wind.shape.deviation_std);
            get_if(w, "ar_coef", cfg.schedule.wind.shape.ar_coef);
        }
        if (s.contains("noise")) {
            get_if(s.at("noise"), "scenarios", cfg.schedule.noise.scenarios);
            get_if(s.at("noise"), "sigma_kw", cfg.schedule.noise.sigma_kw);
        }
        if (s.contains("prices")) {
            if (s.at("prices").is_number())
                cfg.schedule.price_flat = s.at("prices").get<double>();
            else
                cfg.schedule.prices = s.at("prices").get<std::vector<double>>();
        }
        get_if(s, "balancing_price", cfg.schedule.balancing_price);
        get_if(s, "v_grid", cfg.schedule.v_grid);
        get_if(s, "alpha_grid", cfg.schedule.alpha_grid);
        get_if(s, "n_grid", cfg.schedule.n_grid);
        get_if(s, "lp_tolerance", cfg.schedule.lp_tolerance);
        if (s.contains("target_day")) {
            const auto& td = s.at("target_day");
            cfg.schedule.target.day_of_week = dow_from_json(td, "day_of_week", DayOfWeek::tue);
            get_if(td, "outdoor_c", cfg.schedule.target.outdoor_c);
            get_if(td, "solar_wm2", cfg.schedule.target.solar_wm2);
        }
        if (!cfg.schedule.target.outdoor_c.empty() &&
            static_cast<int>(cfg.schedule.target.outdoor_c.size()) != cfg.periods)
            fail(ErrorKind::validation, "config: target_day.outdoor_c length differs from periods");
        for (double a : cfg.schedule.alpha_grid)
            if (!(a > 0.0 && a < 1.0)) fail(ErrorKind::validation, "config: alpha_grid entries must be in (0, 1)");
    }

    if (j.contains("paths")) {
        get_if(j.at("paths"), "data_dir", cfg.paths.data_dir);
        get_if(j.at("paths"), "bundle_dir", cfg.paths.bundle_dir);
        get_if(j.at("paths"), "report_dir", cfg.paths.report_dir);
    }
    cfg.config_hash = to_hex(fnv1a64(j.dump()));
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::io, "cannot open config '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        fail(ErrorKind::parse, "config '" + path + "': " + e.what());
    }
    return run_config_from_json(j);
}

// ---- commands ---------------------------------------------------------------

namespace {

std::string data_path(const RunConfig& cfg, const std::string& dir, const std::string& name,
                      const char* role) {
    return (fs::path(dir.empty() ? cfg.paths.data_dir : dir) / (name + "_" + role + ".csv")).string();
}

std::string bundle_path(const RunConfig& cfg, const std::string& dir, const std::string& name) {
    return (fs::path(dir.empty() ? cfg.paths.bundle_dir : dir) / (name + "_bundle.json")).string();
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) fail(ErrorKind::io, "cannot create directory '" + dir + "': " + ec.message());
}

double building_initial_indoor(const BuildingConfig& bc) {
    if (bc.initial_indoor_c > -999.0) return bc.initial_indoor_c;
    return 0.5 * (bc.plant.comfort_min_c + bc.plant.comfort_max_c);
}

struct ScheduleSetup {
    std::vector<bundle::ModelBundle> bundles;
    std::vector<DayForecast> forecasts;
    plant::DayContext target_ctx;
    scheduler::WindScenarioSet wind;
    scheduler::LoadNoiseSet noise;
    Eigen::VectorXd prices;
};

ScheduleSetup prepare_schedule(const RunConfig& cfg, std::uint64_t seed) {
    ScheduleSetup s;
    for (const auto& bc : cfg.buildings) {
        s.bundles.push_back(bundle::load_bundle(bundle_path(cfg, "", bc.name)));
        if (s.bundles.back().periods != cfg.periods)
            fail(ErrorKind::validation, "bundle '" + bc.name + "' horizon differs from config periods");
    }

    // Shared weather for the target day; sampled from the first building's
    // weather model when not given explicitly.
    const TargetDayConfig& td = cfg.schedule.target;
    s.target_ctx.day_of_week = td.day_of_week;
    if (!td.outdoor_c.empty()) {
        s.target_ctx.outdoor_temp_c = td.outdoor_c;
        s.target_ctx.solar_wm2 =
            td.solar_wm2.empty() ? std::vector<double>(cfg.periods, 0.0) : td.solar_wm2;
    } else {
        Rng rng(mix_seed(seed, 0x77));
        s.target_ctx =
            plant::sample_day_context(cfg.buildings[0].plant, td.day_of_week, cfg.periods, rng);
    }

    for (std::size_t i = 0; i < cfg.buildings.size(); ++i) {
        DayForecast f;
        f.day_of_week = s.target_ctx.day_of_week;
        f.initial_indoor_c = building_initial_indoor(cfg.buildings[i]);
        f.outdoor_c = s.target_ctx.outdoor_temp_c;
        f.solar_wm2 = s.target_ctx.solar_wm2;
        s.forecasts.push_back(std::move(f));
    }

    if (!cfg.schedule.wind.csv.empty()) {
        s.wind = scheduler::load_wind_csv(cfg.schedule.wind.csv, cfg.periods);
    } else {
        scheduler::WindGenParams params = cfg.schedule.wind.shape;
        if (cfg.schedule.wind.capacity_kwh > 0) {
            params.capacity_kwh = cfg.schedule.wind.capacity_kwh;
        } else {
            double peak = 0.0;
            for (const auto& b : s.bundles) {
                double bpeak = 0.0;
                for (const auto& pm : b.per_period)
                    for (const auto& lim : pm.limits) bpeak = std::max(bpeak, lim.load_max);
                peak += bpeak;
            }
            params.capacity_kwh = cfg.schedule.wind.capacity_fraction_of_peak * peak;
        }
        s.wind = scheduler::generate_wind_scenarios(params, cfg.periods, cfg.schedule.wind.scenarios,
                                                    mix_seed(seed, 0x88));
    }

    std::vector<scheduler::CovarianceSpec> covs;
    for (std::size_t i = 0; i < cfg.buildings.size(); ++i) {
        scheduler::CovarianceSpec spec;
        spec.diagonal = true;
        spec.diag = Eigen::VectorXd::Constant(cfg.periods,
                                              cfg.schedule.noise.sigma_kw * cfg.schedule.noise.sigma_kw);
        covs.push_back(std::move(spec));
    }
    s.noise = scheduler::sample_load_noise(covs, cfg.periods, cfg.schedule.noise.scenarios,
                                           mix_seed(seed, 0x99));

    if (!cfg.schedule.prices.empty()) {
        if (static_cast<int>(cfg.schedule.prices.size()) != cfg.periods)
            fail(ErrorKind::validation, "price series length differs from periods");
        s.prices = Eigen::Map<const Eigen::VectorXd>(cfg.schedule.prices.data(), cfg.periods);
    } else {
        s.prices = Eigen::VectorXd::Constant(cfg.periods, cfg.schedule.price_flat);
    }
    return s;
}

struct SolveOutcome {
    scheduler::Schedule schedule;
    double mitigation = 0.0;
    std::vector<double> violations;
    double build_ms = 0.0;
    double solve_ms = 0.0;
};

SolveOutcome solve_once(const RunConfig& cfg, const ScheduleSetup& s,
                        const std::vector<region::FeasibleRegion>& regions, double v) {
    std::vector<const region::FeasibleRegion*> ptrs;
    for (const auto& r : regions) ptrs.push_back(&r);
    auto t0 = std::chrono::steady_clock::now();
    scheduler::BuiltProgram program = scheduler::build_program(ptrs, s.prices, v, s.wind, s.noise);
    auto t1 = std::chrono::steady_clock::now();
    SolveOutcome out;
    out.schedule =
        scheduler::solve_program(program, s.prices, v, s.wind, s.noise, cfg.schedule.lp_tolerance);
    auto t2 = std::chrono::steady_clock::now();
    out.build_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    out.solve_ms = std::chrono::duration<double, std::milli>(t2 - t1).count();
    out.mitigation = scheduler::mitigation_metric(out.schedule, s.wind, s.noise);
    for (std::size_t i = 0; i < regions.size(); ++i) {
        const BuildingConfig& bc = cfg.buildings[i % cfg.buildings.size()];
        plant::PlantState x0;
        x0.zone_temp_c.assign(bc.plant.zones, s.forecasts[i % s.forecasts.size()].initial_indoor_c);
        out.violations.push_back(scheduler::violation_metric(out.schedule, static_cast<int>(i), bc.plant,
                                                             x0, s.target_ctx, s.wind));
    }
    return out;
}

}  // namespace

void cmd_generate_data(const RunConfig& cfg, const std::string& out_dir, std::uint64_t seed) {
    std::string dir = out_dir.empty() ? cfg.paths.data_dir : out_dir;
    ensure_dir(dir);
    for (std::size_t i = 0; i < cfg.buildings.size(); ++i) {
        const BuildingConfig& bc = cfg.buildings[i];
        TrainingDataset all = plant::generate_dataset(bc.plant, cfg.generate.days, cfg.periods,
                                                      mix_seed(seed, i + 1), cfg.generate.start);
        SplitResult split = split_dataset(all, cfg.generate.split, mix_seed(seed, 0x1000 + i));
        save_dataset(split.train, data_path(cfg, dir, bc.name, "train"));
        save_dataset(split.cross_validation, data_path(cfg, dir, bc.name, "cv"));
        save_dataset(split.test, data_path(cfg, dir, bc.name, "test"));
    }
}

void cmd_train(const RunConfig& cfg, const std::string& out_dir, std::uint64_t seed) {
    std::string dir = out_dir.empty() ? cfg.paths.bundle_dir : out_dir;
    ensure_dir(dir);
    for (std::size_t i = 0; i < cfg.buildings.size(); ++i) {
        const BuildingConfig& bc = cfg.buildings[i];
        TrainingDataset train = load_dataset(data_path(cfg, "", bc.name, "train"), cfg.periods);
        TrainingDataset cv;
        cv.periods = cfg.periods;
        if (!cfg.train.clusters.fixed)
            cv = load_dataset(data_path(cfg, "", bc.name, "cv"), cfg.periods);
        bundle::ModelBundle b = train_model(train, cv, cfg.train, mix_seed(seed, 0x2000 + i));
        b.building = bc.name;
        b.config_hash = cfg.config_hash;
        bundle::save_bundle(b, (fs::path(dir) / (bc.name + "_bundle.json")).string());
    }
}

void cmd_validate(const RunConfig& cfg, const std::string& out_dir) {
    std::string dir = out_dir.empty() ? cfg.paths.report_dir : out_dir;
    ensure_dir(dir);
    csv::Writer report((fs::path(dir) / "validation.csv").string());
    report.comment("buildflex validation report v1 config=" + cfg.config_hash);
    report.row({"building", "period", "metric", "value"});
    csv::Writer comparison((fs::path(dir) / "comparison.csv").string());
    comparison.comment("buildflex model comparison v1 config=" + cfg.config_hash);
    comparison.row({"building", "model", "period", "rmse"});

    for (const auto& bc : cfg.buildings) {
        bundle::ModelBundle b = bundle::load_bundle(bundle_path(cfg, "", bc.name));
        TrainingDataset train = load_dataset(data_path(cfg, "", bc.name, "train"), cfg.periods);
        TrainingDataset test = load_dataset(data_path(cfg, "", bc.name, "test"), cfg.periods);
        ValidationResult v = validate_model(b, test, train);

        auto put = [&](const std::string& period, const std::string& metric, double value) {
            report.row({bc.name, period, metric, format_double(value)});
        };
        put("all", "out_of_band_fraction", v.out_of_band_fraction);
        put("all", "band_rmse", v.band_rmse);
        put("all", "mean_band_width", v.mean_band_width);
        put("all", "tree_accuracy", v.tree_accuracy);
        put("all", "num_clusters", b.num_clusters);
        for (const auto& pt : b.cv_curve) {
            put("all", "cv_rmse_c" + std::to_string(pt.clusters), pt.cv_rmse);
            put("all", "cv_tree_accuracy_c" + std::to_string(pt.clusters), pt.mean_tree_accuracy);
        }
        for (int t = 1; t <= b.periods; ++t) {
            put(std::to_string(t), "out_of_band_fraction", v.per_period_out_fraction[t - 1]);
            put(std::to_string(t), "band_rmse", v.per_period_band_rmse[t - 1]);
            put(std::to_string(t), "mean_band_width", v.per_period_width[t - 1]);
        }
        comparison.row({bc.name, "rc", "all", format_double(v.rc_rmse)});
        comparison.row({bc.name, "blse_central", "all", format_double(v.central_rmse)});
        comparison.row({bc.name, "blse_alpha", "all", format_double(v.band_rmse)});
        for (int t = 2; t <= b.periods; ++t)
            comparison.row({bc.name, "rc", std::to_string(t), format_double(v.per_period_rc_rmse[t - 2])});
        for (int t = 1; t <= b.periods; ++t) {
            comparison.row(
                {bc.name, "blse_central", std::to_string(t), format_double(v.per_period_central_rmse[t - 1])});
            comparison.row(
                {bc.name, "blse_alpha", std::to_string(t), format_double(v.per_period_band_rmse[t - 1])});
        }
    }
    report.close();
    comparison.close();
}

void cmd_schedule(const RunConfig& cfg, const std::string& out_dir, std::uint64_t seed) {
    std::string dir = out_dir.empty() ? cfg.paths.report_dir : out_dir;
    ensure_dir(dir);
    ScheduleSetup s = prepare_schedule(cfg, seed);
    const int N = static_cast<int>(cfg.buildings.size());

    // Wall-clock timings are environment noise; they go to their own file so
    // the deterministic artifacts stay byte-reproducible.
    csv::Writer timing((fs::path(dir) / "timing.csv").string());
    timing.comment("buildflex schedule timing v1 config=" + cfg.config_hash + " (not reproducible)");
    timing.row({"phase", "alpha", "v", "n_buildings", "build_ms", "solve_ms", "lp_iterations"});

    auto regions_at = [&](double alpha_override) {
        std::vector<region::FeasibleRegion> regions;
        for (int i = 0; i < N; ++i)
            regions.push_back(region_for_day(s.bundles[i], s.forecasts[i], alpha_override));
        return regions;
    };

    // Reference solve at the bundle's alpha and the configured v.
    std::vector<region::FeasibleRegion> ref_regions = regions_at(-1.0);
    SolveOutcome ref = solve_once(cfg, s, ref_regions, cfg.schedule.balancing_price);
    timing.row({"reference", format_double(s.bundles[0].alpha), format_double(cfg.schedule.balancing_price),
                std::to_string(N), format_double(ref.build_ms), format_double(ref.solve_ms),
                std::to_string(ref.schedule.lp_iterations)});

    nlohmann::json out;
    out["schema_version"] = 1;
    out["config_hash"] = cfg.config_hash;
    out["alpha"] = s.bundles[0].alpha;
    out["balancing_price"] = cfg.schedule.balancing_price;
    out["objective"] = ref.schedule.objective;
    out["energy_cost"] = ref.schedule.energy_cost;
    out["expected_balancing_cost"] = ref.schedule.expected_balancing_cost;
    out["mitigation"] = ref.mitigation;
    out["lp_iterations"] = ref.schedule.lp_iterations;
    out["aggregate_first_stage_kw"] = std::vector<double>(
        ref.schedule.aggregate_first_stage.data(),
        ref.schedule.aggregate_first_stage.data() + ref.schedule.aggregate_first_stage.size());
    nlohmann::json buildings = nlohmann::json::array();
    for (int i = 0; i < N; ++i) {
        nlohmann::json bj;
        bj["name"] = cfg.buildings[i].name;
        bj["first_stage_kw"] = std::vector<double>(ref.schedule.first_stage[i].data(),
                                                   ref.schedule.first_stage[i].data() + cfg.periods);
        nlohmann::json rec = nlohmann::json::array();
        for (const auto& col : ref.schedule.second_stage[i])
            rec.push_back(std::vector<double>(col.data(), col.data() + cfg.periods));
        bj["second_stage_kw"] = std::move(rec);
        bj["expected_violation_ch"] = ref.violations[i];
        buildings.push_back(std::move(bj));
    }
    out["buildings"] = std::move(buildings);
    {
        std::ofstream f((fs::path(dir) / "schedule.json").string());
        if (!f) fail(ErrorKind::io, "cannot write schedule.json");
        f << out.dump(1) << "\n";
    }

    // Sweep over the alpha and v grids with the same scenario draws.
    std::vector<double> alphas =
        cfg.schedule.alpha_grid.empty() ? std::vector<double>{s.bundles[0].alpha} : cfg.schedule.alpha_grid;
    std::vector<double> vs = cfg.schedule.v_grid.empty()
                                 ? std::vector<double>{cfg.schedule.balancing_price}
                                 : cfg.schedule.v_grid;
    csv::Writer sweep((fs::path(dir) / "sweep.csv").string());
    sweep.comment("buildflex schedule sweep v1 config=" + cfg.config_hash);
    std::vector<std::string> header = {"alpha",       "v",          "objective", "energy_cost",
                                       "balancing_cost", "mitigation", "lp_iterations"};
    for (const auto& bc : cfg.buildings) header.push_back("violation_ch_" + bc.name);
    sweep.row(header);
    for (double alpha : alphas) {
        std::vector<region::FeasibleRegion> regions = regions_at(alpha);
        for (double v : vs) {
            SolveOutcome o = solve_once(cfg, s, regions, v);
            std::vector<std::string> row = {format_double(alpha),
                                            format_double(v),
                                            format_double(o.schedule.objective),
                                            format_double(o.schedule.energy_cost),
                                            format_double(o.schedule.expected_balancing_cost),
                                            format_double(o.mitigation),
                                            std::to_string(o.schedule.lp_iterations)};
            for (double viol : o.violations) row.push_back(format_double(viol));
            sweep.row(row);
            timing.row({"sweep", format_double(alpha), format_double(v), std::to_string(N),
                        format_double(o.build_ms), format_double(o.solve_ms),
                        std::to_string(o.schedule.lp_iterations)});
        }
    }
    sweep.close();

    // Optional building-count scaling run (timing only).
    for (int n : cfg.schedule.n_grid) {
        std::vector<region::FeasibleRegion> regions;
        std::vector<const region::FeasibleRegion*> unused;
        for (int i = 0; i < n; ++i)
            regions.push_back(
                region_for_day(s.bundles[i % s.bundles.size()], s.forecasts[i % s.forecasts.size()], -1.0));
        SolveOutcome o = solve_once(cfg, s, regions, cfg.schedule.balancing_price);
        timing.row({"n_sweep", format_double(s.bundles[0].alpha),
                    format_double(cfg.schedule.balancing_price), std::to_string(n),
                    format_double(o.build_ms), format_double(o.solve_ms),
                    std::to_string(o.schedule.lp_iterations)});
    }
    timing.close();
}

std::string cmd_report(const RunConfig& cfg) {
    std::string text;
    text += "buildflex summary (config " + cfg.config_hash + ")\n";
    for (const auto& bc : cfg.buildings) {
        text += "\nbuilding " + bc.name + "\n";
        std::string bpath = bundle_path(cfg, "", bc.name);
        if (!fs::exists(bpath)) {
            text += "  no bundle at " + bpath + "\n";
            continue;
        }
        bundle::ModelBundle b = bundle::load_bundle(bpath);
        text += "  horizon " + std::to_string(b.periods) + " periods, mode " +
                std::string(band::to_string(b.mode)) + "\n";
        text += "  clusters " + std::to_string(b.num_clusters) + ", alpha " + format_double(b.alpha) +
                ", beta grid " + std::to_string(b.grid_size) + "\n";
        for (const auto& pt : b.cv_curve)
            text += "    C=" + std::to_string(pt.clusters) + " cv_rmse " + format_double(pt.cv_rmse) +
                    " tree_accuracy " + format_double(pt.mean_tree_accuracy) + "\n";
        double pi_sum = 0.0;
        int pi_count = 0;
        int unmet = 0;
        for (const auto& pm : b.per_period)
            for (const auto& rep : pm.reports) {
                pi_sum += rep.solutions[rep.selected].pi_out;
                ++pi_count;
                if (rep.alpha_unmet) ++unmet;
            }
        text += "  mean training pi_out " + format_double(pi_sum / std::max(1, pi_count)) + ", " +
                std::to_string(unmet) + " fits above alpha\n";
        int t_show = std::min(b.periods, 19);
        text += "  selector tree at period " + std::to_string(t_show) + ":\n";
        std::string dump = b.per_period[t_show - 1].tree.dump();
        std::size_t pos = 0;
        while (pos < dump.size()) {
            std::size_t nl = dump.find('\n', pos);
            if (nl == std::string::npos) nl = dump.size();
            text += "    " + dump.substr(pos, nl - pos) + "\n";
            pos = nl + 1;
        }
    }
    for (const char* name : {"validation.csv", "comparison.csv", "sweep.csv"}) {
        fs::path p = fs::path(cfg.paths.report_dir) / name;
        text += std::string("\n") + name + ": " + (fs::exists(p) ? p.string() : "not generated") + "\n";
    }
    return text;
}

}  // namespace buildflex::pipeline
