#include "buildflex.h"

#include <cstring>
#include <string>

#include "bundle.hpp"
#include "common.hpp"
#include "data_model.hpp"
#include "pipeline.hpp"

namespace {

thread_local std::string g_last_error;

bflex_status map_kind(buildflex::ErrorKind kind) {
    using buildflex::ErrorKind;
    switch (kind) {
        case ErrorKind::invalid_argument: return BFLEX_ERR_INVALID_ARGUMENT;
        case ErrorKind::io: return BFLEX_ERR_IO;
        case ErrorKind::parse: return BFLEX_ERR_PARSE;
        case ErrorKind::validation: return BFLEX_ERR_VALIDATION;
        case ErrorKind::numeric: return BFLEX_ERR_NUMERIC;
        case ErrorKind::internal: return BFLEX_ERR_INTERNAL;
    }
    return BFLEX_ERR_INTERNAL;
}

template <typename Fn>
bflex_status guarded(Fn&& fn) {
    try {
        fn();
        g_last_error.clear();
        return BFLEX_OK;
    } catch (const buildflex::Error& e) {
        g_last_error = e.what();
        return map_kind(e.kind());
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return BFLEX_ERR_INTERNAL;
    } catch (...) {
        g_last_error = "unknown error";
        return BFLEX_ERR_INTERNAL;
    }
}

const char* require(const char* s, const char* what) {
    if (!s) buildflex::fail(buildflex::ErrorKind::invalid_argument, std::string(what) + " is null");
    return s;
}

char* dup_string(const std::string& s) {
    char* out = new char[s.size() + 1];
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

buildflex::pipeline::DayForecast forecast_from_json(const bflex_model* model, const char* forecast_json,
                                                    double& alpha_override);

}  // namespace

struct bflex_dataset {
    buildflex::TrainingDataset ds;
};

struct bflex_model {
    buildflex::bundle::ModelBundle bundle;
};

extern "C" {

const char* bflex_version(void) { return "1.0.0"; }

const char* bflex_last_error(void) { return g_last_error.c_str(); }

const char* bflex_status_name(bflex_status status) {
    switch (status) {
        case BFLEX_OK: return "ok";
        case BFLEX_ERR_INVALID_ARGUMENT: return "invalid_argument";
        case BFLEX_ERR_IO: return "io";
        case BFLEX_ERR_PARSE: return "parse";
        case BFLEX_ERR_VALIDATION: return "validation";
        case BFLEX_ERR_NUMERIC: return "numeric";
        case BFLEX_ERR_INTERNAL: return "internal";
    }
    return "unknown";
}

bflex_status bflex_generate_data(const char* config_path, const char* out_dir, uint64_t seed) {
    return guarded([&] {
        auto cfg = buildflex::pipeline::load_run_config(require(config_path, "config path"));
        buildflex::pipeline::cmd_generate_data(cfg, out_dir ? out_dir : "", seed ? seed : cfg.seed);
    });
}

bflex_status bflex_train(const char* config_path, const char* out_dir, uint64_t seed) {
    return guarded([&] {
        auto cfg = buildflex::pipeline::load_run_config(require(config_path, "config path"));
        buildflex::pipeline::cmd_train(cfg, out_dir ? out_dir : "", seed ? seed : cfg.seed);
    });
}

bflex_status bflex_validate(const char* config_path, const char* out_dir) {
    return guarded([&] {
        auto cfg = buildflex::pipeline::load_run_config(require(config_path, "config path"));
        buildflex::pipeline::cmd_validate(cfg, out_dir ? out_dir : "");
    });
}

bflex_status bflex_schedule(const char* config_path, const char* out_dir, uint64_t seed) {
    return guarded([&] {
        auto cfg = buildflex::pipeline::load_run_config(require(config_path, "config path"));
        buildflex::pipeline::cmd_schedule(cfg, out_dir ? out_dir : "", seed ? seed : cfg.seed);
    });
}

bflex_status bflex_report(const char* config_path, char** out_text) {
    return guarded([&] {
        if (!out_text) buildflex::fail(buildflex::ErrorKind::invalid_argument, "out_text is null");
        auto cfg = buildflex::pipeline::load_run_config(require(config_path, "config path"));
        *out_text = dup_string(buildflex::pipeline::cmd_report(cfg));
    });
}

void bflex_string_free(char* text) { delete[] text; }

bflex_status bflex_dataset_load(const char* csv_path, int periods, bflex_dataset** out) {
    return guarded([&] {
        if (!out) buildflex::fail(buildflex::ErrorKind::invalid_argument, "out is null");
        auto ds = buildflex::load_dataset(require(csv_path, "csv path"), periods);
        *out = new bflex_dataset{std::move(ds)};
    });
}

void bflex_dataset_free(bflex_dataset* ds) { delete ds; }

int bflex_dataset_num_days(const bflex_dataset* ds) { return ds ? ds->ds.num_days() : 0; }

int bflex_dataset_periods(const bflex_dataset* ds) { return ds ? ds->ds.periods : 0; }

bflex_status bflex_model_load(const char* bundle_path, bflex_model** out) {
    return guarded([&] {
        if (!out) buildflex::fail(buildflex::ErrorKind::invalid_argument, "out is null");
        auto bundle = buildflex::bundle::load_bundle(require(bundle_path, "bundle path"));
        *out = new bflex_model{std::move(bundle)};
    });
}

void bflex_model_free(bflex_model* model) { delete model; }

int bflex_model_periods(const bflex_model* model) { return model ? model->bundle.periods : 0; }

int bflex_model_num_clusters(const bflex_model* model) { return model ? model->bundle.num_clusters : 0; }

double bflex_model_alpha(const bflex_model* model) { return model ? model->bundle.alpha : 0.0; }

bflex_status bflex_model_summary_json(const bflex_model* model, char** out_json) {
    return guarded([&] {
        if (!model || !out_json)
            buildflex::fail(buildflex::ErrorKind::invalid_argument, "model/out_json is null");
        nlohmann::json j;
        j["building"] = model->bundle.building;
        j["periods"] = model->bundle.periods;
        j["mode"] = buildflex::band::to_string(model->bundle.mode);
        j["alpha"] = model->bundle.alpha;
        j["num_clusters"] = model->bundle.num_clusters;
        j["grid_size"] = model->bundle.grid_size;
        j["config_hash"] = model->bundle.config_hash;
        *out_json = dup_string(j.dump());
    });
}

bflex_status bflex_model_region_contains(const bflex_model* model, const char* forecast_json,
                                         const double* load, size_t load_len, double tolerance,
                                         int* contained) {
    return guarded([&] {
        if (!model || !load || !contained)
            buildflex::fail(buildflex::ErrorKind::invalid_argument, "model/load/contained is null");
        double alpha_override = -1.0;
        auto forecast = forecast_from_json(model, require(forecast_json, "forecast json"), alpha_override);
        auto region = buildflex::pipeline::region_for_day(model->bundle, forecast, alpha_override);
        Eigen::VectorXd p =
            Eigen::Map<const Eigen::VectorXd>(load, static_cast<Eigen::Index>(load_len));
        *contained = region.contains(p, tolerance).contained ? 1 : 0;
    });
}

bflex_status bflex_model_region_constraints(const bflex_model* model, const char* forecast_json,
                                            int include_band_ordering, char** out_json) {
    return guarded([&] {
        if (!model || !out_json)
            buildflex::fail(buildflex::ErrorKind::invalid_argument, "model/out_json is null");
        double alpha_override = -1.0;
        auto forecast = forecast_from_json(model, require(forecast_json, "forecast json"), alpha_override);
        auto region = buildflex::pipeline::region_for_day(model->bundle, forecast, alpha_override);
        const auto& lc = region.constraints(include_band_ordering != 0);
        nlohmann::json j;
        j["rows"] = lc.g.rows();
        j["cols"] = lc.g.cols();
        nlohmann::json rows = nlohmann::json::array();
        for (Eigen::Index r = 0; r < lc.g.rows(); ++r) {
            std::vector<double> row(lc.g.cols());
            for (Eigen::Index c = 0; c < lc.g.cols(); ++c) row[c] = lc.g(r, c);
            rows.push_back(std::move(row));
        }
        j["g"] = std::move(rows);
        j["h"] = std::vector<double>(lc.h.data(), lc.h.data() + lc.h.size());
        *out_json = dup_string(j.dump());
    });
}

}  // extern "C"

namespace {

buildflex::pipeline::DayForecast forecast_from_json(const bflex_model* model, const char* forecast_json,
                                                    double& alpha_override) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(forecast_json);
    } catch (const std::exception& e) {
        buildflex::fail(buildflex::ErrorKind::parse, std::string("forecast json: ") + e.what());
    }
    buildflex::pipeline::DayForecast f;
    if (j.contains("day_of_week"))
        f.day_of_week = buildflex::day_of_week_from_string(j.at("day_of_week").get<std::string>());
    if (j.contains("initial_indoor_c")) f.initial_indoor_c = j.at("initial_indoor_c").get<double>();
    if (!j.contains("outdoor_c"))
        buildflex::fail(buildflex::ErrorKind::invalid_argument, "forecast json needs outdoor_c");
    f.outdoor_c = j.at("outdoor_c").get<std::vector<double>>();
    if (j.contains("solar_wm2"))
        f.solar_wm2 = j.at("solar_wm2").get<std::vector<double>>();
    else
        f.solar_wm2.assign(f.outdoor_c.size(), 0.0);
    if (static_cast<int>(f.outdoor_c.size()) != model->bundle.periods)
        buildflex::fail(buildflex::ErrorKind::invalid_argument,
                        "forecast outdoor_c length differs from the model horizon");
    alpha_override = j.value("alpha", -1.0);
    return f;
}

}  // namespace
