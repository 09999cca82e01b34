#include "bundle.hpp"

#include <fstream>

#include "common.hpp"

namespace buildflex::bundle {

region::RegionParameters ModelBundle::region_params(int period, int cluster, double alpha_override) const {
    if (period < 1 || period > periods) fail(ErrorKind::invalid_argument, "region_params: period out of range");
    const PeriodModel& pm = per_period[period - 1];
    if (cluster < 0 || cluster >= static_cast<int>(pm.limits.size()))
        fail(ErrorKind::invalid_argument, "region_params: cluster out of range");
    region::RegionParameters out;
    out.limits = pm.limits[cluster];
    const band::BlseFitReport& report = pm.reports[cluster];
    if (alpha_override < 0.0) {
        out.band = report.chosen();
    } else {
        band::BlseFitReport copy = report;
        band::reselect(copy, alpha_override);
        out.band = copy.chosen();
    }
    return out;
}

nlohmann::json ModelBundle::to_json() const {
    nlohmann::json j;
    j["schema_version"] = schema_version;
    j["building"] = building;
    j["periods"] = periods;
    j["mode"] = band::to_string(mode);
    j["alpha"] = alpha;
    j["grid_size"] = grid_size;
    j["shared_beta"] = shared_beta;
    j["num_clusters"] = num_clusters;
    j["config_hash"] = config_hash;
    nlohmann::json curve = nlohmann::json::array();
    for (const auto& p : cv_curve)
        curve.push_back({{"clusters", p.clusters},
                         {"cv_rmse", p.cv_rmse},
                         {"mean_tree_accuracy", p.mean_tree_accuracy}});
    j["cv_curve"] = std::move(curve);
    nlohmann::json per = nlohmann::json::array();
    for (const auto& pm : per_period) {
        nlohmann::json e;
        e["cluster_model"] = pm.cluster_model.to_json();
        e["tree"] = pm.tree.to_json();
        nlohmann::json lims = nlohmann::json::array();
        for (const auto& lim : pm.limits)
            lims.push_back({{"load_min", lim.load_min},
                            {"load_max", lim.load_max},
                            {"temp_min", lim.temp_min},
                            {"temp_max", lim.temp_max}});
        e["limits"] = std::move(lims);
        nlohmann::json reps = nlohmann::json::array();
        for (const auto& rep : pm.reports) reps.push_back(rep.to_json());
        e["reports"] = std::move(reps);
        per.push_back(std::move(e));
    }
    j["per_period"] = std::move(per);
    return j;
}

ModelBundle ModelBundle::from_json(const nlohmann::json& j) {
    ModelBundle b;
    b.schema_version = j.at("schema_version").get<int>();
    if (b.schema_version != 1)
        fail(ErrorKind::validation, "unsupported bundle schema version " + std::to_string(b.schema_version));
    b.building = j.at("building").get<std::string>();
    b.periods = j.at("periods").get<int>();
    b.mode = band::fit_mode_from_string(j.at("mode").get<std::string>());
    b.alpha = j.at("alpha").get<double>();
    b.grid_size = j.at("grid_size").get<int>();
    b.shared_beta = j.at("shared_beta").get<bool>();
    b.num_clusters = j.at("num_clusters").get<int>();
    b.config_hash = j.at("config_hash").get<std::string>();
    for (const auto& p : j.at("cv_curve")) {
        CvPoint pt;
        pt.clusters = p.at("clusters").get<int>();
        pt.cv_rmse = p.at("cv_rmse").get<double>();
        pt.mean_tree_accuracy = p.at("mean_tree_accuracy").get<double>();
        b.cv_curve.push_back(pt);
    }
    for (const auto& e : j.at("per_period")) {
        PeriodModel pm;
        pm.cluster_model = clustering::ClusterModel::from_json(e.at("cluster_model"));
        pm.tree = selector::SelectorTree::from_json(e.at("tree"));
        for (const auto& lim : e.at("limits")) {
            region::LimitEstimates l;
            l.load_min = lim.at("load_min").get<double>();
            l.load_max = lim.at("load_max").get<double>();
            l.temp_min = lim.at("temp_min").get<double>();
            l.temp_max = lim.at("temp_max").get<double>();
            pm.limits.push_back(l);
        }
        for (const auto& rep : e.at("reports"))
            pm.reports.push_back(band::BlseFitReport::from_json(rep));
        b.per_period.push_back(std::move(pm));
    }
    if (static_cast<int>(b.per_period.size()) != b.periods)
        fail(ErrorKind::validation, "bundle period count mismatch");
    return b;
}

void save_bundle(const ModelBundle& bundle, const std::string& path) {
    std::ofstream out(path);
    if (!out) fail(ErrorKind::io, "cannot open '" + path + "' for writing");
    out << bundle.to_json().dump(1) << "\n";
    out.close();
    if (!out) fail(ErrorKind::io, "failed writing '" + path + "'");
}

ModelBundle load_bundle(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::io, "cannot open bundle '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        fail(ErrorKind::parse, "bundle '" + path + "': " + e.what());
    }
    return ModelBundle::from_json(j);
}

}  // namespace buildflex::bundle
