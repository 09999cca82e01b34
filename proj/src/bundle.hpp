#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "band_estimator.hpp"
#include "clustering.hpp"
#include "model_selector.hpp"
#include "region_builder.hpp"

namespace buildflex::bundle {

// Everything trained for one period: the day partition, the selector tree,
// and per-cluster limits plus the full beta-sweep records (kept so regions
// can be re-derived at a different robustness level without re-solving).
struct PeriodModel {
    clustering::ClusterModel cluster_model;
    selector::SelectorTree tree;
    std::vector<region::LimitEstimates> limits;   // per cluster
    std::vector<band::BlseFitReport> reports;     // per cluster
};

struct CvPoint {
    int clusters = 0;
    double cv_rmse = 0.0;
    double mean_tree_accuracy = 0.0;
};

struct ModelBundle {
    int schema_version = 1;
    std::string building;
    int periods = 0;
    band::FitMode mode = band::FitMode::cooling;
    double alpha = 0.05;
    int grid_size = 100;
    bool shared_beta = false;
    int num_clusters = 1;
    std::vector<CvPoint> cv_curve;
    std::vector<PeriodModel> per_period;  // index t-1
    std::string config_hash;

    // Region parameters for (period, cluster) at the bundle's alpha, or at an
    // override re-selected from the stored sweep.
    region::RegionParameters region_params(int period, int cluster, double alpha_override = -1.0) const;

    nlohmann::json to_json() const;
    static ModelBundle from_json(const nlohmann::json& j);
};

void save_bundle(const ModelBundle& bundle, const std::string& path);
ModelBundle load_bundle(const std::string& path);

}  // namespace buildflex::bundle
