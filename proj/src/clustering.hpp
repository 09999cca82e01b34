#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include <json.hpp>

#include "data_model.hpp"

namespace buildflex::clustering {

// Per-row (feature dimension) centering and scaling parameters for the
// clustering matrix. Zero-variance rows are flagged and mapped to zero so
// they carry no weight in the distance.
struct RowNormalization {
    Eigen::VectorXd mean;
    Eigen::VectorXd scale;  // 1 / centered row norm; 0 for degenerate rows
    std::vector<bool> degenerate;

    Eigen::VectorXd apply(const Eigen::VectorXd& raw) const;
};

// Center each row to mean zero, scale to unit l2 norm. Columns are data
// points. Returns the normalized matrix and the parameters to replay the
// transform on new points.
std::pair<Eigen::MatrixXd, RowNormalization> normalize_rows(const Eigen::MatrixXd& w);

struct KmeansResult {
    Eigen::MatrixXd centroids;             // dim x C
    std::vector<int> assignment;           // per column
    double within_cluster_sse = 0.0;
    std::vector<double> sse_history;       // per Lloyd iteration of the winning run
    int iterations = 0;
};

// Lloyd's iteration with k-means++ seeding, best of `restarts` runs by
// within-cluster SSE. Runs to an assignment fixpoint or 300 iterations.
// An emptied cluster is reseeded at the point farthest from its centroid.
// Deterministic per seed.
KmeansResult kmeans(const Eigen::MatrixXd& points, int num_clusters, std::uint64_t seed, int restarts = 10);

// Per-period cluster model: the partition of training days plus what is
// needed to place a new feature vector.
struct ClusterModel {
    int period = 0;
    int num_clusters = 0;
    Eigen::MatrixXd centroids;  // normalized space, (t+3) x C
    std::vector<std::vector<int>> assignments;  // day indices per cluster
    RowNormalization normalization;

    int label(const Eigen::VectorXd& raw_feature) const;

    nlohmann::json to_json() const;
    static ClusterModel from_json(const nlohmann::json& j);
};

ClusterModel cluster_period(const TrainingDataset& ds, int period, int num_clusters, std::uint64_t seed,
                            int restarts = 10);

}  // namespace buildflex::clustering
