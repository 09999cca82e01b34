#include "clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "common.hpp"

namespace buildflex::clustering {

Eigen::VectorXd RowNormalization::apply(const Eigen::VectorXd& raw) const {
    if (raw.size() != mean.size()) fail(ErrorKind::invalid_argument, "feature vector size mismatch");
    return ((raw - mean).array() * scale.array()).matrix();
}

std::pair<Eigen::MatrixXd, RowNormalization> normalize_rows(const Eigen::MatrixXd& w) {
    if (w.cols() < 1) fail(ErrorKind::invalid_argument, "normalize_rows: no data columns");
    RowNormalization params;
    params.mean.resize(w.rows());
    params.scale.resize(w.rows());
    params.degenerate.assign(w.rows(), false);
    Eigen::MatrixXd out(w.rows(), w.cols());
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
        double mean = w.row(r).mean();
        Eigen::RowVectorXd centered = w.row(r).array() - mean;
        double norm = centered.norm();
        params.mean[r] = mean;
        if (norm > 0.0) {
            params.scale[r] = 1.0 / norm;
            out.row(r) = centered / norm;
        } else {
            params.scale[r] = 0.0;
            params.degenerate[r] = true;
            out.row(r).setZero();
        }
    }
    return {out, params};
}

namespace {

double squared_distance(const Eigen::MatrixXd& pts, int col, const Eigen::VectorXd& center) {
    return (pts.col(col) - center).squaredNorm();
}

int nearest_centroid(const Eigen::MatrixXd& pts, int col, const Eigen::MatrixXd& centroids) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int c = 0; c < centroids.cols(); ++c) {
        double d = squared_distance(pts, col, centroids.col(c));
        if (d < best_d) {
            best_d = d;
            best = c;
        }
    }
    return best;
}

Eigen::MatrixXd seed_plus_plus(const Eigen::MatrixXd& pts, int k, Rng& rng) {
    const int n = static_cast<int>(pts.cols());
    Eigen::MatrixXd centroids(pts.rows(), k);
    centroids.col(0) = pts.col(static_cast<int>(rng.below(n)));
    Eigen::VectorXd dist2(n);
    for (int i = 0; i < n; ++i) dist2[i] = squared_distance(pts, i, centroids.col(0));
    for (int c = 1; c < k; ++c) {
        double total = dist2.sum();
        int chosen;
        if (total <= 0.0) {
            chosen = static_cast<int>(rng.below(n));
        } else {
            double target = rng.uniform() * total;
            double acc = 0.0;
            chosen = n - 1;
            for (int i = 0; i < n; ++i) {
                acc += dist2[i];
                if (acc >= target) {
                    chosen = i;
                    break;
                }
            }
        }
        centroids.col(c) = pts.col(chosen);
        for (int i = 0; i < n; ++i)
            dist2[i] = std::min(dist2[i], squared_distance(pts, i, centroids.col(c)));
    }
    return centroids;
}

KmeansResult lloyd(const Eigen::MatrixXd& pts, Eigen::MatrixXd centroids) {
    const int n = static_cast<int>(pts.cols());
    const int k = static_cast<int>(centroids.cols());
    KmeansResult res;
    res.assignment.assign(n, -1);
    std::vector<int> counts(k);
    for (int iter = 0; iter < 300; ++iter) {
        bool changed = false;
        std::fill(counts.begin(), counts.end(), 0);
        for (int i = 0; i < n; ++i) {
            int c = nearest_centroid(pts, i, centroids);
            if (c != res.assignment[i]) changed = true;
            res.assignment[i] = c;
            ++counts[c];
        }
        // Reseed any emptied centroid at the point farthest from its current
        // centroid, then redo the assignment pass.
        bool reseeded = false;
        for (int c = 0; c < k; ++c) {
            if (counts[c] > 0) continue;
            int far_i = 0;
            double far_d = -1.0;
            for (int i = 0; i < n; ++i) {
                double d = squared_distance(pts, i, centroids.col(res.assignment[i]));
                if (d > far_d && counts[res.assignment[i]] > 1) {
                    far_d = d;
                    far_i = i;
                }
            }
            centroids.col(c) = pts.col(far_i);
            --counts[res.assignment[far_i]];
            res.assignment[far_i] = c;
            counts[c] = 1;
            reseeded = true;
        }
        centroids.setZero();
        for (int i = 0; i < n; ++i) centroids.col(res.assignment[i]) += pts.col(i);
        for (int c = 0; c < k; ++c)
            if (counts[c] > 0) centroids.col(c) /= counts[c];

        double sse = 0.0;
        for (int i = 0; i < n; ++i) sse += squared_distance(pts, i, centroids.col(res.assignment[i]));
        res.sse_history.push_back(sse);
        res.iterations = iter + 1;
        if (!changed && !reseeded) break;
    }
    res.centroids = centroids;
    res.within_cluster_sse = res.sse_history.back();
    return res;
}

}  // namespace

KmeansResult kmeans(const Eigen::MatrixXd& points, int num_clusters, std::uint64_t seed, int restarts) {
    const int n = static_cast<int>(points.cols());
    if (num_clusters < 1) fail(ErrorKind::invalid_argument, "kmeans: need at least one cluster");
    if (num_clusters > n)
        fail(ErrorKind::invalid_argument, "kmeans: " + std::to_string(num_clusters) + " clusters for " +
                                              std::to_string(n) + " points");
    if (restarts < 1) restarts = 1;
    Rng master(seed);
    KmeansResult best;
    best.within_cluster_sse = std::numeric_limits<double>::infinity();
    for (int r = 0; r < restarts; ++r) {
        Rng run = master.fork(static_cast<std::uint64_t>(r) + 1);
        KmeansResult res = lloyd(points, seed_plus_plus(points, num_clusters, run));
        if (res.within_cluster_sse < best.within_cluster_sse) best = std::move(res);
    }
    return best;
}

int ClusterModel::label(const Eigen::VectorXd& raw_feature) const {
    Eigen::VectorXd z = normalization.apply(raw_feature);
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int c = 0; c < centroids.cols(); ++c) {
        double d = (z - centroids.col(c)).squaredNorm();
        if (d < best_d) {
            best_d = d;
            best = c;
        }
    }
    return best;
}

ClusterModel cluster_period(const TrainingDataset& ds, int period, int num_clusters, std::uint64_t seed,
                            int restarts) {
    const int n = ds.num_days();
    if (n < 1) fail(ErrorKind::invalid_argument, "cluster_period: empty dataset");
    Eigen::MatrixXd w(period + 3, n);
    for (int k = 0; k < n; ++k) w.col(k) = build_feature_vector(ds, k, period);
    auto [normed, params] = normalize_rows(w);
    KmeansResult km = kmeans(normed, num_clusters, seed, restarts);

    ClusterModel model;
    model.period = period;
    model.num_clusters = num_clusters;
    model.centroids = km.centroids;
    model.normalization = params;
    model.assignments.assign(num_clusters, {});
    for (int k = 0; k < n; ++k) model.assignments[km.assignment[k]].push_back(k);
    return model;
}

nlohmann::json ClusterModel::to_json() const {
    nlohmann::json j;
    j["period"] = period;
    j["num_clusters"] = num_clusters;
    std::vector<std::vector<double>> cent;
    for (int c = 0; c < centroids.cols(); ++c)
        cent.emplace_back(centroids.col(c).data(), centroids.col(c).data() + centroids.rows());
    j["centroids"] = cent;
    j["assignments"] = assignments;
    j["row_mean"] = std::vector<double>(normalization.mean.data(), normalization.mean.data() + normalization.mean.size());
    j["row_scale"] =
        std::vector<double>(normalization.scale.data(), normalization.scale.data() + normalization.scale.size());
    j["degenerate_rows"] = normalization.degenerate;
    return j;
}

ClusterModel ClusterModel::from_json(const nlohmann::json& j) {
    ClusterModel model;
    model.period = j.at("period").get<int>();
    model.num_clusters = j.at("num_clusters").get<int>();
    auto cent = j.at("centroids").get<std::vector<std::vector<double>>>();
    if (!cent.empty()) {
        model.centroids.resize(static_cast<Eigen::Index>(cent[0].size()), static_cast<Eigen::Index>(cent.size()));
        for (std::size_t c = 0; c < cent.size(); ++c)
            model.centroids.col(static_cast<Eigen::Index>(c)) =
                Eigen::Map<const Eigen::VectorXd>(cent[c].data(), static_cast<Eigen::Index>(cent[c].size()));
    }
    model.assignments = j.at("assignments").get<std::vector<std::vector<int>>>();
    auto mean = j.at("row_mean").get<std::vector<double>>();
    auto scale = j.at("row_scale").get<std::vector<double>>();
    model.normalization.mean = Eigen::Map<const Eigen::VectorXd>(mean.data(), static_cast<Eigen::Index>(mean.size()));
    model.normalization.scale =
        Eigen::Map<const Eigen::VectorXd>(scale.data(), static_cast<Eigen::Index>(scale.size()));
    model.normalization.degenerate = j.at("degenerate_rows").get<std::vector<bool>>();
    return model;
}

}  // namespace buildflex::clustering
