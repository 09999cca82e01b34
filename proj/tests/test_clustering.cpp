#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "clustering.hpp"
#include "common.hpp"
#include "support/oracles.hpp"
#include "synthetic_plant.hpp"

using namespace buildflex;
using namespace buildflex::clustering;

namespace {

Eigen::MatrixXd random_points(int dim, int n, std::uint64_t seed, double spread = 1.0) {
    Rng rng(seed);
    Eigen::MatrixXd m(dim, n);
    for (int c = 0; c < n; ++c)
        for (int r = 0; r < dim; ++r) m(r, c) = spread * rng.normal();
    return m;
}

double within_sse(const Eigen::MatrixXd& pts, const KmeansResult& res) {
    double sse = 0.0;
    for (int i = 0; i < pts.cols(); ++i)
        sse += (pts.col(i) - res.centroids.col(res.assignment[i])).squaredNorm();
    return sse;
}

}  // namespace

TEST_CASE("normalize_rows centers and scales each row") {
    Eigen::MatrixXd w(2, 3);
    w << 1, 2, 3, 5, 5, 5;
    auto [normed, params] = normalize_rows(w);
    double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    CHECK(normed(0, 0) == doctest::Approx(-inv_sqrt2).epsilon(1e-12));
    CHECK(normed(0, 1) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(normed(0, 2) == doctest::Approx(inv_sqrt2).epsilon(1e-12));
    // constant row maps to zero and is flagged
    CHECK(normed.row(1).cwiseAbs().maxCoeff() == 0.0);
    CHECK(params.degenerate[1]);
    CHECK(!params.degenerate[0]);
    CHECK(params.scale[1] == 0.0);
}

TEST_CASE("normalized rows have zero mean and unit or zero norm") {
    Eigen::MatrixXd w = random_points(6, 40, 5, 3.0);
    w.row(3).setConstant(7.0);
    auto [normed, params] = normalize_rows(w);
    for (int r = 0; r < normed.rows(); ++r) {
        CHECK(std::abs(normed.row(r).mean()) < 1e-12);
        double norm = normed.row(r).norm();
        CHECK((std::abs(norm - 1.0) < 1e-12 || norm == 0.0));
    }
    // replaying the transform on a column reproduces the normalized column
    Eigen::VectorXd z = params.apply(w.col(4));
    CHECK((z - normed.col(4)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("kmeans with one cluster returns the mean") {
    Eigen::MatrixXd pts = random_points(3, 25, 42);
    KmeansResult res = kmeans(pts, 1, 7);
    Eigen::VectorXd mean = pts.rowwise().mean();
    CHECK((res.centroids.col(0) - mean).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(std::all_of(res.assignment.begin(), res.assignment.end(), [](int c) { return c == 0; }));
}

TEST_CASE("kmeans recovers well-separated clouds exactly") {
    Rng rng(12);
    Eigen::MatrixXd pts(2, 30);
    std::vector<int> truth(30);
    for (int i = 0; i < 30; ++i) {
        bool second = i >= 15;
        truth[i] = second;
        pts(0, i) = (second ? 50.0 : 0.0) + rng.uniform(-1.0, 1.0);
        pts(1, i) = (second ? 50.0 : 0.0) + rng.uniform(-1.0, 1.0);
    }
    KmeansResult res = kmeans(pts, 2, 3);
    for (int i = 1; i < 30; ++i)
        CHECK((res.assignment[i] == res.assignment[0]) == (truth[i] == truth[0]));
}

TEST_CASE("kmeans reaches the exhaustive optimum on tiny instances") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        Eigen::MatrixXd pts = random_points(3, 6, seed * 31);
        KmeansResult res = kmeans(pts, 2, seed, 50);
        double oracle = oracles::best_two_partition_sse(pts);
        CHECK(res.within_cluster_sse <= oracle * (1.0 + 1e-9));
        CHECK(res.within_cluster_sse == doctest::Approx(within_sse(pts, res)).epsilon(1e-12));
    }
}

TEST_CASE("within-cluster SSE is non-increasing across Lloyd iterations") {
    Eigen::MatrixXd pts = random_points(4, 60, 15);
    KmeansResult res = kmeans(pts, 4, 2, 1);
    for (std::size_t i = 1; i < res.sse_history.size(); ++i)
        CHECK(res.sse_history[i] <= res.sse_history[i - 1] + 1e-9);
}

TEST_CASE("kmeans is deterministic per seed and validates inputs") {
    Eigen::MatrixXd pts = random_points(3, 20, 8);
    KmeansResult a = kmeans(pts, 3, 11);
    KmeansResult b = kmeans(pts, 3, 11);
    CHECK(a.assignment == b.assignment);
    CHECK((a.centroids - b.centroids).cwiseAbs().maxCoeff() == 0.0);
    CHECK_THROWS_AS(kmeans(pts, 21, 1), Error);
    CHECK_THROWS_AS(kmeans(pts, 0, 1), Error);
}

TEST_CASE("cluster_period partitions all days and is deterministic") {
    plant::PlantConfig cfg;
    TrainingDataset ds = plant::generate_dataset(cfg, 60, 24, 404);
    ClusterModel a = cluster_period(ds, 8, 3, 5);
    ClusterModel b = cluster_period(ds, 8, 3, 5);
    std::set<int> seen;
    std::size_t total = 0;
    for (const auto& group : a.assignments) {
        total += group.size();
        for (int k : group) CHECK(seen.insert(k).second);
    }
    CHECK(total == 60);
    for (int c = 0; c < 3; ++c) CHECK(a.assignments[c] == b.assignments[c]);

    ClusterModel single = cluster_period(ds, 8, 1, 5);
    CHECK(single.assignments[0].size() == 60);
}

TEST_CASE("weekday/weekend structure is recovered") {
    plant::PlantConfig cfg;
    cfg.noise_std_c = 0.02;
    TrainingDataset ds = plant::generate_dataset(cfg, 140, 24, 99);
    for (int t : {3, 12, 20}) {
        ClusterModel model = cluster_period(ds, t, 2, 13);
        // majority label per cluster against the weekday/weekend truth
        int agree = 0;
        for (int c = 0; c < 2; ++c) {
            int weekend = 0;
            for (int k : model.assignments[c])
                if (is_weekend(ds.days[k].explanatory[0].day_of_week)) ++weekend;
            int majority = std::max(weekend, static_cast<int>(model.assignments[c].size()) - weekend);
            agree += majority;
        }
        CHECK(static_cast<double>(agree) / ds.num_days() >= 0.95);
    }
}

TEST_CASE("assignments are invariant under per-row affine rescaling") {
    plant::PlantConfig cfg;
    TrainingDataset ds = plant::generate_dataset(cfg, 50, 24, 7);
    const int t = 6;
    ClusterModel base = cluster_period(ds, t, 2, 3);

    TrainingDataset scaled = ds;
    for (auto& day : scaled.days) {
        for (auto& v : day.load_kw) v = 4.0 * v + 2.0;          // affine in every load row
        for (auto& v : day.outdoor_temp_c) v = 0.5 * v + 10.0;  // and the outdoor row
    }
    ClusterModel other = cluster_period(scaled, t, 2, 3);
    for (int c = 0; c < 2; ++c) CHECK(base.assignments[c] == other.assignments[c]);
}

TEST_CASE("labeling a training column returns its own cluster") {
    plant::PlantConfig cfg;
    TrainingDataset ds = plant::generate_dataset(cfg, 40, 24, 21);
    const int t = 10;
    ClusterModel model = cluster_period(ds, t, 2, 9);
    for (int c = 0; c < 2; ++c)
        for (int k : model.assignments[c]) CHECK(model.label(build_feature_vector(ds, k, t)) == c);
}

TEST_CASE("cluster model json round-trip") {
    plant::PlantConfig cfg;
    TrainingDataset ds = plant::generate_dataset(cfg, 30, 12, 3);
    ClusterModel model = cluster_period(ds, 5, 2, 17);
    ClusterModel back = ClusterModel::from_json(model.to_json());
    CHECK(back.period == model.period);
    CHECK(back.assignments == model.assignments);
    CHECK((back.centroids - model.centroids).cwiseAbs().maxCoeff() == 0.0);
    CHECK((back.normalization.mean - model.normalization.mean).cwiseAbs().maxCoeff() == 0.0);
    for (int k = 0; k < 30; ++k)
        CHECK(back.label(build_feature_vector(ds, k, 5)) == model.label(build_feature_vector(ds, k, 5)));
}
