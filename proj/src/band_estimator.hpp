#pragma once

#include <Eigen/Dense>
#include <vector>

#include <json.hpp>

#include "data_model.hpp"

namespace buildflex::band {

enum class FitMode { cooling, heating };
const char* to_string(FitMode mode);
FitMode fit_mode_from_string(const std::string& s);

// One training point for a (cluster, period) fit.
struct BandSample {
    Eigen::VectorXd load_prefix;  // loads for periods 1..t
    double initial_indoor = 0.0;
    double outdoor = 0.0;
    double indoor = 0.0;  // measured value the band should cover

    Eigen::Vector3d context() const { return {initial_indoor, outdoor, 1.0}; }
};

struct BandData {
    int period = 0;
    std::vector<BandSample> points;
};

BandData collect_band_data(const TrainingDataset& ds, const std::vector<int>& day_indices, int period);

// Affine upper/lower indoor-temperature estimates for one (cluster, period):
//   upper(load, ctx) = upper_load_coef . load_prefix + upper_ctx_coef . [phi0, outdoor, 1]
// Cooling data constrains the load coefficients <= 0 (more load cools),
// heating flips the sign.
struct BandParameters {
    int period = 0;
    Eigen::VectorXd upper_load_coef;
    Eigen::VectorXd lower_load_coef;
    Eigen::Vector3d upper_ctx_coef = Eigen::Vector3d::Zero();
    Eigen::Vector3d lower_ctx_coef = Eigen::Vector3d::Zero();
    FitMode mode = FitMode::cooling;

    double beta = 0.0;       // chosen error/width weight
    double pi_out = 0.0;     // achieved out-of-band fraction on training data
    double band_area = 0.0;  // summed band widths over training points
    bool alpha_unmet = false;

    nlohmann::json to_json() const;
    static BandParameters from_json(const nlohmann::json& j);
};

struct BandPrediction {
    double lower = 0.0;
    double upper = 0.0;
};

BandPrediction predict_band(const BandParameters& bp, double initial_indoor, double outdoor,
                            const Eigen::VectorXd& load_prefix);

// Fraction of points on or outside a band edge (the comparisons are
// non-strict, so a point exactly on an edge counts as out; a collapsed band
// therefore reports 1).
double compute_pi_out(const BandParameters& bp, const BandData& data);

// Hinge RMSE: zero inside the band, distance to the nearest violated edge
// outside.
double compute_band_rmse(const BandParameters& bp, const BandData& data);

// RMSE of the band midpoint against the measurements; the metric used when a
// collapsed band serves as a central estimate.
double compute_central_rmse(const BandParameters& bp, const BandData& data);

// One solve of the band-fitting QP at fixed beta:
//   min  beta * sum_k (JU_k + JL_k)^2 + (1 - beta) * sum_k width_k
// over affine band parameters with hinge errors JU/JL >= 0, upper >= lower on
// every training point, and the mode's sign constraints. A 1e-9 regularizer
// on both terms keeps the endpoint problems (beta = 0 collapses the band,
// beta = 1 leaves the width free) well posed.
struct BlseSolution {
    BandParameters params;
    double beta = 0.0;
    double sse = 0.0;        // sum of squared hinge errors at the solution
    double band_area = 0.0;  // sum of widths over training points
    double pi_out = 0.0;
    double objective = 0.0;  // beta * sse + (1 - beta) * band_area
};

BlseSolution solve_blsef(const BandData& data, double beta, FitMode mode, double tolerance = 1e-8);

// Full beta-grid sweep: beta_i = (i-1)/(M-1) for i = 1..M. Returns every
// per-beta record plus the selected index: the smallest band area among
// grid points with pi_out <= alpha, ties to the smaller beta. When no grid
// point qualifies the beta = 1 fit is returned flagged `alpha_unmet`.
struct BlseFitReport {
    std::vector<BlseSolution> solutions;
    int selected = -1;
    bool alpha_unmet = false;

    const BandParameters& chosen() const { return solutions[selected].params; }

    nlohmann::json to_json() const;
    static BlseFitReport from_json(const nlohmann::json& j);
};

BlseFitReport blse_sweep(const BandData& data, double alpha, int grid_size, FitMode mode,
                         double tolerance = 1e-8);

// Re-selects from an existing sweep at a different alpha without re-solving.
void reselect(BlseFitReport& report, double alpha);

// Shared-beta variant: one grid index per period chosen from the
// size-weighted out-fraction and summed band area across clusters.
void reselect_shared(std::vector<BlseFitReport*>& reports, const std::vector<int>& cluster_sizes,
                     double alpha);

// Collapsed-band least squares (upper == lower) with the mode's sign
// constraints; the central estimate used for model comparison.
BandParameters fit_central(const BandData& data, FitMode mode, double tolerance = 1e-10);

}  // namespace buildflex::band
