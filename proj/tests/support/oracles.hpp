#pragma once

// Independent reference implementations used to check the library's
// numerical paths. Everything here is deliberately brute force and kept
// free of the production solve paths.

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "band_estimator.hpp"
#include "data_model.hpp"
#include "optim.hpp"

namespace oracles {

// Active-set enumeration for small dense convex programs (n <= ~8,
// inequality rows <= ~14): solves the KKT system for every active subset and
// keeps the best feasible point with nonnegative multipliers.
// Requires a strictly feasible bounded program.
double enumerate_qp_optimum(const Eigen::MatrixXd& quadratic, const Eigen::VectorXd& linear,
                            const Eigen::MatrixXd& ineq, const Eigen::VectorXd& ineq_rhs);

// Projected gradient descent (multi-start, backtracking) on the band-fitting
// objective over the affine band parameters, with the ordering constraint
// handled by a quadratic penalty. Returns the best objective value found.
double band_objective_descent(const buildflex::band::BandData& data, double beta,
                              buildflex::band::FitMode mode, int starts = 8, int iterations = 60000);

// Band-fitting objective of explicit parameters (hinge errors at their
// minimum), without the ordering penalty.
double band_objective(const buildflex::band::BandData& data, double beta,
                      const Eigen::VectorXd& upper, const Eigen::VectorXd& lower);

// Exhaustive 2-partition enumeration: minimum within-cluster SSE over all
// assignments of the columns into two non-empty groups.
double best_two_partition_sse(const Eigen::MatrixXd& points);

// Grid-search oracle for the two-stage toy program with a box-only region:
// minimizes tau . pb + E v |pb - (pw + eps) + dev|_1 over pb and per-scenario
// pw on `step`-spaced grids within the box.
struct ToyProgram {
    Eigen::VectorXd price;       // T
    double balancing_price = 1.0;
    Eigen::VectorXd box_low, box_high;  // T
    Eigen::MatrixXd wind_dev;    // T x W
    Eigen::VectorXd wind_prob;   // W
    Eigen::MatrixXd noise;       // T x B
    Eigen::VectorXd noise_prob;  // B
};
double toy_grid_optimum(const ToyProgram& toy, double step);

// Dataset following an exact linear thermal recursion
//   indoor[t+1] = indoor[t] + a (indoor[t] - outdoor) + b hvac[t+1] + d
// with constant per-day outdoor temperature and constant base load, so both
// the band hypothesis and the per-period regression baseline can represent
// it exactly.
struct LinearPlant {
    double a = -0.25;
    double b = -0.08;
    double d = 0.6;
    double base_load = 2.0;
    double hvac_cap = 10.0;
};
buildflex::TrainingDataset generate_linear_dataset(const LinearPlant& plant, int days, int periods,
                                                   std::uint64_t seed);

}  // namespace oracles
