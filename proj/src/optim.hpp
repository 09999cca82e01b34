#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <string>

namespace buildflex::optim {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Vector = Eigen::VectorXd;

// Convex program
//   minimize    1/2 x' Q x + c' x
//   subject to  A x  = b
//               G x <= h
//               lower <= x <= upper   (optional; empty vectors mean free)
//
// Q must be symmetric positive semidefinite (zero for an LP).
struct ConvexProgram {
    int num_vars = 0;
    SparseMatrix quadratic_cost;  // n x n, may be empty
    Vector linear_cost;           // n
    SparseMatrix eq_matrix;       // m_eq x n
    Vector eq_rhs;
    SparseMatrix ineq_matrix;     // m_in x n
    Vector ineq_rhs;
    Vector lower_bounds;          // n or empty; -inf entries allowed
    Vector upper_bounds;          // n or empty; +inf entries allowed
};

enum class SolveStatus { optimal, infeasible, unbounded, max_iter };

const char* to_string(SolveStatus status);

struct SolveResult {
    SolveStatus status = SolveStatus::max_iter;
    Vector x;
    double objective = 0.0;
    // Scaled KKT residuals at the returned point.
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    double duality_gap = 0.0;
    int iterations = 0;
};

struct SolveOptions {
    double tolerance = 1e-8;
    int max_iterations = 200;
};

// Primal-dual interior point (Mehrotra predictor-corrector) over a sparse
// quasi-definite KKT system. Deterministic: identical inputs give identical
// iterates and results.
SolveResult solve(const ConvexProgram& prog, const SolveOptions& options = {});

// KKT residuals of a candidate point against the program, used by tests.
struct KktResiduals {
    double stationarity = 0.0;
    double primal_feasibility = 0.0;
    double complementarity = 0.0;
};

}  // namespace buildflex::optim
