#include "optim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "common.hpp"

namespace buildflex::optim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kStaticReg = 1e-9;   // quasi-definite shift on the KKT blocks
constexpr double kStepScale = 0.995;  // fraction-to-boundary

double inf_norm(const Vector& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

void check_dims(const ConvexProgram& p) {
    const int n = p.num_vars;
    if (n <= 0) fail(ErrorKind::invalid_argument, "program has no variables");
    if (p.linear_cost.size() != n) fail(ErrorKind::invalid_argument, "linear cost size mismatch");
    if (p.quadratic_cost.size() != 0 &&
        (p.quadratic_cost.rows() != n || p.quadratic_cost.cols() != n))
        fail(ErrorKind::invalid_argument, "quadratic cost dimension mismatch");
    if (p.eq_matrix.rows() != p.eq_rhs.size() || (p.eq_matrix.size() != 0 && p.eq_matrix.cols() != n))
        fail(ErrorKind::invalid_argument, "equality block dimension mismatch");
    if (p.ineq_matrix.rows() != p.ineq_rhs.size() ||
        (p.ineq_matrix.size() != 0 && p.ineq_matrix.cols() != n))
        fail(ErrorKind::invalid_argument, "inequality block dimension mismatch");
    if (p.lower_bounds.size() != 0 && p.lower_bounds.size() != n)
        fail(ErrorKind::invalid_argument, "lower bounds size mismatch");
    if (p.upper_bounds.size() != 0 && p.upper_bounds.size() != n)
        fail(ErrorKind::invalid_argument, "upper bounds size mismatch");
}

void check_psd(const SparseMatrix& q) {
    if (q.size() == 0 || q.nonZeros() == 0) return;
    double scale = 0.0;
    for (int k = 0; k < q.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(q, k); it; ++it) scale = std::max(scale, std::abs(it.value()));
    SparseMatrix diff = SparseMatrix(q.transpose()) - q;
    double asym = 0.0;
    for (int k = 0; k < diff.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(diff, k); it; ++it) asym = std::max(asym, std::abs(it.value()));
    if (asym > 1e-9 * (1.0 + scale))
        fail(ErrorKind::invalid_argument, "quadratic cost is not symmetric");
    SparseMatrix shifted = q;
    SparseMatrix eye(q.rows(), q.cols());
    eye.setIdentity();
    shifted += (1e-10 * (1.0 + scale)) * eye;
    Eigen::SimplicialLDLT<SparseMatrix> ldlt(shifted);
    if (ldlt.info() != Eigen::Success || ldlt.vectorD().minCoeff() < -1e-7 * (1.0 + scale))
        fail(ErrorKind::invalid_argument, "quadratic cost is not positive semidefinite");
}

// Folds finite variable bounds into extra inequality rows.
void append_bounds(const ConvexProgram& p, std::vector<Eigen::Triplet<double>>& trips,
                   std::vector<double>& rhs, int base_row) {
    int row = base_row;
    if (p.upper_bounds.size() != 0) {
        for (int i = 0; i < p.num_vars; ++i) {
            if (p.upper_bounds[i] < kInf) {
                trips.emplace_back(row, i, 1.0);
                rhs.push_back(p.upper_bounds[i]);
                ++row;
            }
        }
    }
    if (p.lower_bounds.size() != 0) {
        for (int i = 0; i < p.num_vars; ++i) {
            if (p.lower_bounds[i] > -kInf) {
                trips.emplace_back(row, i, -1.0);
                rhs.push_back(-p.lower_bounds[i]);
                ++row;
            }
        }
    }
}

struct Workspace {
    int n = 0;
    int m_eq = 0;
    int m_in = 0;
    SparseMatrix Q;   // n x n (possibly empty pattern)
    SparseMatrix A;   // m_eq x n
    SparseMatrix G;   // m_in x n (bounds folded in)
    SparseMatrix Gt;  // cached transpose
    Vector c, b, h;
};

Workspace build_workspace(const ConvexProgram& p) {
    Workspace w;
    w.n = p.num_vars;
    w.c = p.linear_cost;
    w.Q = p.quadratic_cost.size() ? p.quadratic_cost : SparseMatrix(w.n, w.n);
    w.A = p.eq_matrix.size() ? p.eq_matrix : SparseMatrix(0, w.n);
    w.b = p.eq_rhs;
    w.m_eq = static_cast<int>(w.A.rows());

    std::vector<Eigen::Triplet<double>> trips;
    std::vector<double> rhs(p.ineq_rhs.data(), p.ineq_rhs.data() + p.ineq_rhs.size());
    if (p.ineq_matrix.size()) {
        for (int k = 0; k < p.ineq_matrix.outerSize(); ++k)
            for (SparseMatrix::InnerIterator it(p.ineq_matrix, k); it; ++it)
                trips.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
    }
    append_bounds(p, trips, rhs, static_cast<int>(p.ineq_rhs.size()));
    w.m_in = static_cast<int>(rhs.size());
    w.G = SparseMatrix(w.m_in, w.n);
    w.G.setFromTriplets(trips.begin(), trips.end());
    w.Gt = SparseMatrix(w.G.transpose());
    w.h = Eigen::Map<Vector>(rhs.data(), static_cast<Eigen::Index>(rhs.size()));
    return w;
}

// KKT matrix [Q + G'DG + dI, A'; A, -dI] (full symmetric storage).
SparseMatrix assemble_kkt(const Workspace& w, const Vector& d, double reg) {
    const int dim = w.n + w.m_eq;
    SparseMatrix H;
    if (w.m_in > 0) {
        SparseMatrix GtD = w.Gt * d.asDiagonal();
        H = w.Q + SparseMatrix(GtD * w.G);
    } else {
        H = w.Q;
    }
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(H.nonZeros() + 2 * w.A.nonZeros() + dim));
    for (int k = 0; k < H.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(H, k); it; ++it)
            trips.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
    for (int k = 0; k < w.A.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(w.A, k); it; ++it) {
            int r = w.n + static_cast<int>(it.row());
            int c = static_cast<int>(it.col());
            trips.emplace_back(r, c, it.value());
            trips.emplace_back(c, r, it.value());
        }
    for (int i = 0; i < w.n; ++i) trips.emplace_back(i, i, reg);
    for (int i = w.n; i < dim; ++i) trips.emplace_back(i, i, -reg);
    SparseMatrix kkt(dim, dim);
    kkt.setFromTriplets(trips.begin(), trips.end());
    return kkt;
}

class KktSolver {
  public:
    void factor(const Workspace& w, const Vector& d) {
        // Escalate the quasi-definite shift until the factorization holds
        // numerically; iterative refinement against the unshifted system
        // recovers the accuracy.
        double reg = kStaticReg;
        for (int attempt = 0; attempt < 8; ++attempt, reg *= 100.0) {
            kkt_ = assemble_kkt(w, d, reg);
            if (first_) {
                ldlt_.analyzePattern(kkt_);
                first_ = false;
            }
            ldlt_.factorize(kkt_);
            if (ldlt_.info() == Eigen::Success && ldlt_.vectorD().cwiseAbs().minCoeff() > 0.0) {
                kkt0_ = assemble_kkt(w, d, 0.0);
                return;
            }
        }
        fail(ErrorKind::numeric, "KKT factorization failed");
    }

    Vector solve(const Vector& rhs) const {
        Vector x = ldlt_.solve(rhs);
        for (int round = 0; round < 2; ++round) {
            Vector res = rhs - kkt0_ * x;
            Vector dx = ldlt_.solve(res);
            Vector cand = x + dx;
            if ((rhs - kkt0_ * cand).cwiseAbs().maxCoeff() < res.cwiseAbs().maxCoeff())
                x = cand;
            else
                break;
        }
        return x;
    }

  private:
    SparseMatrix kkt_, kkt0_;
    Eigen::SimplicialLDLT<SparseMatrix> ldlt_;
    bool first_ = true;
};

Vector shift_positive(const Vector& v) {
    if (v.size() == 0) return v;
    double m = v.minCoeff();
    if (m > 0) return v;
    return v.array() + (1.0 - m);
}

double step_to_boundary(const Vector& v, const Vector& dv) {
    double alpha = 1.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (dv[i] < 0) alpha = std::min(alpha, -v[i] / dv[i]);
    }
    return alpha;
}

}  // namespace

const char* to_string(SolveStatus status) {
    switch (status) {
        case SolveStatus::optimal: return "optimal";
        case SolveStatus::infeasible: return "infeasible";
        case SolveStatus::unbounded: return "unbounded";
        case SolveStatus::max_iter: return "max_iter";
    }
    return "unknown";
}

SolveResult solve(const ConvexProgram& prog, const SolveOptions& options) {
    check_dims(prog);
    check_psd(prog.quadratic_cost);
    Workspace w = build_workspace(prog);

    const double tol = options.tolerance;
    const double scale_rhs = 1.0 + std::max(inf_norm(w.b), inf_norm(w.h));
    const double scale_cost = 1.0 + inf_norm(w.c);

    KktSolver kkt;
    Vector ones = Vector::Ones(w.m_in);

    // Starting point: least-squares style solve with unit scaling, then the
    // slack/dual estimates shifted strictly positive.
    kkt.factor(w, ones);
    Vector rhs0(w.n + w.m_eq);
    rhs0.head(w.n) = -w.c + (w.m_in ? Vector(w.Gt * w.h) : Vector::Zero(w.n));
    rhs0.tail(w.m_eq) = w.b;
    Vector sol0 = kkt.solve(rhs0);
    Vector x = sol0.head(w.n);
    Vector y = sol0.tail(w.m_eq);
    Vector s, z;
    if (w.m_in > 0) {
        Vector resid = w.h - w.G * x;
        s = shift_positive(resid);
        z = shift_positive(-resid);
    }

    SolveResult result;
    auto finish = [&](SolveStatus status, double rp, double rd, double gap, int iter) {
        result.status = status;
        result.x = x;
        result.objective = 0.5 * x.dot(w.Q * x) + w.c.dot(x);
        result.primal_residual = rp;
        result.dual_residual = rd;
        result.duality_gap = gap;
        result.iterations = iter;
        return result;
    };

    for (int iter = 0; iter <= options.max_iterations; ++iter) {
        Vector Qx = w.Q * x;
        Vector rd = Qx + w.c + (w.m_eq ? Vector(w.A.transpose() * y) : Vector::Zero(w.n));
        if (w.m_in) rd += w.Gt * z;
        Vector rp_eq = w.m_eq ? Vector(w.A * x - w.b) : Vector();
        Vector rp_in = w.m_in ? Vector(w.G * x + s - w.h) : Vector();

        double pobj = 0.5 * x.dot(Qx) + w.c.dot(x);
        double dobj = -0.5 * x.dot(Qx) - (w.m_eq ? w.b.dot(y) : 0.0) - (w.m_in ? w.h.dot(z) : 0.0);
        double gap = std::abs(pobj - dobj) / std::max({1.0, std::abs(pobj), std::abs(dobj)});
        double rp = std::max(inf_norm(rp_eq), inf_norm(rp_in)) / scale_rhs;
        double rdm = inf_norm(rd) / scale_cost;
        double mu = w.m_in ? s.dot(z) / w.m_in : 0.0;

        if (rp <= tol && rdm <= tol && (w.m_in == 0 || gap <= tol))
            return finish(SolveStatus::optimal, rp, rdm, gap, iter);

        // Farkas-style certificate: duals blowing up along a direction that
        // proves the primal constraints inconsistent.
        double dual_scale = inf_norm(y) + inf_norm(z);
        if (dual_scale > 1e6 * scale_cost) {
            Vector aty = w.m_eq ? Vector(w.A.transpose() * y) : Vector::Zero(w.n);
            if (w.m_in) aty += w.Gt * z;
            double cert_res = inf_norm(aty) / dual_scale;
            double cert_obj = ((w.m_eq ? w.b.dot(y) : 0.0) + (w.m_in ? w.h.dot(z) : 0.0)) / dual_scale;
            if (cert_res < 1e-6 && cert_obj < -1e-8)
                return finish(SolveStatus::infeasible, rp, rdm, gap, iter);
        }
        if (inf_norm(x) > 1e13 && pobj < -1e12 * scale_cost)
            return finish(SolveStatus::unbounded, rp, rdm, gap, iter);
        if (iter == options.max_iterations)
            return finish(SolveStatus::max_iter, rp, rdm, gap, iter);

        if (w.m_in == 0) {
            // Equality-constrained QP: one Newton solve lands on the optimum.
            Vector rhs(w.n + w.m_eq);
            rhs.head(w.n) = -rd;
            rhs.tail(w.m_eq) = -rp_eq;
            Vector step = kkt.solve(rhs);
            x += step.head(w.n);
            y += step.tail(w.m_eq);
            continue;
        }

        Vector d(w.m_in);
        for (int i = 0; i < w.m_in; ++i) {
            double v = z[i] / s[i];
            if (!std::isfinite(v)) v = 1e12;
            d[i] = std::clamp(v, 1e-10, 1e12);
        }
        kkt.factor(w, d);

        auto direction = [&](const Vector& r_comp) {
            Vector rhs(w.n + w.m_eq);
            Vector tmp = r_comp.array() / s.array();  // S^{-1} r_comp
            rhs.head(w.n) = -rd + w.Gt * (tmp - d.asDiagonal() * rp_in);
            if (w.m_eq) rhs.tail(w.m_eq) = -rp_eq;
            Vector sol = kkt.solve(rhs);
            struct Dir {
                Vector dx, dy, ds, dz;
            } out;
            out.dx = sol.head(w.n);
            out.dy = sol.tail(w.m_eq);
            out.ds = -rp_in - w.G * out.dx;
            out.dz = -(r_comp.array() / s.array()).matrix() - d.asDiagonal() * out.ds;
            return out;
        };

        // Predictor.
        Vector r_aff = (s.array() * z.array()).matrix();
        auto aff = direction(r_aff);
        double ap = step_to_boundary(s, aff.ds);
        double ad = step_to_boundary(z, aff.dz);
        double mu_aff = (s + ap * aff.ds).dot(z + ad * aff.dz) / w.m_in;
        double sigma = std::pow(std::max(mu_aff, 0.0) / mu, 3.0);
        sigma = std::clamp(sigma, 0.0, 1.0);

        // Corrector.
        Vector r_cor = (s.array() * z.array() + aff.ds.array() * aff.dz.array() - sigma * mu).matrix();
        auto dir = direction(r_cor);
        double alpha_p = kStepScale * step_to_boundary(s, dir.ds);
        double alpha_d = kStepScale * step_to_boundary(z, dir.dz);

        x += alpha_p * dir.dx;
        s += alpha_p * dir.ds;
        y += alpha_d * dir.dy;
        z += alpha_d * dir.dz;
    }
    return result;  // unreachable
}

}  // namespace buildflex::optim
