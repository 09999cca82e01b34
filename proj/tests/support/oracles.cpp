#include "support/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "common.hpp"

namespace oracles {

using buildflex::Rng;
using buildflex::band::BandData;
using buildflex::band::FitMode;

double enumerate_qp_optimum(const Eigen::MatrixXd& quadratic, const Eigen::VectorXd& linear,
                            const Eigen::MatrixXd& ineq, const Eigen::VectorXd& ineq_rhs) {
    const int n = static_cast<int>(linear.size());
    const int m = static_cast<int>(ineq.rows());
    double best = std::numeric_limits<double>::infinity();
    for (std::uint32_t mask = 0; mask < (1u << m); ++mask) {
        std::vector<int> active;
        for (int r = 0; r < m; ++r)
            if (mask & (1u << r)) active.push_back(r);
        if (static_cast<int>(active.size()) > n) continue;
        const int s = static_cast<int>(active.size());
        Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + s, n + s);
        kkt.topLeftCorner(n, n) = quadratic;
        for (int i = 0; i < s; ++i) {
            kkt.block(0, n + i, n, 1) = ineq.row(active[i]).transpose();
            kkt.block(n + i, 0, 1, n) = ineq.row(active[i]);
        }
        Eigen::VectorXd rhs(n + s);
        rhs.head(n) = -linear;
        for (int i = 0; i < s; ++i) rhs[n + i] = ineq_rhs[active[i]];
        Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
        if (!lu.isInvertible()) continue;
        Eigen::VectorXd sol = lu.solve(rhs);
        Eigen::VectorXd x = sol.head(n);
        bool ok = true;
        for (int r = 0; r < m && ok; ++r)
            if (ineq.row(r).dot(x) > ineq_rhs[r] + 1e-8) ok = false;
        for (int i = 0; i < s && ok; ++i)
            if (sol[n + i] < -1e-8) ok = false;
        if (!ok) continue;
        best = std::min(best, 0.5 * x.dot(quadratic * x) + linear.dot(x));
    }
    return best;
}

namespace {

Eigen::VectorXd feature_of(const buildflex::band::BandSample& p) {
    Eigen::VectorXd f(p.load_prefix.size() + 3);
    f.head(p.load_prefix.size()) = p.load_prefix;
    f.tail(3) = p.context();
    return f;
}

constexpr double kOrderPenalty = 1e8;

double penalized_objective(const BandData& data, double beta, const Eigen::VectorXd& upper,
                           const Eigen::VectorXd& lower) {
    double f = 0.0;
    for (const auto& pt : data.points) {
        Eigen::VectorXd feat = feature_of(pt);
        double tu = upper.dot(feat);
        double tl = lower.dot(feat);
        double hu = std::max(0.0, pt.indoor - tu);
        double hl = std::max(0.0, tl - pt.indoor);
        double viol = std::max(0.0, tl - tu);
        f += beta * (hu + hl) * (hu + hl) + (1.0 - beta) * (tu - tl) + kOrderPenalty * viol * viol;
    }
    return f;
}

void gradient(const BandData& data, double beta, const Eigen::VectorXd& upper,
              const Eigen::VectorXd& lower, Eigen::VectorXd& grad_u, Eigen::VectorXd& grad_l) {
    grad_u.setZero();
    grad_l.setZero();
    for (const auto& pt : data.points) {
        Eigen::VectorXd feat = feature_of(pt);
        double tu = upper.dot(feat);
        double tl = lower.dot(feat);
        double hu = std::max(0.0, pt.indoor - tu);
        double hl = std::max(0.0, tl - pt.indoor);
        double su = hu + hl;
        double viol = std::max(0.0, tl - tu);
        double du = (hu > 0 ? -2.0 * beta * su : 0.0) + (1.0 - beta) - 2.0 * kOrderPenalty * viol;
        double dl = (hl > 0 ? 2.0 * beta * su : 0.0) - (1.0 - beta) + 2.0 * kOrderPenalty * viol;
        grad_u += du * feat;
        grad_l += dl * feat;
    }
}

void project_signs(Eigen::VectorXd& v, int t, FitMode mode) {
    for (int j = 0; j < t; ++j)
        v[j] = mode == FitMode::cooling ? std::min(v[j], 0.0) : std::max(v[j], 0.0);
}

}  // namespace

double band_objective(const BandData& data, double beta, const Eigen::VectorXd& upper,
                      const Eigen::VectorXd& lower) {
    double f = 0.0;
    for (const auto& pt : data.points) {
        Eigen::VectorXd feat = feature_of(pt);
        double tu = upper.dot(feat);
        double tl = lower.dot(feat);
        double hu = std::max(0.0, pt.indoor - tu);
        double hl = std::max(0.0, tl - pt.indoor);
        f += beta * (hu + hl) * (hu + hl) + (1.0 - beta) * (tu - tl);
    }
    return f;
}

double band_objective_descent(const BandData& data, double beta, FitMode mode, int starts,
                              int iterations) {
    const int t = data.period;
    const int np = t + 3;

    // Independent least squares central line for warm starts.
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(np, np);
    Eigen::VectorXd moment = Eigen::VectorXd::Zero(np);
    for (const auto& pt : data.points) {
        Eigen::VectorXd feat = feature_of(pt);
        gram += feat * feat.transpose();
        moment += pt.indoor * feat;
    }
    gram.diagonal().array() += 1e-9;
    Eigen::VectorXd central = gram.ldlt().solve(moment);

    Rng rng(20240817);
    double best = std::numeric_limits<double>::infinity();
    for (int s = 0; s < starts; ++s) {
        Eigen::VectorXd upper = central, lower = central;
        if (s == 1) {
            upper.setZero();
            lower.setZero();
        } else if (s >= 2) {
            for (int i = 0; i < np; ++i) {
                upper[i] += 0.2 * rng.normal();
                lower[i] += 0.2 * rng.normal();
            }
            upper[np - 1] += std::abs(rng.normal());
            lower[np - 1] -= std::abs(rng.normal());
        }
        project_signs(upper, t, mode);
        project_signs(lower, t, mode);

        double f = penalized_objective(data, beta, upper, lower);
        double step = 1e-2;
        Eigen::VectorXd gu(np), gl(np);
        for (int iter = 0; iter < iterations; ++iter) {
            gradient(data, beta, upper, lower, gu, gl);
            Eigen::VectorXd cu = upper - step * gu;
            Eigen::VectorXd cl = lower - step * gl;
            project_signs(cu, t, mode);
            project_signs(cl, t, mode);
            double fc = penalized_objective(data, beta, cu, cl);
            if (fc < f - 1e-15) {
                upper = cu;
                lower = cl;
                f = fc;
                step *= 1.25;
            } else {
                step *= 0.5;
                if (step < 1e-16) break;
            }
        }
        best = std::min(best, f);
    }
    return best;
}

double best_two_partition_sse(const Eigen::MatrixXd& points) {
    const int k = static_cast<int>(points.cols());
    double best = std::numeric_limits<double>::infinity();
    for (std::uint32_t mask = 1; mask < (1u << (k - 1)); ++mask) {
        Eigen::VectorXd mean0 = Eigen::VectorXd::Zero(points.rows());
        Eigen::VectorXd mean1 = Eigen::VectorXd::Zero(points.rows());
        int n0 = 0, n1 = 0;
        for (int i = 0; i < k; ++i) {
            bool in1 = i > 0 && (mask & (1u << (i - 1)));
            if (in1) {
                mean1 += points.col(i);
                ++n1;
            } else {
                mean0 += points.col(i);
                ++n0;
            }
        }
        mean0 /= n0;
        mean1 /= n1;
        double sse = 0.0;
        for (int i = 0; i < k; ++i) {
            bool in1 = i > 0 && (mask & (1u << (i - 1)));
            sse += (points.col(i) - (in1 ? mean1 : mean0)).squaredNorm();
        }
        best = std::min(best, sse);
    }
    return best;
}

double toy_grid_optimum(const ToyProgram& toy, double step) {
    const int T = static_cast<int>(toy.price.size());
    const int W = static_cast<int>(toy.wind_dev.cols());
    const int B = static_cast<int>(toy.noise.cols());

    std::vector<std::vector<double>> grid(T);
    for (int t = 0; t < T; ++t) {
        for (double v = toy.box_low[t]; v <= toy.box_high[t] + 1e-12; v += step) grid[t].push_back(v);
        if (grid[t].empty() || grid[t].back() < toy.box_high[t] - 1e-12)
            grid[t].push_back(toy.box_high[t]);
    }

    // Inner minimization decomposes per (t, wind scenario): best recourse on
    // the same grid.
    auto inner_cost = [&](int t, int w, double pb_t) {
        double best = std::numeric_limits<double>::infinity();
        for (double x : grid[t]) {
            double cost = 0.0;
            for (int b = 0; b < B; ++b)
                cost += toy.noise_prob[b] *
                        std::abs(pb_t - (x + toy.noise(t, b)) + toy.wind_dev(t, w));
            best = std::min(best, cost);
        }
        return best;
    };

    double best = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> idx(T, 0);
    while (true) {
        double cost = 0.0;
        for (int t = 0; t < T; ++t) cost += toy.price[t] * grid[t][idx[t]];
        for (int w = 0; w < W; ++w) {
            double scen = 0.0;
            for (int t = 0; t < T; ++t) scen += inner_cost(t, w, grid[t][idx[t]]);
            cost += toy.wind_prob[w] * toy.balancing_price * scen;
        }
        best = std::min(best, cost);
        int carry = 0;
        while (carry < T && ++idx[carry] == grid[carry].size()) {
            idx[carry] = 0;
            ++carry;
        }
        if (carry == T) break;
    }
    return best;
}

buildflex::TrainingDataset generate_linear_dataset(const LinearPlant& plant, int days, int periods,
                                                   std::uint64_t seed) {
    buildflex::TrainingDataset ds;
    ds.periods = periods;
    Rng rng(seed);
    for (int d = 0; d < days; ++d) {
        buildflex::DayRecord day;
        day.day_id = d + 1;
        double outdoor = rng.uniform(24.0, 34.0);
        day.initial_indoor_temp_c = rng.uniform(20.0, 24.0);
        auto dow = static_cast<buildflex::DayOfWeek>(d % 7);
        double indoor = day.initial_indoor_temp_c;
        for (int t = 1; t <= periods; ++t) {
            double hvac = rng.uniform(0.0, plant.hvac_cap);
            // First transition is driven by hour 1 power; afterwards the
            // regression convention applies: hour t power drives t -> t+1.
            if (t == 1)
                indoor += plant.a * (indoor - outdoor) + plant.b * hvac + plant.d;
            day.load_kw.push_back(plant.base_load + hvac);
            day.indoor_temp_c.push_back(indoor);
            day.outdoor_temp_c.push_back(outdoor);
            day.explanatory.push_back(buildflex::ExplanatoryRecord{dow, outdoor, 0.0, {}});
            if (t < periods) {
                double next = indoor + plant.a * (indoor - outdoor) + plant.b * hvac + plant.d;
                indoor = next;
            }
        }
        ds.days.push_back(std::move(day));
    }
    return ds;
}

}  // namespace oracles
