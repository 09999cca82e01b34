#include "band_estimator.hpp"

#include <algorithm>
#include <cmath>

#include "common.hpp"
#include "optim.hpp"

namespace buildflex::band {

namespace {
constexpr double kRegularizer = 1e-9;

std::vector<double> to_std(const Eigen::VectorXd& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
}

Eigen::VectorXd from_std(const std::vector<double>& v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}
}  // namespace

const char* to_string(FitMode mode) { return mode == FitMode::cooling ? "cooling" : "heating"; }

FitMode fit_mode_from_string(const std::string& s) {
    if (s == "cooling") return FitMode::cooling;
    if (s == "heating") return FitMode::heating;
    fail(ErrorKind::parse, "unknown fit mode '" + s + "'");
}

BandData collect_band_data(const TrainingDataset& ds, const std::vector<int>& day_indices, int period) {
    if (period < 1 || period > ds.periods) fail(ErrorKind::invalid_argument, "period out of range");
    BandData data;
    data.period = period;
    for (int k : day_indices) {
        if (k < 0 || k >= ds.num_days()) fail(ErrorKind::invalid_argument, "day index out of range");
        const DayRecord& day = ds.days[k];
        BandSample s;
        s.load_prefix = Eigen::Map<const Eigen::VectorXd>(day.load_kw.data(), period);
        s.initial_indoor = day.initial_indoor_temp_c;
        s.outdoor = day.outdoor_temp_c[period - 1];
        s.indoor = day.indoor_temp_c[period - 1];
        data.points.push_back(std::move(s));
    }
    return data;
}

BandPrediction predict_band(const BandParameters& bp, double initial_indoor, double outdoor,
                            const Eigen::VectorXd& load_prefix) {
    if (load_prefix.size() != bp.upper_load_coef.size())
        fail(ErrorKind::invalid_argument, "load prefix length " + std::to_string(load_prefix.size()) +
                                              " does not match band period " + std::to_string(bp.period));
    Eigen::Vector3d ctx(initial_indoor, outdoor, 1.0);
    BandPrediction out;
    out.upper = bp.upper_load_coef.dot(load_prefix) + bp.upper_ctx_coef.dot(ctx);
    out.lower = bp.lower_load_coef.dot(load_prefix) + bp.lower_ctx_coef.dot(ctx);
    return out;
}

double compute_pi_out(const BandParameters& bp, const BandData& data) {
    if (data.points.empty()) fail(ErrorKind::invalid_argument, "compute_pi_out: empty data");
    int out = 0;
    for (const auto& p : data.points) {
        BandPrediction pred = predict_band(bp, p.initial_indoor, p.outdoor, p.load_prefix);
        if (pred.upper <= p.indoor || pred.lower >= p.indoor) ++out;
    }
    return static_cast<double>(out) / static_cast<double>(data.points.size());
}

double compute_band_rmse(const BandParameters& bp, const BandData& data) {
    if (data.points.empty()) fail(ErrorKind::invalid_argument, "compute_band_rmse: empty data");
    double total = 0.0;
    for (const auto& p : data.points) {
        BandPrediction pred = predict_band(bp, p.initial_indoor, p.outdoor, p.load_prefix);
        double ju = std::max(0.0, p.indoor - pred.upper);
        double jl = std::max(0.0, pred.lower - p.indoor);
        total += (ju + jl) * (ju + jl);
    }
    return std::sqrt(total / static_cast<double>(data.points.size()));
}

double compute_central_rmse(const BandParameters& bp, const BandData& data) {
    if (data.points.empty()) fail(ErrorKind::invalid_argument, "compute_central_rmse: empty data");
    double total = 0.0;
    for (const auto& p : data.points) {
        BandPrediction pred = predict_band(bp, p.initial_indoor, p.outdoor, p.load_prefix);
        double mid = 0.5 * (pred.upper + pred.lower);
        total += (mid - p.indoor) * (mid - p.indoor);
    }
    return std::sqrt(total / static_cast<double>(data.points.size()));
}

// Variable layout of the fitting QP:
//   [0, t+3)        upper band: load coefficients then [phi0, outdoor, 1]
//   [t+3, 2t+6)     lower band likewise
//   [2t+6, 2t+6+K)  upper hinge errors JU
//   [.., 2t+6+2K)   lower hinge errors JL
BlseSolution solve_blsef(const BandData& data, double beta, FitMode mode, double tolerance) {
    if (data.points.empty()) fail(ErrorKind::invalid_argument, "solve_blsef: empty cluster data");
    if (beta < 0.0 || beta > 1.0) fail(ErrorKind::invalid_argument, "beta must be within [0, 1]");
    const int t = data.period;
    const int K = static_cast<int>(data.points.size());
    const int np = t + 3;  // parameters per band
    const int n = 2 * np + 2 * K;
    const int base_ju = 2 * np;
    const int base_jl = 2 * np + K;
    const double sign = mode == FitMode::cooling ? 1.0 : -1.0;

    const double w_sse = beta + kRegularizer;
    const double w_area = (1.0 - beta) + kRegularizer;

    optim::ConvexProgram prog;
    prog.num_vars = n;
    prog.linear_cost = optim::Vector::Zero(n);

    std::vector<Eigen::Triplet<double>> q_trips;
    q_trips.reserve(static_cast<std::size_t>(4 * K));
    for (int k = 0; k < K; ++k) {
        q_trips.emplace_back(base_ju + k, base_ju + k, 2.0 * w_sse);
        q_trips.emplace_back(base_jl + k, base_jl + k, 2.0 * w_sse);
        q_trips.emplace_back(base_ju + k, base_jl + k, 2.0 * w_sse);
        q_trips.emplace_back(base_jl + k, base_ju + k, 2.0 * w_sse);
    }
    prog.quadratic_cost.resize(n, n);
    prog.quadratic_cost.setFromTriplets(q_trips.begin(), q_trips.end());

    // Band area as a linear term: sum_k upper(x_k) - lower(x_k).
    Eigen::VectorXd feature_sum = Eigen::VectorXd::Zero(np);
    for (const auto& p : data.points) {
        feature_sum.head(t) += p.load_prefix;
        feature_sum.tail(3) += p.context();
    }
    prog.linear_cost.segment(0, np) = w_area * feature_sum;
    prog.linear_cost.segment(np, np) = -w_area * feature_sum;

    std::vector<Eigen::Triplet<double>> g_trips;
    std::vector<double> rhs;
    int row = 0;
    auto band_row = [&](int k, int offset, double scale) {
        const auto& p = data.points[k];
        for (int j = 0; j < t; ++j) g_trips.emplace_back(row, offset + j, scale * p.load_prefix[j]);
        Eigen::Vector3d ctx = p.context();
        for (int j = 0; j < 3; ++j) g_trips.emplace_back(row, offset + t + j, scale * ctx[j]);
    };
    for (int k = 0; k < K; ++k) {  // measurement below upper band plus JU slack
        band_row(k, 0, -1.0);
        g_trips.emplace_back(row, base_ju + k, -1.0);
        rhs.push_back(-data.points[k].indoor);
        ++row;
    }
    for (int k = 0; k < K; ++k) {  // measurement above lower band minus JL slack
        band_row(k, np, 1.0);
        g_trips.emplace_back(row, base_jl + k, -1.0);
        rhs.push_back(data.points[k].indoor);
        ++row;
    }
    for (int k = 0; k < K; ++k) {  // upper >= lower at each training point
        band_row(k, np, 1.0);
        band_row(k, 0, -1.0);
        rhs.push_back(0.0);
        ++row;
    }
    for (int j = 0; j < t; ++j) {  // sign constraints on the load coefficients
        g_trips.emplace_back(row, j, sign);
        rhs.push_back(0.0);
        ++row;
        g_trips.emplace_back(row, np + j, sign);
        rhs.push_back(0.0);
        ++row;
    }
    prog.ineq_matrix.resize(row, n);
    prog.ineq_matrix.setFromTriplets(g_trips.begin(), g_trips.end());
    prog.ineq_rhs = Eigen::Map<optim::Vector>(rhs.data(), row);

    prog.lower_bounds = optim::Vector::Constant(n, -std::numeric_limits<double>::infinity());
    for (int k = 0; k < 2 * K; ++k) prog.lower_bounds[base_ju + k] = 0.0;

    optim::SolveOptions options;
    options.tolerance = tolerance;
    optim::SolveResult res = optim::solve(prog, options);
    if (res.status != optim::SolveStatus::optimal)
        fail(ErrorKind::numeric, std::string("band QP did not reach optimality (") +
                                     optim::to_string(res.status) +
                                     ", primal " + format_double(res.primal_residual) + ", dual " +
                                     format_double(res.dual_residual) + ")");

    BlseSolution sol;
    sol.beta = beta;
    sol.params.period = t;
    sol.params.mode = mode;
    sol.params.beta = beta;
    sol.params.upper_load_coef = res.x.segment(0, t);
    sol.params.upper_ctx_coef = res.x.segment(t, 3);
    sol.params.lower_load_coef = res.x.segment(np, t);
    sol.params.lower_ctx_coef = res.x.segment(np + t, 3);

    double sse = 0.0, area = 0.0;
    for (const auto& p : data.points) {
        BandPrediction pred = predict_band(sol.params, p.initial_indoor, p.outdoor, p.load_prefix);
        double ju = std::max(0.0, p.indoor - pred.upper);
        double jl = std::max(0.0, pred.lower - p.indoor);
        sse += (ju + jl) * (ju + jl);
        area += pred.upper - pred.lower;
    }
    sol.sse = sse;
    sol.band_area = area;
    sol.pi_out = compute_pi_out(sol.params, data);
    sol.objective = beta * sse + (1.0 - beta) * area;
    sol.params.pi_out = sol.pi_out;
    sol.params.band_area = area;
    return sol;
}

BlseFitReport blse_sweep(const BandData& data, double alpha, int grid_size, FitMode mode, double tolerance) {
    if (grid_size < 2) fail(ErrorKind::invalid_argument, "beta grid needs at least 2 points");
    if (!(alpha > 0.0 && alpha < 1.0) && alpha != 1.0)
        fail(ErrorKind::invalid_argument, "alpha must be within (0, 1]");
    BlseFitReport report;
    report.solutions.reserve(grid_size);
    for (int i = 1; i <= grid_size; ++i) {
        double beta = static_cast<double>(i - 1) / static_cast<double>(grid_size - 1);
        report.solutions.push_back(solve_blsef(data, beta, mode, tolerance));
    }
    reselect(report, alpha);
    return report;
}

void reselect(BlseFitReport& report, double alpha) {
    int best = -1;
    for (int i = 0; i < static_cast<int>(report.solutions.size()); ++i) {
        if (report.solutions[i].pi_out > alpha) continue;
        if (best < 0 || report.solutions[i].band_area < report.solutions[best].band_area) best = i;
    }
    report.alpha_unmet = best < 0;
    report.selected = best < 0 ? static_cast<int>(report.solutions.size()) - 1 : best;
    for (auto& sol : report.solutions) sol.params.alpha_unmet = false;
    report.solutions[report.selected].params.alpha_unmet = report.alpha_unmet;
}

void reselect_shared(std::vector<BlseFitReport*>& reports, const std::vector<int>& cluster_sizes,
                     double alpha) {
    if (reports.empty()) return;
    const int m = static_cast<int>(reports.front()->solutions.size());
    int total = 0;
    for (int s : cluster_sizes) total += s;
    int best = -1;
    double best_area = 0.0;
    for (int i = 0; i < m; ++i) {
        double out_count = 0.0, area = 0.0;
        for (std::size_t c = 0; c < reports.size(); ++c) {
            out_count += reports[c]->solutions[i].pi_out * cluster_sizes[c];
            area += reports[c]->solutions[i].band_area;
        }
        if (out_count / total > alpha) continue;
        if (best < 0 || area < best_area) {
            best = i;
            best_area = area;
        }
    }
    bool unmet = best < 0;
    int pick = unmet ? m - 1 : best;
    for (auto* rep : reports) {
        rep->selected = pick;
        rep->alpha_unmet = unmet;
        for (auto& sol : rep->solutions) sol.params.alpha_unmet = false;
        rep->solutions[pick].params.alpha_unmet = unmet;
    }
}

BandParameters fit_central(const BandData& data, FitMode mode, double tolerance) {
    if (data.points.empty()) fail(ErrorKind::invalid_argument, "fit_central: empty cluster data");
    const int t = data.period;
    const int np = t + 3;
    const double sign = mode == FitMode::cooling ? 1.0 : -1.0;

    optim::ConvexProgram prog;
    prog.num_vars = np;
    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(np, np);
    Eigen::VectorXd c = Eigen::VectorXd::Zero(np);
    for (const auto& p : data.points) {
        Eigen::VectorXd f(np);
        f.head(t) = p.load_prefix;
        f.tail(3) = p.context();
        q += 2.0 * f * f.transpose();
        c -= 2.0 * p.indoor * f;
    }
    prog.quadratic_cost = q.sparseView();
    prog.linear_cost = c;
    std::vector<Eigen::Triplet<double>> g_trips;
    for (int j = 0; j < t; ++j) g_trips.emplace_back(j, j, sign);
    prog.ineq_matrix.resize(t, np);
    prog.ineq_matrix.setFromTriplets(g_trips.begin(), g_trips.end());
    prog.ineq_rhs = optim::Vector::Zero(t);

    optim::SolveOptions options;
    options.tolerance = tolerance;
    optim::SolveResult res = optim::solve(prog, options);
    if (res.status != optim::SolveStatus::optimal)
        fail(ErrorKind::numeric, "central fit QP did not reach optimality");

    BandParameters bp;
    bp.period = t;
    bp.mode = mode;
    bp.upper_load_coef = res.x.head(t);
    bp.upper_ctx_coef = res.x.tail(3);
    bp.lower_load_coef = bp.upper_load_coef;
    bp.lower_ctx_coef = bp.upper_ctx_coef;
    bp.beta = 0.0;
    bp.band_area = 0.0;
    bp.pi_out = compute_pi_out(bp, data);
    return bp;
}

nlohmann::json BandParameters::to_json() const {
    nlohmann::json j;
    j["period"] = period;
    j["mode"] = to_string(mode);
    j["upper_load_coef"] = to_std(upper_load_coef);
    j["lower_load_coef"] = to_std(lower_load_coef);
    j["upper_ctx_coef"] = std::vector<double>{upper_ctx_coef[0], upper_ctx_coef[1], upper_ctx_coef[2]};
    j["lower_ctx_coef"] = std::vector<double>{lower_ctx_coef[0], lower_ctx_coef[1], lower_ctx_coef[2]};
    j["beta"] = beta;
    j["pi_out"] = pi_out;
    j["band_area"] = band_area;
    j["alpha_unmet"] = alpha_unmet;
    return j;
}

BandParameters BandParameters::from_json(const nlohmann::json& j) {
    BandParameters bp;
    bp.period = j.at("period").get<int>();
    bp.mode = fit_mode_from_string(j.at("mode").get<std::string>());
    bp.upper_load_coef = from_std(j.at("upper_load_coef").get<std::vector<double>>());
    bp.lower_load_coef = from_std(j.at("lower_load_coef").get<std::vector<double>>());
    auto uc = j.at("upper_ctx_coef").get<std::vector<double>>();
    auto lc = j.at("lower_ctx_coef").get<std::vector<double>>();
    bp.upper_ctx_coef = Eigen::Vector3d(uc[0], uc[1], uc[2]);
    bp.lower_ctx_coef = Eigen::Vector3d(lc[0], lc[1], lc[2]);
    bp.beta = j.at("beta").get<double>();
    bp.pi_out = j.at("pi_out").get<double>();
    bp.band_area = j.at("band_area").get<double>();
    bp.alpha_unmet = j.at("alpha_unmet").get<bool>();
    return bp;
}

nlohmann::json BlseFitReport::to_json() const {
    nlohmann::json j;
    j["selected"] = selected;
    j["alpha_unmet"] = alpha_unmet;
    nlohmann::json sols = nlohmann::json::array();
    for (const auto& s : solutions) {
        nlohmann::json e;
        e["beta"] = s.beta;
        e["sse"] = s.sse;
        e["band_area"] = s.band_area;
        e["pi_out"] = s.pi_out;
        e["objective"] = s.objective;
        e["params"] = s.params.to_json();
        sols.push_back(std::move(e));
    }
    j["solutions"] = std::move(sols);
    return j;
}

BlseFitReport BlseFitReport::from_json(const nlohmann::json& j) {
    BlseFitReport report;
    report.selected = j.at("selected").get<int>();
    report.alpha_unmet = j.at("alpha_unmet").get<bool>();
    for (const auto& e : j.at("solutions")) {
        BlseSolution s;
        s.beta = e.at("beta").get<double>();
        s.sse = e.at("sse").get<double>();
        s.band_area = e.at("band_area").get<double>();
        s.pi_out = e.at("pi_out").get<double>();
        s.objective = e.at("objective").get<double>();
        s.params = BandParameters::from_json(e.at("params"));
        report.solutions.push_back(std::move(s));
    }
    return report;
}

}  // namespace buildflex::band
