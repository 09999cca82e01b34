#include "scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "common.hpp"
#include "csv.hpp"

namespace buildflex::scheduler {

WindScenarioSet make_wind_scenarios(Eigen::MatrixXd generation, Eigen::VectorXd probabilities) {
    if (generation.cols() < 1 || generation.rows() < 1)
        fail(ErrorKind::invalid_argument, "wind scenario matrix is empty");
    if (generation.minCoeff() < 0.0) fail(ErrorKind::validation, "wind generation must be >= 0");
    WindScenarioSet set;
    set.generation = std::move(generation);
    if (probabilities.size() == 0) {
        set.probabilities =
            Eigen::VectorXd::Constant(set.count(), 1.0 / static_cast<double>(set.count()));
    } else {
        if (probabilities.size() != set.count())
            fail(ErrorKind::invalid_argument, "wind probability count mismatch");
        if (probabilities.minCoeff() < 0.0) fail(ErrorKind::validation, "wind probabilities must be >= 0");
        double total = probabilities.sum();
        if (std::abs(total - 1.0) > 1e-9) fail(ErrorKind::validation, "wind probabilities must sum to 1");
        set.probabilities = std::move(probabilities);
    }
    set.expected = set.generation * set.probabilities;
    set.deviations = set.generation.colwise() - set.expected;
    return set;
}

WindScenarioSet load_wind_csv(const std::string& path, int periods) {
    csv::Table table = csv::read_file(path);
    std::size_t c_scen = table.column("scenario");
    std::size_t c_hour = table.column("hour");
    std::size_t c_gen = table.column("generation_kwh");
    std::map<long, std::map<int, double>> scenarios;
    for (const auto& row : table.rows) {
        const std::string loc = path + ":" + std::to_string(row.line_number);
        double scen_raw, hour_raw, gen;
        if (!parse_double(row.fields[c_scen], scen_raw) || !parse_double(row.fields[c_hour], hour_raw) ||
            !parse_double(row.fields[c_gen], gen))
            fail(ErrorKind::parse, loc + ": malformed row");
        long scen = static_cast<long>(scen_raw);
        int hour = static_cast<int>(hour_raw);
        if (hour < 1 || hour > periods)
            fail(ErrorKind::validation, loc + ": hour outside 1.." + std::to_string(periods));
        if (!scenarios[scen].emplace(hour, gen).second)
            fail(ErrorKind::validation, loc + ": duplicate (scenario, hour)");
    }
    if (scenarios.empty()) fail(ErrorKind::validation, path + ": no scenarios");
    Eigen::MatrixXd gen(periods, static_cast<Eigen::Index>(scenarios.size()));
    int col = 0;
    for (const auto& [scen, hours] : scenarios) {
        if (static_cast<int>(hours.size()) != periods)
            fail(ErrorKind::validation,
                 path + ": scenario " + std::to_string(scen) + " has " + std::to_string(hours.size()) +
                     " of " + std::to_string(periods) + " hours");
        for (const auto& [hour, value] : hours) gen(hour - 1, col) = value;
        ++col;
    }
    return make_wind_scenarios(std::move(gen));
}

WindScenarioSet generate_wind_scenarios(const WindGenParams& params, int periods, int count,
                                        std::uint64_t seed) {
    if (count < 1 || periods < 1) fail(ErrorKind::invalid_argument, "bad wind scenario dimensions");
    Rng rng(seed);
    Eigen::MatrixXd gen(periods, count);
    for (int w = 0; w < count; ++w) {
        double dev = rng.normal(0.0, params.deviation_std);
        for (int t = 0; t < periods; ++t) {
            double shape = params.mean_level +
                           params.diurnal_swing * std::sin(2.0 * M_PI * (t + 1) / periods + 1.0);
            dev = params.ar_coef * dev +
                  std::sqrt(1.0 - params.ar_coef * params.ar_coef) * rng.normal(0.0, params.deviation_std);
            double level = std::clamp(shape * (1.0 + dev), 0.0, 1.0);
            gen(t, w) = params.capacity_kwh * level;
        }
    }
    return make_wind_scenarios(std::move(gen));
}

LoadNoiseSet sample_load_noise(const std::vector<CovarianceSpec>& covariances, int periods,
                               int num_scenarios, std::uint64_t seed) {
    if (num_scenarios < 1) fail(ErrorKind::invalid_argument, "need at least one noise scenario");
    Eigen::MatrixXd aggregate = Eigen::MatrixXd::Zero(periods, periods);
    for (const auto& spec : covariances) {
        if (spec.diagonal) {
            if (spec.diag.size() != periods)
                fail(ErrorKind::invalid_argument, "diagonal covariance length mismatch");
            if (spec.diag.minCoeff() < 0.0)
                fail(ErrorKind::validation, "diagonal covariance has negative entries");
            aggregate += Eigen::MatrixXd(spec.diag.asDiagonal());
        } else {
            if (spec.full.rows() != periods || spec.full.cols() != periods)
                fail(ErrorKind::invalid_argument, "covariance matrix dimension mismatch");
            if ((spec.full - spec.full.transpose()).cwiseAbs().maxCoeff() > 1e-9)
                fail(ErrorKind::validation, "covariance matrix is not symmetric");
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(spec.full);
            if (eig.eigenvalues().minCoeff() < -1e-9 * (1.0 + eig.eigenvalues().cwiseAbs().maxCoeff()))
                fail(ErrorKind::validation, "covariance matrix is not positive semidefinite");
            aggregate += spec.full;
        }
    }
    // PSD square root; robust for singular aggregates.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(aggregate);
    Eigen::VectorXd lambda = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    Eigen::MatrixXd root = eig.eigenvectors() * lambda.asDiagonal() * eig.eigenvectors().transpose();

    LoadNoiseSet set;
    set.noise.resize(periods, num_scenarios);
    Rng rng(seed);
    Eigen::VectorXd z(periods);
    for (int b = 0; b < num_scenarios; ++b) {
        for (int t = 0; t < periods; ++t) z[t] = rng.normal();
        set.noise.col(b) = root * z;
    }
    set.probabilities =
        Eigen::VectorXd::Constant(num_scenarios, 1.0 / static_cast<double>(num_scenarios));
    return set;
}

BuiltProgram build_program(const std::vector<const region::FeasibleRegion*>& regions,
                           const Eigen::VectorXd& prices, double balancing_price,
                           const WindScenarioSet& wind, const LoadNoiseSet& noise) {
    if (regions.empty()) fail(ErrorKind::invalid_argument, "no building regions");
    const int N = static_cast<int>(regions.size());
    const int T = regions.front()->periods();
    const int W = wind.count();
    const int B = noise.count();
    if (wind.periods() != T) fail(ErrorKind::invalid_argument, "wind scenario horizon differs from regions");
    if (noise.noise.rows() != T) fail(ErrorKind::invalid_argument, "load noise horizon differs from regions");
    if (prices.size() != T) fail(ErrorKind::invalid_argument, "price vector length differs from regions");
    for (int i = 0; i < N; ++i) {
        if (regions[i]->periods() != T) fail(ErrorKind::invalid_argument, "regions disagree on the horizon");
        if (regions[i]->empty())
            fail(ErrorKind::validation, "region of building " + std::to_string(i + 1) +
                                            " is empty (slack " + format_double(regions[i]->infeasibility()) + ")");
    }

    BuiltProgram out;
    ProgramLayout& L = out.layout;
    L.num_buildings = N;
    L.periods = T;
    L.wind_count = W;
    L.noise_count = B;
    L.num_vars = N * T * (1 + W) + T * (1 + W * B) + T * W * B;

    optim::ConvexProgram& lp = out.lp;
    lp.num_vars = L.num_vars;
    lp.linear_cost = optim::Vector::Zero(L.num_vars);
    for (int t = 0; t < T; ++t) lp.linear_cost[L.base_aggregate() + t] = prices[t];
    for (int w = 0; w < W; ++w)
        for (int b = 0; b < B; ++b) {
            double weight = balancing_price * wind.probabilities[w] * noise.probabilities[b];
            int base = L.base_residual_bound(w, b);
            for (int t = 0; t < T; ++t) lp.linear_cost[base + t] = weight;
        }

    // Equalities: aggregate base load, then aggregate scenario loads.
    std::vector<Eigen::Triplet<double>> eq;
    std::vector<double> eq_rhs;
    int row = 0;
    for (int t = 0; t < T; ++t) {
        eq.emplace_back(row, L.base_aggregate() + t, 1.0);
        for (int i = 0; i < N; ++i) eq.emplace_back(row, L.base_first(i) + t, -1.0);
        eq_rhs.push_back(0.0);
        ++row;
    }
    for (int w = 0; w < W; ++w)
        for (int b = 0; b < B; ++b)
            for (int t = 0; t < T; ++t) {
                eq.emplace_back(row, L.base_scenario_load(w, b) + t, 1.0);
                for (int i = 0; i < N; ++i) eq.emplace_back(row, L.base_recourse(i, w) + t, -1.0);
                eq_rhs.push_back(noise.noise(t, b));
                ++row;
            }
    lp.eq_matrix.resize(row, L.num_vars);
    lp.eq_matrix.setFromTriplets(eq.begin(), eq.end());
    lp.eq_rhs = Eigen::Map<optim::Vector>(eq_rhs.data(), row);

    // Inequalities: region rows for every load block, then the l1 bounds.
    std::vector<Eigen::Triplet<double>> in;
    std::vector<double> in_rhs;
    row = 0;
    auto add_region_rows = [&](int i, int var_base) {
        const region::LinearConstraints& lc = regions[i]->constraints(true);
        for (int r = 0; r < lc.g.rows(); ++r) {
            for (int t = 0; t < T; ++t)
                if (lc.g(r, t) != 0.0) in.emplace_back(row, var_base + t, lc.g(r, t));
            in_rhs.push_back(lc.h(r));
            ++row;
        }
    };
    for (int i = 0; i < N; ++i) add_region_rows(i, L.base_first(i));
    for (int i = 0; i < N; ++i)
        for (int w = 0; w < W; ++w) add_region_rows(i, L.base_recourse(i, w));
    for (int w = 0; w < W; ++w)
        for (int b = 0; b < B; ++b)
            for (int t = 0; t < T; ++t) {
                int agg = L.base_aggregate() + t;
                int scen = L.base_scenario_load(w, b) + t;
                int bound = L.base_residual_bound(w, b) + t;
                // residual = p_agg - p_scen + deviation; s >= |residual|
                in.emplace_back(row, agg, 1.0);
                in.emplace_back(row, scen, -1.0);
                in.emplace_back(row, bound, -1.0);
                in_rhs.push_back(-wind.deviations(t, w));
                ++row;
                in.emplace_back(row, agg, -1.0);
                in.emplace_back(row, scen, 1.0);
                in.emplace_back(row, bound, -1.0);
                in_rhs.push_back(wind.deviations(t, w));
                ++row;
            }
    lp.ineq_matrix.resize(row, L.num_vars);
    lp.ineq_matrix.setFromTriplets(in.begin(), in.end());
    lp.ineq_rhs = Eigen::Map<optim::Vector>(in_rhs.data(), row);

    lp.lower_bounds = optim::Vector::Constant(L.num_vars, -std::numeric_limits<double>::infinity());
    for (int t = 0; t < T; ++t) lp.lower_bounds[L.base_aggregate() + t] = 0.0;  // p_agg in R+
    for (int w = 0; w < W; ++w)
        for (int b = 0; b < B; ++b)
            for (int t = 0; t < T; ++t) lp.lower_bounds[L.base_residual_bound(w, b) + t] = 0.0;
    return out;
}

Schedule solve_program(const BuiltProgram& program, const Eigen::VectorXd& prices,
                       double balancing_price, const WindScenarioSet& wind, const LoadNoiseSet& noise,
                       double tolerance) {
    optim::SolveOptions options;
    options.tolerance = tolerance;
    optim::SolveResult res = optim::solve(program.lp, options);
    if (res.status == optim::SolveStatus::infeasible)
        fail(ErrorKind::numeric, "stochastic program is infeasible");
    if (res.status == optim::SolveStatus::unbounded)
        fail(ErrorKind::numeric, "stochastic program is unbounded");
    if (res.status != optim::SolveStatus::optimal)
        fail(ErrorKind::numeric, std::string("stochastic program solve stopped at ") +
                                     optim::to_string(res.status) + " (primal " +
                                     format_double(res.primal_residual) + ", dual " +
                                     format_double(res.dual_residual) + ")");

    const ProgramLayout& L = program.layout;
    Schedule sched;
    sched.periods = L.periods;
    sched.lp_iterations = res.iterations;
    sched.objective = res.objective;
    sched.aggregate_first_stage = res.x.segment(L.base_aggregate(), L.periods);
    for (int i = 0; i < L.num_buildings; ++i) {
        sched.first_stage.push_back(res.x.segment(L.base_first(i), L.periods));
        std::vector<Eigen::VectorXd> rec;
        for (int w = 0; w < L.wind_count; ++w)
            rec.push_back(res.x.segment(L.base_recourse(i, w), L.periods));
        sched.second_stage.push_back(std::move(rec));
    }
    sched.energy_cost = prices.dot(sched.aggregate_first_stage);
    double balancing = 0.0;
    for (int w = 0; w < L.wind_count; ++w)
        for (int b = 0; b < L.noise_count; ++b) {
            Eigen::VectorXd scen_load = noise.noise.col(b);
            for (int i = 0; i < L.num_buildings; ++i) scen_load += sched.second_stage[i][w];
            Eigen::VectorXd residual = sched.aggregate_first_stage - scen_load + wind.deviations.col(w);
            balancing += wind.probabilities[w] * noise.probabilities[b] * balancing_price *
                         residual.cwiseAbs().sum();
        }
    sched.expected_balancing_cost = balancing;
    return sched;
}

double mitigation_metric(const Schedule& schedule, const WindScenarioSet& wind, const LoadNoiseSet& noise) {
    double expected_dev = 0.0;
    for (int w = 0; w < wind.count(); ++w)
        expected_dev += wind.probabilities[w] * wind.deviations.col(w).cwiseAbs().sum();
    if (expected_dev <= 0.0)
        fail(ErrorKind::invalid_argument, "mitigation undefined: deviations are identically zero");
    double expected_residual = 0.0;
    for (int w = 0; w < wind.count(); ++w)
        for (int b = 0; b < noise.count(); ++b) {
            Eigen::VectorXd scen_load = noise.noise.col(b);
            for (const auto& building : schedule.second_stage) scen_load += building[w];
            Eigen::VectorXd residual = schedule.aggregate_first_stage - scen_load + wind.deviations.col(w);
            expected_residual +=
                wind.probabilities[w] * noise.probabilities[b] * residual.cwiseAbs().sum();
        }
    return 1.0 - expected_residual / expected_dev;
}

double violation_metric(const Schedule& schedule, int building, const plant::PlantConfig& cfg,
                        const plant::PlantState& x0, const plant::DayContext& ctx,
                        const WindScenarioSet& wind) {
    if (building < 0 || building >= static_cast<int>(schedule.second_stage.size()))
        fail(ErrorKind::invalid_argument, "violation_metric: building index out of range");
    const int T = schedule.periods;
    double expected = 0.0;
    for (int w = 0; w < wind.count(); ++w) {
        // The building executes the scheduled load clamped into its physical
        // envelope (it can never draw less than its base load).
        std::vector<double> load(T);
        for (int t = 1; t <= T; ++t) {
            double base = plant::base_load_at(cfg, ctx.day_of_week, t, T);
            load[t - 1] = std::clamp(schedule.second_stage[building][w][t - 1], base,
                                     base + cfg.hvac_capacity_kw);
        }
        plant::FeasibilityCheck check = plant::check_feasible(cfg, x0, load, ctx);
        expected += wind.probabilities[w] * check.temperature_violation_ch;
    }
    return expected;
}

}  // namespace buildflex::scheduler
