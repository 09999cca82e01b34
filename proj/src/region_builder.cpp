#include "region_builder.hpp"

#include <algorithm>
#include <cmath>

#include "common.hpp"
#include "optim.hpp"

namespace buildflex::region {

LimitEstimates estimate_limits(const TrainingDataset& ds, const std::vector<int>& day_indices, int period) {
    if (day_indices.empty()) fail(ErrorKind::invalid_argument, "estimate_limits: empty cluster");
    if (period < 1 || period > ds.periods) fail(ErrorKind::invalid_argument, "estimate_limits: period out of range");
    LimitEstimates lim;
    bool first = true;
    for (int k : day_indices) {
        if (k < 0 || k >= ds.num_days()) fail(ErrorKind::invalid_argument, "estimate_limits: day index out of range");
        double load = ds.days[k].load_kw[period - 1];
        double temp = ds.days[k].indoor_temp_c[period - 1];
        if (first) {
            lim.load_min = lim.load_max = load;
            lim.temp_min = lim.temp_max = temp;
            first = false;
        } else {
            lim.load_min = std::min(lim.load_min, load);
            lim.load_max = std::max(lim.load_max, load);
            lim.temp_min = std::min(lim.temp_min, temp);
            lim.temp_max = std::max(lim.temp_max, temp);
        }
    }
    return lim;
}

namespace {

LinearConstraints build_constraints(const std::vector<RegionParameters>& phi, double phi0,
                                    const std::vector<double>& outdoor, bool ordering) {
    const int T = static_cast<int>(phi.size());
    const int rows = ordering ? 5 * T : 4 * T;
    LinearConstraints lc;
    lc.g = Eigen::MatrixXd::Zero(rows, T);
    lc.h = Eigen::VectorXd::Zero(rows);
    for (int t = 1; t <= T; ++t) {
        const RegionParameters& p = phi[t - 1];
        Eigen::Vector3d ctx(phi0, outdoor[t - 1], 1.0);
        int i = t - 1;
        lc.g(i, i) = 1.0;  // p_t <= load_max
        lc.h(i) = p.limits.load_max;
        lc.g(T + i, i) = -1.0;  // -p_t <= -load_min
        lc.h(T + i) = -p.limits.load_min;
        // upper band under the temperature ceiling
        lc.g.row(2 * T + i).head(t) = p.band.upper_load_coef.transpose();
        lc.h(2 * T + i) = p.limits.temp_max - p.band.upper_ctx_coef.dot(ctx);
        // lower band over the temperature floor
        lc.g.row(3 * T + i).head(t) = -p.band.lower_load_coef.transpose();
        lc.h(3 * T + i) = p.band.lower_ctx_coef.dot(ctx) - p.limits.temp_min;
        if (ordering) {  // lower estimate must stay under the upper estimate
            lc.g.row(4 * T + i).head(t) =
                (p.band.lower_load_coef - p.band.upper_load_coef).transpose();
            lc.h(4 * T + i) = (p.band.upper_ctx_coef - p.band.lower_ctx_coef).dot(ctx);
        }
    }
    return lc;
}

// Minimum total slack that makes every row satisfiable; > 0 means empty.
double feasibility_probe(const LinearConstraints& lc) {
    const int T = static_cast<int>(lc.g.cols());
    const int m = static_cast<int>(lc.g.rows());
    optim::ConvexProgram prog;
    prog.num_vars = T + m;
    prog.linear_cost = optim::Vector::Zero(T + m);
    prog.linear_cost.tail(m).setOnes();
    std::vector<Eigen::Triplet<double>> trips;
    for (int r = 0; r < m; ++r) {
        for (int c = 0; c < T; ++c)
            if (lc.g(r, c) != 0.0) trips.emplace_back(r, c, lc.g(r, c));
        trips.emplace_back(r, T + r, -1.0);
    }
    prog.ineq_matrix.resize(m, T + m);
    prog.ineq_matrix.setFromTriplets(trips.begin(), trips.end());
    prog.ineq_rhs = lc.h;
    prog.lower_bounds = optim::Vector::Constant(T + m, -std::numeric_limits<double>::infinity());
    prog.lower_bounds.tail(m).setZero();
    optim::SolveResult res = optim::solve(prog);
    if (res.status != optim::SolveStatus::optimal)
        fail(ErrorKind::numeric, "region feasibility probe failed to solve");
    return std::max(0.0, res.objective);
}

}  // namespace

FeasibleRegion::FeasibleRegion(std::vector<RegionParameters> per_period, double initial_indoor,
                               std::vector<double> outdoor_forecast)
    : per_period_(std::move(per_period)),
      initial_indoor_(initial_indoor),
      outdoor_forecast_(std::move(outdoor_forecast)) {
    const int T = static_cast<int>(per_period_.size());
    if (T < 1) fail(ErrorKind::invalid_argument, "region needs at least one period");
    if (static_cast<int>(outdoor_forecast_.size()) != T)
        fail(ErrorKind::invalid_argument, "outdoor forecast length differs from region periods");
    for (int t = 1; t <= T; ++t) {
        const RegionParameters& p = per_period_[t - 1];
        if (p.band.period != t)
            fail(ErrorKind::invalid_argument, "band for period " + std::to_string(t) + " has period " +
                                                  std::to_string(p.band.period));
        if (p.limits.load_min > p.limits.load_max || p.limits.temp_min > p.limits.temp_max)
            fail(ErrorKind::invalid_argument, "inverted limits at period " + std::to_string(t));
    }
    canonical_ = build_constraints(per_period_, initial_indoor_, outdoor_forecast_, false);
    ordered_ = build_constraints(per_period_, initial_indoor_, outdoor_forecast_, true);
    infeasibility_ = feasibility_probe(ordered_);
}

const LinearConstraints& FeasibleRegion::constraints(bool include_band_ordering) const {
    return include_band_ordering ? ordered_ : canonical_;
}

FeasibleRegion::ContainsResult FeasibleRegion::contains(const Eigen::VectorXd& load, double tolerance) const {
    if (load.size() != canonical_.g.cols())
        fail(ErrorKind::invalid_argument, "load profile length differs from region periods");
    ContainsResult out;
    for (int r = 0; r < canonical_.g.rows(); ++r) {
        if (canonical_.g.row(r).dot(load) > canonical_.h(r) + tolerance) {
            out.contained = false;
            out.violated_rows.push_back(r);
        }
    }
    return out;
}

FeasibleRegion assemble_region(std::vector<RegionParameters> per_period, double initial_indoor,
                               std::vector<double> outdoor_forecast) {
    return FeasibleRegion(std::move(per_period), initial_indoor, std::move(outdoor_forecast));
}

nlohmann::json RegionParameters::to_json() const {
    nlohmann::json j;
    j["load_min"] = limits.load_min;
    j["load_max"] = limits.load_max;
    j["temp_min"] = limits.temp_min;
    j["temp_max"] = limits.temp_max;
    j["band"] = band.to_json();
    return j;
}

RegionParameters RegionParameters::from_json(const nlohmann::json& j) {
    RegionParameters p;
    p.limits.load_min = j.at("load_min").get<double>();
    p.limits.load_max = j.at("load_max").get<double>();
    p.limits.temp_min = j.at("temp_min").get<double>();
    p.limits.temp_max = j.at("temp_max").get<double>();
    p.band = band::BandParameters::from_json(j.at("band"));
    return p;
}

}  // namespace buildflex::region
