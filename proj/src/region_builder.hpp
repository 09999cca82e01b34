#pragma once

#include <Eigen/Dense>
#include <vector>

#include <json.hpp>

#include "band_estimator.hpp"
#include "data_model.hpp"

namespace buildflex::region {

struct LimitEstimates {
    double load_min = 0.0;
    double load_max = 0.0;
    double temp_min = 0.0;
    double temp_max = 0.0;
};

// Componentwise order statistics of the cluster's observations at one
// period: exactly the observed minima/maxima, nothing smoothed.
LimitEstimates estimate_limits(const TrainingDataset& ds, const std::vector<int>& day_indices, int period);

// Per-(cluster, period) feasible-region parameters: load and temperature
// limits plus the two band functions.
struct RegionParameters {
    LimitEstimates limits;
    band::BandParameters band;

    nlohmann::json to_json() const;
    static RegionParameters from_json(const nlohmann::json& j);
};

struct LinearConstraints {
    Eigen::MatrixXd g;  // rows x T
    Eigen::VectorXd h;  // Gp <= h
};

// Whole-day polyhedron for a forecast context. Rows of the canonical export,
// in order: load upper bounds (T), load lower bounds (T), upper-band rows
// (T), lower-band rows (T). Band-ordering rows (upper estimate above lower,
// T more rows) are appended on request; the optimization path uses them so
// extrapolated loads cannot cross the bands.
class FeasibleRegion {
  public:
    FeasibleRegion(std::vector<RegionParameters> per_period, double initial_indoor,
                   std::vector<double> outdoor_forecast);

    int periods() const { return static_cast<int>(per_period_.size()); }
    const RegionParameters& at(int period) const { return per_period_[period - 1]; }
    double initial_indoor() const { return initial_indoor_; }
    const std::vector<double>& outdoor_forecast() const { return outdoor_forecast_; }

    const LinearConstraints& constraints(bool include_band_ordering = false) const;

    struct ContainsResult {
        bool contained = true;
        std::vector<int> violated_rows;  // indices into the canonical export
    };
    // Membership against the canonical 4T rows, each within `tolerance`.
    // Evaluates the exported rows themselves, so contains and the export can
    // never disagree.
    ContainsResult contains(const Eigen::VectorXd& load, double tolerance = 1e-9) const;

    // Feasibility probe (LP on the ordered export): minimum total slack
    // needed to satisfy every row. An empty region reports > 0.
    double infeasibility() const { return infeasibility_; }
    bool empty() const { return infeasibility_ > 1e-7; }

  private:
    std::vector<RegionParameters> per_period_;
    double initial_indoor_ = 0.0;
    std::vector<double> outdoor_forecast_;
    LinearConstraints canonical_;  // 4T rows
    LinearConstraints ordered_;    // 5T rows
    double infeasibility_ = 0.0;
};

FeasibleRegion assemble_region(std::vector<RegionParameters> per_period, double initial_indoor,
                               std::vector<double> outdoor_forecast);

}  // namespace buildflex::region
