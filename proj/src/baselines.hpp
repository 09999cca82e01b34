#pragma once

#include <functional>
#include <vector>

#include "data_model.hpp"

namespace buildflex::baselines {

// HVAC power is not part of the coarse data. Either the caller supplies the
// true base-load schedule (synthetic evaluation) or the base load is
// estimated from the training data as the minimum observed load for the
// period's day type.
enum class HvacSource { true_hvac, base_estimate };

using BaseLoadFn = std::function<double(DayOfWeek dow, int period, int periods)>;

// Classical per-period linear thermal model:
//   indoor[t+1] - indoor[t] =
//       temp_diff_coef[t] * (indoor[t] - outdoor[t])
//     + hvac_coef[t] * hvac_power[t]
//     + disturbance[t]
// Coefficients exist for transitions t = 1..T-1.
struct RcParameters {
    std::vector<double> temp_diff_coef;
    std::vector<double> hvac_coef;
    std::vector<double> disturbance;
    std::vector<bool> rank_deficient;  // per-transition diagnostic

    HvacSource source = HvacSource::base_estimate;
    // base_estimate mode: [0] weekday, [1] weekend minimum observed load per
    // period, frozen at fit time.
    std::vector<std::vector<double>> base_table;

    int transitions() const { return static_cast<int>(temp_diff_coef.size()); }
};

// Per-day-type, per-period minimum observed load.
std::vector<std::vector<double>> estimate_base_load(const TrainingDataset& ds);

// HVAC power attributed to (day, period) under the model's convention.
double hvac_power_for(const RcParameters& params, const DayRecord& day, int period, int periods,
                      const BaseLoadFn& true_base = nullptr);

// Per-transition ordinary least squares (minimum-norm when the design is
// rank deficient, with the deficiency flagged).
RcParameters fit_rc(const TrainingDataset& ds, HvacSource source, const BaseLoadFn& true_base = nullptr);

double predict_rc(const RcParameters& params, int period, double indoor, double outdoor, double hvac_power);

// RMSE of one-step predictions over a dataset.
double rc_rmse(const RcParameters& params, const TrainingDataset& ds, const BaseLoadFn& true_base = nullptr);

}  // namespace buildflex::baselines
