#include "baselines.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "common.hpp"

namespace buildflex::baselines {

std::vector<std::vector<double>> estimate_base_load(const TrainingDataset& ds) {
    std::vector<std::vector<double>> table(2, std::vector<double>(ds.periods, std::numeric_limits<double>::infinity()));
    for (const auto& day : ds.days) {
        int type = day.explanatory.empty() ? 0 : (is_weekend(day.explanatory[0].day_of_week) ? 1 : 0);
        for (int t = 0; t < ds.periods; ++t) table[type][t] = std::min(table[type][t], day.load_kw[t]);
    }
    for (auto& row : table)
        for (double& v : row)
            if (!std::isfinite(v)) v = 0.0;  // day type absent from the data
    return table;
}

double hvac_power_for(const RcParameters& params, const DayRecord& day, int period, int periods,
                      const BaseLoadFn& true_base) {
    DayOfWeek dow = day.explanatory.empty() ? DayOfWeek::mon : day.explanatory[0].day_of_week;
    double base;
    if (params.source == HvacSource::true_hvac) {
        if (!true_base) fail(ErrorKind::invalid_argument, "true_hvac mode needs a base-load schedule");
        base = true_base(dow, period, periods);
    } else {
        base = params.base_table[is_weekend(dow) ? 1 : 0][period - 1];
    }
    return std::max(0.0, day.load_kw[period - 1] - base);
}

RcParameters fit_rc(const TrainingDataset& ds, HvacSource source, const BaseLoadFn& true_base) {
    if (ds.num_days() < 3) fail(ErrorKind::invalid_argument, "fit_rc: need at least 3 days");
    if (ds.periods < 2) fail(ErrorKind::invalid_argument, "fit_rc: need at least 2 periods");
    if (source == HvacSource::true_hvac && !true_base)
        fail(ErrorKind::invalid_argument, "true_hvac mode needs a base-load schedule");

    RcParameters params;
    params.source = source;
    if (source == HvacSource::base_estimate) params.base_table = estimate_base_load(ds);

    const int K = ds.num_days();
    for (int t = 1; t < ds.periods; ++t) {
        Eigen::MatrixXd design(K, 3);
        Eigen::VectorXd target(K);
        for (int k = 0; k < K; ++k) {
            const DayRecord& day = ds.days[k];
            design(k, 0) = day.indoor_temp_c[t - 1] - day.outdoor_temp_c[t - 1];
            design(k, 1) = hvac_power_for(params, day, t, ds.periods, true_base);
            design(k, 2) = 1.0;
            target[k] = day.indoor_temp_c[t] - day.indoor_temp_c[t - 1];
        }
        Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(design);
        Eigen::VectorXd beta = cod.solve(target);
        params.temp_diff_coef.push_back(beta[0]);
        params.hvac_coef.push_back(beta[1]);
        params.disturbance.push_back(beta[2]);
        params.rank_deficient.push_back(cod.rank() < 3);
    }
    return params;
}

double predict_rc(const RcParameters& params, int period, double indoor, double outdoor, double hvac_power) {
    if (period < 1 || period > params.transitions())
        fail(ErrorKind::invalid_argument, "predict_rc: no coefficients for period " + std::to_string(period));
    int i = period - 1;
    return indoor + params.temp_diff_coef[i] * (indoor - outdoor) + params.hvac_coef[i] * hvac_power +
           params.disturbance[i];
}

double rc_rmse(const RcParameters& params, const TrainingDataset& ds, const BaseLoadFn& true_base) {
    if (ds.num_days() == 0) fail(ErrorKind::invalid_argument, "rc_rmse: empty dataset");
    if (ds.periods - 1 != params.transitions())
        fail(ErrorKind::invalid_argument, "rc_rmse: dataset period count differs from the fit");
    double total = 0.0;
    long count = 0;
    for (const auto& day : ds.days) {
        for (int t = 1; t < ds.periods; ++t) {
            double hvac = hvac_power_for(params, day, t, ds.periods, true_base);
            double pred = predict_rc(params, t, day.indoor_temp_c[t - 1], day.outdoor_temp_c[t - 1], hvac);
            double err = pred - day.indoor_temp_c[t];
            total += err * err;
            ++count;
        }
    }
    return std::sqrt(total / static_cast<double>(count));
}

}  // namespace buildflex::baselines
