#include "data_model.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "common.hpp"
#include "csv.hpp"

namespace buildflex {

namespace {
const char* kDayNames[] = {"mon", "tue", "wed", "thu", "fri", "sat", "sun"};

bool finite(double v) { return std::isfinite(v); }

void check_temp(double v, const std::string& where) {
    if (!finite(v) || v < -60.0 || v > 80.0)
        fail(ErrorKind::validation, where + ": temperature " + format_double(v) + " outside [-60, 80] C");
}
}  // namespace

DayOfWeek day_of_week_from_string(const std::string& token) {
    for (int i = 0; i < 7; ++i)
        if (token == kDayNames[i]) return static_cast<DayOfWeek>(i);
    fail(ErrorKind::parse, "unknown day_of_week '" + token + "'");
}

const char* to_string(DayOfWeek d) { return kDayNames[static_cast<int>(d)]; }

const char* to_string(DatasetRole role) {
    switch (role) {
        case DatasetRole::train: return "train";
        case DatasetRole::cross_validation: return "cross_validation";
        case DatasetRole::test: return "test";
    }
    return "unknown";
}

double DayRecord::mean_outdoor_temp() const {
    if (outdoor_temp_c.empty()) return 0.0;
    return std::accumulate(outdoor_temp_c.begin(), outdoor_temp_c.end(), 0.0) /
           static_cast<double>(outdoor_temp_c.size());
}

void validate_day_record(const DayRecord& day, int periods, const std::string& where) {
    if (periods < 1) fail(ErrorKind::validation, where + ": periods must be >= 1");
    auto n = static_cast<std::size_t>(periods);
    if (day.load_kw.size() != n || day.indoor_temp_c.size() != n || day.outdoor_temp_c.size() != n ||
        day.explanatory.size() != n)
        fail(ErrorKind::validation, where + ": series lengths differ from T=" + std::to_string(periods));
    check_temp(day.initial_indoor_temp_c, where);
    for (int t = 0; t < periods; ++t) {
        if (!finite(day.load_kw[t]) || day.load_kw[t] < 0.0)
            fail(ErrorKind::validation,
                 where + ": load at hour " + std::to_string(t + 1) + " is " + format_double(day.load_kw[t]));
        check_temp(day.indoor_temp_c[t], where);
        check_temp(day.outdoor_temp_c[t], where);
        if (!finite(day.explanatory[t].solar_wm2))
            fail(ErrorKind::validation, where + ": non-finite solar value at hour " + std::to_string(t + 1));
        for (double e : day.explanatory[t].extra)
            if (!finite(e)) fail(ErrorKind::validation, where + ": non-finite extra feature");
    }
}

TrainingDataset load_dataset(const std::string& path, int periods) {
    if (periods < 1) fail(ErrorKind::invalid_argument, "periods must be >= 1");
    csv::Table table = csv::read_file(path);
    const std::size_t c_day = table.column("day");
    const std::size_t c_hour = table.column("hour");
    const std::size_t c_load = table.column("load_kw");
    const std::size_t c_in = table.column("indoor_temp_c");
    const std::size_t c_out = table.column("outdoor_temp_c");
    const std::size_t c_solar = table.column("solar_wm2");
    const std::size_t c_dow = table.column("day_of_week");

    struct PartialDay {
        DayRecord rec;
        std::set<int> seen_hours;
        bool have_initial = false;
    };
    std::map<std::int64_t, PartialDay> partial;
    std::vector<std::int64_t> order;

    auto want_number = [&](const csv::Row& row, std::size_t col, const char* what) {
        double v;
        if (!parse_double(row.fields[col], v))
            fail(ErrorKind::parse, path + ":" + std::to_string(row.line_number) + ": bad " + std::string(what) +
                                       " '" + row.fields[col] + "'");
        if (!finite(v))
            fail(ErrorKind::validation,
                 path + ":" + std::to_string(row.line_number) + ": non-finite " + std::string(what));
        return v;
    };

    for (const auto& row : table.rows) {
        const std::string loc = path + ":" + std::to_string(row.line_number);
        double day_raw = want_number(row, c_day, "day");
        double hour_raw = want_number(row, c_hour, "hour");
        auto day_id = static_cast<std::int64_t>(day_raw);
        int hour = static_cast<int>(hour_raw);
        if (day_raw != static_cast<double>(day_id) || hour_raw != static_cast<double>(hour))
            fail(ErrorKind::parse, loc + ": day/hour must be integers");
        if (hour < 0 || hour > periods)
            fail(ErrorKind::validation, loc + ": hour " + std::to_string(hour) + " outside 0.." + std::to_string(periods));

        auto [it, inserted] = partial.try_emplace(day_id);
        if (inserted) {
            it->second.rec.day_id = day_id;
            it->second.rec.load_kw.assign(periods, 0.0);
            it->second.rec.indoor_temp_c.assign(periods, 0.0);
            it->second.rec.outdoor_temp_c.assign(periods, 0.0);
            it->second.rec.explanatory.assign(periods, ExplanatoryRecord{});
            order.push_back(day_id);
        }
        PartialDay& pd = it->second;

        if (hour == 0) {
            if (pd.have_initial) fail(ErrorKind::validation, loc + ": duplicate hour 0 for day " + std::to_string(day_id));
            pd.have_initial = true;
            pd.rec.initial_indoor_temp_c = want_number(row, c_in, "indoor_temp_c");
            continue;
        }
        if (!pd.seen_hours.insert(hour).second)
            fail(ErrorKind::validation,
                 loc + ": duplicate (day " + std::to_string(day_id) + ", hour " + std::to_string(hour) + ")");
        int t = hour - 1;
        pd.rec.load_kw[t] = want_number(row, c_load, "load_kw");
        pd.rec.indoor_temp_c[t] = want_number(row, c_in, "indoor_temp_c");
        pd.rec.outdoor_temp_c[t] = want_number(row, c_out, "outdoor_temp_c");
        ExplanatoryRecord& er = pd.rec.explanatory[t];
        er.solar_wm2 = want_number(row, c_solar, "solar_wm2");
        er.outdoor_temp_c = pd.rec.outdoor_temp_c[t];
        er.day_of_week = day_of_week_from_string(row.fields[c_dow]);
    }

    TrainingDataset ds;
    ds.periods = periods;
    ds.role = DatasetRole::train;
    for (std::int64_t id : order) {
        PartialDay& pd = partial[id];
        if (static_cast<int>(pd.seen_hours.size()) != periods)
            fail(ErrorKind::validation, path + ": incomplete day " + std::to_string(id) + " (" +
                                            std::to_string(pd.seen_hours.size()) + " of " +
                                            std::to_string(periods) + " hourly rows)");
        if (!pd.have_initial)
            fail(ErrorKind::validation, path + ": day " + std::to_string(id) + " has no hour=0 row");
        for (int t = 1; t < periods; ++t)
            if (pd.rec.explanatory[t].day_of_week != pd.rec.explanatory[0].day_of_week)
                fail(ErrorKind::validation, path + ": day " + std::to_string(id) + " mixes day_of_week values");
        validate_day_record(pd.rec, periods, path + ": day " + std::to_string(id));
        ds.days.push_back(std::move(pd.rec));
    }
    return ds;
}

void save_dataset(const TrainingDataset& ds, const std::string& path) {
    csv::Writer out(path);
    out.row({"day", "hour", "load_kw", "indoor_temp_c", "outdoor_temp_c", "solar_wm2", "day_of_week"});
    for (const auto& day : ds.days) {
        const char* dow = day.explanatory.empty() ? "mon" : to_string(day.explanatory[0].day_of_week);
        out.row({std::to_string(day.day_id), "0", "", format_double(day.initial_indoor_temp_c), "", "", dow});
        for (int t = 0; t < ds.periods; ++t) {
            out.row({std::to_string(day.day_id), std::to_string(t + 1), format_double(day.load_kw[t]),
                     format_double(day.indoor_temp_c[t]), format_double(day.outdoor_temp_c[t]),
                     format_double(day.explanatory[t].solar_wm2), to_string(day.explanatory[t].day_of_week)});
        }
    }
    out.close();
}

SplitResult split_dataset(const TrainingDataset& ds, const SplitSizes& sizes, std::uint64_t seed) {
    if (sizes.train < 0 || sizes.cross_validation < 0 || sizes.test < 0)
        fail(ErrorKind::invalid_argument, "split sizes must be non-negative");
    long total = static_cast<long>(sizes.train) + sizes.cross_validation + sizes.test;
    if (total > ds.num_days())
        fail(ErrorKind::invalid_argument, "split sizes (" + std::to_string(total) + ") exceed available days (" +
                                              std::to_string(ds.num_days()) + ")");
    std::vector<int> idx(ds.days.size());
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(seed);
    rng.shuffle(idx);

    SplitResult result;
    result.train.periods = result.cross_validation.periods = result.test.periods = ds.periods;
    result.train.role = DatasetRole::train;
    result.cross_validation.role = DatasetRole::cross_validation;
    result.test.role = DatasetRole::test;
    int pos = 0;
    for (int i = 0; i < sizes.train; ++i) result.train.days.push_back(ds.days[idx[pos++]]);
    for (int i = 0; i < sizes.cross_validation; ++i) result.cross_validation.days.push_back(ds.days[idx[pos++]]);
    for (int i = 0; i < sizes.test; ++i) result.test.days.push_back(ds.days[idx[pos++]]);
    return result;
}

Eigen::VectorXd build_feature_vector(const TrainingDataset& ds, int day_index, int period) {
    if (day_index < 0 || day_index >= ds.num_days())
        fail(ErrorKind::invalid_argument, "day index out of range");
    if (period < 1 || period > ds.periods)
        fail(ErrorKind::invalid_argument, "period " + std::to_string(period) + " outside 1.." + std::to_string(ds.periods));
    const DayRecord& day = ds.days[day_index];
    Eigen::VectorXd w(period + 3);
    for (int j = 0; j < period; ++j) w[j] = day.load_kw[j];
    w[period] = day.initial_indoor_temp_c;
    w[period + 1] = day.indoor_temp_c[period - 1];
    w[period + 2] = day.outdoor_temp_c[period - 1];
    return w;
}

}  // namespace buildflex
