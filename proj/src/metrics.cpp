#include "mixopt/metrics.hpp"

#include <cmath>
#include <map>
#include <sstream>

#include "mixopt/csv.hpp"

namespace mixopt {

double r_squared(const Vector& y, const Vector& yhat) {
    if (y.size() != yhat.size()) throw DataError("r_squared: size mismatch");
    if (y.size() < 2) throw UndefinedMetricError("r_squared: need at least 2 points");
    double mean = 0.0;
    for (double v : y) mean += v;
    mean /= static_cast<double>(y.size());
    double ss_res = 0.0, ss_tot = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        ss_res += (y[i] - yhat[i]) * (y[i] - yhat[i]);
        ss_tot += (y[i] - mean) * (y[i] - mean);
    }
    if (ss_tot == 0.0)
        throw UndefinedMetricError("r_squared: constant targets (SS_tot = 0)");
    return std::max(0.0, 1.0 - ss_res / ss_tot);
}

double rmse(const Vector& y, const Vector& yhat) {
    if (y.size() != yhat.size()) throw DataError("rmse: size mismatch");
    if (y.empty()) throw DataError("rmse: empty vectors");
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += (y[i] - yhat[i]) * (y[i] - yhat[i]);
    return std::sqrt(s / static_cast<double>(y.size()));
}

const EvalRow& EvalTable::all() const {
    for (const auto& r : rows)
        if (r.age_label == "all") return r;
    throw DataError("EvalTable: missing 'all' row");
}

const EvalRow* EvalTable::age(double age_days) const {
    std::ostringstream label;
    label << age_days;
    for (const auto& r : rows)
        if (r.age_label == label.str()) return &r;
    return nullptr;
}

EvalTable evaluate_by_age(const GpModel& model, const Dataset& test) {
    if (test.observations.empty()) throw DataError("evaluate_by_age: empty test set");

    Design design = build_design(test, model.scaler(), model.delta_days());
    PredictResult pred = model.predict(design.x);

    std::map<double, std::pair<Vector, Vector>> buckets;  // age -> (y, yhat)
    Vector y_all, yhat_all;
    for (std::size_t i = 0; i < design.y.size(); ++i) {
        y_all.push_back(design.y[i]);
        yhat_all.push_back(pred.mean[i]);
        if (on_observed_age_grid(design.age_days[i])) {
            auto& b = buckets[design.age_days[i]];
            b.first.push_back(design.y[i]);
            b.second.push_back(pred.mean[i]);
        }
    }

    auto make_row = [](const std::string& label, const Vector& y, const Vector& yhat) {
        EvalRow row;
        row.age_label = label;
        row.n = y.size();
        if (!y.empty()) row.rmse_ksi = rmse(y, yhat);
        if (y.size() >= 2) {
            try {
                row.r2 = r_squared(y, yhat);
            } catch (const UndefinedMetricError&) {
                // constant targets in this bucket: r2 stays undefined
            }
        }
        return row;
    };

    EvalTable table;
    for (const auto& [age, b] : buckets) {
        std::ostringstream label;
        label << age;
        table.rows.push_back(make_row(label.str(), b.first, b.second));
    }
    table.rows.push_back(make_row("all", y_all, yhat_all));
    return table;
}

std::string serialize_eval_table(const EvalTable& table) {
    std::ostringstream out;
    out << "age,n,r2,rmse_ksi\n";
    for (const auto& r : table.rows) {
        out << r.age_label << ',' << r.n << ',';
        if (r.r2) out << format_double(*r.r2);
        out << ',';
        if (r.rmse_ksi) out << format_double(*r.rmse_ksi);
        out << '\n';
    }
    return out.str();
}

}  // namespace mixopt
