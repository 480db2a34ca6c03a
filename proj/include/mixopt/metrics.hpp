#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mixopt/dataset.hpp"
#include "mixopt/errors.hpp"
#include "mixopt/gp.hpp"

namespace mixopt {

struct UndefinedMetricError : DataError {
    explicit UndefinedMetricError(const std::string& what) : DataError(what) {}
};

// coefficient of determination, clamped below at zero; constant targets raise
double r_squared(const Vector& y, const Vector& yhat);

double rmse(const Vector& y, const Vector& yhat);

struct EvalRow {
    std::string age_label;        // "1", "3", "5", "14", "28" or "all"
    std::size_t n = 0;
    std::optional<double> r2;     // empty when fewer than 2 points or SS_tot = 0
    std::optional<double> rmse_ksi;
};

struct EvalTable {
    std::vector<EvalRow> rows;  // grid ages first, "all" last

    const EvalRow& all() const;
    const EvalRow* age(double age_days) const;
};

// Per-age R2/RMSE over predictions at the test observations; the "all" row
// pools every (mix, age) pair including off-grid ages.
EvalTable evaluate_by_age(const GpModel& model, const Dataset& test);

std::string serialize_eval_table(const EvalTable& table);

}  // namespace mixopt
