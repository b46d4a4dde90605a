#pragma once

#include "kernsdr/common.hpp"

#include <cmath>
#include <set>
#include <string>
#include <vector>

namespace kernsdr {

/// Right-censored observations (T~_i, Delta_i, X_i). status 1 = event, 0 = censored.
struct SurvivalDataset {
    VectorXd times;
    VectorXi status;
    MatrixXd X;

    Index size() const { return times.size(); }
    Index dimension() const { return X.cols(); }

    Index event_count() const { return status.sum(); }
    double censoring_fraction() const {
        return size() == 0 ? 0.0 : 1.0 - static_cast<double>(event_count()) / static_cast<double>(size());
    }

    void validate() const {
        const Index n = times.size();
        if (n == 0) throw InputError("dataset is empty");
        if (status.size() != n || X.rows() != n)
            throw InputError("dataset: times, status and covariates have inconsistent lengths");
        if (X.cols() < 1) throw InputError("dataset: no covariates");
        if (!X.allFinite()) throw InputError("dataset: covariates contain non-finite values");
        std::set<double> event_times;
        for (Index i = 0; i < n; ++i) {
            if (!std::isfinite(times(i)) || !(times(i) > 0.0))
                throw InputError("dataset: observed time at row " + std::to_string(i + 1) +
                                 " must be positive and finite");
            if (status(i) != 0 && status(i) != 1)
                throw InputError("dataset: status at row " + std::to_string(i + 1) + " is not 0/1");
            if (status(i) == 1) event_times.insert(times(i));
        }
        if (!event_times.empty() && event_times.size() < 2)
            throw InputError("dataset: need at least 2 distinct event times");
    }

    /// Rows selected by index (with repetition), e.g. a bootstrap resample.
    SurvivalDataset subset(const std::vector<Index>& rows) const {
        SurvivalDataset out;
        const Index m = static_cast<Index>(rows.size());
        out.times.resize(m);
        out.status.resize(m);
        out.X.resize(m, X.cols());
        for (Index r = 0; r < m; ++r) {
            const Index i = rows[static_cast<std::size_t>(r)];
            out.times(r) = times(i);
            out.status(r) = status(i);
            out.X.row(r) = X.row(i);
        }
        return out;
    }
};

}  // namespace kernsdr
