#pragma once

#include "kernsdr/common.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

namespace kernsdr {

struct KmStep {
    double time;
    double survival;  ///< S(t) for t >= time, up to the next step
    Index at_risk;
    Index events;
};

/// Product-limit estimator; one step per distinct event time.
inline std::vector<KmStep> kaplan_meier(const Eigen::Ref<const VectorXd>& times,
                                        const Eigen::Ref<const VectorXi>& status) {
    if (times.size() != status.size()) throw InputError("kaplan_meier: length mismatch");
    const Index n = times.size();
    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return times(a) < times(b); });

    std::vector<KmStep> steps;
    double s = 1.0;
    Index at_risk = n;
    std::size_t k = 0;
    while (k < order.size()) {
        const double t = times(order[k]);
        Index d = 0, removed = 0;
        while (k < order.size() && times(order[k]) == t) {
            d += status(order[k]) != 0 ? 1 : 0;
            ++removed;
            ++k;
        }
        if (d > 0) {
            s *= 1.0 - static_cast<double>(d) / static_cast<double>(at_risk);
            steps.push_back({t, s, at_risk, d});
        }
        at_risk -= removed;
    }
    return steps;
}

/// S(t) (right-continuous).
inline double km_survival_at(const std::vector<KmStep>& curve, double t) {
    double s = 1.0;
    for (const auto& st : curve) {
        if (st.time > t) break;
        s = st.survival;
    }
    return s;
}

/// S(t-), the probability of surviving to at least t.
inline double km_survival_before(const std::vector<KmStep>& curve, double t) {
    double s = 1.0;
    for (const auto& st : curve) {
        if (st.time >= t) break;
        s = st.survival;
    }
    return s;
}

}  // namespace kernsdr
