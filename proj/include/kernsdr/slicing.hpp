#pragma once

#include "kernsdr/common.hpp"
#include "kernsdr/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <vector>

namespace kernsdr {

/// Partition 0 = t_1 < t_2 < ... < t_L < t_{L+1} = inf; slice l is [t_l, t_{l+1}).
/// Only the interior cut points t_2..t_L are stored.
struct SlicePlan {
    std::vector<double> boundaries;

    std::size_t count() const { return boundaries.size() + 1; }

    std::size_t slice_of(double t) const {
        return static_cast<std::size_t>(
            std::upper_bound(boundaries.begin(), boundaries.end(), t) - boundaries.begin());
    }
    double lower(std::size_t l) const { return l == 0 ? 0.0 : boundaries[l - 1]; }
    double upper(std::size_t l) const {
        return l < boundaries.size() ? boundaries[l] : std::numeric_limits<double>::infinity();
    }

    std::vector<std::size_t> occupancy(std::span<const double> times) const {
        std::vector<std::size_t> c(count(), 0);
        for (double t : times) ++c[slice_of(t)];
        return c;
    }
};

/// Quantile cut points with ties merged and empty slices dropped. Accepts
/// any L >= 1 and may return a single slice.
inline SlicePlan quantile_slices(std::span<const double> times, std::size_t L) {
    SlicePlan plan;
    const std::size_t n = times.size();
    if (n == 0 || L <= 1) return plan;
    L = std::min(L, n);
    std::vector<double> sorted(times.begin(), times.end());
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> cuts;
    for (std::size_t l = 1; l < L; ++l) {
        auto k = static_cast<std::size_t>(std::llround(static_cast<double>(n * l) / static_cast<double>(L)));
        k = std::clamp<std::size_t>(k, 1, n - 1);
        cuts.push_back(0.5 * (sorted[k - 1] + sorted[k]));
    }
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    // Keep a cut only if the slice it closes and the final slice are nonempty.
    double prev = 0.0;
    for (double c : cuts) {
        if (!(c > prev)) continue;
        const auto below = std::lower_bound(sorted.begin(), sorted.end(), c) -
                           std::lower_bound(sorted.begin(), sorted.end(), prev);
        if (below > 0) {
            plan.boundaries.push_back(c);
            prev = c;
        }
    }
    while (!plan.boundaries.empty() && plan.boundaries.back() > sorted.back()) plan.boundaries.pop_back();
    return plan;
}

/// L slices at the empirical quantiles l/L of the observed times.
inline SlicePlan make_slices(std::span<const double> times, std::size_t L) {
    if (L < 2) throw InputError("make_slices: need at least 2 slices");
    if (times.size() < L)
        throw InputError("make_slices: " + std::to_string(times.size()) + " observations cannot fill " +
                         std::to_string(L) + " slices");
    SlicePlan plan = quantile_slices(times, L);
    if (plan.count() < 2)
        throw InputError("make_slices: fewer than 2 distinct time values; slicing is impossible");
    return plan;
}

inline SlicePlan make_slices(const VectorXd& times, std::size_t L) {
    return make_slices(std::span<const double>(times.data(), static_cast<std::size_t>(times.size())), L);
}

// =============================================================================
// Double slicing on (T~, Delta)
// =============================================================================

struct DoubleSlicePlan {
    SlicePlan censored_plan;   ///< slices over {Delta = 0}
    SlicePlan event_plan;      ///< slices over {Delta = 1}
    std::vector<int> cell;     ///< cell index per observation
    std::vector<Index> cell_sizes;
    std::vector<std::pair<int, std::size_t>> cell_labels;  ///< (Delta, slice) per cell

    std::size_t cell_count() const { return cell_sizes.size(); }
};

struct DoubleSliceResult {
    DoubleSlicePlan plan;
    MatrixXd q_joint;   ///< (Q_J)_ij = 1 / n_cell if i, j share a cell, else 0
    MatrixXd q_factor;  ///< G with Q_J = G G^T, one column per cell
};

/// Projection onto within-cell means, i.e. B A B^T with the permutation implicit.
inline MatrixXd cell_projection(const std::vector<int>& cell, const std::vector<Index>& sizes) {
    const Index n = static_cast<Index>(cell.size());
    MatrixXd Q = MatrixXd::Zero(n, n);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j)
            if (cell[static_cast<std::size_t>(i)] == cell[static_cast<std::size_t>(j)])
                Q(i, j) = 1.0 / static_cast<double>(sizes[static_cast<std::size_t>(cell[static_cast<std::size_t>(i)])]);
    return Q;
}

inline DoubleSliceResult double_slice_q(const SurvivalDataset& data, std::size_t L0, std::size_t L1) {
    const Index n = data.size();
    if (n == 0) throw InputError("double_slice_q: empty dataset");
    if (L0 < 1 || L1 < 1) throw InputError("double_slice_q: slice counts must be >= 1");

    std::vector<double> t0, t1;
    for (Index i = 0; i < n; ++i) (data.status(i) == 1 ? t1 : t0).push_back(data.times(i));

    DoubleSliceResult out;
    auto& plan = out.plan;
    plan.censored_plan = quantile_slices(t0, L0);
    plan.event_plan = quantile_slices(t1, L1);

    const std::size_t c0 = t0.empty() ? 0 : plan.censored_plan.count();
    const std::size_t c1 = t1.empty() ? 0 : plan.event_plan.count();
    std::vector<Index> sizes(c0 + c1, 0);
    plan.cell.resize(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
        const bool event = data.status(i) == 1;
        const std::size_t c = event ? c0 + plan.event_plan.slice_of(data.times(i))
                                    : plan.censored_plan.slice_of(data.times(i));
        plan.cell[static_cast<std::size_t>(i)] = static_cast<int>(c);
        ++sizes[c];
    }
    for (std::size_t c = 0; c < c0; ++c) plan.cell_labels.emplace_back(0, c);
    for (std::size_t c = 0; c < c1; ++c) plan.cell_labels.emplace_back(1, c);
    plan.cell_sizes = sizes;
    out.q_joint = cell_projection(plan.cell, plan.cell_sizes);
    out.q_factor = MatrixXd::Zero(n, static_cast<Index>(sizes.size()));
    for (Index i = 0; i < n; ++i) {
        const auto c = static_cast<std::size_t>(plan.cell[static_cast<std::size_t>(i)]);
        out.q_factor(i, static_cast<Index>(c)) = 1.0 / std::sqrt(static_cast<double>(sizes[c]));
    }
    return out;
}

// =============================================================================
// Censoring-weighted slicing
// =============================================================================

/// w(t', t, i): estimated P(T >= t | T > t', X_i) for observation i, t' < t.
using WeightFunction = std::function<double(double t_prime, double t, std::size_t i)>;

struct WeightedSliceMatrices {
    MatrixXd w_hat;  ///< n x L per-observation slice weights
    VectorXd p_hat;  ///< L slice probabilities
    MatrixXd q;      ///< (1/n) W P^-1 W^T
    MatrixXd q_factor;  ///< G = W diag(colsum)^-1/2, so that Q = G G^T
    SlicePlan plan;  ///< plan after any merging of degenerate slices
};

inline constexpr double kSliceProbabilityFloor = 1e-8;

/**
 * Builds W, P and Q from a slice plan and a censoring weight function.
 *
 * Row i holds g_i(t_l) - g_i(t_{l+1}) with
 *   g_i(t) = I(T~_i >= t) + I(T~_i < t, Delta_i = 0) w(T~_i, t, i),
 * g_i(0) = 1 and g_i(inf) = 0, so rows telescope to 1. The weight function is
 * only called for censored observations at cut points past their own time.
 * Slices whose probability drops below the floor are merged into a neighbour.
 */
inline WeightedSliceMatrices weighted_slice_matrices(const SurvivalDataset& data, const SlicePlan& plan,
                                                     const WeightFunction& w_hat) {
    const Index n = data.size();
    if (n == 0) throw InputError("weighted_slice_matrices: empty dataset");
    const std::size_t L = plan.count();

    MatrixXd W(n, static_cast<Index>(L));
    std::vector<double> g(L + 1);
    for (Index i = 0; i < n; ++i) {
        const double ti = data.times(i);
        const bool censored = data.status(i) == 0;
        g[0] = 1.0;
        g[L] = 0.0;
        for (std::size_t l = 1; l < L; ++l) {
            const double t = plan.boundaries[l - 1];
            if (ti >= t) {
                g[l] = 1.0;
            } else if (censored) {
                double w = w_hat(ti, t, static_cast<std::size_t>(i));
                if (!std::isfinite(w)) throw NumericalError("censoring weight function returned a non-finite value");
                g[l] = std::clamp(w, 0.0, 1.0);
            } else {
                g[l] = 0.0;
            }
        }
        bool negative = false;
        for (std::size_t l = 0; l < L; ++l) {
            double v = g[l] - g[l + 1];
            if (v < 0.0) {
                v = 0.0;
                negative = true;
            }
            W(i, static_cast<Index>(l)) = v;
        }
        if (negative) {
            const double s = W.row(i).sum();
            if (s > 0.0) W.row(i) /= s;
        }
    }

    WeightedSliceMatrices out;
    out.plan = plan;
    for (;;) {
        const VectorXd colsum = W.colwise().sum().transpose();
        Index worst = -1;
        for (Index l = 0; l < W.cols(); ++l)
            if (colsum(l) / static_cast<double>(n) < kSliceProbabilityFloor) {
                worst = l;
                break;
            }
        if (worst < 0) break;
        if (W.cols() <= 2)
            throw SliceDegeneracyError("weighted slicing: a slice has estimated probability below " +
                                       std::to_string(kSliceProbabilityFloor) + "; use fewer slices");
        // Merge the degenerate slice into its right neighbour (left for the last).
        const Index keep = worst + 1 < W.cols() ? worst + 1 : worst - 1;
        const Index lo = std::min(keep, worst);
        W.col(lo) += W.col(lo + 1);
        const Index tail = W.cols() - lo - 2;
        if (tail > 0) W.block(0, lo + 1, n, tail) = W.block(0, lo + 2, n, tail).eval();
        W.conservativeResize(Eigen::NoChange, W.cols() - 1);
        out.plan.boundaries.erase(out.plan.boundaries.begin() + lo);
    }

    const VectorXd colsum = W.colwise().sum().transpose();
    out.p_hat = colsum / static_cast<double>(n);
    out.q_factor = W * colsum.cwiseSqrt().cwiseInverse().asDiagonal();
    MatrixXd Q = out.q_factor * out.q_factor.transpose();
    out.q = 0.5 * (Q + Q.transpose());
    out.w_hat = std::move(W);
    return out;
}

}  // namespace kernsdr
