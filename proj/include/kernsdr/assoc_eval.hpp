#pragma once

#include "kernsdr/common.hpp"
#include "kernsdr/kaplan_meier.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>
#include <vector>

namespace kernsdr {

/// Average ranks (1-based) with ties sharing their mean rank.
inline VectorXd midranks(const Eigen::Ref<const VectorXd>& v) {
    const Index n = v.size();
    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    std::sort(order.begin(), order.end(), [&](Index a, Index b) { return v(a) < v(b); });
    VectorXd r(n);
    Index k = 0;
    while (k < n) {
        Index e = k;
        while (e + 1 < n && v(order[static_cast<std::size_t>(e + 1)]) == v(order[static_cast<std::size_t>(k)])) ++e;
        const double rank = 0.5 * static_cast<double>(k + e) + 1.0;
        for (Index j = k; j <= e; ++j) r(order[static_cast<std::size_t>(j)]) = rank;
        k = e + 1;
    }
    return r;
}

namespace detail {

/// Pearson correlation of two midrank vectors. Centered midranks are
/// half-integers, so every sum is exact and independent of row order.
inline double rank_correlation(const VectorXd& ra, const VectorXd& rb, bool* degenerate = nullptr) {
    const double mid = 0.5 * static_cast<double>(ra.size() + 1);
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (Index i = 0; i < ra.size(); ++i) {
        const double a = ra(i) - mid, b = rb(i) - mid;
        sab += a * b;
        saa += a * a;
        sbb += b * b;
    }
    if (!(saa > 0.0) || !(sbb > 0.0)) {
        if (degenerate) *degenerate = true;
        return 0.0;
    }
    if (degenerate) *degenerate = false;
    return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

}  // namespace detail

/// Spearman rank correlation (Pearson correlation of midranks).
inline double spearman(const Eigen::Ref<const VectorXd>& u, const Eigen::Ref<const VectorXd>& v) {
    if (u.size() != v.size()) throw InputError("spearman: vectors differ in length");
    if (u.size() < 3) throw InputError("spearman: need at least 3 observations");
    if (!u.allFinite() || !v.allFinite()) throw InputError("spearman: non-finite values");
    bool degenerate = false;
    const double r = detail::rank_correlation(midranks(u), midranks(v), &degenerate);
    if (degenerate) warn("spearman: constant input, correlation defined as 0");
    return r;
}

struct RmaeResult {
    double value = 0.0;  ///< clipped to [0, 1]
    VectorXd alpha;      ///< unit weights for the columns of the first argument
    VectorXd beta;       ///< unit weights for the columns of the second argument
    int iterations = 0;
    bool converged = false;
};

struct RmaeOptions {
    int grid_points = 90;
    int max_sweeps = 50;
    double tolerance = 1e-6;
    int zoom_levels = 8;
};

namespace detail {

/// Leading canonical pair of the (rank-transformed) column blocks.
inline std::pair<VectorXd, VectorXd> first_canonical_pair(const MatrixXd& A, const MatrixXd& B) {
    auto center = [](const MatrixXd& M) { return MatrixXd(M.rowwise() - M.colwise().mean()); };
    const MatrixXd a = center(A), b = center(B);
    auto inv_sqrt = [](const MatrixXd& S) {
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(S);
        VectorXd d = es.eigenvalues();
        const double floor = 1e-10 * std::max(1.0, d.cwiseAbs().maxCoeff());
        for (Index i = 0; i < d.size(); ++i) d(i) = d(i) > floor ? 1.0 / std::sqrt(d(i)) : 0.0;
        return MatrixXd(es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose());
    };
    const MatrixXd wa = inv_sqrt(a.transpose() * a), wb = inv_sqrt(b.transpose() * b);
    Eigen::JacobiSVD<MatrixXd> svd(wa * a.transpose() * b * wb, Eigen::ComputeFullU | Eigen::ComputeFullV);
    VectorXd alpha = wa * svd.matrixU().col(0), beta = wb * svd.matrixV().col(0);
    return {alpha, beta};
}

class RmaeSearch {
public:
    RmaeSearch(const MatrixXd& X, const MatrixXd& Y, const RmaeOptions& opt) : X_(X), Y_(Y), opt_(opt) {}

    double value(const VectorXd& a, const VectorXd& b) const {
        return rank_correlation(midranks(X_ * a), midranks(Y_ * b));
    }

    /// Alternating plane-rotation grid search from (a, b); returns |r| and
    /// leaves the maximizers in a, b with a positive correlation.
    double run(VectorXd& a, VectorXd& b, int& sweeps, bool& converged) const {
        a.normalize();
        b.normalize();
        double best = std::abs(value(a, b));
        double range = std::numbers::pi / 2.0;
        int zoom = 0;
        converged = false;
        for (sweeps = 0; sweeps < opt_.max_sweeps;) {
            ++sweeps;
            const double before = best;
            best = rotate(X_, a, midranks(Y_ * b), range, best);
            best = rotate(Y_, b, midranks(X_ * a), range, best);
            if (best - before < opt_.tolerance) {
                if (zoom >= opt_.zoom_levels || best >= 1.0) {
                    converged = true;
                    break;
                }
                ++zoom;
                range *= 0.5;
            }
        }
        if (value(a, b) < 0.0) b = -b;
        return best;
    }

private:
    /// One pass over every coordinate plane of `w`, keeping the best rotation.
    double rotate(const MatrixXd& M, VectorXd& w, const VectorXd& other_ranks, double range, double best) const {
        const Index k = w.size();
        if (k < 2) return best;
        const int G = opt_.grid_points;
        for (Index i = 0; i < k; ++i)
            for (Index j = i + 1; j < k; ++j) {
                double best_theta = 0.0;
                for (int g = 1; g <= G; ++g) {
                    // Angles in (-range, range], excluding the current direction (theta = 0 handled by `best`).
                    const double theta = -range + 2.0 * range * static_cast<double>(g) / static_cast<double>(G);
                    if (theta == 0.0) continue;
                    VectorXd cand = w;
                    const double c = std::cos(theta), s = std::sin(theta);
                    cand(i) = c * w(i) - s * w(j);
                    cand(j) = s * w(i) + c * w(j);
                    const double r = std::abs(rank_correlation(midranks(M * cand), other_ranks));
                    if (r > best) {
                        best = r;
                        best_theta = theta;
                    }
                }
                if (best_theta != 0.0) {
                    const double c = std::cos(best_theta), s = std::sin(best_theta);
                    const double wi = w(i), wj = w(j);
                    w(i) = c * wi - s * wj;
                    w(j) = s * wi + c * wj;
                }
            }
        return best;
    }

    const MatrixXd& X_;
    const MatrixXd& Y_;
    RmaeOptions opt_;
};

}  // namespace detail

/**
 * Maximum rank association max_{a,b} r(X a, Y b) by the alternate grid
 * algorithm, with five starts (coordinate axes and the leading canonical pair
 * of the rank-transformed columns).
 */
inline RmaeResult rmae(const MatrixXd& X, const MatrixXd& Y, const RmaeOptions& options = {}) {
    if (X.rows() != Y.rows()) throw InputError("rmae: score matrices differ in row count");
    if (X.rows() < 10) throw InputError("rmae: need at least 10 observations");
    if (X.cols() < 1 || Y.cols() < 1) throw InputError("rmae: empty score matrix");
    if (!X.allFinite() || !Y.allFinite()) throw InputError("rmae: non-finite scores");

    const bool swapped = X.cols() < Y.cols();
    const MatrixXd& A = swapped ? Y : X;
    const MatrixXd& B = swapped ? X : Y;
    const Index p = A.cols(), q = B.cols();

    RmaeResult out;
    out.alpha = VectorXd::Zero(X.cols());
    out.beta = VectorXd::Zero(Y.cols());
    auto constant = [](const MatrixXd& M) { return ((M.rowwise() - M.colwise().mean()).cwiseAbs().maxCoeff() == 0.0); };
    if (constant(A) || constant(B)) {
        out.alpha(0) = 1.0;
        out.beta(0) = 1.0;
        return out;
    }

    std::vector<std::pair<VectorXd, VectorXd>> starts;
    auto axis = [](Index dim, Index k) {
        VectorXd e = VectorXd::Zero(dim);
        e(std::min(k, dim - 1)) = 1.0;
        return e;
    };
    starts.emplace_back(axis(p, 0), axis(q, 0));
    if (p > 1) starts.emplace_back(axis(p, 1), axis(q, 0));
    if (q > 1) starts.emplace_back(axis(p, 0), axis(q, 1));
    if (p > 1 && q > 1) starts.emplace_back(axis(p, 1), axis(q, 1));
    {
        MatrixXd ra(A.rows(), p), rb(B.rows(), q);
        for (Index c = 0; c < p; ++c) ra.col(c) = midranks(A.col(c));
        for (Index c = 0; c < q; ++c) rb.col(c) = midranks(B.col(c));
        auto [ca, cb] = detail::first_canonical_pair(ra, rb);
        if (ca.norm() > 0.0 && cb.norm() > 0.0) starts.emplace_back(ca, cb);
    }
    while (starts.size() < 5 && p > 2) starts.emplace_back(axis(p, static_cast<Index>(starts.size())), axis(q, 0));
    if (starts.size() > 5) starts.resize(5);

    const detail::RmaeSearch search(A, B, options);
    double best = -1.0;
    for (auto& [a, b] : starts) {
        int sweeps = 0;
        bool converged = false;
        const double v = search.run(a, b, sweeps, converged);
        out.iterations += sweeps;
        if (v > best) {
            best = v;
            out.converged = converged;
            (swapped ? out.beta : out.alpha) = a;
            (swapped ? out.alpha : out.beta) = b;
        }
    }
    out.value = std::clamp(best, 0.0, 1.0);
    return out;
}

/// Kaplan-Meier curves per group label, keyed by label.
inline std::map<long, std::vector<KmStep>> kaplan_meier_by_group(const VectorXd& times, const VectorXi& status,
                                                                 const std::vector<long>& groups) {
    if (static_cast<Index>(groups.size()) != times.size()) throw InputError("kaplan_meier_by_group: length mismatch");
    std::map<long, std::vector<Index>> rows;
    for (std::size_t i = 0; i < groups.size(); ++i) rows[groups[i]].push_back(static_cast<Index>(i));
    std::map<long, std::vector<KmStep>> out;
    for (const auto& [label, idx] : rows) {
        VectorXd t(static_cast<Index>(idx.size()));
        VectorXi s(static_cast<Index>(idx.size()));
        for (std::size_t k = 0; k < idx.size(); ++k) {
            t(static_cast<Index>(k)) = times(idx[k]);
            s(static_cast<Index>(k)) = status(idx[k]);
        }
        out[label] = kaplan_meier(t, s);
    }
    return out;
}

}  // namespace kernsdr
