#pragma once

#include "kernsdr/common.hpp"
#include "kernsdr/dataset.hpp"
#include "kernsdr/kaplan_meier.hpp"

#include <cmath>
#include <numbers>
#include <vector>

namespace kernsdr {

/// Scores on the joint directions plus smoothing parameters.
struct ReducedCoordinates {
    MatrixXd Z;      ///< n x m
    double h = 1.0;  ///< bandwidth
    int order = 2;   ///< kernel order d

    Index size() const { return Z.rows(); }
    Index dim() const { return Z.cols(); }

    void validate() const {
        if (Z.rows() < 1 || Z.cols() < 1) throw InputError("reduced coordinates: need m >= 1 and n >= 1");
        if (!(h > 0.0) || !std::isfinite(h)) throw InputError("reduced coordinates: bandwidth must be positive");
        if (!Z.allFinite()) throw InputError("reduced coordinates: non-finite scores");
        if (order < 1 || order > 6) throw InputError("reduced coordinates: smoother order must be in 1..6");
    }
};

/// h = c0 * sigma * n^(-1/(2d)).
inline double bandwidth(Index n, int d, double c0, double sigma = 1.0) {
    if (n < 2) throw InputError("bandwidth: need n >= 2");
    if (d < 1) throw InputError("bandwidth: order must be >= 1");
    if (!(c0 > 0.0) || !(sigma > 0.0)) throw InputError("bandwidth: c0 and sigma must be positive");
    return c0 * sigma * std::pow(static_cast<double>(n), -1.0 / (2.0 * d));
}

/// Mean of the per-column standard deviations.
inline double average_sd(const MatrixXd& Z) {
    if (Z.rows() < 2) return 1.0;
    double s = 0.0;
    for (Index j = 0; j < Z.cols(); ++j) {
        const double mu = Z.col(j).mean();
        s += std::sqrt((Z.col(j).array() - mu).square().sum() / static_cast<double>(Z.rows() - 1));
    }
    return s / static_cast<double>(Z.cols());
}

/// Univariate Gaussian-based kernel of the given order (2, 4 or 6).
inline double smoothing_kernel(double u, int order) {
    const double phi = std::exp(-0.5 * u * u) / std::sqrt(2.0 * std::numbers::pi);
    if (order <= 2) return phi;
    const double u2 = u * u;
    if (order <= 4) return 0.5 * (3.0 - u2) * phi;
    return (15.0 - 10.0 * u2 + u2 * u2) / 8.0 * phi;
}

/// h^-m K_m((a - b) / h) with the product kernel.
inline double scaled_product_kernel(const Eigen::Ref<const Eigen::RowVectorXd>& a,
                                    const Eigen::Ref<const Eigen::RowVectorXd>& b, double h, int order) {
    double k = 1.0;
    for (Index c = 0; c < a.size(); ++c) k *= smoothing_kernel((a(c) - b(c)) / h, order) / h;
    return k;
}

inline double density_floor(const ReducedCoordinates& coords) {
    return 1e-12 * std::pow(coords.h, -static_cast<double>(coords.dim()));
}

/// 1 / (n log n), capped at 1.
inline double survival_floor(Index n) {
    if (n < 2) return 1.0;
    const double nn = static_cast<double>(n);
    return std::min(1.0, 1.0 / (nn * std::log(nn)));
}

/// Kernel-weight vector e_j = h^-m K_m((Z_j - z) / h).
inline VectorXd kernel_weights(const ReducedCoordinates& coords, const Eigen::Ref<const Eigen::RowVectorXd>& z) {
    const Index n = coords.size();
    VectorXd e(n);
    for (Index j = 0; j < n; ++j) e(j) = scaled_product_kernel(coords.Z.row(j), z, coords.h, coords.order);
    return e;
}

inline double nw_density(const ReducedCoordinates& coords, const Eigen::Ref<const Eigen::RowVectorXd>& z) {
    coords.validate();
    if (z.size() != coords.dim()) throw InputError("nw_density: evaluation point has wrong dimension");
    return kernel_weights(coords, z).mean();
}

inline void check_pairing(const ReducedCoordinates& coords, const SurvivalDataset& data) {
    coords.validate();
    if (coords.size() != data.size())
        throw InputError("hazard smoothing: coordinates and dataset differ in size");
}

/// Smoothed S_T~(T~_i | Z_i), clamped into [1/(n log n), 1].
inline double cond_survival(const ReducedCoordinates& coords, const SurvivalDataset& data, Index i) {
    check_pairing(coords, data);
    const Index n = data.size();
    if (i < 0 || i >= n) throw InputError("cond_survival: index out of range");
    const VectorXd e = kernel_weights(coords, coords.Z.row(i));
    const double f = e.mean();
    if (!(f > density_floor(coords)))
        throw LocalSupportError("cond_survival: smoothed density below floor at observation " + std::to_string(i));
    double num = 0.0;
    for (Index j = 0; j < n; ++j)
        if (data.times(j) > data.times(i)) num += e(j);
    num /= static_cast<double>(n);
    return std::clamp(num / f, survival_floor(n), 1.0);
}

/// Unconditional fraction with T~_j > T~_i, with the same floor.
inline double marginal_survival(const SurvivalDataset& data, Index i) {
    const Index n = data.size();
    Index c = 0;
    for (Index j = 0; j < n; ++j) c += data.times(j) > data.times(i) ? 1 : 0;
    return std::clamp(static_cast<double>(c) / static_cast<double>(n), survival_floor(n), 1.0);
}

/**
 * Kernel smoother of the conditional cumulative hazard and the censoring
 * weight w(t', t, z) = exp(-Lambda(t', t | z)).
 *
 * Conditional survival at each event is computed once. Where the density at
 * a subject's own coordinates is below floor the marginal fraction is used;
 * where the density at an evaluation point is below floor, weight() falls
 * back to the Kaplan-Meier ratio S(t-) / S(t').
 */
class HazardSmoother {
public:
    HazardSmoother(ReducedCoordinates coords, const SurvivalDataset& data)
        : coords_(std::move(coords)), times_(data.times), status_(data.status) {
        check_pairing(coords_, data);
        const Index n = data.size();
        survival_.resize(n);
        for (Index i = 0; i < n; ++i) {
            if (status_(i) != 1) {
                survival_(i) = 1.0;
                continue;
            }
            try {
                survival_(i) = cond_survival(coords_, data, i);
            } catch (const LocalSupportError&) {
                survival_(i) = marginal_survival(data, i);
                ++survival_fallbacks_;
            }
        }
        km_ = kaplan_meier(times_, status_);
    }

    const ReducedCoordinates& coords() const { return coords_; }
    const VectorXd& event_survival() const { return survival_; }
    Index survival_fallbacks() const { return survival_fallbacks_; }
    Index weight_fallbacks() const { return weight_fallbacks_; }

    /// Lambda(t', t | z); throws LocalSupportError when the density at z is below floor.
    double cum_hazard(double t_prime, double t, const Eigen::Ref<const Eigen::RowVectorXd>& z) const {
        if (!(t_prime < t)) throw InputError("cum_hazard: requires t' < t");
        if (z.size() != coords_.dim()) throw InputError("cum_hazard: evaluation point has wrong dimension");
        const VectorXd e = kernel_weights(coords_, z);
        return cum_hazard_from_weights(e, t_prime, t);
    }

    double weight(double t_prime, double t, const Eigen::Ref<const Eigen::RowVectorXd>& z) const {
        try {
            return std::clamp(std::exp(-cum_hazard(t_prime, t, z)), 0.0, 1.0);
        } catch (const LocalSupportError&) {
            ++weight_fallbacks_;
            return km_ratio(t_prime, t);
        }
    }

    /// Weights w(T~_i, t, Z_i) for a censored subject at several cut points,
    /// sharing the kernel-weight vector across cut points.
    std::vector<double> weights_for_subject(Index i, const std::vector<double>& cut_points) const {
        const double ti = times_(i);
        const VectorXd e = kernel_weights(coords_, coords_.Z.row(i));
        std::vector<double> out;
        out.reserve(cut_points.size());
        for (double t : cut_points) {
            if (!(ti < t)) {
                out.push_back(1.0);
                continue;
            }
            try {
                out.push_back(std::clamp(std::exp(-cum_hazard_from_weights(e, ti, t)), 0.0, 1.0));
            } catch (const LocalSupportError&) {
                ++weight_fallbacks_;
                out.push_back(km_ratio(ti, t));
            }
        }
        return out;
    }

    double km_ratio(double t_prime, double t) const {
        const double base = km_survival_at(km_, t_prime);
        if (!(base > 0.0)) return 0.0;
        return std::clamp(km_survival_before(km_, t) / base, 0.0, 1.0);
    }

private:
    double cum_hazard_from_weights(const VectorXd& e, double t_prime, double t) const {
        const Index n = e.size();
        const double f = e.mean();
        if (!(f > density_floor(coords_)))
            throw LocalSupportError("cum_hazard: smoothed density below floor");
        double num = 0.0;
        for (Index i = 0; i < n; ++i)
            if (status_(i) == 1 && times_(i) > t_prime && times_(i) < t) num += e(i) / survival_(i);
        num /= static_cast<double>(n);
        return std::max(0.0, num / f);
    }

    ReducedCoordinates coords_;
    VectorXd times_;
    VectorXi status_;
    VectorXd survival_;
    std::vector<KmStep> km_;
    Index survival_fallbacks_ = 0;
    mutable Index weight_fallbacks_ = 0;
};

inline double cum_hazard(const ReducedCoordinates& coords, const SurvivalDataset& data, double t_prime, double t,
                         const Eigen::Ref<const Eigen::RowVectorXd>& z) {
    return HazardSmoother(coords, data).cum_hazard(t_prime, t, z);
}

inline double weight(const ReducedCoordinates& coords, const SurvivalDataset& data, double t_prime, double t,
                     const Eigen::Ref<const Eigen::RowVectorXd>& z) {
    return HazardSmoother(coords, data).weight(t_prime, t, z);
}

}  // namespace kernsdr
