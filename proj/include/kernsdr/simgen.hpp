#pragma once

#include "kernsdr/common.hpp"
#include "kernsdr/dataset.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <string>

namespace kernsdr {

enum class SimModel { M1 = 1, M2 = 2, M3 = 3, M4 = 4 };

inline std::string to_string(SimModel m) { return "M" + std::to_string(static_cast<int>(m)); }

inline SimModel sim_model_from_string(const std::string& s) {
    if (s == "M1" || s == "m1" || s == "1") return SimModel::M1;
    if (s == "M2" || s == "m2" || s == "2") return SimModel::M2;
    if (s == "M3" || s == "m3" || s == "3") return SimModel::M3;
    if (s == "M4" || s == "m4" || s == "4") return SimModel::M4;
    throw InputError("unknown simulation model '" + s + "' (expected M1, M2, M3 or M4)");
}

struct SimSpec {
    SimModel model = SimModel::M1;
    Index n_train = 100;
    Index n_test = 200;
    Index p = 50;
    double target_censoring = 0.0;
    std::uint64_t seed = 0;
    std::optional<double> c;  ///< skip calibration and use this censoring constant

    void validate() const {
        if (n_train < 10) throw InputError("simulation: n_train must be >= 10");
        if (n_test < 0) throw InputError("simulation: n_test must be >= 0");
        if ((model == SimModel::M1 || model == SimModel::M2) && p < 20)
            throw InputError("simulation: models M1 and M2 need p >= 20");
        if (p < 1) throw InputError("simulation: p must be >= 1");
        if (!(target_censoring >= 0.0 && target_censoring <= 0.9))
            throw InputError("simulation: target censoring must lie in [0, 0.9]");
    }
};

struct SimOutput {
    SurvivalDataset train;
    MatrixXd test_X;
    MatrixXd truth_train;
    MatrixXd truth_test;
    double c_used = std::numeric_limits<double>::infinity();
    double censoring_achieved = 0.0;  ///< on the calibration sample at c_used
    double censoring_observed = 0.0;  ///< in the generated training set
};

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

/// (beta_1, beta_2) for M1 and M2, already divided by 5.
inline std::pair<VectorXd, VectorXd> model_coefficients(SimModel model, Index p) {
    VectorXd b1 = VectorXd::Zero(p), b2 = VectorXd::Zero(p);
    if (model == SimModel::M1) {
        for (Index k = 0; k + 10 < p; k += 4) {
            b1(k) = 1.0;
            if (k + 2 < p - 10) b1(k + 2) = -1.0;
        }
        for (Index k = 10; k < p; ++k) b2(k) = (k - 10) % 2 == 0 ? 1.0 : -1.0;
    } else if (model == SimModel::M2) {
        for (Index k = 0; k < p - 10; ++k) b1(k) = k % 2 == 0 ? 1.0 : -1.0;
        for (Index k = 10; k < p; ++k) b2(k) = (k - 10) % 2 == 0 ? 1.0 : -1.0;
    } else {
        throw InputError("model_coefficients: only M1 and M2 have linear coefficients");
    }
    return {b1 / 5.0, b2 / 5.0};
}

/// Analytic reduced coordinates per row. M1: beta_1'x. M2: (beta_1'x, beta_2'x).
/// M3: (|x|^2, (sum sin x)^2), the second being the censoring index.
/// M4: (sum sin^2(x/2), x'x).
inline MatrixXd true_coordinates(SimModel model, const MatrixXd& X) {
    const Index n = X.rows();
    switch (model) {
        case SimModel::M1: {
            const auto [b1, b2] = model_coefficients(model, X.cols());
            return X * b1;
        }
        case SimModel::M2: {
            const auto [b1, b2] = model_coefficients(model, X.cols());
            MatrixXd U(n, 2);
            U.col(0) = X * b1;
            U.col(1) = X * b2;
            return U;
        }
        case SimModel::M3: {
            MatrixXd U(n, 2);
            U.col(0) = X.rowwise().squaredNorm();
            U.col(1) = X.array().sin().rowwise().sum().square().matrix();
            return U;
        }
        case SimModel::M4: {
            MatrixXd U(n, 2);
            U.col(0) = (X.array() * 0.5).sin().square().rowwise().sum().matrix();
            U.col(1) = X.rowwise().squaredNorm();
            return U;
        }
    }
    throw InputError("unknown simulation model");
}

/// Columns of the truth used to score q estimated directions.
inline MatrixXd scoring_truth(SimModel model, const MatrixXd& truth, Index q) {
    if (model == SimModel::M3 && q <= 1) return truth.leftCols(1);
    return truth;
}

namespace detail {

/// Latent draws that do not depend on c; censoring times are a monotone
/// function of c given these.
struct LatentDraws {
    MatrixXd X;
    VectorXd T;
    VectorXd base;  ///< c-free part of C (M1: Phi(beta_2'x), M3: (sum sin x)^2, else 1)
    VectorXd V;     ///< U(0,1) driving the c-scaled part of C
};

inline double open_uniform(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double v = 0.0;
    do v = u(rng);
    while (!(v > 0.0 && v < 1.0));
    return v;
}

inline LatentDraws draw_latent(SimModel model, Index n, Index p, std::mt19937_64& rng) {
    LatentDraws d;
    std::normal_distribution<double> normal(0.0, 1.0);
    d.X.resize(n, p);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < p; ++j) d.X(i, j) = normal(rng);
    d.T.resize(n);
    d.base.resize(n);
    d.V.resize(n);
    const MatrixXd truth = true_coordinates(model, d.X);
    VectorXd b2;
    if (model == SimModel::M1 || model == SimModel::M2) b2 = model_coefficients(model, p).second;
    for (Index i = 0; i < n; ++i) {
        const double u1 = open_uniform(rng);
        const double u2 = open_uniform(rng);
        switch (model) {
            case SimModel::M1:
                d.T(i) = normal_cdf(u1 * truth(i, 0));
                d.base(i) = normal_cdf(d.X.row(i).dot(b2));
                break;
            case SimModel::M2:
                d.T(i) = -std::log(u1) / (std::exp(truth(i, 0)) + std::exp(truth(i, 1)));
                d.base(i) = 1.0;
                break;
            case SimModel::M3:
                d.T(i) = u1 * truth(i, 0);
                d.base(i) = truth(i, 1);
                break;
            case SimModel::M4:
                d.T(i) = -std::log(u1) / truth(i, 0) + std::exp(-0.5 * truth(i, 1));
                d.base(i) = 1.0;
                break;
        }
        d.V(i) = u2;
    }
    return d;
}

/// Censoring time given c. M1 uses Phi(beta_2'x) + c V for c >= 0 and
/// Phi(beta_2'x)(1 + c) for -1 < c < 0 (reaches censoring rates above one half).
inline double censoring_time(SimModel model, double base, double V, double c) {
    if (std::isinf(c)) return std::numeric_limits<double>::infinity();
    if (model == SimModel::M1) return c >= 0.0 ? base + c * V : base * (1.0 + c);
    return base * c * V;
}

inline double censored_fraction(SimModel model, const LatentDraws& d, double c) {
    Index k = 0;
    for (Index i = 0; i < d.T.size(); ++i) k += censoring_time(model, d.base(i), d.V(i), c) < d.T(i) ? 1 : 0;
    return static_cast<double>(k) / static_cast<double>(d.T.size());
}

}  // namespace detail

inline constexpr Index kCalibrationSampleSize = 20000;

/// Censoring fraction of `model` at constant c on a sample of the given size.
inline double censoring_fraction_at(SimModel model, Index p, double c, std::uint64_t seed,
                                    Index sample = kCalibrationSampleSize) {
    std::mt19937_64 rng(derive_seed(seed, 0x63616cu));
    const auto d = detail::draw_latent(model, sample, p, rng);
    return detail::censored_fraction(model, d, c);
}

/// c giving the target censoring fraction, by bisection on a fixed
/// calibration sample (common random numbers make the fraction monotone in c).
inline double calibrate_c(SimModel model, Index p, double target, std::uint64_t seed, double* achieved = nullptr) {
    if (!(target > 0.0 && target <= 0.9)) throw InputError("calibrate_c: target must lie in (0, 0.9]");
    std::mt19937_64 rng(derive_seed(seed, 0x63616cu));
    const auto d = detail::draw_latent(model, kCalibrationSampleSize, p, rng);
    auto frac = [&](double c) { return detail::censored_fraction(model, d, c); };

    double lo = model == SimModel::M1 ? -1.0 : 0.0;  // fraction 1 at lo
    double hi = 1.0;
    int expand = 0;
    while (frac(hi) > target) {
        lo = hi;
        hi *= 2.0;
        if (++expand > 200)
            throw CalibrationError("calibrate_c: could not bracket censoring fraction " + std::to_string(target));
    }
    double f_lo = frac(lo);
    double f_hi = frac(hi);
    if (f_lo < target || f_hi > target)
        throw CalibrationError("calibrate_c: censoring fraction is not monotone over [" + std::to_string(lo) + ", " +
                               std::to_string(hi) + "]: " + std::to_string(f_lo) + " .. " + std::to_string(f_hi));
    double best = hi, best_err = std::abs(f_hi - target);
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double f = frac(mid);
        if (std::abs(f - target) < best_err) {
            best = mid;
            best_err = std::abs(f - target);
        }
        if (best_err <= 0.005) break;
        if (f > target) {
            if (f > f_lo)
                throw CalibrationError("calibrate_c: censoring fraction increased with c near " + std::to_string(mid));
            lo = mid;
            f_lo = f;
        } else {
            hi = mid;
        }
    }
    if (best_err > 0.02)
        throw CalibrationError("calibrate_c: censoring fraction " + std::to_string(target) +
                               " is not attainable (closest " + std::to_string(target + best_err) + ")");
    if (achieved) *achieved = frac(best);
    return best;
}

/// Draws a training set with censoring plus test covariates and truths.
inline SimOutput generate(const SimSpec& spec) {
    spec.validate();
    SimOutput out;
    if (spec.c) {
        out.c_used = *spec.c;
        out.censoring_achieved = spec.target_censoring;
    } else if (spec.target_censoring > 0.0) {
        out.c_used = calibrate_c(spec.model, spec.p, spec.target_censoring, spec.seed, &out.censoring_achieved);
    }

    std::mt19937_64 rng(derive_seed(spec.seed, 0x747261u));
    const auto d = detail::draw_latent(spec.model, spec.n_train, spec.p, rng);
    const Index n = spec.n_train;
    out.train.X = d.X;
    out.train.times.resize(n);
    out.train.status.resize(n);
    for (Index i = 0; i < n; ++i) {
        const double C = detail::censoring_time(spec.model, d.base(i), d.V(i), out.c_used);
        const bool event = d.T(i) <= C;
        out.train.times(i) = event ? d.T(i) : C;
        out.train.status(i) = event ? 1 : 0;
    }
    out.censoring_observed = out.train.censoring_fraction();
    out.truth_train = true_coordinates(spec.model, out.train.X);

    std::mt19937_64 test_rng(derive_seed(spec.seed, 0x746573u));
    std::normal_distribution<double> normal(0.0, 1.0);
    out.test_X.resize(spec.n_test, spec.p);
    for (Index i = 0; i < spec.n_test; ++i)
        for (Index j = 0; j < spec.p; ++j) out.test_X(i, j) = normal(test_rng);
    out.truth_test = true_coordinates(spec.model, out.test_X);
    return out;
}

}  // namespace kernsdr
