#pragma once

#include "kernsdr/common.hpp"

#include <cmath>
#include <vector>

namespace kernsdr {

/// Reference regularization: n^2 tau0 = 0.05 * lambda_1(R^2).
inline double tau0(const MatrixXd& R, Index n) {
    if (R.rows() != R.cols() || R.rows() == 0) throw InputError("tau0: R must be a nonempty square matrix");
    if (n < 1) throw InputError("tau0: n must be positive");
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (R + R.transpose()), Eigen::EigenvaluesOnly);
    const double top = es.eigenvalues().cwiseAbs().maxCoeff();
    if (!(top > 0.0)) throw NumericalError("tau0: Gram matrix is zero");
    const double nn = static_cast<double>(n);
    return 0.05 * top * top / (nn * nn);
}

/// `points` values from tau0/20 to 20*tau0, equally spaced in log scale.
inline std::vector<double> make_grid(double tau0_value, int points = 20) {
    if (!(tau0_value > 0.0) || !std::isfinite(tau0_value)) throw InputError("make_grid: tau0 must be positive");
    if (points < 1) throw InputError("make_grid: need at least one point");
    if (points == 1) return {tau0_value};
    const double lo = std::log(tau0_value / 20.0);
    const double hi = std::log(tau0_value * 20.0);
    std::vector<double> grid(static_cast<std::size_t>(points));
    for (int k = 0; k < points; ++k)
        grid[static_cast<std::size_t>(k)] = std::exp(lo + (hi - lo) * k / (points - 1));
    grid.front() = tau0_value / 20.0;
    grid.back() = tau0_value * 20.0;
    return grid;
}

}  // namespace kernsdr
