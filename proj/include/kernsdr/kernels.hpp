#pragma once

#include "kernsdr/common.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace kernsdr {

enum class KernelFamily { linear, polynomial, gaussian_rbf };

inline std::string to_string(KernelFamily f) {
    switch (f) {
        case KernelFamily::linear: return "linear";
        case KernelFamily::polynomial: return "polynomial";
        case KernelFamily::gaussian_rbf: return "gaussian";
    }
    return "unknown";
}

inline KernelFamily kernel_family_from_string(const std::string& s) {
    if (s == "linear") return KernelFamily::linear;
    if (s == "polynomial" || s == "poly") return KernelFamily::polynomial;
    if (s == "gaussian" || s == "gaussian_rbf" || s == "rbf") return KernelFamily::gaussian_rbf;
    throw InputError("unknown kernel family '" + s + "' (expected linear, polynomial or gaussian)");
}

/**
 * Reproducing kernel R(s, t).
 *
 *   linear       <s, t>
 *   polynomial   (scale * <s, t> + offset)^degree
 *   gaussian     exp(-scale * |s - t|^2)
 *
 * The linear family ignores scale, offset and degree.
 */
struct KernelSpec {
    KernelFamily family = KernelFamily::linear;
    double scale = 1.0;
    double offset = 1.0;
    int degree = 2;

    static KernelSpec linear() { return {}; }
    static KernelSpec polynomial(double scale = 1.0, double offset = 1.0, int degree = 2) {
        KernelSpec k{KernelFamily::polynomial, scale, offset, degree};
        k.validate();
        return k;
    }
    static KernelSpec gaussian_rbf(double scale) {
        KernelSpec k{KernelFamily::gaussian_rbf, scale, 0.0, 1};
        k.validate();
        return k;
    }

    void validate() const {
        if (family == KernelFamily::linear) return;
        if (!(scale > 0.0) || !std::isfinite(scale))
            throw InputError("kernel scale must be positive and finite");
        if (family == KernelFamily::polynomial) {
            if (degree < 1) throw InputError("polynomial kernel degree must be >= 1");
            if (!std::isfinite(offset)) throw InputError("polynomial kernel offset must be finite");
        }
    }

    bool operator==(const KernelSpec&) const = default;
};

namespace detail {

inline double int_pow(double base, int exponent) {
    double result = 1.0;
    for (int i = 0; i < exponent; ++i) result *= base;
    return result;
}

/// Applies the kernel's link to inner products / squared distances in place.
inline void apply_link(const KernelSpec& kernel, MatrixXd& inner, const MatrixXd* sqdist) {
    switch (kernel.family) {
        case KernelFamily::linear:
            break;
        case KernelFamily::polynomial:
            inner = inner.unaryExpr([&](double v) {
                return int_pow(kernel.scale * v + kernel.offset, kernel.degree);
            });
            break;
        case KernelFamily::gaussian_rbf:
            inner = sqdist->unaryExpr([&](double d) { return std::exp(-kernel.scale * d); });
            break;
    }
}

}  // namespace detail

inline double eval_kernel(const KernelSpec& kernel, const Eigen::Ref<const VectorXd>& s,
                          const Eigen::Ref<const VectorXd>& t) {
    if (s.size() != t.size())
        throw InputError("kernel arguments differ in dimension (" + std::to_string(s.size()) +
                         " vs " + std::to_string(t.size()) + ")");
    switch (kernel.family) {
        case KernelFamily::linear:
            return s.dot(t);
        case KernelFamily::polynomial:
            return detail::int_pow(kernel.scale * s.dot(t) + kernel.offset, kernel.degree);
        case KernelFamily::gaussian_rbf:
            return std::exp(-kernel.scale * (s - t).squaredNorm());
    }
    return 0.0;
}

/// Raw kernel matrix K(a_i, b_j) between the rows of A and the rows of B.
inline MatrixXd kernel_matrix(const KernelSpec& kernel, const Eigen::Ref<const MatrixXd>& A,
                              const Eigen::Ref<const MatrixXd>& B) {
    if (A.cols() != B.cols())
        throw InputError("kernel matrix arguments differ in column count");
    MatrixXd inner = A * B.transpose();
    if (kernel.family == KernelFamily::gaussian_rbf) {
        const VectorXd a2 = A.rowwise().squaredNorm();
        const VectorXd b2 = B.rowwise().squaredNorm();
        MatrixXd d2 = (-2.0 * inner).colwise() + a2;
        d2.rowwise() += b2.transpose();
        d2 = d2.cwiseMax(0.0);
        detail::apply_link(kernel, inner, &d2);
    } else {
        detail::apply_link(kernel, inner, nullptr);
    }
    return inner;
}

/// Raw and double-centered Gram matrices over the training covariates.
struct GramMatrix {
    MatrixXd raw;        ///< R~_ij = R(X_i, X_j)
    MatrixXd centered;   ///< (I - J/n) R~ (I - J/n)
    VectorXd row_means;  ///< row means of raw
    double grand_mean = 0.0;

    Index size() const { return raw.rows(); }
};

/// Double-centers a symmetric matrix; output is exactly symmetric.
inline MatrixXd double_center(const MatrixXd& raw, VectorXd* row_means_out = nullptr,
                              double* grand_mean_out = nullptr) {
    const Index n = raw.rows();
    const VectorXd rm = raw.rowwise().mean();
    const double g = rm.mean();
    MatrixXd c(n, n);
    for (Index j = 0; j < n; ++j) {
        for (Index i = j; i < n; ++i) {
            const double v = raw(i, j) - rm(i) - rm(j) + g;
            c(i, j) = v;
            c(j, i) = v;
        }
    }
    if (row_means_out) *row_means_out = rm;
    if (grand_mean_out) *grand_mean_out = g;
    return c;
}

inline GramMatrix gram(const Eigen::Ref<const MatrixXd>& X, const KernelSpec& kernel) {
    kernel.validate();
    if (X.rows() < 2) throw InputError("gram: need at least 2 observations");
    if (!X.allFinite()) throw InputError("gram: covariates contain non-finite values");
    GramMatrix g;
    g.raw = kernel_matrix(kernel, X, X);
    const Index n = X.rows();
    for (Index j = 0; j < n; ++j)
        for (Index i = j + 1; i < n; ++i) g.raw(j, i) = g.raw(i, j);
    g.centered = double_center(g.raw, &g.row_means, &g.grand_mean);
    return g;
}

/// Centered kernel column between the training rows and each row of X_new
/// (n x k). Uses the training centering statistics, so evaluating at a
/// training point reproduces the matching column of the centered Gram.
inline MatrixXd cross_kernel_matrix(const Eigen::Ref<const MatrixXd>& train, const KernelSpec& kernel,
                                    const Eigen::Ref<const MatrixXd>& X_new,
                                    const Eigen::Ref<const VectorXd>& row_means, double grand_mean) {
    if (X_new.cols() != train.cols())
        throw InputError("cross_kernel: expected " + std::to_string(train.cols()) +
                         " covariates, got " + std::to_string(X_new.cols()));
    if (row_means.size() != train.rows())
        throw InputError("cross_kernel: row_means length does not match training size");
    MatrixXd k = kernel_matrix(kernel, train, X_new);
    const Eigen::RowVectorXd col_means = k.colwise().mean();
    k.colwise() -= row_means;
    k.rowwise() -= col_means;
    k.array() += grand_mean;
    return k;
}

inline VectorXd cross_kernel(const Eigen::Ref<const MatrixXd>& train, const KernelSpec& kernel,
                             const Eigen::Ref<const VectorXd>& x,
                             const Eigen::Ref<const VectorXd>& row_means, double grand_mean) {
    if (x.size() != train.cols())
        throw InputError("cross_kernel: expected " + std::to_string(train.cols()) +
                         " covariates, got " + std::to_string(x.size()));
    const MatrixXd xr = x.transpose();
    return cross_kernel_matrix(train, kernel, xr, row_means, grand_mean).col(0);
}

/// 1 / median of the pairwise squared distances.
inline double median_heuristic_scale(const Eigen::Ref<const MatrixXd>& X) {
    const Index n = X.rows();
    if (n < 2) throw InputError("median heuristic: need at least 2 observations");
    std::vector<double> d;
    d.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
    for (Index i = 0; i < n; ++i)
        for (Index j = i + 1; j < n; ++j) d.push_back((X.row(i) - X.row(j)).squaredNorm());
    const std::size_t m = d.size();
    auto mid = d.begin() + static_cast<std::ptrdiff_t>(m / 2);
    std::nth_element(d.begin(), mid, d.end());
    double med = *mid;
    if (m % 2 == 0) {
        const double lower = *std::max_element(d.begin(), mid);
        med = 0.5 * (med + lower);
    }
    if (!(med > 0.0))
        throw NumericalError("median heuristic: median pairwise distance is zero; set the scale explicitly");
    return 1.0 / med;
}

}  // namespace kernsdr
