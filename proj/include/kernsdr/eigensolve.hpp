#pragma once

#include "kernsdr/common.hpp"

#include <cmath>
#include <numeric>
#include <span>
#include <vector>

namespace kernsdr {

/// One generalized eigenpair; `vector` is S-orthonormal.
struct EigPair {
    double value = 0.0;
    VectorXd vector;
};

/// Flips v so that its largest-magnitude coordinate is positive.
inline void normalize_sign(VectorXd& v) {
    if (v.size() == 0) return;
    Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0.0) v = -v;
}

/**
 * Top-k eigenpairs of the symmetric-definite pencil M a = lambda S a.
 *
 * S is factored as L L^T and the ordinary symmetric problem for
 * L^-1 M L^-T is solved; vectors are mapped back through L^-T. Eigenvalues
 * come back in nonincreasing order.
 */
inline std::vector<EigPair> solve_pencil(const MatrixXd& M, const MatrixXd& S, Index k) {
    const Index n = M.rows();
    if (M.cols() != n || S.rows() != n || S.cols() != n)
        throw InputError("generalized eigenproblem: M and S must be square and the same size");
    if (k < 0 || k > n)
        throw InputError("generalized eigenproblem: requested " + std::to_string(k) +
                         " pairs from a problem of size " + std::to_string(n));
    if (!M.allFinite() || !S.allFinite())
        throw NumericalError("generalized eigenproblem: non-finite matrix entries");

    Eigen::LLT<MatrixXd> llt(S);
    if (llt.info() != Eigen::Success)
        throw NumericalError("generalized eigenproblem: S is not positive definite; use a positive regularization parameter");
    const MatrixXd L = llt.matrixL();
    const VectorXd d = L.diagonal();
    if (d.minCoeff() <= 0.0 || d.minCoeff() * d.minCoeff() < 1e-14 * d.maxCoeff() * d.maxCoeff())
        throw NumericalError("generalized eigenproblem: S is numerically singular; use a positive regularization parameter");

    const auto Ltri = L.triangularView<Eigen::Lower>();
    const MatrixXd LinvM = Ltri.solve(M);
    MatrixXd C = Ltri.solve(LinvM.transpose());
    C = 0.5 * (C + C.transpose()).eval();

    Eigen::SelfAdjointEigenSolver<MatrixXd> es(C);
    if (es.info() != Eigen::Success)
        throw NumericalError("generalized eigenproblem: symmetric eigensolver did not converge");

    std::vector<EigPair> out;
    out.reserve(static_cast<std::size_t>(k));
    const auto LTtri = L.transpose().triangularView<Eigen::Upper>();
    for (Index r = 0; r < k; ++r) {
        const Index col = n - 1 - r;  // ascending order from Eigen
        EigPair pair;
        pair.value = std::max(0.0, es.eigenvalues()(col));
        pair.vector = LTtri.solve(es.eigenvectors().col(col));
        normalize_sign(pair.vector);
        out.push_back(std::move(pair));
    }
    return out;
}

/// Top-k pairs of R Q R a = lambda (R^2 + n^2 tau I) a.
inline std::vector<EigPair> reg_gen_eig(const MatrixXd& R, const MatrixXd& Q, double tau, Index k) {
    const Index n = R.rows();
    if (R.cols() != n || Q.rows() != n || Q.cols() != n)
        throw InputError("reg_gen_eig: R and Q must be n x n");
    if (!(tau >= 0.0) || !std::isfinite(tau))
        throw InputError("reg_gen_eig: tau must be a nonnegative finite number");
    MatrixXd M = R * Q * R;
    M = 0.5 * (M + M.transpose()).eval();
    MatrixXd S = R * R;
    S = 0.5 * (S + S.transpose()).eval();
    S.diagonal().array() += static_cast<double>(n) * static_cast<double>(n) * tau;
    return solve_pencil(M, S, k);
}

/**
 * Regularized problem R Q R a = lambda (R^2 + n^2 tau I) a for Q = G G^T with
 * few columns (slice matrices have rank at most the slice count).
 *
 * R = V diag(l) V^T is decomposed once; for each tau the nonzero spectrum
 * comes from the r x r matrix H^T H with H = diag(l / sqrt(l^2 + c)) V^T G,
 * c = n^2 tau. Pairs agree with reg_gen_eig up to eigenvector sign within
 * repeated eigenvalues. Requests beyond the rank of G, or touching a (near)
 * zero eigenvalue, fall back to the dense solver.
 */
class LowRankPencil {
public:
    LowRankPencil(const MatrixXd& R, const MatrixXd& G) : R_(R), G_(G) {
        const Index n = R.rows();
        if (R.cols() != n || G.rows() != n) throw InputError("LowRankPencil: R must be n x n and G n x r");
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (R + R.transpose()));
        if (es.info() != Eigen::Success) throw NumericalError("LowRankPencil: eigensolver did not converge");
        lambda_ = es.eigenvalues();
        V_ = es.eigenvectors();
        VtG_ = V_.transpose() * G;
    }

    Index size() const { return R_.rows(); }
    Index rank_bound() const { return G_.cols(); }
    const VectorXd& gram_eigenvalues() const { return lambda_; }

    std::vector<EigPair> solve(double tau, Index k) const {
        const Index n = size();
        if (!(tau > 0.0) || !std::isfinite(tau)) return dense(tau, k);
        if (k < 0 || k > n)
            throw InputError("generalized eigenproblem: requested " + std::to_string(k) +
                             " pairs from a problem of size " + std::to_string(n));
        if (k > G_.cols()) return dense(tau, k);
        const double c = static_cast<double>(n) * static_cast<double>(n) * tau;
        const VectorXd root = (lambda_.array().square() + c).sqrt();
        const MatrixXd H = (lambda_.array() / root.array()).matrix().asDiagonal() * VtG_;
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(H.transpose() * H);
        if (es.info() != Eigen::Success) throw NumericalError("generalized eigenproblem: eigensolver did not converge");
        const Index r = G_.cols();
        const double top = std::max(0.0, es.eigenvalues()(r - 1));
        std::vector<EigPair> out;
        out.reserve(static_cast<std::size_t>(k));
        for (Index j = 0; j < k; ++j) {
            const double mu = es.eigenvalues()(r - 1 - j);
            if (!(mu > 1e-12 * top) || !(top > 0.0)) return dense(tau, k);
            const VectorXd beta = H * es.eigenvectors().col(r - 1 - j) / std::sqrt(mu);
            EigPair pair;
            pair.value = mu;
            pair.vector = V_ * beta.cwiseQuotient(root);
            normalize_sign(pair.vector);
            out.push_back(std::move(pair));
        }
        return out;
    }

    /// All n eigenvalues: the r leading ones followed by zeros.
    std::vector<double> spectrum(double tau) const {
        std::vector<double> v(static_cast<std::size_t>(size()), 0.0);
        const Index r = std::min(rank_bound(), size());
        if (r == 0) return v;
        const double c = static_cast<double>(size()) * static_cast<double>(size()) * tau;
        const VectorXd root = (lambda_.array().square() + c).sqrt();
        const MatrixXd H = (lambda_.array() / root.array()).matrix().asDiagonal() * VtG_;
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(H.transpose() * H, Eigen::EigenvaluesOnly);
        for (Index j = 0; j < r; ++j) v[static_cast<std::size_t>(j)] = std::max(0.0, es.eigenvalues()(G_.cols() - 1 - j));
        return v;
    }

private:
    std::vector<EigPair> dense(double tau, Index k) const { return reg_gen_eig(R_, G_ * G_.transpose(), tau, k); }

    MatrixXd R_;
    MatrixXd G_;
    VectorXd lambda_;
    MatrixXd V_;
    MatrixXd VtG_;
};

/// Rescales alpha so that alpha^T R alpha = 1.
inline VectorXd unitize(const VectorXd& alpha, const MatrixXd& R, double tolerance = 1e-12) {
    if (R.rows() != alpha.size() || R.cols() != alpha.size())
        throw InputError("unitize: dimension mismatch");
    const double q = alpha.dot(R * alpha);
    if (!(q > tolerance))
        throw NumericalError("unitize: direction has (near) zero RKHS norm (alpha^T R alpha = " +
                             std::to_string(q) + ")");
    return alpha / std::sqrt(q);
}

/// Smallest k whose leading eigenvalues capture `threshold` of the total.
inline Index select_components(std::span<const double> values, double threshold) {
    if (values.empty()) throw InputError("select_components: empty eigenvalue list");
    if (!(threshold > 0.0 && threshold <= 1.0))
        throw InputError("select_components: threshold must lie in (0, 1]");
    const double total = std::accumulate(values.begin(), values.end(), 0.0);
    if (!(total > 0.0)) return 1;
    double running = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        running += values[i];
        if (running >= threshold * total * (1.0 - 1e-12)) return static_cast<Index>(i + 1);
    }
    return static_cast<Index>(values.size());
}

inline std::vector<double> eigenvalues_of(const std::vector<EigPair>& pairs) {
    std::vector<double> v;
    v.reserve(pairs.size());
    for (const auto& p : pairs) v.push_back(p.value);
    return v;
}

}  // namespace kernsdr
