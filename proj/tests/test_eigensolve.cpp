#include "test_support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

using namespace kernsdr;

namespace {

/// Eigenvalues of S^-1 M from a general (nonsymmetric) solver, descending.
std::vector<double> oracle_values(const MatrixXd& M, const MatrixXd& S) {
    Eigen::EigenSolver<MatrixXd> es(S.inverse() * M, false);
    std::vector<double> v;
    for (Index i = 0; i < M.rows(); ++i) v.push_back(es.eigenvalues()(i).real());
    std::sort(v.rbegin(), v.rend());
    return v;
}

}  // namespace

TEST(Eigensolve, PencilMatchesInverseOracle) {
    std::mt19937_64 rng(10);
    for (int rep = 0; rep < 20; ++rep) {
        const MatrixXd M = fixtures::random_psd(8, 3 + rep % 5, rng);
        MatrixXd S = fixtures::random_psd(8, 8, rng);
        S.diagonal().array() += 0.5;
        const auto pairs = solve_pencil(M, S, 8);
        const auto oracle = oracle_values(M, S);
        for (std::size_t k = 0; k < 8; ++k) {
            EXPECT_NEAR(pairs[k].value, std::max(0.0, oracle[k]), 1e-8 * std::max(1.0, oracle[0]));
            const VectorXd& a = pairs[k].vector;
            EXPECT_LT((M * a - pairs[k].value * S * a).norm(), 1e-8 * std::max(1.0, oracle[0]));
        }
        for (std::size_t i = 0; i < 8; ++i)
            for (std::size_t j = 0; j < 8; ++j)
                EXPECT_NEAR(pairs[i].vector.dot(S * pairs[j].vector), i == j ? 1.0 : 0.0, 1e-9);
    }
}

TEST(Eigensolve, SignConvention) {
    std::mt19937_64 rng(11);
    const MatrixXd M = fixtures::random_psd(6, 6, rng);
    const auto pairs = solve_pencil(M, MatrixXd::Identity(6, 6), 6);
    for (const auto& p : pairs) {
        Index arg = 0;
        p.vector.cwiseAbs().maxCoeff(&arg);
        EXPECT_GT(p.vector(arg), 0.0);
    }
}

TEST(Eigensolve, Errors) {
    std::mt19937_64 rng(12);
    const MatrixXd M = fixtures::random_psd(5, 5, rng);
    EXPECT_THROW(solve_pencil(M, MatrixXd::Identity(5, 5), 6), InputError);
    EXPECT_THROW(solve_pencil(M, MatrixXd::Identity(4, 4), 2), InputError);
    const MatrixXd singular = fixtures::random_psd(5, 2, rng);
    EXPECT_THROW(solve_pencil(M, singular, 2), NumericalError);
    EXPECT_THROW(reg_gen_eig(singular, M, 0.0, 1), NumericalError);
    EXPECT_THROW(reg_gen_eig(singular, M, -1.0, 1), InputError);
}

TEST(Eigensolve, RegularizedProblemResidual) {
    std::mt19937_64 rng(13);
    const Index n = 15;
    const MatrixXd R = fixtures::random_psd(n, 6, rng);
    const MatrixXd G = fixtures::gaussian_matrix(n, 4, rng);
    const MatrixXd Q = G * G.transpose();
    for (double tau : {1e-4, 1e-2, 1.0}) {
        const auto pairs = reg_gen_eig(R, Q, tau, 3);
        const MatrixXd S = R * R + static_cast<double>(n * n) * tau * MatrixXd::Identity(n, n);
        for (const auto& p : pairs) {
            EXPECT_LT((R * Q * R * p.vector - p.value * S * p.vector).norm(), 1e-8 * std::max(1.0, p.value));
            EXPECT_NEAR(p.vector.dot(S * p.vector), 1.0, 1e-9);
        }
    }
}

TEST(Eigensolve, LowRankPencilMatchesDense) {
    std::mt19937_64 rng(14);
    for (int rep = 0; rep < 10; ++rep) {
        const Index n = 20;
        MatrixXd R = fixtures::random_psd(n, 8 + rep, rng);
        const MatrixXd G = fixtures::gaussian_matrix(n, 5, rng).cwiseAbs();
        const LowRankPencil pencil(R, G);
        for (double tau : {1e-3, 0.1}) {
            const auto fast = pencil.solve(tau, 4);
            const auto dense = reg_gen_eig(R, G * G.transpose(), tau, 4);
            for (std::size_t k = 0; k < 4; ++k) {
                EXPECT_NEAR(fast[k].value, dense[k].value, 1e-9 * std::max(1.0, dense[0].value));
                const double cosine = std::abs(fast[k].vector.normalized().dot(dense[k].vector.normalized()));
                EXPECT_NEAR(cosine, 1.0, 1e-7);
            }
            const auto spec = pencil.spectrum(tau);
            ASSERT_EQ(spec.size(), static_cast<std::size_t>(n));
            const auto all = reg_gen_eig(R, G * G.transpose(), tau, n);
            for (Index k = 0; k < n; ++k)
                EXPECT_NEAR(spec[static_cast<std::size_t>(k)], all[static_cast<std::size_t>(k)].value,
                            1e-9 * std::max(1.0, all[0].value));
        }
        // More pairs than the rank of G: dense fallback.
        EXPECT_EQ(pencil.solve(0.1, 7).size(), 7u);
    }
}

TEST(Eigensolve, Unitize) {
    std::mt19937_64 rng(15);
    const MatrixXd R = fixtures::random_psd(6, 4, rng);
    const VectorXd a = VectorXd::LinSpaced(6, 1.0, 2.0);
    const VectorXd u = unitize(a, R);
    EXPECT_NEAR(u.dot(R * u), 1.0, 1e-12);
    EXPECT_THROW(unitize(VectorXd::Zero(6), R), NumericalError);
    EXPECT_THROW(unitize(VectorXd::Zero(5), R), InputError);
}

TEST(Eigensolve, ComponentRule) {
    const std::vector<double> v{5.0, 3.0, 1.0, 1.0};
    EXPECT_EQ(select_components(v, 0.9), 3);
    EXPECT_EQ(select_components(v, 0.5), 1);
    EXPECT_EQ(select_components(v, 0.8), 2);
    EXPECT_EQ(select_components(v, 1.0), 4);
    EXPECT_EQ(select_components(std::vector<double>{0.0, 0.0}, 0.9), 1);
    EXPECT_THROW(select_components(std::vector<double>{}, 0.9), InputError);
    EXPECT_THROW(select_components(v, 0.0), InputError);
}

TEST(Eigensolve, SmallPencils) {
    const auto id = solve_pencil(MatrixXd::Identity(2, 2), MatrixXd::Identity(2, 2), 2);
    EXPECT_DOUBLE_EQ(id[0].value, 1.0);
    EXPECT_DOUBLE_EQ(id[1].value, 1.0);
    EXPECT_NEAR(id[0].vector.dot(id[1].vector), 0.0, 1e-15);
    MatrixXd M = MatrixXd::Zero(2, 2);
    M.diagonal() << 2.0, 1.0;
    const auto d = solve_pencil(M, MatrixXd::Identity(2, 2), 2);
    EXPECT_DOUBLE_EQ(d[0].value, 2.0);
    EXPECT_DOUBLE_EQ(d[1].value, 1.0);
    EXPECT_LT((d[0].vector - VectorXd::Unit(2, 0)).norm(), 1e-15);
    EXPECT_LT((d[1].vector - VectorXd::Unit(2, 1)).norm(), 1e-15);
}

TEST(Eigensolve, UnitizeCases) {
    const MatrixXd R = 4.0 * MatrixXd::Identity(1, 1);
    EXPECT_DOUBLE_EQ(unitize(VectorXd::Ones(1), R)(0), 0.5);
    std::mt19937_64 rng(16);
    const MatrixXd S = fixtures::random_psd(5, 5, rng);
    const VectorXd u = unitize(fixtures::gaussian_matrix(5, 1, rng), S);
    EXPECT_LT((unitize(u, S) - u).norm(), 1e-15);
}

TEST(Eigensolve, ComponentRuleMatchesLinearScan) {
    EXPECT_EQ(select_components(std::vector<double>{1, 0, 0}, 0.9), 1);
    EXPECT_EQ(select_components(std::vector<double>{5, 4, 1}, 0.9), 2);
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int rep = 0; rep < 100; ++rep) {
        std::vector<double> v(12);
        for (auto& x : v) x = unif(rng);
        std::sort(v.rbegin(), v.rend());
        const double total = std::accumulate(v.begin(), v.end(), 0.0);
        Index expect = 0;
        double run = 0.0;
        while (run < 0.9 * total) run += v[static_cast<std::size_t>(expect++)];
        EXPECT_EQ(select_components(v, 0.9), expect);
    }
}
