#include "test_support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numbers>
#include <numeric>

using namespace kernsdr;

TEST(Spearman, Midranks) {
    VectorXd v(4);
    v << 10, 20, 20, 30;
    const VectorXd r = midranks(v);
    EXPECT_EQ(r, (VectorXd(4) << 1, 2.5, 2.5, 4).finished());
}

TEST(Spearman, WorkedExample) {
    VectorXd u(5), v(5);
    u << 1, 2, 3, 4, 5;
    v << 2, 1, 4, 3, 5;
    EXPECT_NEAR(spearman(u, v), 0.8, 1e-15);
    EXPECT_NEAR(spearman(u, -v), -0.8, 1e-15);
    EXPECT_NEAR(spearman(u.array().exp().matrix(), v), 0.8, 1e-15);
}

TEST(Spearman, DegenerateInput) {
    set_warnings_enabled(false);
    EXPECT_DOUBLE_EQ(spearman(VectorXd::Ones(5), VectorXd::LinSpaced(5, 0, 1)), 0.0);
    set_warnings_enabled(true);
    EXPECT_THROW(spearman(VectorXd::Ones(2), VectorXd::Ones(2)), InputError);
    EXPECT_THROW(spearman(VectorXd::Ones(4), VectorXd::Ones(5)), InputError);
}

TEST(Rmae, SingleColumnsEqualAbsoluteSpearman) {
    std::mt19937_64 rng(50);
    const MatrixXd X = fixtures::gaussian_matrix(40, 1, rng);
    const MatrixXd Y = -X.array().cube().matrix() + 0.5 * fixtures::gaussian_matrix(40, 1, rng);
    const RmaeResult r = rmae(X, Y);
    EXPECT_NEAR(r.value, std::abs(spearman(X.col(0), Y.col(0))), 1e-15);
}

TEST(Rmae, RecoversLinearCombination) {
    std::mt19937_64 rng(51);
    const MatrixXd X = fixtures::gaussian_matrix(100, 3, rng);
    const MatrixXd Y = (X.col(0) - 2.0 * X.col(2)).array().exp().matrix();
    const RmaeResult r = rmae(X, Y);
    EXPECT_GT(r.value, 0.995);
    VectorXd expect(3);
    expect << 1, 0, -2;
    EXPECT_GT(std::abs(r.alpha.normalized().dot(expect.normalized())), 0.99);
    // Symmetric in its arguments.
    EXPECT_NEAR(rmae(Y, X).value, r.value, 1e-12);
}

TEST(Rmae, MatchesBruteForceInTwoDimensions) {
    std::mt19937_64 rng(52);
    for (int rep = 0; rep < 5; ++rep) {
        const MatrixXd X = fixtures::gaussian_matrix(60, 2, rng);
        const MatrixXd Y = (X.col(0) + 0.7 * X.col(1)).array().sinh().matrix() + fixtures::gaussian_matrix(60, 1, rng);
        double brute = 0.0;
        const VectorXd ry = midranks(Y.col(0));
        for (int k = 0; k < 3600; ++k) {
            const double th = std::numbers::pi * k / 3600.0;
            const VectorXd proj = std::cos(th) * X.col(0) + std::sin(th) * X.col(1);
            brute = std::max(brute, std::abs(detail::rank_correlation(midranks(proj), ry)));
        }
        EXPECT_NEAR(rmae(X, Y).value, brute, 0.005);
        EXPECT_GE(rmae(X, Y).value, brute - 1e-12);
    }
}

TEST(Rmae, RowPermutationInvariance) {
    std::mt19937_64 rng(53);
    const MatrixXd X = fixtures::gaussian_matrix(50, 2, rng);
    const MatrixXd Y = fixtures::gaussian_matrix(50, 2, rng) + X;
    std::vector<Index> perm(50);
    std::iota(perm.begin(), perm.end(), Index{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    MatrixXd Xp(50, 2), Yp(50, 2);
    for (Index i = 0; i < 50; ++i) {
        Xp.row(i) = X.row(perm[static_cast<std::size_t>(i)]);
        Yp.row(i) = Y.row(perm[static_cast<std::size_t>(i)]);
    }
    EXPECT_EQ(rmae(X, Y).value, rmae(Xp, Yp).value);
}

TEST(Rmae, ConstantAndErrors) {
    std::mt19937_64 rng(54);
    const MatrixXd X = fixtures::gaussian_matrix(20, 2, rng);
    const RmaeResult r = rmae(X, MatrixXd::Ones(20, 1));
    EXPECT_EQ(r.value, 0.0);
    EXPECT_FALSE(r.converged);
    EXPECT_THROW(rmae(X.topRows(9), X.topRows(9)), InputError);
    EXPECT_THROW(rmae(X, X.topRows(19)), InputError);
}

TEST(Spearman, ExtremeCases) {
    VectorXd u(5), v(5);
    u << 0.3, -1.0, 2.0, 0.5, 7.0;
    v << 1, 3, 2, 5, 4;
    EXPECT_DOUBLE_EQ(spearman(u, u), 1.0);
    EXPECT_DOUBLE_EQ(spearman(u, -u), -1.0);
    EXPECT_NEAR(spearman(VectorXd::LinSpaced(5, 1, 5), v), 0.8, 1e-15);
}

TEST(Rmae, ExactRecoveryCases) {
    std::mt19937_64 rng(51);
    const MatrixXd X = fixtures::gaussian_matrix(60, 3, rng);
    const MatrixXd Y = X.col(1).array().exp().matrix();
    EXPECT_NEAR(rmae(X, Y).value, 1.0, 1e-9);
    const MatrixXd Z = fixtures::gaussian_matrix(60, 2, rng);
    EXPECT_NEAR(rmae(Z, Z).value, 1.0, 1e-9);
}

TEST(Rmae, IndependentScoresStayNearPermutationNull) {
    std::mt19937_64 rng(52);
    const MatrixXd X = fixtures::gaussian_matrix(200, 2, rng);
    const MatrixXd Y = fixtures::gaussian_matrix(200, 2, rng);
    const double observed = rmae(X, Y).value;
    std::vector<double> null;
    std::vector<Index> perm(200);
    std::iota(perm.begin(), perm.end(), Index{0});
    for (int b = 0; b < 100; ++b) {
        std::shuffle(perm.begin(), perm.end(), rng);
        MatrixXd Yp(200, 2);
        for (Index i = 0; i < 200; ++i) Yp.row(i) = Y.row(perm[static_cast<std::size_t>(i)]);
        null.push_back(rmae(X, Yp).value);
    }
    std::sort(null.begin(), null.end());
    EXPECT_LT(observed, null[94] + 0.05);
}
