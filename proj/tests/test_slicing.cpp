#include "test_support.hpp"

#include <gtest/gtest.h>

using namespace kernsdr;

namespace {

SurvivalDataset tiny(std::vector<double> t, std::vector<int> s) {
    SurvivalDataset d;
    const auto n = static_cast<Index>(t.size());
    d.times = Eigen::Map<VectorXd>(t.data(), n);
    d.status = Eigen::Map<VectorXi>(s.data(), n);
    d.X = MatrixXd::Zero(n, 1);
    return d;
}

}  // namespace

TEST(Slicing, QuantileCuts) {
    const VectorXd t = VectorXd::LinSpaced(10, 1.0, 10.0);
    const SlicePlan plan = make_slices(t, 5);
    EXPECT_EQ(plan.boundaries, (std::vector<double>{2.5, 4.5, 6.5, 8.5}));
    const std::vector<double> tv(t.data(), t.data() + t.size());
    EXPECT_EQ(plan.occupancy(tv), (std::vector<std::size_t>{2, 2, 2, 2, 2}));
    EXPECT_EQ(plan.slice_of(2.5), 1u);
    EXPECT_EQ(plan.slice_of(0.1), 0u);
    EXPECT_TRUE(std::isinf(plan.upper(4)));
}

TEST(Slicing, TiesAreMerged) {
    VectorXd t(8);
    t << 1, 1, 1, 1, 1, 1, 2, 3;
    const SlicePlan plan = make_slices(t, 4);
    const std::vector<double> tv(t.data(), t.data() + t.size());
    for (std::size_t c : plan.occupancy(tv)) EXPECT_GT(c, 0u);
    EXPECT_LT(plan.count(), 4u);
    EXPECT_THROW(make_slices(VectorXd::Constant(5, 2.0), 3), InputError);
    EXPECT_THROW(make_slices(t, 9), InputError);
    EXPECT_THROW(make_slices(t, 1), InputError);
}

TEST(Slicing, DoubleSliceProjection) {
    std::mt19937_64 rng(20);
    const SurvivalDataset d = fixtures::random_dataset(60, 2, 0.7, rng);
    const DoubleSliceResult r = double_slice_q(d, 4, 5);
    const MatrixXd& Q = r.q_joint;
    const Index n = 60;
    EXPECT_LT((Q * Q - Q).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((Q * VectorXd::Ones(n) - VectorXd::Ones(n)).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_NEAR(Q.trace(), static_cast<double>(r.plan.cell_count()), 1e-12);
    EXPECT_LT((r.q_factor * r.q_factor.transpose() - Q).cwiseAbs().maxCoeff(), 1e-12);
    for (std::size_t i = 0; i < r.plan.cell.size(); ++i) {
        const auto label = r.plan.cell_labels[static_cast<std::size_t>(r.plan.cell[i])];
        EXPECT_EQ(label.first, d.status(static_cast<Index>(i)));
    }
}

TEST(Slicing, WeightedHandExample) {
    const SurvivalDataset d = tiny({1, 2, 3, 4}, {1, 0, 1, 1});
    SlicePlan plan;
    plan.boundaries = {2.5};
    int calls = 0;
    const auto w = weighted_slice_matrices(d, plan, [&](double tp, double t, std::size_t i) {
        ++calls;
        EXPECT_EQ(i, 1u);
        EXPECT_DOUBLE_EQ(tp, 2.0);
        EXPECT_DOUBLE_EQ(t, 2.5);
        return 0.5;
    });
    EXPECT_EQ(calls, 1);
    MatrixXd W(4, 2);
    W << 1, 0, 0.5, 0.5, 0, 1, 0, 1;
    EXPECT_LT((w.w_hat - W).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_NEAR(w.p_hat(0), 0.375, 1e-15);
    EXPECT_NEAR(w.p_hat(1), 0.625, 1e-15);
    EXPECT_NEAR(w.q(0, 0), 1.0 / 1.5, 1e-15);
    EXPECT_NEAR(w.q(1, 1), 0.25 / 1.5 + 0.25 / 2.5, 1e-15);
    EXPECT_NEAR(w.q(2, 3), 1.0 / 2.5, 1e-15);
}

TEST(Slicing, WeightedInvariants) {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int rep = 0; rep < 30; ++rep) {
        const SurvivalDataset d = fixtures::random_dataset(40, 2, 0.8, rng);
        const SlicePlan plan = make_slices(d.times, 6);
        const auto w = weighted_slice_matrices(d, plan, [&](double tp, double t, std::size_t i) {
            EXPECT_LT(tp, t);
            EXPECT_EQ(d.status(static_cast<Index>(i)), 0);
            return std::exp(-(t - tp));
        });
        EXPECT_GE(w.w_hat.minCoeff(), 0.0);
        EXPECT_LT((w.w_hat.rowwise().sum() - VectorXd::Ones(40)).cwiseAbs().maxCoeff(), 1e-12);
        EXPECT_NEAR(w.p_hat.sum(), 1.0, 1e-12);
        EXPECT_LT((w.q - w.q.transpose()).cwiseAbs().maxCoeff(), 1e-15);
        EXPECT_LT((w.q * VectorXd::Ones(40) - VectorXd::Ones(40)).cwiseAbs().maxCoeff(), 1e-10);
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(w.q);
        EXPECT_GT(es.eigenvalues().minCoeff(), -1e-10);
    }
}

TEST(Slicing, UncensoredIsIndicator) {
    std::mt19937_64 rng(22);
    const SurvivalDataset d = fixtures::random_dataset(30, 1, 0.0, rng);
    const SlicePlan plan = make_slices(d.times, 5);
    const auto w = weighted_slice_matrices(d, plan, [](double, double, std::size_t) -> double {
        ADD_FAILURE() << "weight requested for uncensored data";
        return 0.0;
    });
    for (Index i = 0; i < 30; ++i) EXPECT_DOUBLE_EQ(w.w_hat(i, static_cast<Index>(plan.slice_of(d.times(i)))), 1.0);
}

TEST(Slicing, DegenerateSliceMerged) {
    const SurvivalDataset d = tiny({1, 2, 3, 4}, {1, 1, 1, 1});
    SlicePlan plan;
    plan.boundaries = {1.5, 1.7, 3.5};
    const auto w = weighted_slice_matrices(d, plan, [](double, double, std::size_t) { return 0.0; });
    EXPECT_EQ(w.plan.count(), 3u);
    EXPECT_EQ(w.w_hat.cols(), 3);
    EXPECT_NEAR(w.p_hat.sum(), 1.0, 1e-15);
    SlicePlan two;
    two.boundaries = {10.0};
    EXPECT_THROW(weighted_slice_matrices(d, two, [](double, double, std::size_t) { return 0.0; }),
                 SliceDegeneracyError);
}

TEST(Slicing, NonFiniteWeightRejected) {
    const SurvivalDataset d = tiny({1, 2, 3, 4}, {1, 0, 1, 1});
    SlicePlan plan;
    plan.boundaries = {2.5};
    EXPECT_THROW(weighted_slice_matrices(d, plan,
                                         [](double, double, std::size_t) { return std::nan(""); }),
                 NumericalError);
}

TEST(Slicing, SpecExamples) {
    const SlicePlan half = make_slices(VectorXd::LinSpaced(10, 1.0, 10.0), 2);
    EXPECT_EQ(half.boundaries, std::vector<double>{5.5});
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<double> u(100);
    for (auto& x : u) x = unif(rng);
    const SlicePlan tenth = make_slices(std::span<const double>(u), 10);
    for (std::size_t c : tenth.occupancy(u)) EXPECT_EQ(c, 10u);
}

TEST(Slicing, CellProjectionCases) {
    const MatrixXd Q = cell_projection({0, 1, 0, 1}, {2, 2});
    MatrixXd expect(4, 4);
    expect << 0.5, 0, 0.5, 0, 0, 0.5, 0, 0.5, 0.5, 0, 0.5, 0, 0, 0.5, 0, 0.5;
    EXPECT_EQ(Q, expect);
    EXPECT_EQ(cell_projection({0, 0, 0}, {3}), MatrixXd::Constant(3, 3, 1.0 / 3.0));
    std::mt19937_64 rng(24);
    std::uniform_int_distribution<int> pick(0, 5);
    std::vector<int> cell(30);
    std::vector<Index> sizes(6, 0);
    for (auto& c : cell) ++sizes[static_cast<std::size_t>(c = pick(rng))];
    std::vector<int> used;
    for (int c = 0; c < 6; ++c)
        if (sizes[static_cast<std::size_t>(c)] > 0) used.push_back(c);
    // Explicit B A B^T: B is n x cells indicator, A = diag(1 / size).
    MatrixXd B = MatrixXd::Zero(30, 6), A = MatrixXd::Zero(6, 6);
    for (Index i = 0; i < 30; ++i) B(i, cell[static_cast<std::size_t>(i)]) = 1.0;
    for (int c : used) A(c, c) = 1.0 / static_cast<double>(sizes[static_cast<std::size_t>(c)]);
    const MatrixXd P = cell_projection(cell, sizes);
    EXPECT_LT((P - B * A * B.transpose()).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_LT((P * P - P).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_NEAR(P.trace(), static_cast<double>(used.size()), 1e-12);
}

TEST(Slicing, TelescopingWeights) {
    // Censored at 1.5 inside slice 0; w(1.5, 2) = 0.6, w(1.5, 3) = 0.25, w(1.5, 4) = 0.1.
    const SurvivalDataset d = tiny({1.5, 1, 2.5, 3.5, 4.5}, {0, 1, 1, 1, 1});
    SlicePlan plan;
    plan.boundaries = {2, 3, 4};
    const auto w = weighted_slice_matrices(d, plan, [](double, double t, std::size_t) {
        return t == 2.0 ? 0.6 : t == 3.0 ? 0.25 : 0.1;
    });
    EXPECT_NEAR(w.w_hat(0, 0), 0.4, 1e-15);
    EXPECT_NEAR(w.w_hat(0, 1), 0.35, 1e-15);
    EXPECT_NEAR(w.w_hat(0, 2), 0.15, 1e-15);
    EXPECT_NEAR(w.w_hat(0, 3), 0.1, 1e-15);
    EXPECT_DOUBLE_EQ(w.w_hat.row(0).sum(), 1.0);
}
