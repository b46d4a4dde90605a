#include "test_support.hpp"

#include <gtest/gtest.h>

using namespace kernsdr;

TEST(Simgen, Coefficients) {
    const auto [b1, b2] = model_coefficients(SimModel::M1, 50);
    EXPECT_NEAR(b1.dot(b2), -1.0 / 25.0, 1e-15);
    EXPECT_EQ((b1.array() != 0.0).count(), 20);
    EXPECT_EQ((b2.array() != 0.0).count(), 40);
    EXPECT_DOUBLE_EQ(b1(0), 0.2);
    EXPECT_DOUBLE_EQ(b1(2), -0.2);
    EXPECT_DOUBLE_EQ(b1(1), 0.0);
    EXPECT_DOUBLE_EQ(b2(10), 0.2);
    EXPECT_DOUBLE_EQ(b2(11), -0.2);
    EXPECT_EQ(b1.tail(10).cwiseAbs().sum(), 0.0);
    const auto [c1, c2] = model_coefficients(SimModel::M2, 50);
    EXPECT_NEAR(c1.dot(c2), 30.0 / 25.0, 1e-14);
    EXPECT_THROW(model_coefficients(SimModel::M3, 50), InputError);
}

TEST(Simgen, NormalCdf) {
    EXPECT_DOUBLE_EQ(normal_cdf(0.0), 0.5);
    EXPECT_NEAR(normal_cdf(1.959963984540054), 0.975, 1e-12);
}

TEST(Simgen, TruthColumns) {
    MatrixXd X(1, 2);
    X << 1.0, -2.0;
    const MatrixXd m3 = true_coordinates(SimModel::M3, X);
    EXPECT_DOUBLE_EQ(m3(0, 0), 5.0);
    EXPECT_NEAR(m3(0, 1), std::pow(std::sin(1.0) + std::sin(-2.0), 2), 1e-15);
    const MatrixXd m4 = true_coordinates(SimModel::M4, X);
    EXPECT_NEAR(m4(0, 0), std::pow(std::sin(0.5), 2) + std::pow(std::sin(-1.0), 2), 1e-15);
    EXPECT_DOUBLE_EQ(m4(0, 1), 5.0);
    EXPECT_EQ(scoring_truth(SimModel::M3, m3, 1).cols(), 1);
    EXPECT_EQ(scoring_truth(SimModel::M3, m3, 2).cols(), 2);
    EXPECT_EQ(scoring_truth(SimModel::M4, m4, 1).cols(), 2);
}

TEST(Simgen, CalibrationHitsTargetOnFreshSample) {
    for (SimModel m : {SimModel::M1, SimModel::M2, SimModel::M3, SimModel::M4}) {
        for (double target : {0.2, 0.4, 0.6}) {
            double achieved = 0.0;
            const double c = calibrate_c(m, 50, target, 17, &achieved);
            EXPECT_NEAR(achieved, target, 0.005) << to_string(m) << " " << target;
            EXPECT_NEAR(censoring_fraction_at(m, 50, c, 9999), target, 0.01) << to_string(m) << " " << target;
        }
    }
    EXPECT_THROW(calibrate_c(SimModel::M1, 50, 0.0, 1), InputError);
    EXPECT_THROW(calibrate_c(SimModel::M1, 50, 0.95, 1), InputError);
}

TEST(Simgen, GenerateIsDeterministic) {
    SimSpec spec;
    spec.model = SimModel::M2;
    spec.target_censoring = 0.4;
    spec.seed = 3;
    const SimOutput a = generate(spec), b = generate(spec);
    EXPECT_EQ(a.train.times, b.train.times);
    EXPECT_EQ(a.test_X, b.test_X);
    EXPECT_EQ(a.train.X.rows(), 100);
    EXPECT_EQ(a.test_X.rows(), 200);
    EXPECT_EQ(a.truth_test.cols(), 2);
    EXPECT_LT((a.truth_train - true_coordinates(SimModel::M2, a.train.X)).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_NEAR(a.censoring_observed, a.train.censoring_fraction(), 1e-15);
    EXPECT_NO_THROW(a.train.validate());
    spec.seed = 4;
    EXPECT_NE(generate(spec).train.times, a.train.times);
}

TEST(Simgen, NoCensoring) {
    SimSpec spec;
    spec.model = SimModel::M3;
    spec.seed = 1;
    const SimOutput s = generate(spec);
    EXPECT_TRUE(std::isinf(s.c_used));
    EXPECT_EQ(s.train.event_count(), 100);
}

TEST(Simgen, Validation) {
    SimSpec spec;
    spec.p = 10;
    EXPECT_THROW(generate(spec), InputError);
    spec.p = 50;
    spec.target_censoring = 0.95;
    EXPECT_THROW(generate(spec), InputError);
    EXPECT_THROW(sim_model_from_string("M5"), InputError);
    EXPECT_EQ(sim_model_from_string("3"), SimModel::M3);
}

TEST(Simgen, CensoringExamples) {
    SimSpec spec;
    spec.model = SimModel::M2;
    spec.target_censoring = 0.4;
    spec.seed = 21;
    const SimOutput sim = generate(spec);
    EXPECT_GE(sim.censoring_achieved, 0.38);
    EXPECT_LE(sim.censoring_achieved, 0.42);
    EXPECT_GT(calibrate_c(SimModel::M2, spec.p, 0.2, 5), calibrate_c(SimModel::M2, spec.p, 0.6, 5));
}
