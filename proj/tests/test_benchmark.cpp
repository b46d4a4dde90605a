#include "test_support.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace kernsdr;

namespace {

BenchConfig small_bench() {
    BenchConfig bc;
    bc.sim.model = SimModel::M1;
    bc.sim.n_train = 40;
    bc.sim.n_test = 30;
    bc.sim.p = 20;
    bc.fit.kernel = KernelSpec::linear();
    bc.fit.tau = Regularization::reference();
    bc.fit.s = Regularization::reference();
    bc.fit.L = bc.fit.L0 = bc.fit.L1 = 5;
    bc.replications = 2;
    bc.censoring_levels = {0.0, 0.3};
    bc.seed = 4;
    bc.threads = 1;
    return bc;
}

}  // namespace

TEST(Benchmark, TableLayoutAndRanges) {
    const BenchConfig bc = small_bench();
    const BenchTable t = run_benchmark(bc);
    ASSERT_EQ(t.rows.size(), 2u * 2u * 2u);
    for (const auto& r : t.rows) {
        EXPECT_FALSE(r.failed);
        EXPECT_EQ(r.replicates + r.discards, 2);
        EXPECT_GE(r.mean, 0.0);
        EXPECT_LE(r.mean, 1.0);
    }
    const BenchRow* cens = t.find(1, Method::rdsir, 0.3);
    ASSERT_NE(cens, nullptr);
    EXPECT_GT(cens->mean_observed_censoring, 0.0);
    EXPECT_TRUE(std::isinf(t.find(2, Method::dsir, 0.0)->c_used));

    std::ostringstream csv, txt;
    write_bench_csv(csv, t);
    EXPECT_EQ(csv.str().substr(0, csv.str().find('\n')),
              "model,q,method,censoring,mean_rmae,sd_rmae,replicates,discards,failed,observed_censoring,c");
    write_bench_text(txt, t);
    EXPECT_NE(txt.str().find("30%"), std::string::npos);
}

TEST(Benchmark, ThreadCountDoesNotChangeResults) {
    BenchConfig bc = small_bench();
    bc.censoring_levels = {0.3};
    const BenchTable a = run_benchmark(bc);
    bc.threads = 3;
    const BenchTable b = run_benchmark(bc);
    ASSERT_EQ(a.rows.size(), b.rows.size());
    for (std::size_t i = 0; i < a.rows.size(); ++i) EXPECT_EQ(a.rows[i].mean, b.rows[i].mean);
}

TEST(Benchmark, Validation) {
    BenchConfig bc = small_bench();
    bc.replications = 0;
    EXPECT_THROW(run_benchmark(bc), InputError);
    bc = small_bench();
    bc.q_values = {0};
    EXPECT_THROW(run_benchmark(bc), InputError);
    EXPECT_THROW(method_from_string("sir"), InputError);
}

TEST(Benchmark, SingleReplicationReproducible) {
    BenchConfig bc = small_bench();
    bc.replications = 1;
    const BenchTable a = run_benchmark(bc), b = run_benchmark(bc);
    ASSERT_EQ(a.rows.size(), b.rows.size());
    for (std::size_t k = 0; k < a.rows.size(); ++k) {
        EXPECT_EQ(a.rows[k].mean, b.rows[k].mean);
        EXPECT_EQ(a.rows[k].sd, b.rows[k].sd);
    }
}
