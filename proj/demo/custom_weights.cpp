// Weighted slicing with a user-supplied censoring weight. Here the true
// conditional survival of an Exp(1) event time is known, so the weight
// P(T >= t | T > t') = exp(-(t - t')) can be passed directly.
#include "kernsdr/kernsdr.hpp"

#include <cmath>
#include <cstdio>
#include <random>

int main() {
    using namespace kernsdr;

    const Index n = 200, p = 3;
    std::mt19937_64 rng(3);
    std::normal_distribution<double> normal;
    std::exponential_distribution<double> expo(1.0);

    SurvivalDataset data;
    data.X.resize(n, p);
    data.times.resize(n);
    data.status.resize(n);
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < p; ++j) data.X(i, j) = normal(rng);
        const double T = expo(rng) * std::exp(-data.X(i, 0));
        const double C = 2.0 * expo(rng);
        data.times(i) = std::min(T, C);
        data.status(i) = T <= C ? 1 : 0;
    }
    data.validate();

    // Event hazard exp(x_1): P(T >= t | T > t', x) = exp(-(t - t') e^{x_1}).
    auto oracle = [&](double t_prime, double t, std::size_t i) {
        return std::exp(-(t - t_prime) * std::exp(data.X(static_cast<Index>(i), 0)));
    };

    const SlicePlan plan = make_slices(data.times, 8);
    const WeightedSliceMatrices w = weighted_slice_matrices(data, plan, oracle);
    std::printf("slices = %zu, slice probabilities:", w.plan.count());
    for (Index l = 0; l < w.p_hat.size(); ++l) std::printf(" %.3f", w.p_hat(l));
    std::printf("\n");

    const GramMatrix g = gram(data.X, KernelSpec::linear());
    const double tau = reference_regularization(g);
    const auto pairs = reg_gen_eig(g.centered, w.q, tau, 1);
    const VectorXd alpha = unitize(pairs.front().vector, g.centered);
    VectorXd beta = data.X.transpose() * (g.centered * alpha);  // linear kernel: direction in x-space
    beta.normalize();
    std::printf("leading eigenvalue %.4f, direction (%.3f, %.3f, %.3f)\n", pairs.front().value, beta(0), beta(1),
                beta(2));
    return 0;
}
