#pragma once

#include "kernsdr/common.hpp"
#include "kernsdr/rdsir_stages.hpp"
#include "kernsdr/regularization.hpp"

#include <functional>
#include <limits>
#include <random>
#include <vector>

namespace kernsdr {

struct TuningResult {
    std::vector<double> grid;
    std::vector<double> variance_term;
    std::vector<double> bias_term;
    std::vector<double> loss;
    double selected = 0.0;
    double tau0 = 0.0;
    int B = 0;
    int used_replicates = 0;
    int discarded_replicates = 0;
    Index directions = 0;  ///< number of score columns entering the loss

    std::size_t selected_index() const {
        for (std::size_t k = 0; k < grid.size(); ++k)
            if (grid[k] == selected) return k;
        return grid.size();
    }
};

// =============================================================================
// Alignment
// =============================================================================

/// Orthogonal Omega minimizing ||A Omega - target||_F.
inline MatrixXd procrustes_rotation(const MatrixXd& A, const MatrixXd& target) {
    if (A.rows() != target.rows() || A.cols() != target.cols())
        throw InputError("procrustes: matrices differ in shape");
    Eigen::JacobiSVD<MatrixXd> svd(A.transpose() * target, Eigen::ComputeFullU | Eigen::ComputeFullV);
    return svd.matrixU() * svd.matrixV().transpose();
}

inline MatrixXd align_to(const MatrixXd& A, const MatrixXd& target) { return A * procrustes_rotation(A, target); }

/// Generalized Procrustes mean: replicates are repeatedly aligned to their own
/// mean, starting from `initial`.
inline MatrixXd procrustes_mean(const std::vector<MatrixXd>& replicates, const MatrixXd& initial,
                                int max_iterations = 100, double tolerance = 1e-13) {
    if (replicates.empty()) throw InputError("procrustes_mean: no replicates");
    MatrixXd target = initial;
    for (int it = 0; it < max_iterations; ++it) {
        MatrixXd mean = MatrixXd::Zero(target.rows(), target.cols());
        for (const auto& r : replicates) mean += align_to(r, target);
        mean /= static_cast<double>(replicates.size());
        const double change = (mean - target).norm();
        const double scale = std::max(1.0, mean.norm());
        target = std::move(mean);
        if (change <= tolerance * scale) break;
    }
    return target;
}

struct BootstrapTerms {
    double variance = 0.0;  ///< sum over (i, j) of the bootstrap sample variance
    double bias = 0.0;      ///< sum over (i, j) of (bootstrap mean - reference)^2
};

/// V and B for one grid value from aligned replicate score matrices (n x q each).
inline BootstrapTerms bootstrap_terms(const std::vector<MatrixXd>& replicates, const MatrixXd& reference) {
    const std::size_t B = replicates.size();
    if (B < 2) throw InputError("bootstrap_terms: need at least 2 replicates");
    std::vector<MatrixXd> aligned;
    aligned.reserve(B);
    MatrixXd mean = MatrixXd::Zero(reference.rows(), reference.cols());
    for (const auto& r : replicates) {
        aligned.push_back(align_to(r, reference));
        mean += aligned.back();
    }
    mean /= static_cast<double>(B);
    double ss = 0.0;
    for (const auto& a : aligned) ss += (a - mean).squaredNorm();
    return {ss / static_cast<double>(B - 1), (mean - reference).squaredNorm()};
}

/// Index of the smallest loss; ties go to the smaller grid value.
inline std::size_t argmin_loss(const std::vector<double>& loss) {
    if (loss.empty()) throw InputError("argmin_loss: empty loss vector");
    std::size_t best = 0;
    for (std::size_t k = 1; k < loss.size(); ++k)
        if (loss[k] < loss[best]) best = k;
    return best;
}

/**
 * Generic bootstrap MSE selection.
 *
 * scores[g][b] holds the n x q scores at the original observations from
 * replicate b fitted with grid[g]; reference_scores[b] those at tau0, and
 * initial the full-data fit at tau0 used to seed the Procrustes mean.
 */
inline TuningResult select_by_bootstrap(const std::vector<double>& grid, double tau0_value,
                                        const std::vector<std::vector<MatrixXd>>& scores,
                                        const std::vector<MatrixXd>& reference_scores, const MatrixXd& initial) {
    if (grid.size() != scores.size()) throw InputError("select_by_bootstrap: grid and scores differ in length");
    TuningResult out;
    out.grid = grid;
    out.tau0 = tau0_value;
    out.B = static_cast<int>(reference_scores.size());
    out.used_replicates = out.B;
    out.directions = initial.cols();
    const MatrixXd reference = procrustes_mean(reference_scores, initial);
    for (std::size_t g = 0; g < grid.size(); ++g) {
        const BootstrapTerms t = bootstrap_terms(scores[g], reference);
        out.variance_term.push_back(t.variance);
        out.bias_term.push_back(t.bias);
        out.loss.push_back(t.variance + t.bias);
    }
    out.selected = grid[argmin_loss(out.loss)];
    return out;
}

// =============================================================================
// Bootstrap driver
// =============================================================================

/// Per-replicate evaluator: fits on `sample` for every value of `values` and
/// returns the score matrices at the original covariates, one per value.
using ReplicateEvaluator =
    std::function<std::vector<MatrixXd>(const SurvivalDataset& sample, const std::vector<double>& values)>;

/// Runs B resamples, with replacement, of the row indices. Replicates whose fit
/// fails numerically or whose resample is invalid are discarded; more than half
/// discarded is an error.
inline TuningResult run_bootstrap(const SurvivalDataset& data, const std::vector<double>& grid, double tau0_value,
                                  const MatrixXd& initial, int B, std::uint64_t seed, unsigned threads,
                                  const ReplicateEvaluator& evaluate) {
    if (B < 2) throw InputError("bootstrap tuning needs B >= 2");
    const Index n = data.size();
    std::vector<double> values = grid;
    values.push_back(tau0_value);

    std::vector<std::vector<MatrixXd>> per_replicate(static_cast<std::size_t>(B));
    std::vector<char> ok(static_cast<std::size_t>(B), 0);
    parallel_for(static_cast<std::size_t>(B), resolve_threads(threads), [&](std::size_t b) {
        std::mt19937_64 rng(derive_seed(seed, 0x7475u, b));
        std::uniform_int_distribution<Index> pick(0, n - 1);
        std::vector<Index> rows(static_cast<std::size_t>(n));
        for (auto& r : rows) r = pick(rng);
        try {
            const SurvivalDataset sample = data.subset(rows);
            sample.validate();
            per_replicate[b] = evaluate(sample, values);
            ok[b] = 1;
        } catch (const Error&) {
            ok[b] = 0;
        }
    });

    int discarded = 0;
    std::vector<std::vector<MatrixXd>> scores(grid.size());
    std::vector<MatrixXd> reference;
    for (std::size_t b = 0; b < per_replicate.size(); ++b) {
        if (!ok[b]) {
            ++discarded;
            continue;
        }
        for (std::size_t g = 0; g < grid.size(); ++g) scores[g].push_back(std::move(per_replicate[b][g]));
        reference.push_back(std::move(per_replicate[b].back()));
    }
    if (discarded > 0) warn("bootstrap tuning discarded " + std::to_string(discarded) + " of " + std::to_string(B) +
                            " replicates");
    if (2 * discarded > B || reference.size() < 2)
        throw NumericalError("bootstrap tuning: " + std::to_string(discarded) + " of " + std::to_string(B) +
                             " replicates failed (degenerate slices); use fewer slices or more data");
    TuningResult out = select_by_bootstrap(grid, tau0_value, scores, reference, initial);
    out.B = B;
    out.used_replicates = B - discarded;
    out.discarded_replicates = discarded;
    return out;
}

/// Regularization value used when tuning is off: n^2 tau0 = 0.05 lambda_1(R^2).
inline double reference_regularization(const GramMatrix& g) { return tau0(g.centered, g.centered.rows()); }

/// Bootstrap choice of the final-stage tau with s held fixed.
inline TuningResult tune(const SurvivalDataset& data, const FitConfig& config, double s) {
    data.validate();
    const KernelSpec kernel = resolve_kernel(config, data.X);
    const PreparedProblem full = prepare_problem(data, kernel, s, config);
    const double t0 = reference_regularization(full.gram);
    const FinalSolution at_t0 = final_stage(full, t0, config.q, config.component_threshold);
    const Index q = at_t0.alphas.cols();
    const MatrixXd initial = full.gram.centered * at_t0.alphas;

    FitConfig fixed = config;
    fixed.m = full.joint.alphas.cols();
    return run_bootstrap(data, make_grid(t0), t0, initial, config.bootstrap_replicates, derive_seed(config.seed, 1u),
                         config.threads, [&](const SurvivalDataset& sample, const std::vector<double>& values) {
                             const PreparedProblem p = prepare_problem(sample, kernel, s, fixed);
                             std::vector<MatrixXd> out;
                             for (double tau : values) {
                                 const FinalSolution fs = final_stage(p, tau, q, fixed.component_threshold);
                                 out.push_back(score_with(kernel, sample.X, p.gram.row_means, p.gram.grand_mean,
                                                          fs.alphas, data.X));
                             }
                             return out;
                         });
}

/// Bootstrap choice of the joint-stage s (same loss on the joint scores).
inline TuningResult tune_joint(const SurvivalDataset& data, const FitConfig& config) {
    data.validate();
    const KernelSpec kernel = resolve_kernel(config, data.X);
    const GramMatrix g = gram(data.X, kernel);
    const double s0 = reference_regularization(g);
    const JointFit at_s0 = joint_stage(g, data, s0, config.L0, config.L1, config.m, config.component_threshold);
    const Index m = at_s0.alphas.cols();
    const MatrixXd initial = g.centered * at_s0.alphas;

    return run_bootstrap(data, make_grid(s0), s0, initial, config.bootstrap_replicates, derive_seed(config.seed, 2u),
                         config.threads, [&](const SurvivalDataset& sample, const std::vector<double>& values) {
                             const GramMatrix gs = gram(sample.X, kernel);
                             const LowRankPencil pencil = joint_pencil(gs, sample, config.L0, config.L1);
                             std::vector<MatrixXd> out;
                             for (double s : values) {
                                 const JointFit jf =
                                     joint_from_pencil(pencil, gs.centered, s, m, config.component_threshold);
                                 out.push_back(
                                     score_with(kernel, sample.X, gs.row_means, gs.grand_mean, jf.alphas, data.X));
                             }
                             return out;
                         });
}

}  // namespace kernsdr
