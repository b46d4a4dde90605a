#pragma once

#include "kernsdr/common.hpp"
#include "kernsdr/dataset.hpp"
#include "kernsdr/eigensolve.hpp"
#include "kernsdr/hazard_smoothing.hpp"
#include "kernsdr/kernels.hpp"
#include "kernsdr/regularization.hpp"
#include "kernsdr/slicing.hpp"

#include <optional>
#include <string>
#include <vector>

namespace kernsdr {

// =============================================================================
// Configuration and model
// =============================================================================

enum class RegMode {
    value,      ///< use `value` as given
    reference,  ///< n^2 tau = 0.05 lambda_1(R^2)
    bootstrap,  ///< minimize the bootstrap MSE over the log grid
};

struct Regularization {
    RegMode mode = RegMode::bootstrap;
    double value = 0.0;

    static Regularization fixed(double v) { return {RegMode::value, v}; }
    static Regularization reference() { return {RegMode::reference, 0.0}; }
    static Regularization bootstrap() { return {RegMode::bootstrap, 0.0}; }
};

struct FitConfig {
    KernelSpec kernel;
    bool auto_scale = false;  ///< gaussian only: median-heuristic scale from the training X
    Regularization tau;
    Regularization s;
    int L = 10;
    int L0 = 10;
    int L1 = 10;
    std::optional<Index> q;  ///< nullopt: 90% eigenvalue rule
    std::optional<Index> m;  ///< nullopt: 90% eigenvalue rule
    double component_threshold = 0.9;
    double bandwidth_c0 = 1.0;
    int smoother_order = 2;
    int bootstrap_replicates = 20;
    std::uint64_t seed = 0;
    unsigned threads = 1;
};

/// Fitted sufficient-dimension-reduction model. Scores for new covariates are
/// centered-cross-kernel(x)^T alpha_j.
struct SdrModel {
    KernelSpec kernel;
    MatrixXd X_train;
    VectorXd row_means;
    double grand_mean = 0.0;
    MatrixXd alphas_joint;  ///< n x m
    MatrixXd alphas;        ///< n x q
    std::vector<double> eigenvalues_joint;
    std::vector<double> eigenvalues;
    double tau = 0.0;
    double s = 0.0;
    int L = 10, L0 = 10, L1 = 10;
    Index m = 0, q = 0;

    // Diagnostics; not part of the serialized form.
    double bandwidth = 0.0;
    Index weight_fallbacks = 0;
    Index survival_fallbacks = 0;

    Index dimension() const { return X_train.cols(); }
};

inline KernelSpec resolve_kernel(const FitConfig& config, const MatrixXd& X) {
    KernelSpec k = config.kernel;
    if (k.family == KernelFamily::gaussian_rbf && config.auto_scale) k.scale = median_heuristic_scale(X);
    k.validate();
    return k;
}

// =============================================================================
// Joint directions (double slicing)
// =============================================================================

struct JointFit {
    MatrixXd alphas;                      ///< n x m, unitized
    std::vector<double> eigenvalues;      ///< top m
    std::vector<double> all_eigenvalues;  ///< full spectrum, for the component rule
    DoubleSlicePlan plan;
};

/// Top pairs of a regularized problem; the count comes from the 90% rule when not given.
inline std::vector<EigPair> top_pairs(const LowRankPencil& pencil, double reg, std::optional<Index> count,
                                      double threshold, std::vector<double>* spectrum) {
    const Index n = pencil.size();
    if (count && (*count < 1 || *count > n))
        throw InputError("requested " + std::to_string(*count) + " directions from " + std::to_string(n) +
                         " observations");
    Index k = 0;
    if (count) {
        k = *count;
        if (spectrum) *spectrum = pencil.spectrum(reg);
    } else {
        const std::vector<double> all = pencil.spectrum(reg);
        k = select_components(all, threshold);
        if (spectrum) *spectrum = all;
    }
    return pencil.solve(reg, k);
}

inline MatrixXd unitized_columns(const std::vector<EigPair>& pairs, const MatrixXd& R) {
    MatrixXd A(R.rows(), static_cast<Index>(pairs.size()));
    for (std::size_t j = 0; j < pairs.size(); ++j) A.col(static_cast<Index>(j)) = unitize(pairs[j].vector, R);
    return A;
}

inline JointFit joint_from_pencil(const LowRankPencil& pencil, const MatrixXd& R, double s, std::optional<Index> m,
                                  double threshold) {
    JointFit jf;
    auto pairs = top_pairs(pencil, s, m, threshold, &jf.all_eigenvalues);
    jf.alphas = unitized_columns(pairs, R);
    jf.eigenvalues = eigenvalues_of(pairs);
    return jf;
}

/// Pencil R Q_J R a = lambda (R^2 + n^2 s I) a for the double-sliced data.
inline LowRankPencil joint_pencil(const GramMatrix& gram, const SurvivalDataset& data, int L0, int L1,
                                  DoubleSlicePlan* plan = nullptr) {
    DoubleSliceResult ds = double_slice_q(data, static_cast<std::size_t>(L0), static_cast<std::size_t>(L1));
    if (plan) *plan = std::move(ds.plan);
    return LowRankPencil(gram.centered, ds.q_factor);
}

inline JointFit joint_stage(const GramMatrix& gram, const SurvivalDataset& data, double s, int L0, int L1,
                            std::optional<Index> m, double threshold) {
    DoubleSlicePlan plan;
    const LowRankPencil pencil = joint_pencil(gram, data, L0, L1, &plan);
    JointFit jf = joint_from_pencil(pencil, gram.centered, s, m, threshold);
    jf.plan = std::move(plan);
    return jf;
}

// =============================================================================
// Censoring-weighted slicing on the joint scores
// =============================================================================

struct WeightStage {
    WeightedSliceMatrices slices;
    double bandwidth = 0.0;
    Index weight_fallbacks = 0;
    Index survival_fallbacks = 0;
    bool smoother_used = false;
};

inline WeightStage weight_stage(const GramMatrix& gram, const SurvivalDataset& data, const MatrixXd& alphas_joint,
                                int L, double c0, int order) {
    WeightStage ws;
    const SlicePlan plan = make_slices(data.times, static_cast<std::size_t>(L));
    const Index n = data.size();
    const bool any_censored = (data.status.array() == 0).any();
    if (!any_censored) {
        ws.slices = weighted_slice_matrices(data, plan, [](double, double, std::size_t) -> double {
            throw std::logic_error("censoring weight requested for uncensored data");
        });
        return ws;
    }

    ReducedCoordinates coords;
    coords.Z = gram.centered * alphas_joint;
    coords.order = order;
    const double sd = average_sd(coords.Z);
    coords.h = bandwidth(n, order, c0, sd > 0.0 ? sd : 1.0);
    HazardSmoother smoother(coords, data);

    std::vector<std::vector<double>> cache(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i)
        if (data.status(i) == 0) cache[static_cast<std::size_t>(i)] = smoother.weights_for_subject(i, plan.boundaries);

    ws.slices = weighted_slice_matrices(data, plan, [&](double, double t, std::size_t i) {
        const auto idx = static_cast<std::size_t>(
            std::lower_bound(plan.boundaries.begin(), plan.boundaries.end(), t) - plan.boundaries.begin());
        return cache[i][idx];
    });
    ws.bandwidth = coords.h;
    ws.weight_fallbacks = smoother.weight_fallbacks();
    ws.survival_fallbacks = smoother.survival_fallbacks();
    ws.smoother_used = true;
    return ws;
}

// =============================================================================
// Prepared problem: everything except the final regularization
// =============================================================================

struct PreparedProblem {
    KernelSpec kernel;
    MatrixXd X;
    GramMatrix gram;
    JointFit joint;
    WeightStage weights;
    std::optional<LowRankPencil> pencil;  ///< final-stage pencil for sweeping tau
    double s = 0.0;
};

inline PreparedProblem prepare_problem(const SurvivalDataset& data, const KernelSpec& kernel, double s,
                                       const FitConfig& config) {
    PreparedProblem p;
    p.kernel = kernel;
    p.X = data.X;
    p.gram = gram(data.X, kernel);
    p.s = s;
    p.joint = joint_stage(p.gram, data, s, config.L0, config.L1, config.m, config.component_threshold);
    p.weights = weight_stage(p.gram, data, p.joint.alphas, config.L, config.bandwidth_c0, config.smoother_order);
    p.pencil.emplace(p.gram.centered, p.weights.slices.q_factor);
    return p;
}

struct FinalSolution {
    MatrixXd alphas;
    std::vector<double> eigenvalues;
    std::vector<double> all_eigenvalues;
};

inline FinalSolution final_stage(const PreparedProblem& p, double tau, std::optional<Index> q, double threshold) {
    FinalSolution fs;
    auto pairs = top_pairs(*p.pencil, tau, q, threshold, &fs.all_eigenvalues);
    fs.alphas = unitized_columns(pairs, p.gram.centered);
    fs.eigenvalues = eigenvalues_of(pairs);
    return fs;
}

inline SdrModel assemble_model(const PreparedProblem& p, const FinalSolution& fs, double tau, const FitConfig& config) {
    SdrModel model;
    model.kernel = p.kernel;
    model.X_train = p.X;
    model.row_means = p.gram.row_means;
    model.grand_mean = p.gram.grand_mean;
    model.alphas_joint = p.joint.alphas;
    model.alphas = fs.alphas;
    model.eigenvalues_joint = p.joint.eigenvalues;
    model.eigenvalues = fs.eigenvalues;
    model.tau = tau;
    model.s = p.s;
    model.L = config.L;
    model.L0 = config.L0;
    model.L1 = config.L1;
    model.m = p.joint.alphas.cols();
    model.q = fs.alphas.cols();
    model.bandwidth = p.weights.bandwidth;
    model.weight_fallbacks = p.weights.weight_fallbacks;
    model.survival_fallbacks = p.weights.survival_fallbacks;
    return model;
}

// =============================================================================
// Scores
// =============================================================================

/// Scores of arbitrary covariates under a set of coefficient columns (k x cols).
inline MatrixXd score_with(const KernelSpec& kernel, const MatrixXd& X_train, const VectorXd& row_means,
                           double grand_mean, const MatrixXd& alphas, const Eigen::Ref<const MatrixXd>& X_new) {
    return cross_kernel_matrix(X_train, kernel, X_new, row_means, grand_mean).transpose() * alphas;
}

/// u_j(x) = centered-cross-kernel(x)^T alpha_j for every row of X_new.
inline MatrixXd transform(const SdrModel& model, const Eigen::Ref<const MatrixXd>& X_new) {
    if (X_new.cols() != model.dimension())
        throw InputError("transform: model expects " + std::to_string(model.dimension()) + " covariates, got " +
                         std::to_string(X_new.cols()));
    return score_with(model.kernel, model.X_train, model.row_means, model.grand_mean, model.alphas, X_new);
}

/// Scores on the joint (T~, Delta) directions.
inline MatrixXd transform_joint(const SdrModel& model, const Eigen::Ref<const MatrixXd>& X_new) {
    if (X_new.cols() != model.dimension()) throw InputError("transform_joint: covariate count mismatch");
    return score_with(model.kernel, model.X_train, model.row_means, model.grand_mean, model.alphas_joint, X_new);
}

}  // namespace kernsdr
