#pragma once

#include "kernsdr/rdsir_stages.hpp"
#include "kernsdr/tuning.hpp"

#include <optional>

namespace kernsdr {

/// Tuning traces produced while fitting with automatic regularization.
struct FitReport {
    std::optional<TuningResult> tau_tuning;
    std::optional<TuningResult> s_tuning;
};

/// Joint directions of the double-sliced problem.
inline JointFit fit_joint(const SurvivalDataset& data, const KernelSpec& kernel, double s, int L0 = 10, int L1 = 10,
                          std::optional<Index> m = std::nullopt, double threshold = 0.9) {
    data.validate();
    kernel.validate();
    if (!(s > 0.0)) throw InputError("fit_joint: s must be positive");
    return joint_stage(gram(data.X, kernel), data, s, L0, L1, m, threshold);
}

inline double resolve_s(const SurvivalDataset& data, const FitConfig& config, FitReport* report) {
    switch (config.s.mode) {
        case RegMode::value:
            if (!(config.s.value > 0.0)) throw InputError("s must be positive");
            return config.s.value;
        case RegMode::reference:
            return reference_regularization(gram(data.X, resolve_kernel(config, data.X)));
        case RegMode::bootstrap: {
            TuningResult t = tune_joint(data, config);
            const double v = t.selected;
            if (report) report->s_tuning = std::move(t);
            return v;
        }
    }
    throw InputError("unknown regularization mode");
}

/// Full pipeline: Gram matrix, joint directions, censoring weights, final
/// regularized problem. Regularization values set to bootstrap are tuned
/// (s first, then tau with s fixed).
inline SdrModel fit(const SurvivalDataset& data, const FitConfig& config, FitReport* report = nullptr) {
    data.validate();
    const KernelSpec kernel = resolve_kernel(config, data.X);
    const double s = resolve_s(data, config, report);
    const PreparedProblem p = prepare_problem(data, kernel, s, config);

    double tau = 0.0;
    switch (config.tau.mode) {
        case RegMode::value:
            if (!(config.tau.value > 0.0)) throw InputError("tau must be positive");
            tau = config.tau.value;
            break;
        case RegMode::reference:
            tau = reference_regularization(p.gram);
            break;
        case RegMode::bootstrap: {
            TuningResult t = tune(data, config, s);
            tau = t.selected;
            if (report) report->tau_tuning = std::move(t);
            break;
        }
    }
    const FinalSolution fs = final_stage(p, tau, config.q, config.component_threshold);
    SdrModel model = assemble_model(p, fs, tau, config);
    if (model.weight_fallbacks > 0)
        warn(std::to_string(model.weight_fallbacks) +
             " censoring weights fell back to the Kaplan-Meier ratio (sparse local support); "
             "consider a larger bandwidth constant");
    return model;
}

/// Linear-kernel fit (DSIR).
inline SdrModel fit_dsir(const SurvivalDataset& data, FitConfig config, FitReport* report = nullptr) {
    config.kernel = KernelSpec::linear();
    config.auto_scale = false;
    return fit(data, config, report);
}

}  // namespace kernsdr
