#pragma once

#include "kernsdr/assoc_eval.hpp"
#include "kernsdr/rdsir.hpp"
#include "kernsdr/simgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace kernsdr {

enum class Method { rdsir, dsir };

inline std::string to_string(Method m) { return m == Method::rdsir ? "RDSIR" : "DSIR"; }

inline Method method_from_string(const std::string& s) {
    if (s == "rdsir" || s == "RDSIR") return Method::rdsir;
    if (s == "dsir" || s == "DSIR") return Method::dsir;
    throw InputError("unknown method '" + s + "' (expected rdsir or dsir)");
}

struct BenchConfig {
    SimSpec sim;
    std::vector<Method> methods{Method::rdsir, Method::dsir};
    FitConfig fit;  ///< kernel and tuning for the RDSIR arm; DSIR uses the same settings with a linear kernel
    int replications = 30;
    std::vector<Index> q_values{1, 2};
    std::vector<double> censoring_levels{0.0, 0.2, 0.4, 0.6};
    std::uint64_t seed = 0;
    unsigned threads = 0;
    bool score_on_train = false;  ///< score in-sample instead of on the test covariates

    void validate() const {
        sim.validate();
        if (replications < 1) throw InputError("benchmark: replications must be >= 1");
        if (methods.empty()) throw InputError("benchmark: no methods selected");
        if (q_values.empty()) throw InputError("benchmark: no q values");
        for (Index q : q_values)
            if (q < 1) throw InputError("benchmark: q values must be >= 1");
        if (censoring_levels.empty()) throw InputError("benchmark: no censoring levels");
        for (double c : censoring_levels)
            if (!(c >= 0.0 && c <= 0.9)) throw InputError("benchmark: censoring levels must lie in [0, 0.9]");
    }
};

struct BenchRow {
    SimModel model = SimModel::M1;
    Index q = 1;
    Method method = Method::rdsir;
    double censoring = 0.0;
    double mean = 0.0;
    double sd = 0.0;
    int replicates = 0;
    int discards = 0;
    bool failed = false;
    double mean_observed_censoring = 0.0;
    double c_used = 0.0;
};

struct BenchTable {
    std::vector<BenchRow> rows;

    bool any_failed() const {
        return std::any_of(rows.begin(), rows.end(), [](const BenchRow& r) { return r.failed; });
    }
    const BenchRow* find(Index q, Method m, double censoring) const {
        for (const auto& r : rows)
            if (r.q == q && r.method == m && std::abs(r.censoring - censoring) < 1e-12) return &r;
        return nullptr;
    }
};

/// Test-set (or training-set) RMAE of one fitted model for each q.
inline std::vector<double> score_model(const SdrModel& model, const SimOutput& sim, SimModel which,
                                       const std::vector<Index>& q_values, bool on_train) {
    const MatrixXd scores = on_train ? transform(model, sim.train.X) : transform(model, sim.test_X);
    const MatrixXd& truth = on_train ? sim.truth_train : sim.truth_test;
    std::vector<double> out;
    for (Index q : q_values) {
        const Index k = std::min<Index>(q, scores.cols());
        out.push_back(rmae(scores.leftCols(k), scoring_truth(which, truth, q)).value);
    }
    return out;
}

/// Replicates over every (censoring level, replicate) pair run in a pool; the
/// data for a pair are shared by all methods.
inline BenchTable run_benchmark(const BenchConfig& config) {
    config.validate();
    const std::size_t nlev = config.censoring_levels.size();
    const std::size_t nrep = static_cast<std::size_t>(config.replications);
    const std::size_t nmeth = config.methods.size();
    const std::size_t nq = config.q_values.size();
    const Index qmax = *std::max_element(config.q_values.begin(), config.q_values.end());

    std::vector<double> c_level(nlev, std::numeric_limits<double>::infinity());
    for (std::size_t l = 0; l < nlev; ++l)
        if (config.censoring_levels[l] > 0.0)
            c_level[l] = calibrate_c(config.sim.model, config.sim.p, config.censoring_levels[l],
                                     derive_seed(config.seed, 0x63u, l));

    // scores[(l * nrep + r) * nmeth + m][k]; NaN marks a discarded fit.
    std::vector<std::vector<double>> scores(nlev * nrep * nmeth, std::vector<double>(nq, std::nan("")));
    std::vector<double> observed(nlev * nrep, 0.0);
    const unsigned threads = resolve_threads(config.threads);

    parallel_for(nlev * nrep, threads, [&](std::size_t task) {
        const std::size_t l = task / nrep, r = task % nrep;
        SimSpec spec = config.sim;
        spec.target_censoring = config.censoring_levels[l];
        spec.c = c_level[l];
        spec.seed = derive_seed(config.seed, 0x64u, l, r);
        const SimOutput sim = generate(spec);
        observed[task] = sim.censoring_observed;
        for (std::size_t m = 0; m < nmeth; ++m) {
            FitConfig fc = config.fit;
            fc.q = std::min<Index>(qmax, sim.train.size());
            fc.seed = derive_seed(config.seed, 0x66u, l, r, m);
            fc.threads = 1;
            try {
                const SdrModel model = config.methods[m] == Method::dsir ? fit_dsir(sim.train, fc) : fit(sim.train, fc);
                scores[task * nmeth + m] =
                    score_model(model, sim, config.sim.model, config.q_values, config.score_on_train);
            } catch (const Error& e) {
                warn("benchmark: " + to_string(config.methods[m]) + " replicate " + std::to_string(r) +
                     " at censoring " + std::to_string(config.censoring_levels[l]) + " discarded: " + e.what());
            }
        }
    });

    BenchTable table;
    for (std::size_t k = 0; k < nq; ++k)
        for (std::size_t m = 0; m < nmeth; ++m)
            for (std::size_t l = 0; l < nlev; ++l) {
                BenchRow row;
                row.model = config.sim.model;
                row.q = config.q_values[k];
                row.method = config.methods[m];
                row.censoring = config.censoring_levels[l];
                row.c_used = c_level[l];
                std::vector<double> vals;
                double obs = 0.0;
                for (std::size_t r = 0; r < nrep; ++r) {
                    obs += observed[l * nrep + r];
                    const double v = scores[(l * nrep + r) * nmeth + m][k];
                    if (std::isnan(v))
                        ++row.discards;
                    else
                        vals.push_back(v);
                }
                row.mean_observed_censoring = obs / static_cast<double>(nrep);
                row.replicates = static_cast<int>(vals.size());
                row.failed = vals.empty();
                if (!vals.empty()) {
                    double s = 0.0;
                    for (double v : vals) s += v;
                    row.mean = s / static_cast<double>(vals.size());
                    double ss = 0.0;
                    for (double v : vals) ss += (v - row.mean) * (v - row.mean);
                    row.sd = vals.size() > 1 ? std::sqrt(ss / static_cast<double>(vals.size() - 1)) : 0.0;
                }
                table.rows.push_back(row);
            }
    return table;
}

inline void write_bench_csv(std::ostream& os, const BenchTable& t) {
    os << "model,q,method,censoring,mean_rmae,sd_rmae,replicates,discards,failed,observed_censoring,c\n";
    os << std::setprecision(17);
    for (const auto& r : t.rows)
        os << to_string(r.model) << ',' << r.q << ',' << to_string(r.method) << ',' << r.censoring << ',' << r.mean
           << ',' << r.sd << ',' << r.replicates << ',' << r.discards << ',' << (r.failed ? 1 : 0) << ','
           << r.mean_observed_censoring << ',' << r.c_used << '\n';
}

/// One line per (q, method), censoring levels across.
inline void write_bench_text(std::ostream& os, const BenchTable& t) {
    std::vector<double> levels;
    for (const auto& r : t.rows)
        if (std::find(levels.begin(), levels.end(), r.censoring) == levels.end()) levels.push_back(r.censoring);
    std::ostringstream head;
    head << std::left << std::setw(6) << "model" << std::setw(4) << "q" << std::setw(7) << "method";
    for (double c : levels) {
        std::ostringstream lab;
        lab << std::lround(100.0 * c) << '%';
        head << std::right << std::setw(16) << lab.str();
    }
    os << head.str() << '\n';
    std::vector<std::pair<Index, Method>> keys;
    for (const auto& r : t.rows)
        if (std::find(keys.begin(), keys.end(), std::make_pair(r.q, r.method)) == keys.end())
            keys.emplace_back(r.q, r.method);
    for (const auto& [q, m] : keys) {
        std::ostringstream line;
        line << std::left << std::setw(6) << to_string(t.rows.front().model) << std::setw(4) << q << std::setw(7)
             << to_string(m);
        for (double c : levels) {
            const BenchRow* r = t.find(q, m, c);
            std::string cell = "-";
            if (r && !r->failed) {
                char buf[64];
                std::snprintf(buf, sizeof buf, "%.3f(%.3f)%s", r->mean, r->sd, r->discards > 0 ? "*" : "");
                cell = buf;
            } else if (r) {
                cell = "failed";
            }
            line << std::right << std::setw(16) << cell;
        }
        os << line.str() << '\n';
    }
    bool any_discard = false;
    for (const auto& r : t.rows) any_discard = any_discard || r.discards > 0;
    if (any_discard) os << "* some replicates were discarded; see the CSV discards column\n";
}

}  // namespace kernsdr
