// kernsdr command-line tool: simulate, fit, transform, tune, evaluate, km, benchmark.

#include "kernsdr/kernsdr.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using namespace kernsdr;

constexpr int kExitInput = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitPartial = 4;

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

Regularization parse_regularization(const std::string& s, const std::string& name) {
    if (s == "auto" || s == "bootstrap") return Regularization::bootstrap();
    if (s == "ref" || s == "reference") return Regularization::reference();
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size() || !(v > 0.0)) throw std::invalid_argument(s);
        return Regularization::fixed(v);
    } catch (const std::exception&) {
        throw InputError("--" + name + " must be a positive number, 'auto' or 'ref' (got '" + s + "')");
    }
}

std::optional<Index> parse_count(const std::string& s, const std::string& name) {
    if (s == "auto") return std::nullopt;
    try {
        std::size_t pos = 0;
        const long v = std::stol(s, &pos);
        if (pos != s.size() || v < 1) throw std::invalid_argument(s);
        return static_cast<Index>(v);
    } catch (const std::exception&) {
        throw InputError("--" + name + " must be a positive integer or 'auto' (got '" + s + "')");
    }
}

/// Flags shared by fit, tune and benchmark.
struct FitFlags {
    std::string kernel = "gaussian";
    std::string scale = "auto";
    double offset = 1.0;
    int degree = 2;
    std::string tau = "auto";
    std::string s = "auto";
    int L = 10, L0 = 10, L1 = 10;
    std::string q = "auto";
    std::string m = "auto";
    double threshold = 0.9;
    double c0 = 1.0;
    int order = 2;
    int B = 20;
    std::uint64_t seed = 0;

    void add(CLI::App* app, bool with_q = true) {
        app->add_option("--kernel", kernel, "kernel family: linear, polynomial or gaussian")->capture_default_str();
        app->add_option("--scale", scale, "kernel scale; 'auto' = median heuristic (gaussian), 1 otherwise")
            ->capture_default_str();
        app->add_option("--offset", offset, "polynomial kernel offset")->capture_default_str();
        app->add_option("--degree", degree, "polynomial kernel degree")->capture_default_str();
        app->add_option("--tau", tau, "final regularization: number, 'auto' (bootstrap) or 'ref'")
            ->capture_default_str();
        app->add_option("--s", s, "joint regularization: number, 'auto' (bootstrap) or 'ref'")->capture_default_str();
        app->add_option("--L", L, "slices for the weighted stage")->capture_default_str();
        app->add_option("--L0", L0, "slices among censored observations")->capture_default_str();
        app->add_option("--L1", L1, "slices among events")->capture_default_str();
        if (with_q) app->add_option("--q", q, "final directions: integer or 'auto' (90% rule)")->capture_default_str();
        app->add_option("--m", m, "joint directions: integer or 'auto' (90% rule)")->capture_default_str();
        app->add_option("--threshold", threshold, "eigenvalue share for the automatic rule")->capture_default_str();
        app->add_option("--bandwidth-c0", c0, "bandwidth constant c0 in h = c0 sd n^(-1/(2d))")->capture_default_str();
        app->add_option("--order", order, "smoothing kernel order d (2, 4 or 6)")->capture_default_str();
        app->add_option("--B", B, "bootstrap replicates for automatic tuning")->capture_default_str();
        app->add_option("--seed", seed, "random seed")->capture_default_str();
    }

    FitConfig config(unsigned threads) const {
        FitConfig c;
        const KernelFamily fam = kernel_family_from_string(kernel);
        if (fam == KernelFamily::linear) c.kernel = KernelSpec::linear();
        if (fam == KernelFamily::polynomial) c.kernel = KernelSpec::polynomial(1.0, offset, degree);
        if (fam == KernelFamily::gaussian_rbf) c.kernel = KernelSpec::gaussian_rbf(1.0);
        if (scale == "auto") {
            c.auto_scale = fam == KernelFamily::gaussian_rbf;
        } else {
            try {
                c.kernel.scale = std::stod(scale);
            } catch (const std::exception&) {
                throw InputError("--scale must be a number or 'auto'");
            }
        }
        c.kernel.validate();
        c.tau = parse_regularization(tau, "tau");
        c.s = parse_regularization(s, "s");
        c.L = L;
        c.L0 = L0;
        c.L1 = L1;
        c.q = parse_count(q, "q");
        c.m = parse_count(m, "m");
        c.component_threshold = threshold;
        c.bandwidth_c0 = c0;
        c.smoother_order = order;
        c.bootstrap_replicates = B;
        c.seed = seed;
        c.threads = threads;
        return c;
    }
};

struct DataFlags {
    std::string path;
    std::string coding = "event1";
    std::vector<std::string> exclude;

    void add(CLI::App* app) {
        app->add_option("--data", path, "dataset CSV with header time,status,x1,...")->required();
        app->add_option("--status-coding", coding, "event1 (0/1, 1 = event) or censored1-dead2")
            ->capture_default_str();
        app->add_option("--exclude", exclude, "columns to drop from the covariates")->delimiter(',');
    }

    SurvivalDataset load() const { return read_dataset(path, status_coding_from_string(coding), exclude); }
};

void write_json(const nlohmann::json& j, const std::string& path) {
    if (path.empty() || path == "-") {
        std::cout << j.dump(2) << '\n';
        return;
    }
    std::ofstream os(path);
    if (!os) throw InputError("cannot open '" + path + "' for writing");
    os << j.dump(2) << '\n';
}

/// Covariates from a CSV; time and status columns, if present, are ignored.
MatrixXd read_covariates(const std::string& path, const std::vector<std::string>& exclude) {
    const CsvTable t = read_csv_file(path);
    std::vector<std::size_t> cols;
    for (std::size_t c = 0; c < t.header.size(); ++c) {
        const std::string& h = t.header[c];
        if (h == "time" || h == "status") continue;
        if (std::find(exclude.begin(), exclude.end(), h) != exclude.end()) continue;
        cols.push_back(c);
    }
    MatrixXd X(static_cast<Index>(t.rows.size()), static_cast<Index>(cols.size()));
    for (std::size_t r = 0; r < t.rows.size(); ++r)
        for (std::size_t k = 0; k < cols.size(); ++k) X(static_cast<Index>(r), static_cast<Index>(k)) = t.rows[r][cols[k]];
    return X;
}

MatrixXd select_columns(const MatrixXd& M, const std::vector<int>& cols, const std::string& what) {
    if (cols.empty()) return M;
    MatrixXd out(M.rows(), static_cast<Index>(cols.size()));
    for (std::size_t k = 0; k < cols.size(); ++k) {
        if (cols[k] < 1 || cols[k] > M.cols())
            throw InputError(what + ": column " + std::to_string(cols[k]) + " is out of range 1.." +
                             std::to_string(M.cols()));
        out.col(static_cast<Index>(k)) = M.col(cols[k] - 1);
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"kernsdr: kernel sliced inverse regression for right-censored survival data"};
    app.require_subcommand(1);
    app.set_config("--config", "", "INI/TOML file; options of a subcommand go in its [section] (flags win)");
    app.allow_config_extras(CLI::config_extras_mode::error);
    unsigned threads = 0;
    app.add_option("--threads", threads, "worker threads (default: KERNSDR_THREADS or all cores)");
    bool quiet = false;
    app.add_flag("--quiet", quiet, "suppress warnings");

    // simulate
    auto* sim_cmd = app.add_subcommand("simulate", "draw a training/test set from a simulation model");
    std::string sim_model = "1";
    SimSpec sim_spec;
    std::string sim_prefix = "sim";
    sim_cmd->add_option("--model", sim_model, "model 1-4")->capture_default_str();
    sim_cmd->add_option("--n-train", sim_spec.n_train, "training size")->capture_default_str();
    sim_cmd->add_option("--n-test", sim_spec.n_test, "test size")->capture_default_str();
    sim_cmd->add_option("--p", sim_spec.p, "covariate dimension")->capture_default_str();
    sim_cmd->add_option("--censoring", sim_spec.target_censoring, "target censoring fraction")->capture_default_str();
    sim_cmd->add_option("--seed", sim_spec.seed, "random seed")->capture_default_str();
    sim_cmd->add_option("--out-prefix", sim_prefix, "writes PREFIX_train.csv, PREFIX_test.csv, PREFIX_truth.csv")
        ->capture_default_str();

    // fit
    auto* fit_cmd = app.add_subcommand("fit", "fit a model and write it as JSON");
    FitFlags fit_flags;
    DataFlags fit_data;
    std::string fit_out = "model.json", fit_tuning_out;
    fit_data.add(fit_cmd);
    fit_flags.add(fit_cmd);
    fit_cmd->add_option("--out", fit_out, "model JSON path")->capture_default_str();
    fit_cmd->add_option("--tuning-out", fit_tuning_out, "write bootstrap tuning traces as JSON");

    // transform
    auto* tr_cmd = app.add_subcommand("transform", "score new covariates with a fitted model");
    std::string tr_model, tr_data, tr_out = "-";
    std::vector<std::string> tr_exclude;
    bool tr_joint = false;
    tr_cmd->add_option("--model", tr_model, "model JSON")->required();
    tr_cmd->add_option("--data", tr_data, "CSV of covariates (time/status columns are ignored)")->required();
    tr_cmd->add_option("--exclude", tr_exclude, "columns to drop")->delimiter(',');
    tr_cmd->add_option("--out", tr_out, "scores CSV ('-' = stdout)")->capture_default_str();
    tr_cmd->add_flag("--joint", tr_joint, "score the joint directions instead of the final ones");

    // tune
    auto* tune_cmd = app.add_subcommand("tune", "bootstrap selection of tau (or s)");
    FitFlags tune_flags;
    DataFlags tune_data;
    std::string tune_target = "tau", tune_out = "-";
    tune_data.add(tune_cmd);
    tune_flags.add(tune_cmd);
    tune_cmd->add_option("--target", tune_target, "tau or s")->capture_default_str();
    tune_cmd->add_option("--out", tune_out, "TuningResult JSON ('-' = stdout)")->capture_default_str();

    // evaluate
    auto* ev_cmd = app.add_subcommand("evaluate", "RMAE between two score matrices");
    std::string ev_est, ev_truth, ev_out = "-";
    std::vector<int> ev_est_cols, ev_truth_cols;
    ev_cmd->add_option("--estimated", ev_est, "CSV of estimated scores")->required();
    ev_cmd->add_option("--truth", ev_truth, "CSV of reference scores")->required();
    ev_cmd->add_option("--est-columns", ev_est_cols, "1-based columns of the estimated scores")->delimiter(',');
    ev_cmd->add_option("--truth-columns", ev_truth_cols, "1-based columns of the reference")->delimiter(',');
    ev_cmd->add_option("--out", ev_out, "RMAE JSON ('-' = stdout)")->capture_default_str();

    // km
    auto* km_cmd = app.add_subcommand("km", "Kaplan-Meier curves per group");
    DataFlags km_data;
    std::string km_group, km_out = "-";
    km_cmd->add_option("--data", km_data.path, "CSV with time and status columns")->required();
    km_cmd->add_option("--status-coding", km_data.coding, "event1 or censored1-dead2")->capture_default_str();
    km_cmd->add_option("--group", km_group, "column holding integer group labels (omit for one curve)");
    km_cmd->add_option("--out", km_out, "step-function CSV ('-' = stdout)")->capture_default_str();

    // benchmark
    auto* bench_cmd = app.add_subcommand("benchmark", "Monte Carlo RMAE table for a simulation model");
    FitFlags bench_flags;
    bench_flags.tau = "auto";
    bench_flags.s = "auto";
    std::string bench_model = "1", bench_methods = "rdsir,dsir", bench_q = "1,2", bench_cens = "0,0.2,0.4,0.6";
    std::string bench_csv = "benchmark.csv", bench_table = "-", bench_score = "test";
    SimSpec bench_sim;
    int bench_reps = 30;
    std::uint64_t bench_seed = 0;
    bench_cmd->add_option("--model", bench_model, "model 1-4")->capture_default_str();
    bench_cmd->add_option("--n-train", bench_sim.n_train, "training size")->capture_default_str();
    bench_cmd->add_option("--n-test", bench_sim.n_test, "test size")->capture_default_str();
    bench_cmd->add_option("--p", bench_sim.p, "covariate dimension")->capture_default_str();
    bench_cmd->add_option("--methods", bench_methods, "comma list of rdsir, dsir")->capture_default_str();
    bench_cmd->add_option("--q-values", bench_q, "comma list of direction counts to score")->capture_default_str();
    bench_cmd->add_option("--censoring", bench_cens, "comma list of censoring fractions")->capture_default_str();
    bench_cmd->add_option("--replications", bench_reps, "replicates per cell")->capture_default_str();
    bench_cmd->add_option("--bench-seed", bench_seed, "seed for data generation")->capture_default_str();
    bench_cmd->add_option("--score-set", bench_score, "test or train")->capture_default_str();
    bench_cmd->add_option("--out", bench_csv, "table CSV")->capture_default_str();
    bench_cmd->add_option("--table", bench_table, "aligned text table ('-' = stdout)")->capture_default_str();
    bench_flags.add(bench_cmd, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitInput;
    }
    if (quiet) set_warnings_enabled(false);

    try {
        if (sim_cmd->parsed()) {
            sim_spec.model = sim_model_from_string(sim_model);
            const SimOutput out = generate(sim_spec);
            write_dataset_file(sim_prefix + "_train.csv", out.train);
            write_matrix_csv_file(sim_prefix + "_test.csv", out.test_X, numbered_header("x", out.test_X.cols()));
            write_matrix_csv_file(sim_prefix + "_truth.csv", out.truth_test,
                                  numbered_header("u", out.truth_test.cols()));
            std::cout << "model " << to_string(sim_spec.model) << ": wrote " << sim_prefix << "_train.csv, "
                      << sim_prefix << "_test.csv, " << sim_prefix << "_truth.csv\n"
                      << "c = " << out.c_used << ", censoring achieved (calibration sample) "
                      << out.censoring_achieved << ", observed in training set " << out.censoring_observed << '\n';
        } else if (fit_cmd->parsed()) {
            const SurvivalDataset data = fit_data.load();
            FitReport report;
            const SdrModel model = fit(data, fit_flags.config(threads), &report);
            save_model(fit_out, model);
            std::cout << "wrote " << fit_out << ": q = " << model.q << ", m = " << model.m << ", tau = " << model.tau
                      << ", s = " << model.s << '\n';
            if (!fit_tuning_out.empty()) {
                nlohmann::json j = nlohmann::json::object();
                if (report.tau_tuning) j["tau"] = tuning_to_json(*report.tau_tuning);
                if (report.s_tuning) j["s"] = tuning_to_json(*report.s_tuning);
                write_json(j, fit_tuning_out);
            }
        } else if (tr_cmd->parsed()) {
            const SdrModel model = load_model(tr_model);
            const MatrixXd X = read_covariates(tr_data, tr_exclude);
            const MatrixXd U = tr_joint ? transform_joint(model, X) : transform(model, X);
            const auto header = numbered_header(tr_joint ? "z" : "u", U.cols());
            if (tr_out == "-")
                write_matrix_csv(std::cout, U, header);
            else
                write_matrix_csv_file(tr_out, U, header);
        } else if (tune_cmd->parsed()) {
            const SurvivalDataset data = tune_data.load();
            FitConfig cfg = tune_flags.config(threads);
            TuningResult t;
            if (tune_target == "s") {
                t = tune_joint(data, cfg);
            } else if (tune_target == "tau") {
                const double s = resolve_s(data, cfg, nullptr);
                t = tune(data, cfg, s);
            } else {
                throw InputError("--target must be 'tau' or 's'");
            }
            write_json(tuning_to_json(t), tune_out);
        } else if (ev_cmd->parsed()) {
            const MatrixXd A = select_columns(read_matrix_csv(ev_est), ev_est_cols, "--est-columns");
            const MatrixXd B = select_columns(read_matrix_csv(ev_truth), ev_truth_cols, "--truth-columns");
            write_json(rmae_to_json(rmae(A, B)), ev_out);
        } else if (km_cmd->parsed()) {
            const CsvTable t = read_csv_file(km_data.path);
            const Index gc = km_group.empty() ? -1 : t.column(km_group);
            if (!km_group.empty() && gc < 0) throw InputError("--group: no column named '" + km_group + "'");
            const auto [times, status] = survival_columns(t, status_coding_from_string(km_data.coding));
            std::vector<long> groups(t.rows.size(), 0);
            if (gc >= 0)
                for (std::size_t r = 0; r < t.rows.size(); ++r) groups[r] = std::lround(t.rows[r][static_cast<std::size_t>(gc)]);
            const auto curves = kaplan_meier_by_group(times, status, groups);
            std::ofstream file;
            if (km_out != "-") {
                file.open(km_out);
                if (!file) throw InputError("cannot open '" + km_out + "' for writing");
            }
            std::ostream& os = km_out == "-" ? std::cout : file;
            os << "group,time,survival,at_risk,events\n" << std::setprecision(17);
            for (const auto& [label, steps] : curves) {
                os << label << ",0,1," << std::count(groups.begin(), groups.end(), label) << ",0\n";
                for (const auto& s : steps)
                    os << label << ',' << s.time << ',' << s.survival << ',' << s.at_risk << ',' << s.events << '\n';
            }
        } else if (bench_cmd->parsed()) {
            BenchConfig bc;
            bc.sim = bench_sim;
            bc.sim.model = sim_model_from_string(bench_model);
            bc.methods.clear();
            for (const auto& m : split_list(bench_methods)) bc.methods.push_back(method_from_string(m));
            bc.q_values.clear();
            for (const auto& q : split_list(bench_q)) bc.q_values.push_back(std::stol(q));
            bc.censoring_levels.clear();
            for (const auto& c : split_list(bench_cens)) bc.censoring_levels.push_back(std::stod(c));
            bc.replications = bench_reps;
            bc.seed = bench_seed;
            bc.threads = threads;
            if (bench_score != "test" && bench_score != "train") throw InputError("--score-set must be test or train");
            bc.score_on_train = bench_score == "train";
            bc.fit = bench_flags.config(1);
            set_warnings_enabled(false);
            const BenchTable table = run_benchmark(bc);
            std::ofstream csv(bench_csv);
            if (!csv) throw InputError("cannot open '" + bench_csv + "' for writing");
            write_bench_csv(csv, table);
            if (bench_table == "-") {
                write_bench_text(std::cout, table);
            } else {
                std::ofstream txt(bench_table);
                if (!txt) throw InputError("cannot open '" + bench_table + "' for writing");
                write_bench_text(txt, table);
            }
            if (table.any_failed()) {
                std::cerr << "kernsdr: some benchmark cells failed (all replicates discarded)\n";
                return kExitPartial;
            }
        }
    } catch (const InputError& e) {
        std::cerr << "kernsdr: input error: " << e.what() << '\n';
        return kExitInput;
    } catch (const NumericalError& e) {
        std::cerr << "kernsdr: numerical error: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const std::invalid_argument& e) {
        std::cerr << "kernsdr: input error: malformed number (" << e.what() << ")\n";
        return kExitInput;
    }
    return 0;
}
