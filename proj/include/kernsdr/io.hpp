#pragma once

#include "kernsdr/assoc_eval.hpp"
#include "kernsdr/rdsir_stages.hpp"
#include "kernsdr/tuning.hpp"

#include <json.hpp>

#include <charconv>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

namespace kernsdr {

// =============================================================================
// CSV
// =============================================================================

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    Index column(const std::string& name) const {
        for (std::size_t c = 0; c < header.size(); ++c)
            if (header[c] == name) return static_cast<Index>(c);
        return -1;
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (char ch : line) {
        if (ch == '"') {
            quoted = !quoted;
        } else if (ch == ',' && !quoted) {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(trim(cur));
    return out;
}

inline double parse_number(const std::string& token, const std::string& where) {
    double v = 0.0;
    const char* first = token.data();
    const char* last = token.data() + token.size();
    if (!token.empty() && token[0] == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || token.empty())
        throw InputError(where + ": '" + token + "' is not a number");
    if (!std::isfinite(v)) throw InputError(where + ": non-finite value '" + token + "'");
    return v;
}

}  // namespace detail

/// Parses a numeric CSV with a header row.
inline CsvTable read_csv(std::istream& in, const std::string& name = "csv") {
    CsvTable t;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (detail::trim(line).empty()) continue;
        if (t.header.empty()) {
            t.header = detail::split_csv_line(line);
            continue;
        }
        const auto tokens = detail::split_csv_line(line);
        if (tokens.size() != t.header.size())
            throw InputError(name + " line " + std::to_string(lineno) + ": expected " +
                             std::to_string(t.header.size()) + " fields, found " + std::to_string(tokens.size()));
        std::vector<double> row;
        row.reserve(tokens.size());
        for (std::size_t c = 0; c < tokens.size(); ++c)
            row.push_back(detail::parse_number(tokens[c], name + " line " + std::to_string(lineno) + ", column '" +
                                                                t.header[c] + "'"));
        t.rows.push_back(std::move(row));
    }
    if (t.header.empty()) throw InputError(name + ": file is empty (a header row is required)");
    return t;
}

inline CsvTable read_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open '" + path + "' for reading");
    return read_csv(in, path);
}

inline MatrixXd csv_matrix(const CsvTable& t) {
    MatrixXd M(static_cast<Index>(t.rows.size()), static_cast<Index>(t.header.size()));
    for (std::size_t r = 0; r < t.rows.size(); ++r)
        for (std::size_t c = 0; c < t.header.size(); ++c) M(static_cast<Index>(r), static_cast<Index>(c)) = t.rows[r][c];
    return M;
}

inline MatrixXd read_matrix_csv(const std::string& path) { return csv_matrix(read_csv_file(path)); }

inline void write_matrix_csv(std::ostream& os, const MatrixXd& M, const std::vector<std::string>& header) {
    if (static_cast<Index>(header.size()) != M.cols()) throw InputError("write_matrix_csv: header size mismatch");
    for (std::size_t c = 0; c < header.size(); ++c) os << (c ? "," : "") << header[c];
    os << '\n' << std::setprecision(17);
    for (Index r = 0; r < M.rows(); ++r) {
        for (Index c = 0; c < M.cols(); ++c) os << (c ? "," : "") << M(r, c);
        os << '\n';
    }
}

inline void write_matrix_csv_file(const std::string& path, const MatrixXd& M, const std::vector<std::string>& header) {
    std::ofstream os(path);
    if (!os) throw InputError("cannot open '" + path + "' for writing");
    write_matrix_csv(os, M, header);
}

inline std::vector<std::string> numbered_header(const std::string& prefix, Index count) {
    std::vector<std::string> h;
    for (Index j = 1; j <= count; ++j) h.push_back(prefix + std::to_string(j));
    return h;
}

// =============================================================================
// Datasets
// =============================================================================

enum class StatusCoding {
    event1,           ///< 0 = censored, 1 = event
    censored1_dead2,  ///< 1 = censored, 2 = dead
};

inline StatusCoding status_coding_from_string(const std::string& s) {
    if (s == "event1" || s == "01" || s == "default") return StatusCoding::event1;
    if (s == "censored1-dead2") return StatusCoding::censored1_dead2;
    throw InputError("unknown status coding '" + s + "' (expected event1 or censored1-dead2)");
}

/// Time and 0/1 status columns of a table, with the status remapped per `coding`.
inline std::pair<VectorXd, VectorXi> survival_columns(const CsvTable& t, StatusCoding coding = StatusCoding::event1) {
    const Index tc = t.column("time"), sc = t.column("status");
    if (tc < 0 || sc < 0) throw InputError("dataset: header must contain 'time' and 'status' columns");
    const auto n = static_cast<Index>(t.rows.size());
    VectorXd times(n);
    VectorXi status(n);
    for (Index i = 0; i < n; ++i) {
        const auto& row = t.rows[static_cast<std::size_t>(i)];
        times(i) = row[static_cast<std::size_t>(tc)];
        if (!(times(i) > 0.0))
            throw InputError("dataset row " + std::to_string(i + 1) + ": time must be positive");
        const double s = row[static_cast<std::size_t>(sc)];
        int code = -1;
        if (coding == StatusCoding::event1) {
            if (s == 0.0 || s == 1.0) code = static_cast<int>(s);
        } else {
            if (s == 1.0) code = 0;
            if (s == 2.0) code = 1;
        }
        if (code < 0)
            throw InputError("dataset row " + std::to_string(i + 1) + ": status value " + std::to_string(s) +
                             " is not valid for the selected status coding");
        status(i) = code;
    }
    return {times, status};
}

/// Dataset from a table with columns time, status and covariates. Covariates
/// are every other column except those listed in `exclude`.
inline SurvivalDataset dataset_from_table(const CsvTable& t, StatusCoding coding = StatusCoding::event1,
                                          const std::vector<std::string>& exclude = {}) {
    auto [times, status] = survival_columns(t, coding);
    const Index tc = t.column("time"), sc = t.column("status");
    std::vector<Index> xcols;
    for (std::size_t c = 0; c < t.header.size(); ++c) {
        const auto ci = static_cast<Index>(c);
        if (ci == tc || ci == sc) continue;
        if (std::find(exclude.begin(), exclude.end(), t.header[c]) != exclude.end()) continue;
        xcols.push_back(ci);
    }
    if (xcols.empty()) throw InputError("dataset: no covariate columns");
    SurvivalDataset d;
    d.times = std::move(times);
    d.status = std::move(status);
    d.X.resize(d.times.size(), static_cast<Index>(xcols.size()));
    for (Index i = 0; i < d.X.rows(); ++i)
        for (std::size_t k = 0; k < xcols.size(); ++k)
            d.X(i, static_cast<Index>(k)) = t.rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(xcols[k])];
    d.validate();
    return d;
}

inline SurvivalDataset read_dataset(const std::string& path, StatusCoding coding = StatusCoding::event1,
                                    const std::vector<std::string>& exclude = {}) {
    return dataset_from_table(read_csv_file(path), coding, exclude);
}

inline void write_dataset(std::ostream& os, const SurvivalDataset& d) {
    os << "time,status";
    for (Index j = 1; j <= d.dimension(); ++j) os << ",x" << j;
    os << '\n' << std::setprecision(17);
    for (Index i = 0; i < d.size(); ++i) {
        os << d.times(i) << ',' << d.status(i);
        for (Index j = 0; j < d.dimension(); ++j) os << ',' << d.X(i, j);
        os << '\n';
    }
}

inline void write_dataset_file(const std::string& path, const SurvivalDataset& d) {
    std::ofstream os(path);
    if (!os) throw InputError("cannot open '" + path + "' for writing");
    write_dataset(os, d);
}

// =============================================================================
// JSON
// =============================================================================

inline constexpr const char* kModelVersion = "kernsdr-model/1";

namespace detail {

inline nlohmann::json matrix_json(const MatrixXd& M) {
    nlohmann::json rows = nlohmann::json::array();
    for (Index r = 0; r < M.rows(); ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (Index c = 0; c < M.cols(); ++c) row.push_back(M(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline MatrixXd json_matrix(const nlohmann::json& j, Index cols_if_empty = 0) {
    if (!j.is_array()) throw InputError("model file: expected a matrix (array of rows)");
    const auto rows = static_cast<Index>(j.size());
    const Index cols = rows ? static_cast<Index>(j[0].size()) : cols_if_empty;
    MatrixXd M(rows, cols);
    for (Index r = 0; r < rows; ++r) {
        if (static_cast<Index>(j[static_cast<std::size_t>(r)].size()) != cols)
            throw InputError("model file: ragged matrix");
        for (Index c = 0; c < cols; ++c) M(r, c) = j[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)].get<double>();
    }
    return M;
}

}  // namespace detail

inline nlohmann::json kernel_to_json(const KernelSpec& k) {
    return {{"family", to_string(k.family)}, {"scale", k.scale}, {"offset", k.offset}, {"degree", k.degree}};
}

inline KernelSpec kernel_from_json(const nlohmann::json& j) {
    KernelSpec k;
    k.family = kernel_family_from_string(j.at("family").get<std::string>());
    k.scale = j.value("scale", 1.0);
    k.offset = j.value("offset", 1.0);
    k.degree = j.value("degree", 2);
    k.validate();
    return k;
}

inline nlohmann::json model_to_json(const SdrModel& m) {
    nlohmann::json j;
    j["version"] = kModelVersion;
    j["kernel"] = kernel_to_json(m.kernel);
    j["X_train"] = detail::matrix_json(m.X_train);
    j["row_means"] = std::vector<double>(m.row_means.data(), m.row_means.data() + m.row_means.size());
    j["grand_mean"] = m.grand_mean;
    j["alphas_joint"] = detail::matrix_json(m.alphas_joint);
    j["alphas"] = detail::matrix_json(m.alphas);
    j["eigenvalues_joint"] = m.eigenvalues_joint;
    j["eigenvalues"] = m.eigenvalues;
    j["tau"] = m.tau;
    j["s"] = m.s;
    j["L"] = m.L;
    j["L0"] = m.L0;
    j["L1"] = m.L1;
    j["m"] = m.m;
    j["q"] = m.q;
    return j;
}

inline SdrModel model_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("version")) throw InputError("model file: missing version field");
    const std::string version = j.at("version").get<std::string>();
    if (version != kModelVersion)
        throw InputError("model file: version '" + version + "' is not supported (expected '" + kModelVersion +
                         "'); refit the model with this release");
    try {
        SdrModel m;
        m.kernel = kernel_from_json(j.at("kernel"));
        m.X_train = detail::json_matrix(j.at("X_train"));
        const auto rm = j.at("row_means").get<std::vector<double>>();
        m.row_means = Eigen::Map<const VectorXd>(rm.data(), static_cast<Index>(rm.size()));
        m.grand_mean = j.at("grand_mean").get<double>();
        m.alphas_joint = detail::json_matrix(j.at("alphas_joint"));
        m.alphas = detail::json_matrix(j.at("alphas"));
        m.eigenvalues_joint = j.at("eigenvalues_joint").get<std::vector<double>>();
        m.eigenvalues = j.at("eigenvalues").get<std::vector<double>>();
        m.tau = j.at("tau").get<double>();
        m.s = j.at("s").get<double>();
        m.L = j.at("L").get<int>();
        m.L0 = j.at("L0").get<int>();
        m.L1 = j.at("L1").get<int>();
        m.m = j.at("m").get<Index>();
        m.q = j.at("q").get<Index>();
        const Index n = m.X_train.rows();
        if (m.row_means.size() != n || m.alphas.rows() != n || m.alphas_joint.rows() != n || m.alphas.cols() != m.q)
            throw InputError("model file: inconsistent dimensions");
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("model file: ") + e.what());
    }
}

inline void save_model(const std::string& path, const SdrModel& m) {
    std::ofstream os(path);
    if (!os) throw InputError("cannot open '" + path + "' for writing");
    os << std::setprecision(17) << model_to_json(m).dump(1) << '\n';
}

inline SdrModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open model file '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw InputError("model file '" + path + "' is not valid JSON: " + e.what());
    }
    return model_from_json(j);
}

inline nlohmann::json tuning_to_json(const TuningResult& t) {
    return {{"grid", t.grid},
            {"variance_term", t.variance_term},
            {"bias_term", t.bias_term},
            {"loss", t.loss},
            {"selected", t.selected},
            {"tau0", t.tau0},
            {"B", t.B},
            {"used_replicates", t.used_replicates},
            {"discarded_replicates", t.discarded_replicates},
            {"directions", t.directions}};
}

inline nlohmann::json rmae_to_json(const RmaeResult& r) {
    return {{"value", r.value},
            {"alpha", std::vector<double>(r.alpha.data(), r.alpha.data() + r.alpha.size())},
            {"beta", std::vector<double>(r.beta.data(), r.beta.data() + r.beta.size())},
            {"iterations", r.iterations},
            {"converged", r.converged}};
}

}  // namespace kernsdr
