#include "wotkit/io.hpp"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "wotkit/error.hpp"

namespace wotkit {

using nlohmann::json;

namespace {

std::string resolve(const std::string& base_dir, const std::string& path) {
    const std::filesystem::path p(path);
    if (p.is_absolute()) return path;
    return (std::filesystem::path(base_dir) / p).string();
}

DiscreteMeasure measure_from_json(const json& j, const std::string& base_dir, const char* name) {
    if (!j.is_object()) throw ParseError(std::string(name) + ": expected an object");
    if (j.contains("csv")) return load_measure_csv(resolve(base_dir, j.at("csv").get<std::string>()));
    if (!j.contains("points")) throw ParseError(std::string(name) + ": needs 'points' or 'csv'");
    const auto& pts = j.at("points");
    if (!pts.is_array() || pts.empty()) throw ParseError(std::string(name) + ": 'points' must be a nonempty array");
    std::size_t dim = 1;
    std::vector<double> coords;
    if (pts.front().is_array()) {
        dim = pts.front().size();
        for (const auto& p : pts) {
            if (!p.is_array() || p.size() != dim) throw ParseError(std::string(name) + ": ragged points");
            for (const auto& c : p) coords.push_back(c.get<double>());
        }
    } else {
        for (const auto& c : pts) coords.push_back(c.get<double>());
    }
    const std::size_t n = coords.size() / dim;
    std::vector<double> w = j.contains("weights") ? j.at("weights").get<std::vector<double>>()
                                                  : std::vector<double>(n, 1.0);
    if (w.size() != n) throw ParseError(std::string(name) + ": weights and points differ in length");
    return DiscreteMeasure(dim, std::move(coords), std::move(w));
}

Penalty penalty_from_json(const json& j, const char* name) {
    const std::string kind = j.value("kind", "quadratic");
    if (kind != "quadratic") {
        throw ParseError(std::string(name) + ": only 'quadratic' penalties can be loaded from JSON");
    }
    return Penalty::quadratic(j.value("scale", 1.0));
}

Tensor3 tensor_from_json(const json& j, const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                         const std::string& base_dir, const char* name) {
    if (j.is_null()) return empty_tensor(mu, nu);
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "none") return empty_tensor(mu, nu);
        if (s == "martingale") return martingale_tensor(mu, nu);
        if (s == "barycentric") return barycentric_tensor(mu, nu);
        throw ParseError(std::string(name) + ": unknown built-in tensor '" + s + "'");
    }
    const std::size_t nx = mu.size(), ny = nu.size();
    if (j.contains("values")) {
        const auto shape = j.at("shape").get<std::vector<std::size_t>>();
        if (shape.size() != 3 || shape[0] != nx || shape[1] != ny) {
            throw ParseError(std::string(name) + ": shape must be [n_x, n_y, depth]");
        }
        const auto vals = j.at("values").get<std::vector<double>>();
        Tensor3 t(nx, ny, shape[2]);
        if (vals.size() != t.data().size()) throw ParseError(std::string(name) + ": wrong number of values");
        t.data() = vals;
        return t;
    }
    const std::size_t depth = j.at("depth").get<std::size_t>();
    if (j.contains("csv")) return load_tensor_csv(resolve(base_dir, j.at("csv").get<std::string>()), nx, ny, depth);
    if (j.contains("binary")) {
        return load_tensor_binary(resolve(base_dir, j.at("binary").get<std::string>()), nx, ny, depth);
    }
    throw ParseError(std::string(name) + ": expected a built-in name, 'values', 'csv' or 'binary'");
}

Matrix cost_from_json(const json& j, const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                      const std::string& base_dir) {
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "squared_euclidean") return squared_distance_cost(mu, nu);
        if (s == "abs" || s == "l1") {
            return cost_from(mu, nu, [](std::span<const double> x, std::span<const double> y) {
                double t = 0.0;
                for (std::size_t k = 0; k < x.size(); ++k) t += std::abs(x[k] - y[k]);
                return t;
            });
        }
        throw ParseError("cost: unknown built-in '" + s + "'");
    }
    Matrix m;
    if (j.contains("matrix")) {
        const auto rows = j.at("matrix").get<std::vector<std::vector<double>>>();
        m = Matrix(rows.size(), rows.empty() ? 0 : rows.front().size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].size() != m.cols()) throw ParseError("cost: ragged matrix");
            for (std::size_t k = 0; k < m.cols(); ++k) m(i, k) = rows[i][k];
        }
    } else if (j.contains("csv")) {
        std::ifstream in(resolve(base_dir, j.at("csv").get<std::string>()));
        if (!in) throw ParseError("cost: cannot open csv");
        m = read_matrix_csv(in);
    } else {
        throw ParseError("cost: expected a built-in name, 'matrix' or 'csv'");
    }
    if (m.rows() != mu.size() || m.cols() != nu.size()) throw ParseError("cost: shape does not match measures");
    return m;
}

}  // namespace

ProblemSpec problem_from_json(const json& doc, const std::string& base_dir) {
    try {
        ProblemSpec spec;
        spec.mu = measure_from_json(doc.at("mu"), base_dir, "mu");
        spec.nu = measure_from_json(doc.at("nu"), base_dir, "nu");
        spec.cost = cost_from_json(doc.value("cost", json("squared_euclidean")), spec.mu, spec.nu, base_dir);
        spec.f = tensor_from_json(doc.value("f", json()), spec.mu, spec.nu, base_dir, "f");
        spec.g = tensor_from_json(doc.value("g", json()), spec.mu, spec.nu, base_dir, "g");
        if (doc.contains("theta")) spec.theta = penalty_from_json(doc.at("theta"), "theta");
        if (doc.contains("theta_tilde")) spec.theta_tilde = penalty_from_json(doc.at("theta_tilde"), "theta_tilde");
        spec.epsilon = doc.value("epsilon", 1e-2);
        if (doc.contains("zeta") && !doc.at("zeta").is_null()) spec.zeta = doc.at("zeta").get<double>();
        spec.validate();
        return spec;
    } catch (const json::exception& e) {
        throw ParseError(std::string("problem JSON: ") + e.what());
    }
}

ProblemSpec load_problem_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    return problem_from_json(doc, std::filesystem::path(path).parent_path().string());
}

Tensor3 load_tensor_binary(const std::string& path, std::size_t rows, std::size_t cols, std::size_t depth) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path);
    Tensor3 t(rows, cols, depth);
    static_assert(sizeof(double) == 8);
    std::vector<unsigned char> raw(t.data().size() * 8);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (in.gcount() != static_cast<std::streamsize>(raw.size())) {
        throw ParseError(path + ": expected " + std::to_string(raw.size()) + " bytes");
    }
    if (in.peek() != std::char_traits<char>::eof()) throw ParseError(path + ": trailing bytes after tensor");
    for (std::size_t k = 0; k < t.data().size(); ++k) {
        std::uint64_t bits = 0;
        for (int b = 7; b >= 0; --b) bits = (bits << 8) | raw[k * 8 + static_cast<std::size_t>(b)];
        std::memcpy(&t.data()[k], &bits, 8);
    }
    return t;
}

Tensor3 read_tensor_csv(std::istream& in, std::size_t rows, std::size_t cols, std::size_t depth) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError("tensor CSV is empty (header line required)");
    Tensor3 t(rows, cols, depth);
    std::size_t cell = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        if (cell >= rows * cols) throw ParseError("tensor CSV has more rows than declared");
        std::stringstream ss(line);
        std::string v;
        std::size_t k = 0;
        while (std::getline(ss, v, ',')) {
            if (k >= depth) throw ParseError("tensor CSV row " + std::to_string(cell) + " has too many values");
            try {
                t.data()[cell * depth + k] = std::stod(v);
            } catch (const std::exception&) {
                throw ParseError("tensor CSV: not a number: '" + v + "'");
            }
            ++k;
        }
        if (k != depth) throw ParseError("tensor CSV row " + std::to_string(cell) + " has too few values");
        ++cell;
    }
    if (cell != rows * cols) throw ParseError("tensor CSV has fewer rows than declared");
    return t;
}

Tensor3 load_tensor_csv(const std::string& path, std::size_t rows, std::size_t cols, std::size_t depth) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path);
    return read_tensor_csv(in, rows, cols, depth);
}

void write_coupling_csv(std::ostream& out, const Coupling& pi) {
    std::ostringstream buf;
    buf.precision(17);
    for (std::size_t i = 0; i < pi.rows(); ++i) {
        auto r = pi.matrix().row(i);
        for (std::size_t j = 0; j < r.size(); ++j) {
            if (j) buf << ',';
            buf << r[j];
        }
        buf << '\n';
    }
    out << buf.str();
}

Matrix read_matrix_csv(std::istream& in) {
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string v;
        std::vector<double> row;
        while (std::getline(ss, v, ',')) {
            try {
                row.push_back(std::stod(v));
            } catch (const std::exception&) {
                throw ParseError("matrix CSV: not a number: '" + v + "'");
            }
        }
        if (!rows.empty() && row.size() != rows.front().size()) throw ParseError("matrix CSV: ragged rows");
        rows.push_back(std::move(row));
    }
    Matrix m(rows.size(), rows.empty() ? 0 : rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) m(i, j) = rows[i][j];
    }
    return m;
}

json to_json(const PrimalValue& v) {
    return {{"linear", v.linear},
            {"soft", v.soft},
            {"hard_penalty", v.hard_penalty},
            {"entropy", v.entropy},
            {"total", v.total}};
}

json to_json(const OrderReport& r) {
    return {{"convex_order", r.convex_order},
            {"mean_gap", r.mean_gap},
            {"worst_test_point", r.worst_test_point},
            {"margin", r.margin}};
}

json report_json(const SolveReport& rep, const ProblemSpec& spec) {
    json j;
    j["status"] = to_string(rep.status);
    j["epsilon"] = spec.epsilon;
    j["zeta"] = spec.zeta ? json(*spec.zeta) : json(nullptr);
    j["iterations"] = rep.iterations;
    j["warmup_iterations"] = rep.warmup_iterations;
    j["marginal_residual"] = rep.marginal_residual;
    j["moment_residual"] = rep.moment_residual;
    j["stationarity"] = rep.stationarity;
    j["duality_gap"] = rep.duality_gap;
    j["dual_value"] = rep.dual_value;
    j["primal"] = to_json(rep.primal_breakdown);
    j["alpha_sup_norm"] = rep.alpha_sup_norm;
    j["tau"] = rep.tau;
    j["step_too_large_events"] = rep.step_too_large_events;
    j["warnings"] = rep.warnings;
    return j;
}

}  // namespace wotkit
