#include "cmcfol/io.hpp"

#include <charconv>
#include <fstream>
#include <random>

#include <nlohmann/json.hpp>

namespace cmcfol {

using nlohmann::json;

void validate_config(const RunConfig& cfg) {
    if (cfg.n < 2) throw ConfigError("config: n >= 2 required");
    if (cfg.L_max < 2) throw ConfigError("config: L_max >= 2 required");
    if (cfg.quadrature_exactness < 2 * cfg.L_max + 4)
        throw ConfigError("config: quadrature exactness must be >= 2*L_max + 4");
    if (!(cfg.tol_perp > 0.0) || !(cfg.tol_K > 0.0))
        throw ConfigError("config: tolerances must be positive");
    if (cfg.r_grid.count < 1) throw ConfigError("config: r grid count >= 1 required");
    if (cfg.r_grid.start <= 0.0) throw ConfigError("config: r grid start must be positive");
    if (cfg.r_grid.stop > 0.25) throw ConfigError("config: r grid stop must be <= 0.25");
    if (cfg.r_grid.count > 1 && cfg.r_grid.stop <= cfg.r_grid.start)
        throw ConfigError("config: r grid stop must exceed start");
    if (cfg.r_grid.spacing != "linear" && cfg.r_grid.spacing != "geometric")
        throw ConfigError("config: r grid spacing must be linear or geometric");
    if (cfg.model.type != "euclidean" && cfg.model.type != "bump" && cfg.model.type != "table")
        throw ConfigError("config: unknown model type '" + cfg.model.type + "'");
}

RunConfig config_from_json(const json& j) {
    RunConfig cfg;
    if (j.contains("schema") && j.at("schema").get<std::string>() != kSchemaId)
        throw ConfigError("config: unsupported schema id");
    cfg.n = j.value("n", cfg.n);
    cfg.L_max = j.value("L_max", cfg.L_max);
    cfg.quadrature_exactness = j.value("quadrature_exactness", cfg.quadrature_exactness);
    cfg.tol_perp = j.value("tol_perp", cfg.tol_perp);
    cfg.tol_K = j.value("tol_K", cfg.tol_K);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.out_dir = j.value("out_dir", cfg.out_dir);
    cfg.pin_tau = j.value("pin_tau", cfg.pin_tau);
    if (j.contains("model")) {
        const json& m = j.at("model");
        cfg.model.type = m.value("type", cfg.model.type);
        cfg.model.a = m.value("a", cfg.model.a);
        if (m.contains("Q")) {
            const auto rows = m.at("Q");
            cfg.model.Q.resize(rows.size(), rows.empty() ? 0 : rows[0].size());
            for (std::size_t i = 0; i < rows.size(); ++i)
                for (std::size_t k = 0; k < rows[i].size(); ++k)
                    cfg.model.Q(i, k) = rows[i][k].get<double>();
        }
        cfg.model.table_path = m.value("path", cfg.model.table_path);
    }
    if (j.contains("r_grid")) {
        const json& g = j.at("r_grid");
        cfg.r_grid.start = g.value("start", cfg.r_grid.start);
        cfg.r_grid.stop = g.value("stop", cfg.r_grid.stop);
        cfg.r_grid.count = g.value("count", cfg.r_grid.count);
        cfg.r_grid.spacing = g.value("spacing", cfg.r_grid.spacing);
    }
    validate_config(cfg);
    return cfg;
}

json config_to_json(const RunConfig& cfg) {
    json m;
    m["type"] = cfg.model.type;
    if (cfg.model.type == "bump") {
        m["a"] = cfg.model.a;
        json q = json::array();
        for (int i = 0; i < cfg.model.Q.rows(); ++i) {
            json row = json::array();
            for (int k = 0; k < cfg.model.Q.cols(); ++k) row.push_back(cfg.model.Q(i, k));
            q.push_back(row);
        }
        m["Q"] = q;
    }
    if (cfg.model.type == "table") m["path"] = cfg.model.table_path;
    return json{{"schema", kSchemaId},
                {"n", cfg.n},
                {"model", m},
                {"L_max", cfg.L_max},
                {"quadrature_exactness", cfg.quadrature_exactness},
                {"tol_perp", cfg.tol_perp},
                {"tol_K", cfg.tol_K},
                {"r_grid",
                 {{"start", cfg.r_grid.start},
                  {"stop", cfg.r_grid.stop},
                  {"count", cfg.r_grid.count},
                  {"spacing", cfg.r_grid.spacing}}},
                {"seed", cfg.seed},
                {"out_dir", cfg.out_dir},
                {"pin_tau", cfg.pin_tau}};
}

RunConfig load_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path.string());
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ConfigError("config: bad JSON in " + path.string() + ": " + e.what());
    }
    return config_from_json(j);
}

std::vector<double> make_r_grid(const RGridSpec& g) {
    std::vector<double> out;
    out.reserve(g.count);
    if (g.count == 1) {
        out.push_back(g.start);
        return out;
    }
    for (int i = 0; i < g.count; ++i) {
        const double f = static_cast<double>(i) / (g.count - 1);
        if (g.spacing == "geometric")
            out.push_back(g.start * std::pow(g.stop / g.start, f));
        else
            out.push_back(g.start + f * (g.stop - g.start));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Jet tables.

namespace {

void read_tensor(const json& j, const char* key, std::vector<double>& dst, int n, int rank) {
    if (!j.contains(key)) return;
    std::size_t expect = 1;
    for (int i = 0; i < rank; ++i) expect *= n;
    // accept either a flat array or nested arrays
    const json& t = j.at(key);
    std::vector<double> flat;
    auto rec = [&](auto&& self, const json& node) -> void {
        if (node.is_array()) {
            for (const auto& c : node) self(self, c);
        } else {
            flat.push_back(node.get<double>());
        }
    };
    rec(rec, t);
    if (flat.size() != expect)
        throw ValidationError(std::string("jet table: tensor '") + key + "' has " +
                              std::to_string(flat.size()) + " entries, expected " +
                              std::to_string(expect));
    dst = std::move(flat);
}

json tensor_to_json(const std::vector<double>& v) {
    json out = json::array();
    for (double x : v) out.push_back(x);
    return out;
}

}  // namespace

BoundaryJet jet_from_json(const json& j, int n) {
    BoundaryJet jet(n);
    read_tensor(j, "h", jet.h, n, 2);
    read_tensor(j, "h1", jet.h1, n, 3);
    read_tensor(j, "h2", jet.h2, n, 4);
    read_tensor(j, "h3", jet.h3, n, 5);
    read_tensor(j, "Rtt", jet.Rtt, n, 2);
    read_tensor(j, "Rtt_k", jet.Rtt_k, n, 3);
    read_tensor(j, "Rtt_t", jet.Rtt_t, n, 2);
    read_tensor(j, "Rtt_kl", jet.Rtt_kl, n, 4);
    read_tensor(j, "Rtt_tk", jet.Rtt_tk, n, 3);
    read_tensor(j, "Rtt_tt", jet.Rtt_tt, n, 2);
    read_tensor(j, "Rb", jet.Rb, n, 4);
    read_tensor(j, "Rb_m", jet.Rb_m, n, 5);
    read_tensor(j, "Rb_mp", jet.Rb_mp, n, 6);
    validate_jet(jet, detail::default_jet_tol(jet));
    return jet;
}

json jet_to_json(const BoundaryJet& jet) {
    return json{{"n", jet.n},
                {"h", tensor_to_json(jet.h)},
                {"h1", tensor_to_json(jet.h1)},
                {"h2", tensor_to_json(jet.h2)},
                {"h3", tensor_to_json(jet.h3)},
                {"Rtt", tensor_to_json(jet.Rtt)},
                {"Rtt_k", tensor_to_json(jet.Rtt_k)},
                {"Rtt_t", tensor_to_json(jet.Rtt_t)},
                {"Rtt_kl", tensor_to_json(jet.Rtt_kl)},
                {"Rtt_tk", tensor_to_json(jet.Rtt_tk)},
                {"Rtt_tt", tensor_to_json(jet.Rtt_tt)},
                {"Rb", tensor_to_json(jet.Rb)},
                {"Rb_m", tensor_to_json(jet.Rb_m)},
                {"Rb_mp", tensor_to_json(jet.Rb_mp)}};
}

MetricModel model_from_config(const RunConfig& cfg) {
    if (cfg.model.type == "euclidean") return make_euclidean_model(cfg.n);
    if (cfg.model.type == "bump") {
        Mat Q = cfg.model.Q;
        if (Q.size() == 0) Q = Mat::Identity(cfg.n, cfg.n);
        if (Q.rows() != cfg.n || Q.cols() != cfg.n)
            throw ConfigError("config: bump Q must be n x n");
        return make_bump_model(cfg.n, cfg.model.a, Q);
    }
    // table
    std::ifstream in(cfg.model.table_path);
    if (!in) throw ConfigError("config: cannot open jet table " + cfg.model.table_path);
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config: bad jet table JSON: ") + e.what());
    }
    const int n = j.value("n", cfg.n);
    if (n != cfg.n) throw ConfigError("config: jet table dimension does not match n");
    BoundaryJet base = jet_from_json(j, n);
    MetricModel model = make_table_model(base, j.value("domain_radius", 0.5));
    validate_model(model);
    return model;
}

SolverOptions solver_options_from_config(const RunConfig& cfg) {
    SolverOptions opts;
    opts.tol_perp = cfg.tol_perp;
    opts.tol_K = cfg.tol_K;
    opts.pin_tau = cfg.pin_tau;
    return opts;
}

// ---------------------------------------------------------------------------
// Output.

std::string format_double(double x) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

void atomic_write_file(const std::filesystem::path& path, const std::string& content) {
    namespace fs = std::filesystem;
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp.string());
        out << content;
    }
    fs::rename(tmp, path);
}

void write_json_file(const std::filesystem::path& path, const json& doc) {
    atomic_write_file(path, doc.dump(2) + "\n");
}

json leaf_to_json(const LeafSolution& leaf) {
    json tau = json::array();
    for (int i = 0; i < leaf.tau.size(); ++i) tau.push_back(leaf.tau[i]);
    return json{{"r", leaf.r},
                {"tau", tau},
                {"tau_norm", leaf.tau.size() ? leaf.tau.norm() : 0.0},
                {"kperp_residual", leaf.kperp_residual},
                {"kernel_residual", leaf.kernel_residual},
                {"projection_residual", leaf.projection_residual},
                {"newton_iters", leaf.newton_iters},
                {"converged", leaf.converged}};
}

json diagnostics_to_json(const FoliationDiagnostics& d) {
    json out{{"det_min", d.det_min},
             {"free_boundary_max_angle", d.free_boundary_max_angle},
             {"tau_max", d.tau_max},
             {"det_samples", d.det_samples},
             {"valid", d.valid}};
    if (std::isfinite(d.tau_slope_fit)) {
        out["tau_slope_fit"] = d.tau_slope_fit;
        out["tau_identically_zero"] = false;
    } else {
        // tau below solver noise on every leaf; the O(r^2) bound holds vacuously
        out["tau_slope_fit"] = nullptr;
        out["tau_identically_zero"] = true;
    }
    return out;
}

std::string leaves_to_csv(const std::vector<LeafSolution>& leaves) {
    std::string out = "r";
    const int n = leaves.empty() ? 0 : static_cast<int>(leaves.front().tau.size());
    for (int i = 0; i < n; ++i) out += ",tau_" + std::to_string(i + 1);
    out += ",kperp_residual,kernel_residual,newton_iters,converged\n";
    for (const auto& l : leaves) {
        out += format_double(l.r);
        for (int i = 0; i < n; ++i) out += "," + format_double(l.tau[i]);
        out += "," + format_double(l.kperp_residual) + "," + format_double(l.kernel_residual) +
               "," + std::to_string(l.newton_iters) + "," + (l.converged ? "1" : "0") + "\n";
    }
    return out;
}

std::string point_cloud_csv(const FoliationResult& result, int density) {
    const int n = result.ctx->n();
    std::string out = "r";
    for (int i = 0; i < n; ++i) out += ",x_" + std::to_string(i + 1);
    for (int i = 0; i < n; ++i) out += ",ups_" + std::to_string(i + 1);
    out += ",ups_t\n";

    const int nrad = std::max(2, density);
    const int ndir = std::max(4, 4 * density);
    std::vector<Vec> xs;
    xs.push_back(Vec::Zero(n));
    for (int a = 1; a <= nrad; ++a) {
        const double rho = 0.95 * a / nrad;
        if (n == 2) {
            for (int b = 0; b < ndir; ++b) {
                const double ang = 2.0 * M_PI * b / ndir;
                Vec x(2);
                x << rho * std::cos(ang), rho * std::sin(ang);
                xs.push_back(x);
            }
        } else {
            QuadratureRule dirs = sphere_rule(n - 1, 5);
            for (int b = 0; b < dirs.point_count(); ++b)
                xs.push_back(rho * dirs.nodes.row(b).transpose());
        }
    }

    for (const auto& leaf : result.leaves) {
        if (!leaf.converged) continue;
        for (const auto& x : xs) {
            Vec u = leaf_chart_point(leaf, result.ctx, x);
            out += format_double(leaf.r);
            for (int i = 0; i < n; ++i) out += "," + format_double(x[i]);
            for (int i = 0; i <= n; ++i) out += "," + format_double(u[i]);
            out += "\n";
        }
    }
    return out;
}

}  // namespace cmcfol
