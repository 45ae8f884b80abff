#pragma once

// Run configuration, report serialization, and file output. JSON for config
// and reports, CSV for tabular/plot data; schema id "cmcfoliate/1". Numeric
// fields are written as shortest round-trip decimals; files are written
// atomically (temp + rename).

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "cmcfol/solver.hpp"

namespace cmcfol {

inline constexpr const char* kSchemaId = "cmcfoliate/1";

struct RGridSpec {
    double start = 0.02;
    double stop = 0.2;
    int count = 8;
    std::string spacing = "geometric";  // or "linear"
};

struct ModelSpec {
    std::string type = "bump";  // euclidean | bump | table
    double a = 1.0;
    Mat Q;                      // bump only
    std::string table_path;     // table only
};

struct RunConfig {
    int n = 2;
    ModelSpec model;
    int L_max = 8;
    int quadrature_exactness = 24;
    double tol_perp = 1e-8;
    double tol_K = 1e-7;
    RGridSpec r_grid;
    std::uint64_t seed = 12345;
    std::string out_dir = "out";
    bool pin_tau = false;
};

void validate_config(const RunConfig& cfg);
RunConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const RunConfig& cfg);
RunConfig load_config_file(const std::filesystem::path& path);

std::vector<double> make_r_grid(const RGridSpec& g);

/// Builds the model named by the config; table models read the jet file.
MetricModel model_from_config(const RunConfig& cfg);

/// Jet table document -> base jet (missing tensors are zero).
BoundaryJet jet_from_json(const nlohmann::json& j, int n);
nlohmann::json jet_to_json(const BoundaryJet& jet);

SolverOptions solver_options_from_config(const RunConfig& cfg);

/// Shortest round-trip decimal representation (17 significant digits max).
std::string format_double(double x);

void atomic_write_file(const std::filesystem::path& path, const std::string& content);
void write_json_file(const std::filesystem::path& path, const nlohmann::json& doc);

// Report pieces.
nlohmann::json leaf_to_json(const LeafSolution& leaf);
nlohmann::json diagnostics_to_json(const FoliationDiagnostics& d);
std::string leaves_to_csv(const std::vector<LeafSolution>& leaves);
std::string point_cloud_csv(const FoliationResult& result, int density);

}  // namespace cmcfol
