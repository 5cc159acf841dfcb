#pragma once

#include <optional>
#include <string>

#include "conehit/path_sim.hpp"

namespace conehit {

enum class RunMode { analyze, estimate, validate, oracle };

RunMode parse_mode(const std::string& name);

/// Parsed and validated run configuration. The covariance is given exactly
/// one way: full matrix, factor A (Sigma = A A^T), or correlation plus
/// per-coordinate scales.
struct RunConfig {
    ProblemSpec spec;
    // Constant estimation.
    std::vector<double> pk_T_ladder{2.0, 4.0, 8.0, 16.0, 32.0};
    int pk_n_steps = 1024;
    long pk_n_paths = 20000;
    // Evaluator table.
    std::vector<double> u_grid{1, 2, 3, 4, 5, 6, 7, 8};
    // Simulation validation.
    std::vector<double> sim_u_ladder{2, 3, 4};
    SimMode sim_mode = SimMode::crude;
    double sim_horizon_factor = 3.0;
    int sim_steps_per_unit = 200;
    long sim_n_paths = 100000;
    bool emit_samples = false;

    std::uint64_t seed = 0;
    bool seed_given = false;
    std::string config_hash; // FNV-1a of the raw config text
};

RunConfig parse_config_text(const std::string& text);
RunConfig parse_config_file(const std::string& path);

/// FNV-1a 64-bit hash, hex encoded.
std::string fnv1a_hex(const std::string& data);

struct RunOptions {
    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;   // overrides the config seed
    std::optional<int> workers;          // overridden by CONEHIT_WORKERS
};

/// Execute one pipeline run. Writes report.json plus plot CSVs into
/// out_dir; on failure writes error.json with a stable error code and
/// returns 2 for configuration problems, 1 otherwise.
int run(RunMode mode, const RunOptions& opts);

} // namespace conehit
