#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qew/discrete.hpp"
#include "qew/field.hpp"

namespace qew {

enum class Mode { bounds, simulate_discrete, simulate_continuum, verify, sweep };

std::string mode_name(Mode mode);

// Fully resolved experiment description, parsed from a key = value file.
struct ExperimentConfig {
    Mode mode = Mode::bounds;
    std::uint64_t seed = 0;
    int replicas = 4;
    std::string out = "out";

    // field / rates
    bool has_dist = false;
    StrengthDistribution dist;
    double lambda = 1.0;
    std::optional<double> lambda_tilde;
    std::optional<double> beta_override;
    std::optional<double> beta_tilde_override;
    double delta = 0.25;
    int m_max = 64;

    // discrete model
    std::optional<double> F;
    std::vector<double> F_grid;
    int L = 256;
    std::optional<double> dt; // default: 1e-3 (discrete), 0.4 dx^2 (continuum)
    double t_end = 1.0;
    ObstacleSource obstacles = ObstacleSource::rounded;

    // continuum model
    int n_cells = 32;
    int L_int = 32;
    bool modified = true;
    int snapshots = 20;
    bool dump_profiles = false;
    bool compare = false;

    // sweep
    std::string model = "discrete";

    // verify
    std::string check;
    int n = 3;
    std::vector<int> n_list;
    std::int64_t window = 15;
    int inner_samples = 200;
    int N_max = 256;
    int samples = 100000;
    std::optional<double> mu;
    double eps_tail = 1e-8;

    // original key order, for the manifest
    std::vector<std::pair<std::string, std::string>> raw;

    // moment bound beta-bar: explicit override or exp_moment(dist, lambda)
    double beta() const;
};

struct ParseResult {
    ExperimentConfig config;
    std::vector<std::string> errors; // all violations, not just the first

    bool ok() const { return errors.empty(); }
};

ParseResult parse_config(const std::string& text);
ParseResult load_config(const std::string& path);

} // namespace qew
