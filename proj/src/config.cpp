#include "qew/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace qew {

namespace {

const std::set<std::string> kKnownKeys = {
    "mode", "seed", "replicas", "out",
    "dist", "dist_param", "lambda", "lambda_tilde", "beta", "beta_tilde", "delta", "m_max",
    "F", "F_grid", "L", "dt", "t_end", "obstacles",
    "n_cells", "L_int", "modified", "snapshots", "dump_profiles", "compare",
    "model",
    "check", "n", "n_list", "window", "inner_samples", "N_max", "samples", "mu", "eps_tail",
};

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

bool parse_double(const std::string& v, double& out) {
    try {
        std::size_t used = 0;
        out = std::stod(v, &used);
        return used == v.size();
    } catch (...) {
        return false;
    }
}

bool parse_int(const std::string& v, long long& out) {
    try {
        std::size_t used = 0;
        out = std::stoll(v, &used);
        return used == v.size();
    } catch (...) {
        return false;
    }
}

bool parse_bool(const std::string& v, bool& out) {
    if (v == "true" || v == "1") { out = true; return true; }
    if (v == "false" || v == "0") { out = false; return true; }
    return false;
}

// "a:b:step" inclusive range or a comma list.
bool parse_grid(const std::string& v, std::vector<double>& out) {
    out.clear();
    if (v.find(':') != std::string::npos) {
        double a = 0, b = 0, s = 0;
        std::istringstream in(v);
        std::string part;
        std::vector<std::string> parts;
        while (std::getline(in, part, ':')) parts.push_back(trim(part));
        if (parts.size() != 3) return false;
        if (!parse_double(parts[0], a) || !parse_double(parts[1], b) || !parse_double(parts[2], s))
            return false;
        if (!(s > 0.0) || b < a) return false;
        for (double x = a; x <= b + 1e-12 * std::max(1.0, std::fabs(b)); x += s) out.push_back(x);
        return !out.empty();
    }
    std::istringstream in(v);
    std::string part;
    while (std::getline(in, part, ',')) {
        double x = 0;
        if (!parse_double(trim(part), x)) return false;
        out.push_back(x);
    }
    return !out.empty();
}

} // namespace

std::string mode_name(Mode mode) {
    switch (mode) {
        case Mode::bounds: return "bounds";
        case Mode::simulate_discrete: return "simulate-discrete";
        case Mode::simulate_continuum: return "simulate-continuum";
        case Mode::verify: return "verify";
        case Mode::sweep: return "sweep";
    }
    return "?";
}

double ExperimentConfig::beta() const {
    if (beta_override) return *beta_override;
    return dist.exp_moment(lambda);
}

ParseResult parse_config(const std::string& text) {
    ParseResult result;
    ExperimentConfig& cfg = result.config;
    auto& errors = result.errors;

    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    bool mode_seen = false;
    std::string dist_family;
    double dist_param = 0.0;
    bool dist_param_seen = false;

    while (std::getline(in, line)) {
        ++line_no;
        const std::string stripped = trim(line.substr(0, line.find('#')));
        if (stripped.empty()) continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos) {
            errors.push_back("line " + std::to_string(line_no) + ": expected key = value");
            continue;
        }
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        if (!kKnownKeys.count(key)) {
            errors.push_back("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
            continue;
        }
        if (value.empty()) {
            errors.push_back("line " + std::to_string(line_no) + ": empty value for '" + key + "'");
            continue;
        }
        cfg.raw.emplace_back(key, value);

        auto bad = [&](const std::string& why) {
            errors.push_back("line " + std::to_string(line_no) + ": " + key + ": " + why);
        };
        double d = 0;
        long long i = 0;
        bool b = false;
        if (key == "mode") {
            mode_seen = true;
            if (value == "bounds") cfg.mode = Mode::bounds;
            else if (value == "simulate-discrete") cfg.mode = Mode::simulate_discrete;
            else if (value == "simulate-continuum") cfg.mode = Mode::simulate_continuum;
            else if (value == "verify") cfg.mode = Mode::verify;
            else if (value == "sweep") cfg.mode = Mode::sweep;
            else bad("unknown mode '" + value + "'");
        } else if (key == "seed") {
            if (parse_int(value, i) && i >= 0) cfg.seed = static_cast<std::uint64_t>(i);
            else bad("must be a nonnegative integer");
        } else if (key == "replicas") {
            if (parse_int(value, i) && i >= 1) cfg.replicas = static_cast<int>(i);
            else bad("must be an integer >= 1");
        } else if (key == "out") {
            cfg.out = value;
        } else if (key == "dist") {
            if (value == "deterministic" || value == "exponential" || value == "uniform")
                dist_family = value;
            else bad("must be deterministic, exponential or uniform");
        } else if (key == "dist_param") {
            if (parse_double(value, d) && d >= 0.0) { dist_param = d; dist_param_seen = true; }
            else bad("must be a nonnegative number");
        } else if (key == "lambda") {
            if (parse_double(value, d) && d > 0.0) cfg.lambda = d;
            else bad("must be > 0");
        } else if (key == "lambda_tilde") {
            if (parse_double(value, d) && d > 0.0) cfg.lambda_tilde = d;
            else bad("must be > 0");
        } else if (key == "beta") {
            if (parse_double(value, d) && d >= 1.0) cfg.beta_override = d;
            else bad("must be >= 1");
        } else if (key == "beta_tilde") {
            if (parse_double(value, d) && d >= 1.0) cfg.beta_tilde_override = d;
            else bad("must be >= 1");
        } else if (key == "delta") {
            if (!parse_double(value, d)) bad("must be a number");
            else if (!(d > 0.0 && d < 0.5)) bad("violates the constraint delta < 1/2 (and delta > 0)");
            else cfg.delta = d;
        } else if (key == "m_max") {
            if (parse_int(value, i) && i >= 1) cfg.m_max = static_cast<int>(i);
            else bad("must be an integer >= 1");
        } else if (key == "F") {
            if (parse_double(value, d) && d >= 0.0) cfg.F = d;
            else bad("must be >= 0");
        } else if (key == "F_grid") {
            if (!parse_grid(value, cfg.F_grid)) bad("must be 'a:b:step' or a comma list");
        } else if (key == "L") {
            if (parse_int(value, i) && i >= 3) cfg.L = static_cast<int>(i);
            else bad("must be an integer >= 3");
        } else if (key == "dt") {
            if (parse_double(value, d) && d > 0.0) cfg.dt = d;
            else bad("must be > 0");
        } else if (key == "t_end") {
            if (parse_double(value, d) && d > 0.0) cfg.t_end = d;
            else bad("must be > 0");
        } else if (key == "obstacles") {
            if (value == "none") cfg.obstacles = ObstacleSource::none;
            else if (value == "rounded") cfg.obstacles = ObstacleSource::rounded;
            else if (value == "envelope") cfg.obstacles = ObstacleSource::envelope;
            else bad("must be none, rounded or envelope");
        } else if (key == "n_cells") {
            if (parse_int(value, i) && i >= 8) cfg.n_cells = static_cast<int>(i);
            else bad("must be an integer >= 8");
        } else if (key == "L_int") {
            if (parse_int(value, i) && i >= 1) cfg.L_int = static_cast<int>(i);
            else bad("must be an integer >= 1");
        } else if (key == "modified") {
            if (parse_bool(value, b)) cfg.modified = b;
            else bad("must be true or false");
        } else if (key == "snapshots") {
            if (parse_int(value, i) && i >= 1) cfg.snapshots = static_cast<int>(i);
            else bad("must be an integer >= 1");
        } else if (key == "dump_profiles") {
            if (parse_bool(value, b)) cfg.dump_profiles = b;
            else bad("must be true or false");
        } else if (key == "compare") {
            if (parse_bool(value, b)) cfg.compare = b;
            else bad("must be true or false");
        } else if (key == "model") {
            if (value == "discrete" || value == "continuum") cfg.model = value;
            else bad("must be discrete or continuum");
        } else if (key == "check") {
            if (value == "supermartingale" || value == "growth" || value == "dp-brute" ||
                value == "moment")
                cfg.check = value;
            else bad("must be supermartingale, growth, dp-brute or moment");
        } else if (key == "n") {
            if (parse_int(value, i) && i >= 0) cfg.n = static_cast<int>(i);
            else bad("must be an integer >= 0");
        } else if (key == "n_list") {
            std::vector<double> tmp;
            if (!parse_grid(value, tmp)) bad("must be a comma list of integers");
            else {
                cfg.n_list.clear();
                for (double x : tmp) cfg.n_list.push_back(static_cast<int>(std::llround(x)));
            }
        } else if (key == "window") {
            if (parse_int(value, i) && i >= 1) cfg.window = i;
            else bad("must be an integer >= 1");
        } else if (key == "inner_samples") {
            if (parse_int(value, i) && i >= 1) cfg.inner_samples = static_cast<int>(i);
            else bad("must be an integer >= 1");
        } else if (key == "N_max") {
            if (parse_int(value, i) && i >= 1) cfg.N_max = static_cast<int>(i);
            else bad("must be an integer >= 1");
        } else if (key == "samples") {
            if (parse_int(value, i) && i >= 2) cfg.samples = static_cast<int>(i);
            else bad("must be an integer >= 2");
        } else if (key == "mu") {
            if (parse_double(value, d) && d > 0.0) cfg.mu = d;
            else bad("must be > 0");
        } else if (key == "eps_tail") {
            if (parse_double(value, d) && d > 0.0) cfg.eps_tail = d;
            else bad("must be > 0");
        }
    }

    // Cross-field validation; every violation is reported, not just the first.
    if (!mode_seen) errors.push_back("mode is required");
    if (!dist_family.empty()) {
        if (!dist_param_seen) {
            errors.push_back("dist_param is required when dist is set");
        } else {
            try {
                if (dist_family == "deterministic")
                    cfg.dist = make_deterministic(dist_param, cfg.lambda);
                else if (dist_family == "exponential")
                    cfg.dist = make_exponential(dist_param, cfg.lambda);
                else
                    cfg.dist = make_uniform(dist_param, cfg.lambda);
                cfg.has_dist = true;
            } catch (const std::exception& e) {
                errors.push_back(std::string("dist: ") + e.what());
            }
        }
    }
    if (cfg.lambda_tilde && !(*cfg.lambda_tilde < cfg.lambda))
        errors.push_back("lambda_tilde must be < lambda");
    if (cfg.mu && !(*cfg.mu > cfg.lambda))
        errors.push_back("mu must be > lambda");

    const bool needs_field = (mode_seen && (cfg.mode == Mode::simulate_continuum ||
                                            (cfg.mode == Mode::simulate_discrete &&
                                             cfg.obstacles != ObstacleSource::none) ||
                                            cfg.mode == Mode::verify ||
                                            (cfg.mode == Mode::sweep &&
                                             cfg.obstacles != ObstacleSource::none)));
    if (needs_field && !cfg.has_dist) errors.push_back("dist / dist_param are required");

    if (mode_seen) switch (cfg.mode) {
        case Mode::bounds:
            if (!cfg.beta_override && !cfg.has_dist)
                errors.push_back("bounds mode needs beta or a dist to derive it");
            if (!cfg.F && cfg.F_grid.empty())
                errors.push_back("bounds mode needs F or F_grid");
            break;
        case Mode::simulate_discrete: {
            if (!cfg.F) errors.push_back("simulate-discrete needs F");
            const double limit = dt_max(0.0, cfg.F.value_or(0.0));
            if (cfg.F && cfg.dt && *cfg.dt > limit)
                errors.push_back("dt = " + std::to_string(*cfg.dt) +
                                 " exceeds the discrete stability limit 0.2/(4+F) = " +
                                 std::to_string(limit));
            break;
        }
        case Mode::simulate_continuum: {
            if (!cfg.F) errors.push_back("simulate-continuum needs F");
            const double dx = 1.0 / cfg.n_cells;
            if (cfg.dt && *cfg.dt > 0.5 * dx * dx)
                errors.push_back("dt = " + std::to_string(*cfg.dt) +
                                 " violates the CFL limit dx^2/2 = " +
                                 std::to_string(0.5 * dx * dx));
            if (2.0 * cfg.delta * cfg.n_cells < 4.0)
                errors.push_back("grid too coarse: obstacle boxes need >= 4 cells across 2*delta");
            break;
        }
        case Mode::verify:
            if (cfg.check.empty()) errors.push_back("verify mode needs check");
            if ((cfg.check == "supermartingale" || cfg.check == "growth" ||
                 cfg.check == "dp-brute") && !cfg.mu)
                errors.push_back("check '" + cfg.check + "' needs mu");
            if (cfg.check == "moment" && !cfg.lambda_tilde)
                errors.push_back("check 'moment' needs lambda_tilde");
            if (cfg.check == "growth" && cfg.n_list.empty())
                errors.push_back("check 'growth' needs n_list");
            if (!cfg.F) cfg.F = 4.0;
            break;
        case Mode::sweep:
            if (cfg.F_grid.empty()) errors.push_back("sweep mode needs F_grid");
            if (cfg.replicas < 2) errors.push_back("sweep mode needs replicas >= 2");
            if (cfg.model == "continuum" && !cfg.lambda_tilde)
                errors.push_back("continuum sweep needs lambda_tilde for the V bound");
            break;
    }
    return result;
}

ParseResult load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        ParseResult r;
        r.errors.push_back("cannot open config file: " + path);
        return r;
    }
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str());
}

} // namespace qew
