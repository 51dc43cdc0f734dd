#pragma once

#include <string>

#include "qew/config.hpp"

namespace qew {

// Formats a double so reruns are byte-identical.
std::string fmt_double(double v);

// Executes the experiment described by cfg, writing CSVs and a run manifest
// under cfg.out. Returns a process exit code (0 = success / all checks pass).
int run_experiment(const ExperimentConfig& cfg);

} // namespace qew
