#pragma once

#include "saabo/bench/closed_loop.hpp"
#include "saabo/bench/convergence.hpp"

#include <string>

namespace saabo::bench {

/// JSON documents whose keys mirror the config struct fields. Unknown keys,
/// wrong types and invalid values raise ConfigError.
RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::string& path);

ConvergenceConfig parse_convergence_config(const std::string& json_text);
ConvergenceConfig load_convergence_config(const std::string& path);

}  // namespace saabo::bench
