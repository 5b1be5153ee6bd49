#pragma once

#include <string>

#include "driftqec/architecture.h"

namespace driftqec {

/// Parses an experiment description (JSON, schema in README.md) and resolves
/// everything it references: the DFR->LER fit (file, inline, or generated by
/// the oracle) and the per-tile truth traces. Relative paths are resolved
/// against `base_dir`. Throws ConfigError.
ExperimentConfig parse_experiment_config(const std::string &json_text, const std::string &base_dir = ".");

ExperimentConfig load_experiment_config(const std::string &path);

}  // namespace driftqec
