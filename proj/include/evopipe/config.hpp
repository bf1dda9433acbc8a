#pragma once

#include <string>

#include <json.hpp>

#include "evopipe/coevo.hpp"

namespace evopipe {

// Config files are JSON with the evolution parameters named as in the
// experiment table (p_c, p_g, g, e, n_vm, n_dm, k, depths). Every key is
// optional and falls back to the defaults; unknown keys are errors so
// typos cannot pass silently.
CoevoConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const CoevoConfig& cfg);

CoevoConfig load_config(const std::string& path);
void save_config(const CoevoConfig& cfg, const std::string& path);

nlohmann::json env_to_json(const EnvConfig& env);
EnvConfig env_from_json(const nlohmann::json& j);

}  // namespace evopipe
