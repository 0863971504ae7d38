#pragma once

#include "config.hpp"

#include <nlohmann/json.hpp>

namespace mlkm::cli {

// Each command reads its section of `config`, writes artifacts plus
// resolved_config.json under g.out and prints a one-line JSON summary.
void cmd_features(const nlohmann::json& config, const Globals& g);
void cmd_fit(const nlohmann::json& config, const Globals& g);
void cmd_predict(const nlohmann::json& config, const Globals& g);
void cmd_conformal(const nlohmann::json& config, const Globals& g);
void cmd_simulate(const nlohmann::json& config, const Globals& g);
void cmd_bench(const nlohmann::json& config, const Globals& g);
void cmd_widths(const nlohmann::json& config, const Globals& g);

}  // namespace mlkm::cli
