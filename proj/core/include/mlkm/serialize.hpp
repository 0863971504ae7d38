#pragma once

#include "mlkm/baselines.hpp"
#include "mlkm/features.hpp"
#include "mlkm/kernel.hpp"
#include "mlkm/network.hpp"
#include "mlkm/training.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>

namespace mlkm {

inline constexpr int kFormatVersion = 1;

/// 64-bit FNV-1a over the little-endian IEEE-754 bytes of each value.
std::uint64_t fnv1a(std::span<const double> values);
std::string checksum_hex(std::span<const double> values);

nlohmann::json to_json(const KernelSpec& kernel);
KernelSpec kernel_from_json(const nlohmann::json& j);

nlohmann::json to_json(const Architecture& arch);
Architecture architecture_from_json(const nlohmann::json& j);

/// Full omega / phase arrays plus the seed they were drawn from.
nlohmann::json to_json(const FeatureMap& fm);
FeatureMap feature_map_from_json(const nlohmann::json& j);

nlohmann::json to_json(const Network& net);
Network network_from_json(const nlohmann::json& j);

/// Flat parameter vector with the architecture string and a checksum.
nlohmann::json weights_to_json(const Architecture& arch, const Weights& w);
/// Throws ChecksumMismatch when the stored checksum or architecture echo
/// disagrees with `arch` or with the values.
Weights weights_from_json(const nlohmann::json& j, const Architecture& arch);

/// Tagged records: "network", "crossfit", "krr", "rf_ridge".
nlohmann::json model_to_json(const NetworkModel& model);
nlohmann::json model_to_json(const CrossFitModel& model);
nlohmann::json model_to_json(const KrrModel& model);
nlohmann::json model_to_json(const RfRidgeModel& model);
/// Dispatches on the dynamic type; throws InvalidArgument for other predictors.
nlohmann::json model_to_json(const Predictor& model);
std::unique_ptr<Predictor> model_from_json(const nlohmann::json& j);

/// Pretty-printed JSON with a trailing newline.
void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);
/// Throws ParseError on unreadable or malformed files.
nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace mlkm
