#pragma once

#include "mlkm/conformal.hpp"
#include "mlkm/error.hpp"
#include "mlkm/experiment.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <optional>
#include <string>
#include <vector>

namespace mlkm::cli {

enum class Exit : int {
  Ok = 0,
  Internal = 1,
  Config = 2,
  Data = 3,
  Numerical = 4,
  NotFound = 5,
};

/// Error raised by the command layer itself, already classified.
class CliError : public std::runtime_error {
 public:
  CliError(Exit exit, std::string field, const std::string& message)
      : std::runtime_error(message), exit_(exit), field_(std::move(field)) {}
  Exit exit() const noexcept { return exit_; }
  const std::string& field() const noexcept { return field_; }

 private:
  Exit exit_;
  std::string field_;
};

[[noreturn]] void config_error(const std::string& field, const std::string& message);

Exit classify(Errc code);
std::string exit_name(Exit exit);

/// Global settings resolved from flags, environment and config, in that order.
struct Globals {
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  std::filesystem::path out = "mlkm-out";
};

/// Reads a JSON object from `path` (empty path gives {}).
nlohmann::json load_config(const std::filesystem::path& path);

/// Applies "a.b.c=value"; value is parsed as JSON when possible, else kept as a string.
void apply_override(nlohmann::json& config, const std::string& assignment);

/// Rejects keys of `j` outside `known`, naming them as "<section>.<key>".
void check_keys(const nlohmann::json& j, std::initializer_list<const char*> known,
                const std::string& section);

/// Section object of `config`, or {} when absent; rejects unknown top-level keys.
nlohmann::json section(const nlohmann::json& config, const std::string& name);

Globals resolve_globals(const nlohmann::json& config, std::optional<std::uint64_t> seed_flag,
                        std::optional<std::size_t> threads_flag,
                        const std::optional<std::string>& out_flag);

/// Where the data for fit / conformal come from.
struct DataSource {
  std::optional<Scenario> scenario;
  std::string csv;
  std::string target;
  bool normalize = true;
  std::string test_csv;
};

DataSource data_source_from_json(const nlohmann::json& j);
nlohmann::json to_json(const DataSource& d);

struct FitSection {
  DataSource data;
  ModelKind model = ModelKind::Mlkm;
  ExperimentSpec spec;  // architecture, kernels, training and baseline settings
};

FitSection fit_section_from_json(const nlohmann::json& j);
nlohmann::json to_json(const FitSection& f);

ScalingSpec scaling_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ScalingSpec& s);

std::vector<CoverageCell> coverage_cells_from_json(const nlohmann::json& j);
nlohmann::json coverage_cells_to_json(const std::vector<CoverageCell>& cells);

}  // namespace mlkm::cli
