#include "commands.hpp"
#include "config.hpp"

#include <CLI11.hpp>

#include <functional>
#include <iostream>
#include <map>

namespace {

using mlkm::cli::Exit;
using nlohmann::json;

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
  std::optional<std::string> out;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("-c,--config", f.config, "JSON run configuration");
  cmd->add_option("--seed", f.seed, "Global seed (overrides the config)");
  cmd->add_option("--threads", f.threads, "Worker threads; 0 means all cores (overrides MLKM_THREADS)");
  cmd->add_option("-o,--out", f.out, "Output directory");
  cmd->add_option("--set", f.overrides, "Config override key.path=value (repeatable)");
}

int report(Exit exit, const std::string& code, const std::string& field, const std::string& message) {
  json rec = {{"status", "error"},
              {"exit", static_cast<int>(exit)},
              {"kind", mlkm::cli::exit_name(exit)},
              {"code", code},
              {"message", message}};
  if (!field.empty()) rec["field"] = field;
  std::cerr << rec.dump() << '\n';
  return static_cast<int>(exit);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-layer kernel machines: fitting, conformal intervals and benchmarks", "mlkm"};
  app.require_subcommand(1);
  Flags flags;

  using Command = std::function<void(const json&, const mlkm::cli::Globals&)>;
  const std::vector<std::tuple<const char*, const char*, Command>> commands = {
      {"features", "Sample a random Fourier feature map and check it against its kernel",
       mlkm::cli::cmd_features},
      {"fit", "Train a model and write model.json, training_log.jsonl and metrics.json",
       mlkm::cli::cmd_fit},
      {"predict", "Evaluate a saved model on a CSV of covariates", mlkm::cli::cmd_predict},
      {"conformal", "Calibrate split-conformal intervals for a fitted run", mlkm::cli::cmd_conformal},
      {"simulate", "Write a synthetic regression sample as CSV", mlkm::cli::cmd_simulate},
      {"bench", "Run model comparisons, timing scaling fits and coverage tables", mlkm::cli::cmd_bench},
      {"widths", "Recommend random-feature counts per layer", mlkm::cli::cmd_widths},
  };
  std::map<CLI::App*, Command> dispatch;
  for (const auto& [name, help, fn] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    add_common(sub, flags);
    dispatch[sub] = fn;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report(Exit::Config, "UsageError", "", e.what());
  }

  try {
    json config = mlkm::cli::load_config(flags.config);
    for (const auto& o : flags.overrides) mlkm::cli::apply_override(config, o);
    const auto globals = mlkm::cli::resolve_globals(config, flags.seed, flags.threads, flags.out);
    for (const auto& [sub, fn] : dispatch) {
      if (sub->parsed()) fn(config, globals);
    }
    return 0;
  } catch (const mlkm::cli::CliError& e) {
    return report(e.exit(), "CliError", e.field(), e.what());
  } catch (const mlkm::Error& e) {
    return report(mlkm::cli::classify(e.code()), std::string(mlkm::to_string(e.code())), "", e.what());
  } catch (const json::exception& e) {
    return report(Exit::Config, "ConfigType", "", e.what());
  } catch (const std::exception& e) {
    return report(Exit::Internal, "Internal", "", e.what());
  }
}
