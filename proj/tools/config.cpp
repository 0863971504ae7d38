#include "config.hpp"

#include "mlkm/serialize.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <thread>

namespace mlkm::cli {

using nlohmann::json;

void config_error(const std::string& field, const std::string& message) {
  throw CliError(Exit::Config, field, message);
}

Exit classify(Errc code) {
  switch (code) {
    case Errc::InvalidArgument:
    case Errc::InvalidWidth:
    case Errc::InvalidDim:
    case Errc::IncompatibleScenario:
    case Errc::InvalidRate:
      return Exit::Config;
    case Errc::DimMismatch:
    case Errc::NonFiniteInput:
    case Errc::TooFewSamples:
    case Errc::ParseError:
    case Errc::ChecksumMismatch:
      return Exit::Data;
    case Errc::SingularSystem:
    case Errc::DegenerateFit:
    case Errc::DivergenceDetected:
    case Errc::TimingUnstable:
      return Exit::Numerical;
  }
  return Exit::Internal;
}

std::string exit_name(Exit exit) {
  switch (exit) {
    case Exit::Ok: return "ok";
    case Exit::Internal: return "internal error";
    case Exit::Config: return "config error";
    case Exit::Data: return "data error";
    case Exit::Numerical: return "numerical error";
    case Exit::NotFound: return "artifact not found";
  }
  return "internal error";
}

json load_config(const std::filesystem::path& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw CliError(Exit::NotFound, "config", "cannot open config file '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    config_error("config", path.string() + ": " + e.what());
  }
  if (!j.is_object()) config_error("config", "config file must hold a JSON object");
  return j;
}

void apply_override(json& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    config_error("--set", "expected key.path=value, got '" + assignment + "'");
  }
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(text);
  } catch (const json::exception&) {
    value = text;
  }
  json* node = &config;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot - start);
    if (key.empty()) config_error("--set", "empty key in '" + path + "'");
    if (!node->is_object()) config_error("--set", "'" + path + "' descends into a non-object");
    if (dot == std::string::npos) {
      (*node)[key] = value;
      return;
    }
    node = &(*node)[key];
    if (node->is_null()) *node = json::object();
    start = dot + 1;
  }
}

void check_keys(const json& j, std::initializer_list<const char*> known, const std::string& sec) {
  if (!j.is_object()) config_error(sec, "'" + sec + "' must be an object");
  for (const auto& [key, _] : j.items()) {
    if (std::none_of(known.begin(), known.end(), [&](const char* k) { return key == k; })) {
      config_error(sec + "." + key, "unknown key '" + sec + "." + key + "'");
    }
  }
}

json section(const json& config, const std::string& name) {
  check_keys(config,
             {"seed", "threads", "out", "features", "fit", "predict", "conformal", "simulate",
              "bench", "widths"},
             "config");
  return config.contains(name) ? config.at(name) : json::object();
}

Globals resolve_globals(const json& config, std::optional<std::uint64_t> seed_flag,
                        std::optional<std::size_t> threads_flag,
                        const std::optional<std::string>& out_flag) {
  Globals g;
  try {
    g.seed = seed_flag.value_or(config.value("seed", std::uint64_t{0}));
    std::size_t threads = config.value("threads", std::size_t{0});
    if (const char* env = std::getenv("MLKM_THREADS"); env && *env) {
      char* end = nullptr;
      const unsigned long v = std::strtoul(env, &end, 10);
      if (*end != '\0') config_error("MLKM_THREADS", "MLKM_THREADS must be a non-negative integer");
      threads = v;
    }
    if (threads_flag) threads = *threads_flag;
    g.threads = threads > 0 ? threads : std::max(1u, std::thread::hardware_concurrency());
    g.out = out_flag.value_or(config.value("out", std::string("mlkm-out")));
  } catch (const json::exception& e) {
    config_error("config", e.what());
  }
  return g;
}

DataSource data_source_from_json(const json& j) {
  check_keys(j, {"scenario", "csv", "target", "normalize", "test_csv"}, "data");
  DataSource d;
  if (j.contains("scenario")) d.scenario = j.at("scenario").get<Scenario>();
  d.csv = j.value("csv", std::string{});
  d.target = j.value("target", std::string{});
  d.normalize = j.value("normalize", true);
  d.test_csv = j.value("test_csv", std::string{});
  if (d.scenario.has_value() == !d.csv.empty()) {
    config_error("data", "exactly one of data.scenario and data.csv is required");
  }
  return d;
}

json to_json(const DataSource& d) {
  json j = json::object();
  if (d.scenario) j["scenario"] = *d.scenario;
  if (!d.csv.empty()) {
    j["csv"] = d.csv;
    j["target"] = d.target;
    j["normalize"] = d.normalize;
    if (!d.test_csv.empty()) j["test_csv"] = d.test_csv;
  }
  return j;
}

FitSection fit_section_from_json(const json& j) {
  check_keys(j,
             {"data", "model", "architecture", "kernels", "baseline_kernel", "rf_features",
              "lambda_grid", "cv_folds", "train", "fit_size", "calib_size", "test_size"},
             "fit");
  if (!j.contains("data")) config_error("fit.data", "missing dataset: set fit.data.scenario or fit.data.csv");
  FitSection f;
  f.data = data_source_from_json(j.at("data"));
  f.model = parse_model_kind(j.value("model", std::string("mlkm")));
  json spec = j;
  spec.erase("data");
  spec.erase("model");
  spec.get_to(f.spec);
  f.spec.roster = {f.model};
  f.spec.scenario = f.data.scenario;
  f.spec.dataset = f.data.csv;
  f.spec.target_column = f.data.target;
  if (f.data.scenario && !j.contains("test_size")) f.spec.test_size = 1000;
  if (f.data.csv.size() && !j.contains("test_size")) f.spec.test_size = 0;
  return f;
}

json to_json(const FitSection& f) {
  json spec = f.spec;
  json j = {{"data", to_json(f.data)}, {"model", to_string(f.model)}};
  for (const char* key : {"architecture", "kernels", "baseline_kernel", "rf_features", "lambda_grid",
                          "cv_folds", "train", "fit_size", "calib_size", "test_size"}) {
    j[key] = spec.at(key);
  }
  return j;
}

ScalingSpec scaling_from_json(const json& j) {
  check_keys(j,
             {"model", "n_grid", "scenario", "architecture", "kernels", "baseline_kernel", "lambda",
              "epochs", "repeats", "max_spread", "seed"},
             "bench.scaling");
  ScalingSpec s;
  s.model = parse_model_kind(j.value("model", std::string("mlkm")));
  s.n_grid = j.value("n_grid", s.n_grid);
  if (j.contains("scenario")) j.at("scenario").get_to(s.scenario);
  s.architecture = j.value("architecture", s.architecture);
  if (j.contains("kernels")) {
    s.kernels.clear();
    for (const auto& k : j.at("kernels")) s.kernels.push_back(kernel_from_json(k));
  }
  if (j.contains("baseline_kernel")) s.baseline_kernel = kernel_from_json(j.at("baseline_kernel"));
  s.lambda = j.value("lambda", s.lambda);
  s.epochs = j.value("epochs", s.epochs);
  s.repeats = j.value("repeats", s.repeats);
  s.max_spread = j.value("max_spread", s.max_spread);
  s.seed = j.value("seed", s.seed);
  return s;
}

json to_json(const ScalingSpec& s) {
  json kernels = json::array();
  for (const auto& k : s.kernels) kernels.push_back(to_json(k));
  return {{"model", to_string(s.model)},
          {"n_grid", s.n_grid},
          {"scenario", s.scenario},
          {"architecture", s.architecture},
          {"kernels", kernels},
          {"baseline_kernel", to_json(s.baseline_kernel)},
          {"lambda", s.lambda},
          {"epochs", s.epochs},
          {"repeats", s.repeats},
          {"max_spread", s.max_spread},
          {"seed", s.seed}};
}

namespace {

constexpr std::pair<ResidualOracle::Noise, const char*> kNoiseNames[] = {
    {ResidualOracle::Noise::Normal, "normal"},
    {ResidualOracle::Noise::Laplace, "laplace"},
    {ResidualOracle::Noise::Uniform, "uniform"},
};

ResidualOracle::Noise parse_noise(const std::string& name) {
  for (const auto& [k, n] : kNoiseNames) {
    if (name == n) return k;
  }
  config_error("noise", "unknown residual noise '" + name + "'");
}

std::string noise_name(ResidualOracle::Noise noise) {
  for (const auto& [k, n] : kNoiseNames) {
    if (k == noise) return n;
  }
  return "normal";
}

}  // namespace

std::vector<CoverageCell> coverage_cells_from_json(const json& j) {
  if (!j.is_array()) config_error("bench.coverage", "bench.coverage must be an array of cells");
  std::vector<CoverageCell> cells;
  for (const auto& c : j) {
    check_keys(c, {"label", "alpha", "replications", "oracle", "pipeline"}, "bench.coverage[]");
    CoverageCell cell;
    cell.label = c.value("label", std::string("cell") + std::to_string(cells.size()));
    cell.alpha = c.value("alpha", cell.alpha);
    cell.replications = c.value("replications", cell.replications);
    if (c.contains("oracle") == c.contains("pipeline")) {
      config_error("bench.coverage[]", "each cell needs exactly one of 'oracle' and 'pipeline'");
    }
    if (c.contains("oracle")) {
      const auto& o = c.at("oracle");
      check_keys(o, {"m", "noise"}, "bench.coverage[].oracle");
      ResidualOracle oracle;
      oracle.m = o.value("m", oracle.m);
      oracle.noise = parse_noise(o.value("noise", std::string("normal")));
      cell.scenario = oracle;
    } else {
      const auto& p = c.at("pipeline");
      check_keys(p,
                 {"scenario", "architecture", "kernels", "residual", "train", "fit_size",
                  "calib_size", "test_points", "policy"},
                 "bench.coverage[].pipeline");
      PipelineStudy study;
      if (p.contains("scenario")) p.at("scenario").get_to(study.data);
      study.architecture = p.value("architecture", study.architecture);
      if (p.contains("kernels")) {
        study.kernels.clear();
        for (const auto& k : p.at("kernels")) study.kernels.push_back(kernel_from_json(k));
      }
      study.residual = p.value("residual", study.residual);
      if (p.contains("train")) p.at("train").get_to(study.train);
      study.fit_size = p.value("fit_size", study.fit_size);
      study.calib_size = p.value("calib_size", study.calib_size);
      study.test_points = p.value("test_points", study.test_points);
      study.policy = parse_variance_policy(p.value("policy", std::string("auto")));
      cell.scenario = study;
    }
    cells.push_back(std::move(cell));
  }
  return cells;
}

json coverage_cells_to_json(const std::vector<CoverageCell>& cells) {
  json out = json::array();
  for (const auto& cell : cells) {
    json c = {{"label", cell.label}, {"alpha", cell.alpha}, {"replications", cell.replications}};
    if (const auto* o = std::get_if<ResidualOracle>(&cell.scenario)) {
      c["oracle"] = {{"m", o->m}, {"noise", noise_name(o->noise)}};
    } else {
      const auto& s = std::get<PipelineStudy>(cell.scenario);
      json kernels = json::array();
      for (const auto& k : s.kernels) kernels.push_back(to_json(k));
      c["pipeline"] = {{"scenario", s.data},          {"architecture", s.architecture},
                       {"kernels", kernels},          {"residual", s.residual},
                       {"train", s.train},            {"fit_size", s.fit_size},
                       {"calib_size", s.calib_size},  {"test_points", s.test_points},
                       {"policy", to_string(s.policy)}};
    }
    out.push_back(c);
  }
  return out;
}

}  // namespace mlkm::cli
