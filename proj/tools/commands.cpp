#include "commands.hpp"

#include "mlkm/baselines.hpp"
#include "mlkm/conformal.hpp"
#include "mlkm/csv.hpp"
#include "mlkm/experiment.hpp"
#include "mlkm/features.hpp"
#include "mlkm/random.hpp"
#include "mlkm/serialize.hpp"
#include "mlkm/simdata.hpp"
#include "mlkm/training.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <random>

namespace mlkm::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Sub-seed streams of the global seed.
constexpr std::uint64_t kSplitStream = 11;
constexpr std::uint64_t kModelStream = 12;
constexpr std::uint64_t kPairStream = 13;

void prepare_out(const Globals& g) { fs::create_directories(g.out); }

void write_resolved(const Globals& g, const std::string& command, const json& sec) {
  json resolved = {{"command", command}, {"seed", g.seed}, {"threads", g.threads},
                   {"out", g.out.string()}, {command, sec}};
  write_json_file(g.out / "resolved_config.json", resolved);
}

void print_summary(const json& j) { std::cout << j.dump() << '\n'; }

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CliError(Exit::Internal, "out", "cannot write '" + path.string() + "'");
  out << std::setprecision(17);
  return out;
}

void require_file(const std::string& path, const std::string& field) {
  if (path.empty()) config_error(field, "'" + field + "' is required");
  if (!fs::exists(path)) config_error(field, "'" + field + "' names a missing file: " + path);
}

struct LoadedData {
  Dataset pool;
  std::optional<Dataset> test;
  std::optional<Bounds> bounds;
};

LoadedData load_data(const DataSource& src, std::size_t test_size) {
  LoadedData out;
  if (src.scenario) {
    out.pool = generate(*src.scenario);
    if (test_size > 0) out.test = generate_test(*src.scenario, test_size);
    return out;
  }
  require_file(src.csv, "fit.data.csv");
  out.pool = load_csv(src.csv, src.target, src.normalize);
  if (src.normalize) out.bounds = bounds_from_json(out.pool.provenance.at("bounds"));
  if (!src.test_csv.empty()) {
    require_file(src.test_csv, "fit.data.test_csv");
    Dataset test = table_to_dataset(read_csv(src.test_csv), out.pool.provenance.at("target"));
    if (out.bounds) test.x = apply_bounds(*out.bounds, test.x);
    out.test = std::move(test);
  }
  return out;
}

struct SplitRows {
  std::vector<std::size_t> fit;
  std::vector<std::size_t> calib;
};

SplitRows split_rows(std::size_t n, std::size_t fit_size, std::size_t calib_size,
                     std::uint64_t seed) {
  if (calib_size >= n) config_error("fit.calib_size", "calib_size must be below the sample size");
  const std::size_t fit_n = fit_size > 0 ? fit_size : n - calib_size;
  if (fit_n + calib_size > n) config_error("fit.fit_size", "fit_size + calib_size exceeds the sample size");
  auto [fit, rest] = random_split(n, fit_n, derive_seed(seed, kSplitStream));
  rest.resize(calib_size);
  std::sort(rest.begin(), rest.end());
  return {std::move(fit), std::move(rest)};
}

std::unique_ptr<Predictor> load_model(const fs::path& path, json* record = nullptr) {
  if (!fs::exists(path)) throw CliError(Exit::NotFound, "model", "model file not found: " + path.string());
  json j = read_json_file(path);
  auto model = model_from_json(j);
  if (record) *record = std::move(j);
  return model;
}

std::optional<Bounds> model_bounds(const json& record) {
  if (!record.contains("input_bounds")) return std::nullopt;
  return bounds_from_json(record.at("input_bounds"));
}

/// Covariates (and the target when present) of a CSV of new points. When
/// `covariates` is nonempty only those columns, in that order, are used.
Dataset load_points(const std::string& path, const std::string& target, std::size_t dim,
                    const std::optional<Bounds>& bounds,
                    const std::vector<std::string>& covariates = {}) {
  CsvTable table = read_csv(path);
  if (!covariates.empty()) {
    CsvTable picked;
    auto cols = covariates;
    const bool keep_target = !target.empty() &&
        std::find(table.header.begin(), table.header.end(), target) != table.header.end();
    if (keep_target) cols.push_back(target);
    picked.values.resize(table.values.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c) {
      const auto it = std::find(table.header.begin(), table.header.end(), cols[c]);
      if (it == table.header.end()) fail(Errc::ParseError, path + ": no column named '" + cols[c] + "'");
      picked.values.col(static_cast<Eigen::Index>(c)) =
          table.values.col(static_cast<Eigen::Index>(it - table.header.begin()));
    }
    picked.header = std::move(cols);
    table = std::move(picked);
  }
  Dataset d;
  const bool has_target =
      !target.empty() && std::find(table.header.begin(), table.header.end(), target) != table.header.end();
  if (has_target) {
    d = table_to_dataset(table, target);
  } else {
    d.x = table.values;
    d.y = Eigen::VectorXd::Constant(table.values.rows(), std::numeric_limits<double>::quiet_NaN());
  }
  if (d.dim() != dim) {
    fail(Errc::DimMismatch, path + " has " + std::to_string(d.dim()) + " covariate columns, model expects " +
                                std::to_string(dim));
  }
  if (bounds) d.x = apply_bounds(*bounds, d.x);
  return d;
}

}  // namespace

void cmd_features(const json& config, const Globals& g) {
  const json sec = section(config, "features");
  check_keys(sec, {"kernel", "input_dim", "num_features", "check_pairs"}, "features");
  const KernelSpec kernel = sec.contains("kernel") ? kernel_from_json(sec.at("kernel"))
                                                   : KernelSpec::gaussian(1.0);
  const auto dim = sec.value("input_dim", std::size_t{2});
  const auto count = sec.value("num_features", std::size_t{1000});
  const auto pairs = sec.value("check_pairs", std::size_t{100});
  const FeatureMap fm = spectral_sample(kernel, dim, count, g.seed);

  Rng rng = make_rng(g.seed, kPairStream);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>> sample(pairs);
  for (auto& [a, b] : sample) {
    a = Eigen::VectorXd::NullaryExpr(static_cast<Eigen::Index>(dim), [&] { return unif(rng); });
    b = Eigen::VectorXd::NullaryExpr(static_cast<Eigen::Index>(dim), [&] { return unif(rng); });
  }
  const double err = pairs > 0 ? mc_kernel_error(kernel, fm, sample) : 0.0;

  prepare_out(g);
  write_resolved(g, "features",
                 {{"kernel", to_json(kernel)}, {"input_dim", dim}, {"num_features", count},
                  {"check_pairs", pairs}});
  write_json_file(g.out / "features.json", to_json(fm));
  const json metrics = {{"command", "features"}, {"num_features", count}, {"input_dim", dim},
                        {"check_pairs", pairs}, {"max_abs_kernel_error", err}};
  write_json_file(g.out / "metrics.json", metrics);
  print_summary(metrics);
}

void cmd_fit(const json& config, const Globals& g) {
  const json raw = section(config, "fit");
  if (raw.empty()) config_error("fit", "missing 'fit' section");
  FitSection fit = fit_section_from_json(raw);
  fit.spec.seed = g.seed;
  fit.spec.threads = g.threads;
  fit.spec.train.validate();

  const LoadedData data = load_data(fit.data, fit.spec.test_size);
  const SplitRows rows = split_rows(data.pool.size(), fit.spec.fit_size, fit.spec.calib_size, g.seed);
  const Dataset train = data.pool.subset(rows.fit);

  const auto start = std::chrono::steady_clock::now();
  const FittedModel fitted = fit_model(fit.model, fit.spec, train, derive_seed(g.seed, kModelStream));
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  prepare_out(g);
  write_resolved(g, "fit", to_json(fit));
  json record = model_to_json(*fitted.model);
  if (data.bounds) record["input_bounds"] = to_json(*data.bounds);
  write_json_file(g.out / "model.json", record);
  if (data.bounds) write_json_file(g.out / "bounds.json", to_json(*data.bounds));
  write_json_file(g.out / "split.json", {{"n", data.pool.size()}, {"fit", rows.fit}, {"calib", rows.calib}});

  if (const auto* cf = dynamic_cast<const CrossFitModel*>(fitted.model.get())) {
    auto log = open_out(g.out / "training_log.jsonl");
    cf->log().write_jsonl(log);
  } else if (!fitted.curve.empty()) {
    auto log = open_out(g.out / "training_log.jsonl");
    for (std::size_t e = 0; e < fitted.curve.size(); ++e) {
      log << json{{"epoch", e + 1}, {"loss", fitted.curve[e]}}.dump() << '\n';
    }
  }

  json metrics = {{"command", "fit"},
                  {"model", to_string(fit.model)},
                  {"n_fit", train.size()},
                  {"n_calib", rows.calib.size()},
                  {"train_mse", mean_squared_error(fitted.model->predict_batch(train.x), train.y)},
                  {"fit_seconds", seconds}};
  if (fitted.epochs > 0) {
    metrics["epochs"] = fitted.epochs;
    metrics["epoch_seconds"] = seconds / static_cast<double>(fitted.epochs);
  }
  if (fitted.lambda) metrics["lambda"] = *fitted.lambda;
  if (fit.model != ModelKind::Krr && fit.model != ModelKind::Rf) {
    const auto arch = Architecture::parse(fit.spec.architecture, fit.spec.kernels, fit.model == ModelKind::Rkm);
    metrics["parameters"] = parameter_count(arch);
    metrics["storage"] = storage_count(arch);
  }
  if (data.test) {
    metrics["n_test"] = data.test->size();
    metrics["test_mse"] = mean_squared_error(fitted.model->predict_batch(data.test->x), data.test->y);
  }
  write_json_file(g.out / "metrics.json", metrics);
  print_summary(metrics);
}

void cmd_predict(const json& config, const Globals& g) {
  const json sec = section(config, "predict");
  check_keys(sec, {"model", "input", "target", "covariates"}, "predict");
  const std::string model_path = sec.value("model", std::string{});
  if (model_path.empty()) config_error("predict.model", "'predict.model' is required");
  const std::string input = sec.value("input", std::string{});
  require_file(input, "predict.input");
  const std::string target = sec.value("target", std::string{});
  const auto covariates = sec.value("covariates", std::vector<std::string>{});

  json record;
  const auto model = load_model(model_path, &record);
  const Dataset pts = load_points(input, target, model->input_dim(), model_bounds(record), covariates);
  const Eigen::VectorXd pred = model->predict_batch(pts.x);

  prepare_out(g);
  write_resolved(g, "predict", {{"model", model_path}, {"input", input}, {"target", target}, {"covariates", covariates}});
  auto out = open_out(g.out / "predictions.csv");
  out << "id,prediction\n";
  for (Eigen::Index i = 0; i < pred.size(); ++i) out << i << ',' << pred(i) << '\n';
  json metrics = {{"command", "predict"}, {"n", pred.size()}};
  if (pts.y.size() > 0 && pts.y.allFinite()) metrics["mse"] = mean_squared_error(pred, pts.y);
  write_json_file(g.out / "metrics.json", metrics);
  print_summary(metrics);
}

void cmd_conformal(const json& config, const Globals& g) {
  const json sec = section(config, "conformal");
  check_keys(sec, {"run", "model", "alpha", "policy", "points"}, "conformal");
  const std::string run = sec.value("run", std::string{});
  if (run.empty()) config_error("conformal.run", "'conformal.run' must name a fit output directory");
  const fs::path model_path = sec.value("model", (fs::path(run) / "model.json").string());
  if (!sec.contains("alpha")) config_error("conformal.alpha", "'conformal.alpha' is required");
  const double alpha = sec.at("alpha").get<double>();
  if (!(alpha > 0.0 && alpha < 1.0)) config_error("conformal.alpha", "alpha must lie in (0, 1)");
  VariancePolicy policy = VariancePolicy::Auto;
  try {
    policy = parse_variance_policy(sec.value("policy", std::string("auto")));
  } catch (const Error& e) {
    config_error("conformal.policy", e.what());
  }
  const std::string points = sec.value("points", std::string{});

  json record;
  const auto model = load_model(model_path, &record);
  const fs::path resolved_path = fs::path(run) / "resolved_config.json";
  const fs::path split_path = fs::path(run) / "split.json";
  for (const auto& p : {resolved_path, split_path}) {
    if (!fs::exists(p)) throw CliError(Exit::NotFound, "conformal.run", "fit artifact not found: " + p.string());
  }
  const json resolved = read_json_file(resolved_path);
  const json split = read_json_file(split_path);
  const FitSection fit = fit_section_from_json(resolved.at("fit"));
  const LoadedData data = load_data(fit.data, fit.spec.test_size);
  const auto fit_rows = split.at("fit").get<std::vector<std::size_t>>();
  const auto cal_rows = split.at("calib").get<std::vector<std::size_t>>();
  if (split.at("n").get<std::size_t>() != data.pool.size()) {
    fail(Errc::DimMismatch, "split.json does not match the regenerated data");
  }
  if (cal_rows.empty()) config_error("fit.calib_size", "the fit run has no calibration split (fit.calib_size = 0)");
  const Dataset fit_set = data.pool.subset(fit_rows);
  const Dataset cal_set = data.pool.subset(cal_rows);

  const VarianceModel var = fit_variance(*model, fit_set.x, fit_set.y, policy);
  const ConformalCalibration cal = calibrate(*model, var, cal_set.x, cal_set.y, alpha);

  Dataset pts;
  std::string points_from;
  if (!points.empty()) {
    require_file(points, "conformal.points");
    pts = load_points(points, fit.data.target, model->input_dim(), model_bounds(record));
    points_from = points;
  } else if (data.test) {
    pts = *data.test;
    points_from = "test";
  } else {
    pts = cal_set;
    points_from = "calibration";
  }
  const auto intervals = predict_intervals(*model, var, cal, pts.x);

  prepare_out(g);
  write_resolved(g, "conformal",
                 {{"run", run}, {"model", model_path.string()}, {"alpha", alpha},
                  {"policy", to_string(policy)}, {"points", points}});
  auto out = open_out(g.out / "intervals.csv");
  const bool labelled = pts.y.size() > 0 && pts.y.allFinite();
  out << "id,prediction,lower,upper,sigma_y,unbounded" << (labelled ? ",y,covered" : "") << '\n';
  std::size_t covered = 0;
  double length = 0.0;
  for (std::size_t i = 0; i < intervals.size(); ++i) {
    const auto& iv = intervals[i];
    out << i << ',' << iv.prediction << ',' << iv.lower << ',' << iv.upper << ',' << iv.scale << ','
        << (iv.unbounded ? 1 : 0);
    if (labelled) {
      const double y = pts.y(static_cast<Eigen::Index>(i));
      const bool in = iv.contains(y);
      covered += in;
      out << ',' << y << ',' << (in ? 1 : 0);
    }
    out << '\n';
    length += iv.length();
  }
  const double n = static_cast<double>(intervals.size());
  json summary = {{"command", "conformal"},
                  {"alpha", alpha},
                  {"m", cal.m},
                  {"rank", cal.rank},
                  {"quantile", finite_or_null(cal.quantile)},
                  {"unbounded", cal.unbounded},
                  {"mode", to_string(cal.mode)},
                  {"policy", to_string(policy)},
                  {"sigma2", var.sigma2},
                  {"parameters", var.parameters},
                  {"n_fit", var.fit_size},
                  {"points", points_from},
                  {"n_points", intervals.size()},
                  {"mean_length", intervals.empty() ? json(nullptr) : finite_or_null(length / n)}};
  if (!var.fallback.empty()) summary["fallback"] = var.fallback;
  if (labelled && !intervals.empty()) summary["coverage"] = static_cast<double>(covered) / n;
  write_json_file(g.out / "conformal_summary.json", summary);
  print_summary(summary);
}

void cmd_simulate(const json& config, const Globals& g) {
  const json sec = section(config, "simulate");
  check_keys(sec, {"scenario", "test_size"}, "simulate");
  if (!sec.contains("scenario")) config_error("simulate.scenario", "'simulate.scenario' is required");
  Scenario sc = sec.at("scenario").get<Scenario>();
  const auto test_size = sec.value("test_size", std::size_t{0});
  const Dataset train = generate(sc);

  std::vector<std::string> header;
  for (std::size_t j = 0; j < sc.d; ++j) header.push_back("x" + std::to_string(j + 1));
  header.push_back("y");
  header.push_back("f");
  auto dump = [&](const Dataset& d, const fs::path& path) {
    Eigen::MatrixXd m(d.x.rows(), d.x.cols() + 2);
    m << d.x, d.y, *d.truth;
    auto out = open_out(path);
    write_csv(out, header, m);
  };

  prepare_out(g);
  write_resolved(g, "simulate", {{"scenario", sc}, {"test_size", test_size}});
  dump(train, g.out / "train.csv");
  json summary = {{"command", "simulate"}, {"scenario", sc}, {"n_train", train.size()}};
  if (test_size > 0) {
    dump(generate_test(sc, test_size), g.out / "test.csv");
    summary["n_test"] = test_size;
  }
  print_summary(summary);
}

void cmd_bench(const json& config, const Globals& g) {
  const json sec = section(config, "bench");
  check_keys(sec, {"experiment", "scaling", "coverage"}, "bench");
  if (sec.empty()) config_error("bench", "'bench' needs at least one of experiment, scaling, coverage");
  prepare_out(g);
  json resolved = json::object();
  json summary = {{"command", "bench"}};

  std::optional<ExperimentSpec> spec;
  std::optional<ScalingSpec> scaling;
  std::vector<CoverageCell> cells;
  if (sec.contains("experiment")) {
    spec = sec.at("experiment").get<ExperimentSpec>();
    spec->seed = g.seed;
    spec->threads = g.threads;
    spec->validate();
    resolved["experiment"] = *spec;
  }
  if (sec.contains("scaling")) {
    scaling = scaling_from_json(sec.at("scaling"));
    if (!sec.at("scaling").contains("seed")) scaling->seed = g.seed;
    resolved["scaling"] = to_json(*scaling);
  }
  if (sec.contains("coverage")) {
    cells = coverage_cells_from_json(sec.at("coverage"));
    resolved["coverage"] = coverage_cells_to_json(cells);
  }
  write_resolved(g, "bench", resolved);

  if (spec) {
    const BenchmarkReport report = run_experiment(*spec);
    write_json_file(g.out / "report.json", report.to_json());
    auto table = open_out(g.out / "report.txt");
    report.write_table(table);
    report.write_table(std::cerr);
    report.write_series(g.out / "series");
    json models = json::array();
    for (const auto& m : report.models) {
      json r = {{"model", to_string(m.kind)}, {"ok", m.ok}};
      if (m.ok) r["test_mse"] = m.mean_test_mse;
      models.push_back(r);
    }
    summary["experiment"] = models;
  }
  if (scaling) {
    const ScalingResult res = scaling_study(*scaling);
    write_json_file(g.out / "scaling.json", to_json(res));
    summary["scaling_slope"] = res.slope;
  }
  if (!cells.empty() || sec.contains("coverage")) {
    const auto rows = coverage_table(cells, g.seed, g.threads);
    json out = json::array();
    for (const auto& r : rows) {
      json row = to_json(r.result);
      row["label"] = r.label;
      row["flagged"] = r.flagged;
      out.push_back(row);
    }
    write_json_file(g.out / "coverage.json", out);
    auto table = open_out(g.out / "coverage.txt");
    write_coverage_table(table, rows);
    summary["coverage_rows"] = rows.size();
  }
  print_summary(summary);
}

void cmd_widths(const json& config, const Globals& g) {
  const json sec = section(config, "widths");
  check_keys(sec, {"n", "c", "layers"}, "widths");
  if (!sec.contains("n")) config_error("widths.n", "'widths.n' is required");
  const auto n = sec.at("n").get<std::size_t>();
  const double c = sec.value("c", 1.0);
  std::vector<LayerRate> layers;
  const json spec_layers = sec.value("layers", json::array({{{"q", 1.0}, {"d", 1.0}}}));
  for (const auto& l : spec_layers) {
    check_keys(l, {"q", "d"}, "widths.layers[]");
    LayerRate r;
    const json& q = l.at("q");
    if (q.is_string()) {
      const auto s = q.get<std::string>();
      if (s != "inf" && s != "infinity") config_error("widths.layers[].q", "q must be a number or \"inf\"");
      r.q = std::numeric_limits<double>::infinity();
    } else {
      r.q = q.get<double>();
    }
    r.d = l.at("d").get<double>();
    if (!(r.q > 0.0)) config_error("widths.layers[].q", "q must be positive");
    if (!(r.d > 0.0)) config_error("widths.layers[].d", "d must be positive");
    layers.push_back(r);
  }
  const auto widths = recommend_widths(n, layers, c);
  const double rate = rate_exponent(layers);

  json jl = json::array();
  for (const auto& l : layers) {
    jl.push_back({{"q", std::isinf(l.q) ? json("inf") : json(l.q)}, {"d", l.d}});
  }
  prepare_out(g);
  write_resolved(g, "widths", {{"n", n}, {"c", c}, {"layers", jl}});
  const json summary = {{"command", "widths"}, {"n", n}, {"widths", widths}, {"rate_exponent", rate}};
  write_json_file(g.out / "widths.json", summary);
  for (std::size_t l = 0; l < widths.size(); ++l) {
    std::cerr << "layer " << l + 1 << ": D = " << widths[l] << '\n';
  }
  std::cerr << "rate exponent: " << rate << '\n';
  print_summary(summary);
}

}  // namespace mlkm::cli
