#include "mlkm/experiment.hpp"

#include "mlkm/baselines.hpp"
#include "mlkm/csv.hpp"
#include "mlkm/error.hpp"
#include "mlkm/random.hpp"
#include "mlkm/serialize.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <memory>
#include <numeric>
#include <ostream>
#include <sstream>
#include <thread>

namespace mlkm {

using nlohmann::json;

namespace {

constexpr std::pair<ModelKind, const char*> kModelNames[] = {
    {ModelKind::Krr, "krr"},   {ModelKind::Rf, "rf"},          {ModelKind::Mlkm, "mlkm"},
    {ModelKind::Rkm, "rkm"},   {ModelKind::SgdMlkm, "sgd-mlkm"},
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

double mean(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t k = v.size() / 2;
  return v.size() % 2 ? v[k] : 0.5 * (v[k - 1] + v[k]);
}

bool iterative(ModelKind k) {
  return k == ModelKind::Mlkm || k == ModelKind::Rkm || k == ModelKind::SgdMlkm;
}

}  // namespace

std::string to_string(ModelKind kind) {
  for (const auto& [k, name] : kModelNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

ModelKind parse_model_kind(const std::string& name) {
  for (const auto& [k, n] : kModelNames) {
    if (name == n) return k;
  }
  fail(Errc::InvalidArgument, "unknown model '" + name + "'");
}

void ExperimentSpec::validate() const {
  if (roster.empty()) fail(Errc::InvalidArgument, "model roster is empty");
  if (!scenario && dataset.empty()) fail(Errc::InvalidArgument, "need a scenario or a dataset");
  if (scenario) scenario->validate();
  if (replications < 1) fail(Errc::InvalidArgument, "replications must be >= 1");
  if (lambda_grid.empty()) fail(Errc::InvalidArgument, "lambda grid is empty");
  if (cv_folds < 2) fail(Errc::InvalidArgument, "cv folds must be >= 2");
  if (rf_features < 1) fail(Errc::InvalidWidth, "rf features must be >= 1");
  if (test_size < 1) fail(Errc::InvalidArgument, "test size must be >= 1");
  if (alpha && !(*alpha > 0.0 && *alpha < 1.0)) fail(Errc::InvalidArgument, "alpha must lie in (0, 1)");
  if (alpha && calib_size < 1) fail(Errc::InvalidArgument, "alpha needs calib_size >= 1");
  baseline_kernel.validate();
  train.validate();
  const std::size_t d = scenario ? scenario->d : 0;
  const bool nets = std::any_of(roster.begin(), roster.end(), iterative);
  if (nets) {
    const auto arch = Architecture::parse(architecture, kernels);
    if (scenario && arch.input_dim != d) {
      fail(Errc::DimMismatch, "architecture input " + std::to_string(arch.input_dim) +
                                  " does not match scenario dimension " + std::to_string(d));
    }
  }
  if (scenario && fit_size + calib_size > scenario->n) {
    fail(Errc::InvalidArgument, "fit_size + calib_size exceeds the scenario size");
  }
}

void to_json(json& j, const ExperimentSpec& s) {
  json roster = json::array();
  for (auto k : s.roster) roster.push_back(to_string(k));
  json kernels = json::array();
  for (const auto& k : s.kernels) kernels.push_back(to_json(k));
  j = json{{"roster", roster},
           {"architecture", s.architecture},
           {"kernels", kernels},
           {"baseline_kernel", to_json(s.baseline_kernel)},
           {"rf_features", s.rf_features},
           {"lambda_grid", s.lambda_grid},
           {"cv_folds", s.cv_folds},
           {"train", s.train},
           {"fit_size", s.fit_size},
           {"calib_size", s.calib_size},
           {"test_size", s.test_size},
           {"replications", s.replications},
           {"seed", s.seed},
           {"threads", s.threads}};
  if (s.scenario) j["scenario"] = *s.scenario;
  if (!s.dataset.empty()) j["dataset"] = s.dataset;
  if (!s.target_column.empty()) j["target_column"] = s.target_column;
  if (s.alpha) j["alpha"] = *s.alpha;
}

void from_json(const json& j, ExperimentSpec& s) {
  static const char* const known[] = {
      "scenario",     "dataset",    "target_column", "roster",    "architecture",
      "kernels",      "baseline_kernel", "rf_features", "lambda_grid", "cv_folds",
      "train",        "fit_size",   "calib_size",    "test_size", "alpha",
      "replications", "seed",       "threads"};
  for (const auto& [key, _] : j.items()) {
    if (std::find(std::begin(known), std::end(known), key) == std::end(known)) {
      fail(Errc::InvalidArgument, "unknown experiment key '" + key + "'");
    }
  }
  if (j.contains("scenario")) s.scenario = j.at("scenario").get<Scenario>();
  s.dataset = j.value("dataset", s.dataset);
  s.target_column = j.value("target_column", s.target_column);
  if (j.contains("roster")) {
    s.roster.clear();
    for (const auto& r : j.at("roster")) s.roster.push_back(parse_model_kind(r.get<std::string>()));
  }
  s.architecture = j.value("architecture", s.architecture);
  if (j.contains("kernels")) {
    s.kernels.clear();
    for (const auto& k : j.at("kernels")) s.kernels.push_back(kernel_from_json(k));
  }
  if (j.contains("baseline_kernel")) s.baseline_kernel = kernel_from_json(j.at("baseline_kernel"));
  s.rf_features = j.value("rf_features", s.rf_features);
  s.lambda_grid = j.value("lambda_grid", s.lambda_grid);
  s.cv_folds = j.value("cv_folds", s.cv_folds);
  if (j.contains("train")) j.at("train").get_to(s.train);
  s.fit_size = j.value("fit_size", s.fit_size);
  s.calib_size = j.value("calib_size", s.calib_size);
  s.test_size = j.value("test_size", s.test_size);
  if (j.contains("alpha") && !j.at("alpha").is_null()) s.alpha = j.at("alpha").get<double>();
  s.replications = j.value("replications", s.replications);
  s.seed = j.value("seed", s.seed);
  s.threads = j.value("threads", s.threads);
}

std::size_t model_storage(ModelKind kind, std::size_t n, std::size_t d, std::size_t rf_features,
                          const Architecture& arch) {
  switch (kind) {
    case ModelKind::Krr: return n * n + n * d;
    case ModelKind::Rf: return n * rf_features + rf_features * d + 2 * rf_features;
    default: return storage_count(arch);
  }
}

const ModelReport* BenchmarkReport::find(ModelKind kind) const {
  for (const auto& m : models) {
    if (m.kind == kind) return &m;
  }
  return nullptr;
}

namespace {

struct Split {
  Dataset fit;
  Dataset calib;
  Dataset test;
};

Split make_split(const ExperimentSpec& spec, std::size_t rep) {
  Split s;
  Dataset pool;
  if (spec.scenario) {
    Scenario sc = *spec.scenario;
    sc.replicate = rep == 0 ? sc.replicate : derive_seed(sc.replicate, rep);
    pool = generate(sc);
    s.test = generate_test(sc, spec.test_size);
  } else {
    const Dataset all = load_csv(spec.dataset, spec.target_column, true);
    if (all.size() <= spec.test_size) {
      fail(Errc::TooFewSamples, "dataset has " + std::to_string(all.size()) +
                                    " rows, cannot hold out " + std::to_string(spec.test_size));
    }
    auto [test_rows, rest] = random_split(all.size(), spec.test_size, derive_seed(spec.seed, 1000 + rep));
    s.test = all.subset(test_rows);
    pool = all.subset(rest);
  }
  const std::size_t fit_n = spec.fit_size > 0 ? spec.fit_size : pool.size() - spec.calib_size;
  if (fit_n + spec.calib_size > pool.size() || fit_n < 2) {
    fail(Errc::TooFewSamples, "not enough training rows for the requested split");
  }
  auto [fit_rows, rest] = random_split(pool.size(), fit_n, derive_seed(spec.seed, 2000 + rep));
  rest.resize(spec.calib_size);
  s.fit = pool.subset(fit_rows);
  s.calib = pool.subset(rest);
  return s;
}

}  // namespace

FittedModel fit_model(ModelKind kind, const ExperimentSpec& spec, const Dataset& fit,
                      std::uint64_t seed) {
  FittedModel out;
  const auto d = fit.dim();
  switch (kind) {
    case ModelKind::Krr: {
      const auto cv = cv_select_lambda(fit.x, fit.y, krr_fitter(spec.baseline_kernel),
                                       spec.lambda_grid, spec.cv_folds, derive_seed(seed, 1),
                                       spec.threads);
      out.lambda = cv.best_lambda;
      out.model = std::make_unique<KrrModel>(krr_fit(fit.x, fit.y, spec.baseline_kernel, cv.best_lambda));
      return out;
    }
    case ModelKind::Rf: {
      const auto fm = spectral_sample(spec.baseline_kernel, d, spec.rf_features, derive_seed(seed, 2));
      const auto cv = cv_select_lambda(fit.x, fit.y, rf_ridge_fitter(fm), spec.lambda_grid,
                                       spec.cv_folds, derive_seed(seed, 1), spec.threads);
      out.lambda = cv.best_lambda;
      out.model = std::make_unique<RfRidgeModel>(rf_ridge_fit(fit.x, fit.y, fm, cv.best_lambda));
      return out;
    }
    case ModelKind::Mlkm:
    case ModelKind::Rkm: {
      const auto arch =
          Architecture::parse(spec.architecture, spec.kernels, kind == ModelKind::Rkm);
      const Network net = make_network(arch, derive_seed(seed, 3));
      const FoldPlan plan = make_fold_plan(fit.size(), arch.num_layers(), derive_seed(seed, 4));
      TrainConfig cfg = spec.train;
      cfg.seed = derive_seed(seed, 5);
      cfg.threads = spec.threads;
      auto model = std::make_unique<CrossFitModel>(adds_fit(fit, net, plan, cfg));
      out.epochs = model->log().epochs_run();
      for (const auto& e : model->log().epochs) out.curve.push_back(e.overall_loss);
      out.model = std::move(model);
      return out;
    }
    case ModelKind::SgdMlkm: {
      const auto arch = Architecture::parse(spec.architecture, spec.kernels, false);
      const Network net = make_network(arch, derive_seed(seed, 3));
      TrainConfig cfg = spec.train;
      cfg.seed = derive_seed(seed, 5);
      auto res = sgd_fit(fit, net, cfg);
      out.epochs = res.loss.size();
      out.curve = res.loss;
      out.model = std::make_unique<NetworkModel>(net, std::move(res.weights));
      return out;
    }
  }
  fail(Errc::InvalidArgument, "unhandled model kind");
}

namespace {

json environment_record() {
  return {{"compiler", __VERSION__},
          {"cxx_standard", static_cast<long>(__cplusplus)},
          {"hardware_threads", std::thread::hardware_concurrency()},
#ifdef NDEBUG
          {"build", "release"}
#else
          {"build", "debug"}
#endif
  };
}

}  // namespace

BenchmarkReport run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  BenchmarkReport report;
  report.spec = spec;
  report.environment = environment_record();

  std::vector<ModelReport> models(spec.roster.size());
  std::vector<std::vector<double>> fit_times(spec.roster.size());
  std::vector<std::vector<double>> epoch_counts(spec.roster.size());
  std::vector<std::vector<double>> lengths(spec.roster.size());
  std::vector<std::vector<double>> coverages(spec.roster.size());
  for (std::size_t k = 0; k < spec.roster.size(); ++k) {
    models[k].kind = spec.roster[k];
    models[k].ok = true;
  }

  std::size_t data_dim = 0;
  for (std::size_t rep = 0; rep < spec.replications; ++rep) {
    const Split split = make_split(spec, rep);
    data_dim = split.fit.dim();
    report.train_size = split.fit.size();
    report.test_size = split.test.size();
    const std::uint64_t seed = derive_seed(spec.seed, rep);
    for (std::size_t k = 0; k < spec.roster.size(); ++k) {
      ModelReport& mr = models[k];
      if (!mr.ok) continue;
      try {
        const auto start = std::chrono::steady_clock::now();
        FittedModel f = fit_model(mr.kind, spec, split.fit, seed);
        fit_times[k].push_back(seconds_since(start));
        epoch_counts[k].push_back(static_cast<double>(f.epochs));
        if (rep == 0) mr.loss_curve = f.curve;
        mr.selected_lambda = f.lambda;
        mr.train_mse.push_back(mean_squared_error(f.model->predict_batch(split.fit.x), split.fit.y));
        mr.test_mse.push_back(mean_squared_error(f.model->predict_batch(split.test.x), split.test.y));
        if (spec.alpha) {
          const auto var = fit_variance(*f.model, split.fit.x, split.fit.y);
          const auto cal = calibrate(*f.model, var, split.calib.x, split.calib.y, *spec.alpha);
          const auto ivs = predict_intervals(*f.model, var, cal, split.test.x);
          std::size_t covered = 0;
          double len = 0.0;
          for (std::size_t i = 0; i < ivs.size(); ++i) {
            covered += ivs[i].contains(split.test.y(static_cast<Eigen::Index>(i)));
            len += ivs[i].length();
          }
          coverages[k].push_back(static_cast<double>(covered) / static_cast<double>(ivs.size()));
          lengths[k].push_back(len / static_cast<double>(ivs.size()));
          mr.weight_mode = to_string(var.mode);
        }
      } catch (const std::exception& e) {
        mr.ok = false;
        mr.error = e.what();
      }
    }
  }

  const auto arch_for = [&](ModelKind kind) {
    return Architecture::parse(spec.architecture, spec.kernels, kind == ModelKind::Rkm);
  };
  for (std::size_t k = 0; k < models.size(); ++k) {
    ModelReport& mr = models[k];
    if (!mr.ok) continue;
    mr.mean_train_mse = mean(mr.train_mse);
    mr.mean_test_mse = mean(mr.test_mse);
    mr.fit_seconds = mean(fit_times[k]);
    const Architecture arch = iterative(mr.kind) ? arch_for(mr.kind) : Architecture{};
    mr.storage = model_storage(mr.kind, report.train_size, data_dim, spec.rf_features, arch);
    if (iterative(mr.kind)) {
      const double epochs = mean(epoch_counts[k]);
      mr.epochs = static_cast<std::size_t>(std::lround(epochs));
      mr.epoch_seconds = epochs > 0 ? mr.fit_seconds / epochs : 0.0;
    }
    if (spec.alpha) {
      mr.coverage = mean(coverages[k]);
      mr.band_length = mean(lengths[k]);
    }
  }
  report.models = std::move(models);
  return report;
}

namespace {

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json optional_json(const std::optional<double>& v) {
  return v ? finite_or_null(*v) : json(nullptr);
}

std::string fixed(double v, int digits) {
  if (!std::isfinite(v)) return "inf";
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

}  // namespace

json BenchmarkReport::to_json() const {
  json rows = json::array();
  for (const auto& m : models) {
    json r = {{"model", mlkm::to_string(m.kind)}, {"ok", m.ok}};
    if (!m.ok) {
      r["error"] = m.error;
      rows.push_back(r);
      continue;
    }
    r["train_mse"] = m.mean_train_mse;
    r["test_mse"] = m.mean_test_mse;
    r["train_mse_per_replication"] = m.train_mse;
    r["test_mse_per_replication"] = m.test_mse;
    r["fit_seconds"] = m.fit_seconds;
    r["storage"] = m.storage;
    if (iterative(m.kind)) {
      r["epochs"] = m.epochs;
      r["epoch_seconds"] = m.epoch_seconds;
    }
    if (m.selected_lambda) r["lambda"] = *m.selected_lambda;
    if (m.coverage) {
      r["coverage"] = *m.coverage;
      r["band_length"] = optional_json(m.band_length);
      r["weight_mode"] = m.weight_mode;
    }
    rows.push_back(r);
  }
  return {{"spec", spec},
          {"environment", environment},
          {"train_size", train_size},
          {"test_size", test_size},
          {"models", rows}};
}

void BenchmarkReport::write_table(std::ostream& os) const {
  const bool bands = std::any_of(models.begin(), models.end(),
                                 [](const ModelReport& m) { return m.coverage.has_value(); });
  std::vector<std::vector<std::string>> cells;
  std::vector<std::string> head{"Model", "Train MSE", "Test MSE", "Time (s)", "Storage"};
  if (bands) head.push_back("Length (Coverage)");
  cells.push_back(head);
  for (const auto& m : models) {
    std::vector<std::string> row{mlkm::to_string(m.kind)};
    if (!m.ok) {
      row.push_back("failed: " + m.error);
      cells.push_back(row);
      continue;
    }
    row.push_back(fixed(m.mean_train_mse, 3));
    row.push_back(fixed(m.mean_test_mse, 3));
    row.push_back(fixed(iterative(m.kind) ? m.epoch_seconds : m.fit_seconds, 4));
    row.push_back(std::to_string(m.storage));
    if (bands) {
      row.push_back(m.coverage ? fixed(m.band_length.value_or(0.0), 3) + " (" +
                                     fixed(100.0 * *m.coverage, 2) + "%)"
                               : "-");
    }
    cells.push_back(row);
  }
  std::vector<std::size_t> width(head.size(), 0);
  for (const auto& row : cells) {
    if (row.size() != head.size()) continue;
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  for (std::size_t r = 0; r < cells.size(); ++r) {
    const auto& row = cells[r];
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c > 0) os << "  ";
      if (row.size() != head.size()) {
        os << row[c];
      } else if (c == 0) {
        os << std::left << std::setw(static_cast<int>(width[c])) << row[c];
      } else {
        os << std::right << std::setw(static_cast<int>(width[c])) << row[c];
      }
    }
    os << '\n';
    if (r == 0) {
      std::size_t total = 0;
      for (auto w : width) total += w + 2;
      os << std::string(total - 2, '-') << '\n';
    }
  }
  os << "Time is per epoch for iterative models and per fit otherwise.\n";
}

void BenchmarkReport::write_series(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  for (const auto& m : models) {
    if (!m.ok || m.loss_curve.empty()) continue;
    std::ofstream out(dir / (mlkm::to_string(m.kind) + "_loss.csv"));
    if (!out) fail(Errc::InvalidArgument, "cannot write series into '" + dir.string() + "'");
    out << "epoch,loss\n" << std::setprecision(17);
    for (std::size_t e = 0; e < m.loss_curve.size(); ++e) out << e + 1 << ',' << m.loss_curve[e] << '\n';
  }
}

std::pair<double, double> fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) fail(Errc::InvalidArgument, "need >= 2 paired points");
  const double mx = mean(x);
  const double my = mean(y);
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (sxx <= 0.0) fail(Errc::InvalidArgument, "x values are all equal");
  const double slope = sxy / sxx;
  return {slope, my - slope * mx};
}

namespace {

double time_once(const ScalingSpec& spec, std::size_t n, std::uint64_t seed) {
  Scenario sc = spec.scenario;
  sc.n = n;
  sc.seed = seed;
  const Dataset data = generate(sc);
  if (spec.model == ModelKind::Krr) {
    const auto start = std::chrono::steady_clock::now();
    const auto model = krr_fit(data.x, data.y, spec.baseline_kernel, spec.lambda);
    (void)model;
    return seconds_since(start);
  }
  const auto arch =
      Architecture::parse(spec.architecture, spec.kernels, spec.model == ModelKind::Rkm);
  const Network net = make_network(arch, derive_seed(seed, 1));
  const FoldPlan plan = make_fold_plan(n, arch.num_layers(), derive_seed(seed, 2));
  TrainConfig cfg;
  cfg.max_epochs = spec.epochs;
  cfg.patience = spec.epochs + 1;
  cfg.seed = seed;
  const auto start = std::chrono::steady_clock::now();
  const auto model = adds_fit(data, net, plan, cfg);
  return seconds_since(start) / static_cast<double>(model.log().epochs_run());
}

}  // namespace

ScalingResult scaling_study(const ScalingSpec& spec) {
  if (spec.n_grid.size() < 3) fail(Errc::InvalidArgument, "scaling grid needs >= 3 points");
  const auto [lo, hi] = std::minmax_element(spec.n_grid.begin(), spec.n_grid.end());
  if (*hi < 4 * *lo) fail(Errc::InvalidArgument, "scaling grid must span at least 4x");
  if (spec.repeats < 5) fail(Errc::InvalidArgument, "scaling study needs >= 5 repeats");
  if (spec.model != ModelKind::Krr && spec.model != ModelKind::Mlkm && spec.model != ModelKind::Rkm) {
    fail(Errc::InvalidArgument, "scaling study supports krr, mlkm and rkm");
  }
  if (spec.epochs < 1) fail(Errc::InvalidArgument, "scaling study needs >= 1 epoch per run");

  ScalingResult out;
  std::vector<double> ln_n;
  std::vector<double> ln_t;
  for (std::size_t g = 0; g < spec.n_grid.size(); ++g) {
    const std::size_t n = spec.n_grid[g];
    const std::uint64_t seed = derive_seed(spec.seed, g);
    time_once(spec, n, seed);  // warm-up
    ScalingPoint pt;
    pt.n = n;
    for (std::size_t r = 0; r < spec.repeats; ++r) pt.seconds.push_back(time_once(spec, n, seed));
    pt.median = median(pt.seconds);
    std::vector<double> dev;
    for (double s : pt.seconds) dev.push_back(std::abs(s - pt.median));
    pt.spread = pt.median > 0.0 ? median(dev) / pt.median : 0.0;
    if (pt.spread > spec.max_spread) {
      fail(Errc::TimingUnstable, "timings at n=" + std::to_string(n) + " vary by " +
                                     fixed(100.0 * pt.spread, 1) + "% (median absolute deviation)");
    }
    ln_n.push_back(std::log(static_cast<double>(n)));
    ln_t.push_back(std::log(pt.median));
    out.points.push_back(std::move(pt));
  }
  std::tie(out.slope, out.intercept) = fit_line(ln_n, ln_t);
  return out;
}

json to_json(const ScalingResult& r) {
  json pts = json::array();
  for (const auto& p : r.points) {
    pts.push_back({{"n", p.n}, {"median_seconds", p.median}, {"spread", p.spread}, {"seconds", p.seconds}});
  }
  return {{"slope", r.slope}, {"intercept", r.intercept}, {"points", pts}};
}

std::vector<CoverageRow> coverage_table(const std::vector<CoverageCell>& grid, std::uint64_t seed,
                                        std::size_t threads) {
  std::vector<CoverageRow> rows;
  rows.reserve(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto& cell = grid[i];
    CoverageRow row;
    row.label = cell.label;
    row.result = coverage_study(cell.scenario, cell.alpha, cell.replications, derive_seed(seed, i), threads);
    row.flagged = !row.result.within_band(3.0);
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_coverage_table(std::ostream& os, const std::vector<CoverageRow>& rows) {
  os << std::left << std::setw(24) << "Scenario" << std::right << std::setw(7) << "alpha"
     << std::setw(7) << "m" << std::setw(8) << "reps" << std::setw(10) << "coverage" << std::setw(8)
     << "SE" << std::setw(18) << "band" << std::setw(10) << "length" << "  flag\n";
  for (const auto& r : rows) {
    const auto& c = r.result;
    os << std::left << std::setw(24) << r.label << std::right << std::setw(7) << fixed(c.alpha, 3)
       << std::setw(7) << c.m << std::setw(8) << c.replications << std::setw(10)
       << fixed(c.coverage, 4) << std::setw(8) << fixed(c.se, 4) << std::setw(18)
       << ("[" + fixed(c.band_low, 3) + ", " + fixed(c.band_high, 3) + "]") << std::setw(10)
       << fixed(c.mean_length, 3) << "  " << (r.flagged ? "OUTSIDE" : "ok") << '\n';
  }
}

}  // namespace mlkm
