#pragma once

#include "mlkm/conformal.hpp"
#include "mlkm/kernel.hpp"
#include "mlkm/simdata.hpp"
#include "mlkm/training.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace mlkm {

enum class ModelKind { Krr, Rf, Mlkm, Rkm, SgdMlkm };

std::string to_string(ModelKind kind);
ModelKind parse_model_kind(const std::string& name);

/// One comparison run. Training rows are the first `fit_size` rows of a
/// random split of the training data (all rows minus `calib_size` when 0);
/// the calibration rows are only used when `alpha` is set.
struct ExperimentSpec {
  std::optional<Scenario> scenario;
  std::string dataset;  // CSV path, used when scenario is empty
  std::string target_column;
  std::vector<ModelKind> roster{ModelKind::Krr, ModelKind::Rf, ModelKind::Mlkm, ModelKind::Rkm};
  std::string architecture = "4-32-8-1";
  std::vector<KernelSpec> kernels{KernelSpec::gaussian(1.0)};  // per layer, or one for all
  KernelSpec baseline_kernel = KernelSpec::gaussian(1.0);       // KRR and RF
  std::size_t rf_features = 500;
  std::vector<double> lambda_grid{1e-8, 1e-7, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1};
  std::size_t cv_folds = 5;
  TrainConfig train;
  std::size_t fit_size = 0;
  std::size_t calib_size = 0;
  std::size_t test_size = 1000;  // fresh draws for scenarios, held-out rows for files
  std::optional<double> alpha;
  std::size_t replications = 1;
  std::uint64_t seed = 0;
  std::size_t threads = 1;

  /// Throws InvalidArgument / InvalidWidth / IncompatibleScenario.
  void validate() const;
};

void to_json(nlohmann::json& j, const ExperimentSpec& s);
void from_json(const nlohmann::json& j, ExperimentSpec& s);

struct ModelReport {
  ModelKind kind = ModelKind::Mlkm;
  bool ok = false;
  std::string error;                 // failure message when !ok
  std::vector<double> train_mse;     // one per replication
  std::vector<double> test_mse;
  double mean_train_mse = 0.0;
  double mean_test_mse = 0.0;
  double fit_seconds = 0.0;          // mean wall clock of a full fit
  double epoch_seconds = 0.0;        // mean per-epoch time, iterative models only
  std::size_t epochs = 0;            // mean epochs run, iterative models only
  std::size_t storage = 0;
  std::optional<double> selected_lambda;  // last replication, ridge baselines only
  std::optional<double> band_length;
  std::optional<double> coverage;
  std::string weight_mode;
  std::vector<double> loss_curve;    // first replication, iterative models only
};

struct BenchmarkReport {
  nlohmann::json spec;
  nlohmann::json environment;
  std::size_t train_size = 0;
  std::size_t test_size = 0;
  std::vector<ModelReport> models;  // roster order

  const ModelReport* find(ModelKind kind) const;
  nlohmann::json to_json() const;
  /// Aligned text table, one row per model.
  void write_table(std::ostream& os) const;
  /// "<model>_loss.csv" (epoch, loss) for every iterative model.
  void write_series(const std::filesystem::path& dir) const;
};

struct FittedModel {
  std::unique_ptr<Predictor> model;
  std::size_t epochs = 0;          // iterative models only
  std::vector<double> curve;       // per-epoch training loss, iterative models only
  std::optional<double> lambda;    // cross-validated penalty, ridge baselines only
};

/// Fits one roster model on `fit` with the spec's settings. Ridge baselines
/// pick lambda by cross-validation over spec.lambda_grid.
FittedModel fit_model(ModelKind kind, const ExperimentSpec& spec, const Dataset& fit,
                      std::uint64_t seed);

/// Trains every roster model on identical splits and seeds. A model that
/// throws is recorded as failed; the remaining models still run.
BenchmarkReport run_experiment(const ExperimentSpec& spec);

/// Storage in stored reals: KRR n^2 + n d (Gram plus design), RF n D + D d
/// + 2D, network models storage_count of their architecture.
std::size_t model_storage(ModelKind kind, std::size_t n, std::size_t d, std::size_t rf_features,
                          const Architecture& arch);

struct ScalingSpec {
  ModelKind model = ModelKind::Mlkm;  // Mlkm: per-epoch time; Krr: per-fit time
  std::vector<std::size_t> n_grid{1000, 2000, 4000, 8000};
  Scenario scenario;                  // n is overridden per grid point
  std::string architecture = "4-32-8-1";
  std::vector<KernelSpec> kernels{KernelSpec::gaussian(1.0)};
  KernelSpec baseline_kernel = KernelSpec::gaussian(1.0);
  double lambda = 1e-3;
  std::size_t epochs = 5;             // epochs per timed MLKM run
  std::size_t repeats = 5;
  double max_spread = 0.5;            // MAD / median above this is TimingUnstable
  std::uint64_t seed = 0;
};

struct ScalingPoint {
  std::size_t n = 0;
  std::vector<double> seconds;  // per repeat, warm-up excluded
  double median = 0.0;
  double spread = 0.0;          // median absolute deviation / median
};

struct ScalingResult {
  std::vector<ScalingPoint> points;
  double slope = 0.0;
  double intercept = 0.0;
};

/// Least-squares fit of ln(seconds) on ln(n) over per-point medians.
/// Throws InvalidArgument unless the grid has >= 3 points spanning >= 4x,
/// and TimingUnstable when any point's spread exceeds max_spread.
ScalingResult scaling_study(const ScalingSpec& spec);

nlohmann::json to_json(const ScalingResult& result);

/// Ordinary least-squares slope and intercept of y on x.
std::pair<double, double> fit_line(const std::vector<double>& x, const std::vector<double>& y);

struct CoverageCell {
  std::string label;
  CoverageScenario scenario;
  double alpha = 0.05;
  std::size_t replications = 1000;
};

struct CoverageRow {
  std::string label;
  CoverageResult result;
  bool flagged = false;  // outside the band widened by 3 standard errors
};

std::vector<CoverageRow> coverage_table(const std::vector<CoverageCell>& grid,
                                        std::uint64_t seed, std::size_t threads = 1);

void write_coverage_table(std::ostream& os, const std::vector<CoverageRow>& rows);

}  // namespace mlkm
