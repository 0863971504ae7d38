#pragma once

#include "mlkm/data.hpp"
#include "mlkm/network.hpp"
#include "mlkm/predictor.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <vector>

namespace mlkm {

/// Random partition of {0..n-1} into L folds plus the L rotational orders.
/// rotations[j][l] is the fold used by layer l when training submodel j,
/// namely (j + l) mod L.
struct FoldPlan {
  std::size_t n = 0;
  std::vector<std::vector<std::size_t>> folds;
  std::vector<std::vector<std::size_t>> rotations;

  std::size_t num_folds() const noexcept { return folds.size(); }
  const std::vector<std::size_t>& fold_for(std::size_t rotation, std::size_t layer) const {
    return folds[rotations[rotation][layer]];
  }
};

/// Fold sizes differ by at most one; the remainder goes to the lowest folds.
FoldPlan make_fold_plan(std::size_t n, std::size_t num_folds, std::uint64_t seed);

struct TrainConfig {
  double learning_rate = 1e-2;
  double ridge = 0.0;
  std::size_t patience = 50;
  double improvement_tol = 1e-4;
  std::size_t max_epochs = 10000;
  std::size_t inner_steps = 1;  // gradient steps per (rotation, layer) visit
  double lr_decay = 1.0;        // step size at epoch e is learning_rate * lr_decay^e
  std::size_t batch_size = 0;   // joint SGD only; 0 means full batch
  bool shared_init = false;     // one initial draw shared by every rotation
  std::uint64_t seed = 0;
  std::size_t threads = 1;

  void validate() const;
};

void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);

struct EpochRecord {
  std::size_t epoch = 0;
  double overall_loss = 0.0;
  std::vector<double> rotation_losses;
  double wall_seconds = 0.0;
};

struct TrainLog {
  std::vector<EpochRecord> epochs;
  bool converged = false;  // false means max_epochs was hit

  std::size_t epochs_run() const noexcept { return epochs.size(); }
  /// One JSON object per line.
  void write_jsonl(std::ostream& out) const;
};

/// Tracks the "no significant improvement for `patience` epochs" rule.
class PlateauDetector {
 public:
  PlateauDetector(std::size_t patience, double tol) : patience_(patience), tol_(tol) {}

  /// Records one epoch's loss; returns true once the loss has failed to
  /// improve on the best value by more than tol (relatively) for
  /// `patience` consecutive epochs.
  bool update(double loss);
  double best() const noexcept { return best_; }

 private:
  std::size_t patience_;
  double tol_;
  double best_ = std::numeric_limits<double>::infinity();
  std::size_t stalled_ = 0;
};

/// A single trained machine (frozen network plus one weight set).
class NetworkModel : public Predictor {
 public:
  NetworkModel(Network net, Weights weights);

  const Network& network() const noexcept { return net_; }
  const Weights& weights() const noexcept { return weights_; }

  std::size_t input_dim() const override { return net_.arch.input_dim; }
  Eigen::VectorXd predict_batch(const Eigen::MatrixXd& x) const override;
  std::optional<Eigen::MatrixXd> param_jacobian(const Eigen::MatrixXd& x) const override;

 private:
  Network net_;
  Weights weights_;
};

/// The L rotation-indexed submodels sharing one network; predictions are
/// the arithmetic mean of the submodels.
class CrossFitModel : public Predictor {
 public:
  CrossFitModel(Network net, std::vector<Weights> submodels, TrainLog log = {});

  const Network& network() const noexcept { return net_; }
  const std::vector<Weights>& submodels() const noexcept { return submodels_; }
  const TrainLog& log() const noexcept { return log_; }

  std::size_t input_dim() const override { return net_.arch.input_dim; }
  Eigen::VectorXd predict_batch(const Eigen::MatrixXd& x) const override;

  /// Gradient with respect to all submodels' parameters concatenated in
  /// rotation order; each block is 1/L times that submodel's Jacobian.
  std::optional<Eigen::MatrixXd> param_jacobian(const Eigen::MatrixXd& x) const override;

 private:
  Network net_;
  std::vector<Weights> submodels_;
  TrainLog log_;
};

double predict_crossfit(const CrossFitModel& model, const Eigen::Ref<const Eigen::VectorXd>& x);

/// Alternating direction descent with subsamples. For every rotation j and
/// layer l, the weights of layer group l in submodel j take gradient steps
/// on the squared loss over fold rotations[j][l] only, with the other
/// groups held fixed. Epochs repeat until the mean loss of the submodels
/// over all n points plateaus or max_epochs is reached.
CrossFitModel adds_fit(const Dataset& data, const Network& net, const FoldPlan& plan,
                       const TrainConfig& config);

struct SgdResult {
  Weights weights;
  Weights initial;
  std::vector<double> loss;  // penalized full-data loss after each epoch
  bool converged = false;
};

/// Joint descent on all layers at once, full batch or mini-batch.
/// Throws DivergenceDetected when the loss becomes non-finite.
SgdResult sgd_fit(const Dataset& data, const Network& net, const TrainConfig& config);

/// Smoothness index and input dimension of one layer.
struct LayerRate {
  double q = 1.0;  // may be +infinity
  double d = 1.0;
};

/// D_l = ceil(c * n^(2q/(2q+d)) * ln n), at least 1; q = inf gives exponent 1.
std::vector<std::size_t> recommend_widths(std::size_t n, const std::vector<LayerRate>& layers,
                                          double c);

/// min over l of (2 q_l / (2 q_l + d_l)) * prod_{t > l} min(q_t, 1).
double rate_exponent(const std::vector<LayerRate>& layers);

}  // namespace mlkm
