#include "mlkm/training.hpp"

#include "mlkm/error.hpp"
#include "mlkm/parallel.hpp"
#include "mlkm/random.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <ostream>
#include <string>

namespace mlkm {

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    fail(Errc::InvalidArgument, "learning_rate must be a finite value >= 0");
  }
  if (!(ridge >= 0.0)) fail(Errc::InvalidArgument, "ridge must be >= 0");
  if (patience == 0) fail(Errc::InvalidArgument, "patience must be >= 1");
  if (!(improvement_tol >= 0.0)) fail(Errc::InvalidArgument, "improvement_tol must be >= 0");
  if (max_epochs == 0) fail(Errc::InvalidArgument, "max_epochs must be >= 1");
  if (inner_steps == 0) fail(Errc::InvalidArgument, "inner_steps must be >= 1");
  if (!(lr_decay > 0.0) || lr_decay > 1.0) fail(Errc::InvalidArgument, "lr_decay must be in (0, 1]");
}

void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = nlohmann::json{{"learning_rate", c.learning_rate}, {"ridge", c.ridge},
                     {"patience", c.patience},           {"improvement_tol", c.improvement_tol},
                     {"max_epochs", c.max_epochs},       {"inner_steps", c.inner_steps},
                     {"lr_decay", c.lr_decay},           {"batch_size", c.batch_size},
                     {"shared_init", c.shared_init},     {"seed", c.seed}};
}

void from_json(const nlohmann::json& j, TrainConfig& c) {
  static const char* const known[] = {"learning_rate", "ridge",      "patience",   "improvement_tol",
                                      "max_epochs",    "inner_steps", "lr_decay",  "batch_size",
                                      "shared_init",   "seed",        "threads"};
  for (const auto& [key, _] : j.items()) {
    if (std::find(std::begin(known), std::end(known), key) == std::end(known)) {
      fail(Errc::InvalidArgument, "unknown training key '" + key + "'");
    }
  }
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.ridge = j.value("ridge", c.ridge);
  c.patience = j.value("patience", c.patience);
  c.improvement_tol = j.value("improvement_tol", c.improvement_tol);
  c.max_epochs = j.value("max_epochs", c.max_epochs);
  c.inner_steps = j.value("inner_steps", c.inner_steps);
  c.lr_decay = j.value("lr_decay", c.lr_decay);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.shared_init = j.value("shared_init", c.shared_init);
  c.seed = j.value("seed", c.seed);
  c.threads = j.value("threads", c.threads);
}

void TrainLog::write_jsonl(std::ostream& out) const {
  for (const auto& e : epochs) {
    out << nlohmann::json{{"epoch", e.epoch},
                          {"overall_loss", e.overall_loss},
                          {"rotation_losses", e.rotation_losses},
                          {"wall_seconds", e.wall_seconds}}
               .dump()
        << '\n';
  }
}

bool PlateauDetector::update(double loss) {
  if (loss < best_ * (1.0 - tol_) || std::isinf(best_)) {
    best_ = loss;
    stalled_ = 0;
    return false;
  }
  ++stalled_;
  return stalled_ >= patience_;
}

NetworkModel::NetworkModel(Network net, Weights weights)
    : net_(std::move(net)), weights_(std::move(weights)) {
  net_.validate();
  check_congruent(net_.arch, weights_);
}

Eigen::VectorXd NetworkModel::predict_batch(const Eigen::MatrixXd& x) const {
  return forward_batch(net_, weights_, x);
}

std::optional<Eigen::MatrixXd> NetworkModel::param_jacobian(const Eigen::MatrixXd& x) const {
  return mlkm::param_jacobian(net_, weights_, x);
}

CrossFitModel::CrossFitModel(Network net, std::vector<Weights> submodels, TrainLog log)
    : net_(std::move(net)), submodels_(std::move(submodels)), log_(std::move(log)) {
  net_.validate();
  if (submodels_.empty()) fail(Errc::InvalidArgument, "cross-fit model needs a submodel");
  for (const auto& w : submodels_) check_congruent(net_.arch, w);
}

Eigen::VectorXd CrossFitModel::predict_batch(const Eigen::MatrixXd& x) const {
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(x.rows());
  for (const auto& w : submodels_) sum += forward_batch(net_, w, x);
  return sum / static_cast<double>(submodels_.size());
}

std::optional<Eigen::MatrixXd> CrossFitModel::param_jacobian(const Eigen::MatrixXd& x) const {
  const auto p = static_cast<Eigen::Index>(parameter_count(net_.arch));
  const auto count = static_cast<Eigen::Index>(submodels_.size());
  Eigen::MatrixXd jac(x.rows(), p * count);
  for (Eigen::Index j = 0; j < count; ++j) {
    jac.middleCols(j * p, p) =
        mlkm::param_jacobian(net_, submodels_[static_cast<std::size_t>(j)], x) /
        static_cast<double>(count);
  }
  return jac;
}

double predict_crossfit(const CrossFitModel& model, const Eigen::Ref<const Eigen::VectorXd>& x) {
  return model.predict(x);
}

namespace {

using Clock = std::chrono::steady_clock;

void check_data(const Dataset& data, const Network& net) {
  data.validate();
  if (data.size() == 0) fail(Errc::TooFewSamples, "training data is empty");
  if (data.dim() != net.arch.input_dim) {
    fail(Errc::DimMismatch, "data has " + std::to_string(data.dim()) +
                                " covariates, network expects " +
                                std::to_string(net.arch.input_dim));
  }
}

void apply_step(Weights& w, const std::vector<std::size_t>& members, const GradientBundle& g,
                double lr) {
  for (std::size_t k = 0; k < members.size(); ++k) w.mats[members[k]] -= lr * g.grads[k];
}

}  // namespace

CrossFitModel adds_fit(const Dataset& data, const Network& net, const FoldPlan& plan,
                       const TrainConfig& config) {
  config.validate();
  net.validate();
  check_data(data, net);
  const std::size_t layers = net.arch.num_layers();
  if (plan.num_folds() != layers) {
    fail(Errc::InvalidArgument, "fold plan has " + std::to_string(plan.num_folds()) +
                                    " folds but the network has " + std::to_string(layers) +
                                    " layers");
  }
  if (plan.n != data.size()) fail(Errc::DimMismatch, "fold plan was built for a different n");

  struct FoldCache {
    Eigen::MatrixXd features;
    Eigen::VectorXd y;
  };
  std::vector<FoldCache> fold_data;
  fold_data.reserve(layers);
  for (const auto& fold : plan.folds) {
    Dataset part = data.subset(fold);
    fold_data.push_back({input_features(net, part.x), std::move(part.y)});
  }
  const Eigen::MatrixXd all_features = input_features(net, data.x);

  std::vector<std::vector<std::size_t>> members(layers);
  for (std::size_t l = 0; l < layers; ++l) members[l] = group_members(net.arch, l);

  std::vector<Weights> sub(layers);
  for (std::size_t j = 0; j < layers; ++j) {
    sub[j] = init_weights(net.arch, derive_seed(config.seed, config.shared_init ? 0 : j));
  }

  TrainLog log;
  PlateauDetector plateau(config.patience, config.improvement_tol);
  const auto start = Clock::now();
  double lr = config.learning_rate;
  std::vector<double> rot_loss(layers);

  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    parallel_for(layers, config.threads, [&](std::size_t j) {
      Weights& w = sub[j];
      for (std::size_t l = 0; l < layers; ++l) {
        const FoldCache& fold = fold_data[plan.rotations[j][l]];
        for (std::size_t s = 0; s < config.inner_steps; ++s) {
          const auto g = layer_gradient_from_features(net, w, fold.features, fold.y, l, config.ridge);
          apply_step(w, members[l], g, lr);
        }
      }
      rot_loss[j] = mean_squared_error(forward_from_features(net, w, all_features), data.y);
    });

    EpochRecord rec;
    rec.epoch = epoch;
    rec.rotation_losses = rot_loss;
    rec.overall_loss =
        std::accumulate(rot_loss.begin(), rot_loss.end(), 0.0) / static_cast<double>(layers);
    rec.wall_seconds = std::chrono::duration<double>(Clock::now() - start).count();
    if (!std::isfinite(rec.overall_loss)) {
      fail(Errc::DivergenceDetected,
           "cross-fit training diverged at epoch " + std::to_string(epoch));
    }
    log.epochs.push_back(std::move(rec));
    if (plateau.update(log.epochs.back().overall_loss)) {
      log.converged = true;
      break;
    }
    lr *= config.lr_decay;
  }
  return CrossFitModel(net, std::move(sub), std::move(log));
}

SgdResult sgd_fit(const Dataset& data, const Network& net, const TrainConfig& config) {
  config.validate();
  net.validate();
  check_data(data, net);

  SgdResult res;
  res.initial = init_weights(net.arch, derive_seed(config.seed, 0));
  res.weights = res.initial;
  const std::size_t n = data.size();
  const std::size_t batch = config.batch_size == 0 ? n : std::min(config.batch_size, n);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng = make_rng(config.seed, 1);

  PlateauDetector plateau(config.patience, config.improvement_tol);
  double lr = config.learning_rate;
  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    if (batch == n) {
      const auto g = backward(net, res.weights, data.x, data.y, config.ridge);
      for (std::size_t i = 0; i < g.grads.size(); ++i) res.weights.mats[i] -= lr * g.grads[i];
    } else {
      std::shuffle(order.begin(), order.end(), rng);
      for (std::size_t pos = 0; pos < n; pos += batch) {
        const std::vector<std::size_t> rows(
            order.begin() + static_cast<std::ptrdiff_t>(pos),
            order.begin() + static_cast<std::ptrdiff_t>(std::min(pos + batch, n)));
        const Dataset mb = data.subset(rows);
        const auto g = backward(net, res.weights, mb.x, mb.y, config.ridge);
        for (std::size_t i = 0; i < g.grads.size(); ++i) res.weights.mats[i] -= lr * g.grads[i];
      }
    }
    const double loss = mean_squared_error(forward_batch(net, res.weights, data.x), data.y) +
                        config.ridge * res.weights.squared_norm();
    if (!std::isfinite(loss)) {
      fail(Errc::DivergenceDetected, "joint descent diverged at epoch " + std::to_string(epoch));
    }
    res.loss.push_back(loss);
    if (plateau.update(loss)) {
      res.converged = true;
      break;
    }
    lr *= config.lr_decay;
  }
  return res;
}

}  // namespace mlkm
