#include "mlkm/conformal.hpp"

#include "mlkm/data.hpp"
#include "mlkm/error.hpp"
#include "mlkm/network.hpp"
#include "mlkm/parallel.hpp"
#include "mlkm/random.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace mlkm {

std::string to_string(WeightMode mode) {
  return mode == WeightMode::Weighted ? "weighted" : "unweighted";
}

std::string to_string(VariancePolicy policy) {
  switch (policy) {
    case VariancePolicy::Auto: return "auto";
    case VariancePolicy::WeightedOnly: return "weighted";
    case VariancePolicy::Unweighted: return "unweighted";
  }
  return "auto";
}

WeightMode parse_weight_mode(const std::string& name) {
  if (name == "weighted") return WeightMode::Weighted;
  if (name == "unweighted") return WeightMode::Unweighted;
  fail(Errc::InvalidArgument, "unknown weight mode '" + name + "'");
}

VariancePolicy parse_variance_policy(const std::string& name) {
  if (name == "auto") return VariancePolicy::Auto;
  if (name == "weighted") return VariancePolicy::WeightedOnly;
  if (name == "unweighted") return VariancePolicy::Unweighted;
  fail(Errc::InvalidArgument, "unknown variance policy '" + name + "'");
}

Eigen::VectorXd VarianceModel::scale(const Predictor& model, const Eigen::MatrixXd& x) const {
  if (mode == WeightMode::Unweighted) return Eigen::VectorXd::Ones(x.rows());
  const auto jac = model.param_jacobian(x);
  if (!jac || static_cast<std::size_t>(jac->cols()) != parameters) {
    fail(Errc::DimMismatch, "predictor Jacobian does not match the variance model");
  }
  const Eigen::MatrixXd proj = *jac * gram_inverse;
  const Eigen::VectorXd lev = proj.cwiseProduct(*jac).rowwise().sum();
  return (sigma2 * (lev.array().max(0.0) + 1.0)).sqrt();
}

VarianceModel fit_variance(const Predictor& model, const Eigen::MatrixXd& x,
                           const Eigen::VectorXd& y, VariancePolicy policy) {
  const auto n = static_cast<std::size_t>(x.rows());
  if (n < 2) fail(Errc::TooFewSamples, "variance fit needs at least 2 samples");
  if (y.size() != x.rows()) fail(Errc::DimMismatch, "X and Y row counts differ");
  if (x.cols() != static_cast<Eigen::Index>(model.input_dim())) {
    fail(Errc::DimMismatch, "covariate dimension does not match the predictor");
  }
  const double rss = (y - model.predict_batch(x)).squaredNorm();

  VarianceModel out;
  out.fit_size = n;
  out.sigma2 = rss / static_cast<double>(n);

  auto unweighted = [&](std::string reason) {
    if (policy == VariancePolicy::WeightedOnly) fail(Errc::DegenerateFit, reason);
    out.mode = WeightMode::Unweighted;
    out.fallback = std::move(reason);
    return out;
  };

  if (policy == VariancePolicy::Unweighted) return unweighted("unweighted requested");
  const auto jac = model.param_jacobian(x);
  if (!jac || jac->cols() == 0) return unweighted("predictor has no parameter Jacobian");
  const auto p = static_cast<std::size_t>(jac->cols());
  out.parameters = p;
  if (p >= n) {
    return unweighted(std::to_string(p) + " parameters with only " + std::to_string(n) +
                      " fit samples");
  }

  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(p),
                                               static_cast<Eigen::Index>(p));
  gram.selfadjointView<Eigen::Lower>().rankUpdate(jac->transpose());
  gram = gram.selfadjointView<Eigen::Lower>();
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
  if (eig.info() != Eigen::Success) return unweighted("eigendecomposition of F^T F failed");
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  out.condition = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  if (!(out.condition < kMaxGramCondition)) {
    return unweighted("F^T F condition estimate " + std::to_string(out.condition) +
                      " exceeds threshold");
  }
  out.mode = WeightMode::Weighted;
  out.sigma2 = rss / static_cast<double>(n - p);
  out.gram_inverse = eig.eigenvectors() * eig.eigenvalues().cwiseInverse().asDiagonal() *
                     eig.eigenvectors().transpose();
  return out;
}

std::size_t conformal_rank(std::size_t m, double alpha) {
  const double target = (1.0 - alpha) * static_cast<double>(m + 1);
  return static_cast<std::size_t>(std::ceil(target - 1e-9 * static_cast<double>(m + 1)));
}

namespace {

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) fail(Errc::InvalidArgument, "alpha must lie in (0, 1)");
}

}  // namespace

Eigen::VectorXd conformal_residuals(const Predictor& model, const VarianceModel& variance,
                                    const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  if (y.size() != x.rows()) fail(Errc::DimMismatch, "X and Y row counts differ");
  if (x.cols() != static_cast<Eigen::Index>(model.input_dim())) {
    fail(Errc::DimMismatch, "covariate dimension does not match the predictor");
  }
  const Eigen::VectorXd pred = model.predict_batch(x);
  const Eigen::VectorXd sd = variance.scale(model, x);
  return (y - pred).cwiseAbs().cwiseQuotient(sd);
}

ConformalCalibration calibrate(const Predictor& model, const VarianceModel& variance,
                               const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double alpha) {
  check_alpha(alpha);
  if (x.rows() < 1) fail(Errc::TooFewSamples, "calibration set is empty");
  const Eigen::VectorXd r = conformal_residuals(model, variance, x, y);

  ConformalCalibration cal;
  cal.alpha = alpha;
  cal.m = static_cast<std::size_t>(r.size());
  cal.mode = variance.mode;
  cal.rank = conformal_rank(cal.m, alpha);
  if (cal.rank > cal.m) {
    cal.unbounded = true;
    cal.quantile = std::numeric_limits<double>::infinity();
    return cal;
  }
  std::vector<double> sorted(r.data(), r.data() + r.size());
  std::stable_sort(sorted.begin(), sorted.end());
  cal.quantile = sorted[std::max<std::size_t>(cal.rank, 1) - 1];
  return cal;
}

std::vector<PredictionInterval> predict_intervals(const Predictor& model,
                                                  const VarianceModel& variance,
                                                  const ConformalCalibration& calibration,
                                                  const Eigen::MatrixXd& x) {
  if (x.cols() != static_cast<Eigen::Index>(model.input_dim())) {
    fail(Errc::DimMismatch, "covariate dimension does not match the predictor");
  }
  const Eigen::VectorXd pred = model.predict_batch(x);
  const Eigen::VectorXd sd = variance.scale(model, x);
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<PredictionInterval> out(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    auto& iv = out[static_cast<std::size_t>(i)];
    iv.prediction = pred(i);
    iv.scale = sd(i);
    if (calibration.unbounded) {
      iv.unbounded = true;
      iv.lower = -inf;
      iv.upper = inf;
    } else {
      const double half = calibration.quantile * sd(i);
      iv.lower = pred(i) - half;
      iv.upper = pred(i) + half;
    }
  }
  return out;
}

PredictionInterval predict_interval(const Predictor& model, const VarianceModel& variance,
                                    const ConformalCalibration& calibration,
                                    const Eigen::Ref<const Eigen::VectorXd>& x) {
  const Eigen::MatrixXd row = x.transpose();
  return predict_intervals(model, variance, calibration, row).front();
}

bool CoverageResult::within_band(double k) const {
  return coverage >= band_low - k * se && coverage <= band_high + k * se;
}

namespace {

class ZeroPredictor : public Predictor {
 public:
  explicit ZeroPredictor(std::size_t dim) : dim_(dim) {}
  std::size_t input_dim() const override { return dim_; }
  Eigen::VectorXd predict_batch(const Eigen::MatrixXd& x) const override {
    return Eigen::VectorXd::Zero(x.rows());
  }

 private:
  std::size_t dim_;
};

struct Replication {
  std::size_t covered = 0;
  std::size_t evaluated = 0;
  std::size_t unbounded = 0;
  double length_sum = 0.0;
  std::size_t bounded = 0;
  bool weighted = false;
};

void score(const std::vector<PredictionInterval>& intervals, const Eigen::VectorXd& y,
           Replication& rep) {
  for (std::size_t i = 0; i < intervals.size(); ++i) {
    const auto& iv = intervals[i];
    ++rep.evaluated;
    if (iv.contains(y(static_cast<Eigen::Index>(i)))) ++rep.covered;
    if (iv.unbounded) {
      ++rep.unbounded;
    } else {
      rep.length_sum += iv.length();
      ++rep.bounded;
    }
  }
}

Replication run_oracle(const ResidualOracle& oracle, double alpha, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  const auto m = static_cast<Eigen::Index>(oracle.m);
  Eigen::VectorXd draws(m + 1);
  std::normal_distribution<double> normal;
  std::exponential_distribution<double> expo(1.0);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::bernoulli_distribution sign;
  for (Eigen::Index i = 0; i <= m; ++i) {
    switch (oracle.noise) {
      case ResidualOracle::Noise::Normal: draws(i) = normal(rng); break;
      case ResidualOracle::Noise::Laplace: draws(i) = (sign(rng) ? 1.0 : -1.0) * expo(rng); break;
      case ResidualOracle::Noise::Uniform: draws(i) = unif(rng); break;
    }
  }
  const ZeroPredictor zero(1);
  const VarianceModel unit;
  const Eigen::MatrixXd x = Eigen::MatrixXd::Zero(m + 1, 1);
  const auto cal = calibrate(zero, unit, x.topRows(m), draws.head(m), alpha);
  Replication rep;
  score(predict_intervals(zero, unit, cal, x.bottomRows(1)), draws.tail(1), rep);
  return rep;
}

Replication run_pipeline(const PipelineStudy& study, double alpha, std::uint64_t seed) {
  Scenario sc = study.data;
  sc.n = study.fit_size + study.calib_size;
  sc.replicate = derive_seed(seed, 0);
  const Dataset all = generate(sc);
  const auto [fit_rows, cal_rows] = random_split(all.size(), study.fit_size, derive_seed(seed, 1));
  const Dataset fit = all.subset(fit_rows);
  const Dataset cal = all.subset(cal_rows);

  const auto arch = Architecture::parse(study.architecture, study.kernels, study.residual);
  const Network net = make_network(arch, derive_seed(seed, 2));
  const FoldPlan plan = make_fold_plan(fit.size(), arch.num_layers(), derive_seed(seed, 3));
  TrainConfig cfg = study.train;
  cfg.seed = derive_seed(seed, 4);
  cfg.threads = 1;
  const CrossFitModel model = adds_fit(fit, net, plan, cfg);

  const VarianceModel var = fit_variance(model, fit.x, fit.y, study.policy);
  const auto calib = calibrate(model, var, cal.x, cal.y, alpha);
  const Dataset test = generate_test(sc, study.test_points);
  Replication rep;
  rep.weighted = var.mode == WeightMode::Weighted;
  score(predict_intervals(model, var, calib, test.x), test.y, rep);
  return rep;
}

}  // namespace

CoverageResult coverage_study(const CoverageScenario& scenario, double alpha,
                              std::size_t replications, std::uint64_t seed, std::size_t threads) {
  check_alpha(alpha);
  if (replications < 1) fail(Errc::InvalidArgument, "coverage study needs at least 1 replication");
  std::size_t m = 0;
  if (const auto* oracle = std::get_if<ResidualOracle>(&scenario)) {
    if (oracle->m < 1) fail(Errc::TooFewSamples, "residual oracle needs m >= 1");
    m = oracle->m;
  } else {
    const auto& study = std::get<PipelineStudy>(scenario);
    if (study.calib_size < 1 || study.test_points < 1) {
      fail(Errc::TooFewSamples, "pipeline study needs calibration and test points");
    }
    study.data.validate();
    study.train.validate();
    m = study.calib_size;
  }

  std::vector<Replication> reps(replications);
  parallel_for(replications, resolve_threads(threads), [&](std::size_t r) {
    const std::uint64_t rs = derive_seed(seed, r);
    reps[r] = std::visit(
        [&](const auto& s) {
          if constexpr (std::is_same_v<std::decay_t<decltype(s)>, ResidualOracle>) {
            return run_oracle(s, alpha, rs);
          } else {
            return run_pipeline(s, alpha, rs);
          }
        },
        scenario);
  });

  CoverageResult out;
  out.alpha = alpha;
  out.m = m;
  out.replications = replications;
  out.band_low = 1.0 - alpha;
  out.band_high = std::min(1.0, 1.0 - alpha + 1.0 / static_cast<double>(m + 1));
  std::size_t covered = 0;
  std::size_t bounded = 0;
  double length = 0.0;
  for (const auto& rep : reps) {
    covered += rep.covered;
    out.evaluations += rep.evaluated;
    out.unbounded += rep.unbounded;
    bounded += rep.bounded;
    length += rep.length_sum;
    if (rep.weighted) ++out.weighted_runs;
  }
  out.coverage = static_cast<double>(covered) / static_cast<double>(out.evaluations);
  out.se = std::sqrt(out.coverage * (1.0 - out.coverage) / static_cast<double>(replications));
  out.mean_length = bounded > 0 ? length / static_cast<double>(bounded)
                                : std::numeric_limits<double>::infinity();
  return out;
}

nlohmann::json to_json(const CoverageResult& r) {
  auto finite_or_null = [](double v) -> nlohmann::json {
    return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
  };
  return {{"alpha", r.alpha},
          {"m", r.m},
          {"replications", r.replications},
          {"evaluations", r.evaluations},
          {"coverage", r.coverage},
          {"se", r.se},
          {"mean_length", finite_or_null(r.mean_length)},
          {"unbounded", r.unbounded},
          {"weighted_runs", r.weighted_runs},
          {"band_low", r.band_low},
          {"band_high", r.band_high},
          {"within_band", r.within_band()}};
}

}  // namespace mlkm
