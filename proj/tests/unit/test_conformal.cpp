#include "oracles.hpp"

#include "mlkm/baselines.hpp"
#include "mlkm/conformal.hpp"
#include "mlkm/error.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <limits>

using namespace mlkm;

namespace {

/// f(x; w) = w for every x; the Jacobian is a column of ones.
class ConstantModel : public Predictor {
 public:
  explicit ConstantModel(double w) : w_(w) {}
  std::size_t input_dim() const override { return 1; }
  Eigen::VectorXd predict_batch(const Eigen::MatrixXd& x) const override {
    return Eigen::VectorXd::Constant(x.rows(), w_);
  }
  std::optional<Eigen::MatrixXd> param_jacobian(const Eigen::MatrixXd& x) const override {
    return Eigen::MatrixXd::Ones(x.rows(), 1);
  }

 private:
  double w_;
};

/// A predictor without parameters, as for exact KRR.
class ZeroModel : public Predictor {
 public:
  std::size_t input_dim() const override { return 1; }
  Eigen::VectorXd predict_batch(const Eigen::MatrixXd& x) const override {
    return Eigen::VectorXd::Zero(x.rows());
  }
};

Eigen::MatrixXd column(std::initializer_list<double> v) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(v.size()), 1);
  Eigen::Index i = 0;
  for (double e : v) m(i++, 0) = e;
  return m;
}

}  // namespace

TEST(FitVariance, ConstantModelByHand) {
  const ConstantModel model(2.0);
  const Eigen::VectorXd y = column({1.0, 2.0, 3.0});
  const auto var = fit_variance(model, column({0.1, 0.2, 0.3}), y);
  EXPECT_EQ(var.mode, WeightMode::Weighted);
  EXPECT_DOUBLE_EQ(var.sigma2, 1.0);
  ASSERT_EQ(var.gram_inverse.rows(), 1);
  EXPECT_DOUBLE_EQ(var.gram_inverse(0, 0), 1.0 / 3.0);
  const Eigen::VectorXd s = var.scale(model, column({-5.0, 0.0, 9.0}));
  for (Eigen::Index i = 0; i < s.size(); ++i) EXPECT_NEAR(s(i) * s(i), 4.0 / 3.0, 1e-15);
}

TEST(FitVariance, SingleLayerJacobianIsFeatureMatrix) {
  std::mt19937_64 rng(1);
  const auto x = oracle::uniform_matrix(40, 2, 0, 1, rng);
  const Eigen::VectorXd y = x.col(0) + x.col(1);
  const auto fm = spectral_sample(KernelSpec::gaussian(1.0), 2, 6, 2);
  const auto model = rf_ridge_fit(x, y, fm, 1e-4);
  const auto var = fit_variance(model, x, y);
  ASSERT_EQ(var.mode, WeightMode::Weighted);
  const Eigen::MatrixXd psi = fm.apply_batch(x);
  EXPECT_TRUE(var.gram_inverse.isApprox((psi.transpose() * psi).inverse(), 1e-8));
  const double rss = (y - model.predict_batch(x)).squaredNorm();
  EXPECT_NEAR(var.sigma2, rss / (40.0 - 6.0), 1e-12);
  const Eigen::VectorXd g = fm.apply(x.row(5).transpose());
  const double expected = var.sigma2 * (g.dot(var.gram_inverse * g) + 1.0);
  EXPECT_NEAR(std::pow(var.scale(model, x.row(5)).coeff(0), 2), expected, 1e-12);
}

TEST(FitVariance, TooManyParametersFallsBack) {
  std::mt19937_64 rng(3);
  const auto x = oracle::uniform_matrix(10, 2, 0, 1, rng);
  const Eigen::VectorXd y = x.col(0);
  const auto model = rf_ridge_fit(x, y, spectral_sample(KernelSpec::gaussian(1.0), 2, 10, 4), 1e-3);
  const auto var = fit_variance(model, x, y);
  EXPECT_EQ(var.mode, WeightMode::Unweighted);
  EXPECT_FALSE(var.fallback.empty());
  EXPECT_TRUE((var.scale(model, x).array() == 1.0).all());
  try {
    (void)fit_variance(model, x, y, VariancePolicy::WeightedOnly);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::DegenerateFit);
  }
}

TEST(FitVariance, ModelsWithoutJacobianAreUnweighted) {
  const ZeroModel model;
  const auto var = fit_variance(model, column({0.0, 1.0, 2.0}), column({1.0, -1.0, 0.5}));
  EXPECT_EQ(var.mode, WeightMode::Unweighted);
  EXPECT_THROW(fit_variance(model, column({0.0}), column({1.0})), Error);
}

TEST(FitVariance, IllConditionedGramFallsBack) {
  // Two identical features make F^T F exactly singular.
  FeatureMap fm(KernelSpec::gaussian(1.0), (Eigen::MatrixXd(2, 1) << 1.0, 1.0).finished(),
                Eigen::VectorXd::Zero(2));
  const RfRidgeModel model(fm, Eigen::VectorXd::Zero(2), 0.0);
  std::mt19937_64 rng(5);
  const auto x = oracle::uniform_matrix(30, 1, 0, 1, rng);
  const auto var = fit_variance(model, x, x.col(0));
  EXPECT_EQ(var.mode, WeightMode::Unweighted);
  EXPECT_GE(var.condition, kMaxGramCondition);
}

TEST(ConformalRank, CeilingArithmetic) {
  EXPECT_EQ(conformal_rank(19, 0.05), 19u);
  EXPECT_EQ(conformal_rank(99, 0.10), 90u);
  EXPECT_EQ(conformal_rank(5, 0.05), 6u);
  EXPECT_EQ(conformal_rank(9, 0.5), 5u);
  EXPECT_EQ(conformal_rank(999, 0.05), 950u);
}

TEST(Calibrate, QuantileAndUnboundedFlag) {
  const ZeroModel model;
  const VarianceModel var;
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(19, 1);
  Eigen::VectorXd y(19);
  for (Eigen::Index i = 0; i < 19; ++i) y(i) = (i % 2 ? -1.0 : 1.0) * static_cast<double>(i + 1);
  const auto cal = calibrate(model, var, x, y, 0.05);
  EXPECT_EQ(cal.rank, 19u);
  EXPECT_FALSE(cal.unbounded);
  EXPECT_DOUBLE_EQ(cal.quantile, 19.0);

  const auto small = calibrate(model, var, x.topRows(5), y.head(5), 0.05);
  EXPECT_TRUE(small.unbounded);
  EXPECT_EQ(small.quantile, std::numeric_limits<double>::infinity());
  const auto iv = predict_interval(model, var, small, Eigen::VectorXd::Zero(1));
  EXPECT_TRUE(iv.unbounded);
  EXPECT_TRUE(iv.contains(1e300));

  EXPECT_THROW(calibrate(model, var, x, y, 0.0), Error);
  EXPECT_THROW(calibrate(model, var, x, y, 1.0), Error);
}

TEST(Calibrate, ResidualsMatchDefinition) {
  std::mt19937_64 rng(6);
  const auto x = oracle::uniform_matrix(60, 2, 0, 1, rng);
  const Eigen::VectorXd y = (3.0 * x.col(0)).array().sin().matrix() + 0.1 * oracle::uniform_matrix(60, 1, -1, 1, rng);
  const auto fm = spectral_sample(KernelSpec::gaussian(1.0), 2, 5, 7);
  const auto model = rf_ridge_fit(x.topRows(30), y.head(30), fm, 1e-3);
  const auto var = fit_variance(model, x.topRows(30), y.head(30));
  ASSERT_EQ(var.mode, WeightMode::Weighted);
  const Eigen::MatrixXd xc = x.bottomRows(30);
  const Eigen::VectorXd yc = y.tail(30);
  const Eigen::VectorXd r = conformal_residuals(model, var, xc, yc);
  const Eigen::MatrixXd psi_fit = fm.apply_batch(x.topRows(30));
  const Eigen::MatrixXd ginv = (psi_fit.transpose() * psi_fit).inverse();
  for (Eigen::Index i = 0; i < 30; ++i) {
    const Eigen::VectorXd g = fm.apply(xc.row(i).transpose());
    const double sy = std::sqrt(var.sigma2 * (g.dot(ginv * g) + 1.0));
    EXPECT_NEAR(r(i), std::abs(yc(i) - model.predict(xc.row(i).transpose())) / sy, 1e-9);
  }
  const auto cal = calibrate(model, var, xc, yc, 0.2);
  std::vector<double> sorted(r.data(), r.data() + r.size());
  std::sort(sorted.begin(), sorted.end());
  EXPECT_EQ(cal.quantile, sorted[cal.rank - 1]);
}

TEST(PredictInterval, MembershipEqualsResidualTest) {
  std::mt19937_64 rng(8);
  const auto x = oracle::uniform_matrix(80, 1, 0, 1, rng);
  const Eigen::VectorXd y = 2.0 * x.col(0) + 0.3 * oracle::uniform_matrix(80, 1, -1, 1, rng);
  const auto fm = spectral_sample(KernelSpec::gaussian(1.0), 1, 4, 9);
  const auto model = rf_ridge_fit(x.topRows(40), y.head(40), fm, 1e-4);
  const auto var = fit_variance(model, x.topRows(40), y.head(40));
  const auto cal = calibrate(model, var, x.middleRows(40, 20), y.segment(40, 20), 0.1);
  const Eigen::MatrixXd xt = x.bottomRows(20);
  const auto ivs = predict_intervals(model, var, cal, xt);
  std::uniform_real_distribution<double> u(-1.0, 3.0);
  for (Eigen::Index i = 0; i < 20; ++i) {
    for (int t = 0; t < 10; ++t) {
      const double yt = u(rng);
      const double r = conformal_residuals(model, var, xt.row(i), Eigen::VectorXd::Constant(1, yt))(0);
      EXPECT_EQ(ivs[static_cast<std::size_t>(i)].contains(yt), r <= cal.quantile * (1 + 1e-12));
    }
    const auto& iv = ivs[static_cast<std::size_t>(i)];
    EXPECT_NEAR(iv.upper - iv.prediction, cal.quantile * iv.scale, 1e-12);
    EXPECT_NEAR(iv.prediction - iv.lower, cal.quantile * iv.scale, 1e-12);
  }
}

TEST(PredictInterval, ZeroQuantileIsPoint) {
  const ConstantModel model(1.5);
  ConformalCalibration cal;
  cal.alpha = 0.1;
  cal.m = 10;
  cal.rank = 10;
  cal.quantile = 0.0;
  const auto iv = predict_interval(model, VarianceModel{}, cal, Eigen::VectorXd::Zero(1));
  EXPECT_EQ(iv.lower, 1.5);
  EXPECT_EQ(iv.upper, 1.5);
  EXPECT_THROW(predict_interval(model, VarianceModel{}, cal, Eigen::VectorXd::Zero(3)), Error);
}

TEST(PredictInterval, UnweightedHalfWidthIsConstant) {
  std::mt19937_64 rng(10);
  const auto x = oracle::uniform_matrix(30, 2, 0, 1, rng);
  const Eigen::VectorXd y = x.col(1);
  const auto model = krr_fit(x.topRows(15), y.head(15), KernelSpec::gaussian(1.0), 1e-3);
  const auto var = fit_variance(model, x.topRows(15), y.head(15));
  ASSERT_EQ(var.mode, WeightMode::Unweighted);
  const auto cal = calibrate(model, var, x.bottomRows(15), y.tail(15), 0.2);
  const auto ivs = predict_intervals(model, var, cal, oracle::uniform_matrix(10, 2, 0, 1, rng));
  for (const auto& iv : ivs) EXPECT_NEAR(iv.length(), 2.0 * cal.quantile, 1e-12);
}

TEST(Calibrate, QuantileMonotoneInCoverageLevel) {
  const ZeroModel model;
  std::mt19937_64 rng(11);
  const Eigen::VectorXd y = oracle::uniform_matrix(50, 1, -2, 2, rng);
  const Eigen::MatrixXd x = Eigen::MatrixXd::Zero(50, 1);
  double prev = -1.0;
  for (double alpha : {0.9, 0.7, 0.5, 0.3, 0.2, 0.1, 0.05, 0.02}) {
    const auto cal = calibrate(model, VarianceModel{}, x, y, alpha);
    EXPECT_GE(cal.quantile, prev);
    prev = cal.quantile;
  }
}

TEST(Calibrate, UnweightedScaleEquivariance) {
  std::mt19937_64 rng(12);
  const auto x = oracle::uniform_matrix(60, 1, 0, 1, rng);
  const Eigen::VectorXd y = x.col(0).array().square().matrix() + 0.2 * oracle::uniform_matrix(60, 1, -1, 1, rng);
  const auto fm = spectral_sample(KernelSpec::gaussian(1.0), 1, 5, 13);
  const double c = 3.5;
  const Eigen::MatrixXd xf = x.topRows(30), xc = x.bottomRows(30);
  const auto m1 = rf_ridge_fit(xf, y.head(30), fm, 1e-4);
  const auto mc = rf_ridge_fit(xf, c * y.head(30), fm, 1e-4);
  const auto v1 = fit_variance(m1, xf, y.head(30), VariancePolicy::Unweighted);
  const auto vc = fit_variance(mc, xf, c * y.head(30), VariancePolicy::Unweighted);
  const auto c1 = calibrate(m1, v1, xc, y.tail(30), 0.1);
  const auto cc = calibrate(mc, vc, xc, c * y.tail(30), 0.1);
  EXPECT_NEAR(cc.quantile, c * c1.quantile, 1e-9);
  const auto i1 = predict_interval(m1, v1, c1, Eigen::VectorXd::Constant(1, 0.4));
  const auto ic = predict_interval(mc, vc, cc, Eigen::VectorXd::Constant(1, 0.4));
  EXPECT_NEAR(ic.length(), c * i1.length(), 1e-9);
}

TEST(CoverageStudy, ResidualOracleSandwich) {
  const auto res = coverage_study(ResidualOracle{}, 0.05, 10000, 14);
  EXPECT_DOUBLE_EQ(res.band_low, 0.95);
  EXPECT_DOUBLE_EQ(res.band_high, 1.0);
  EXPECT_TRUE(res.within_band(3.0)) << res.coverage << " se " << res.se;
  EXPECT_NEAR(res.se, std::sqrt(res.coverage * (1 - res.coverage) / 10000.0), 1e-15);
}

TEST(CoverageStudy, MedianBandCoversHalf) {
  for (auto noise : {ResidualOracle::Noise::Normal, ResidualOracle::Noise::Laplace, ResidualOracle::Noise::Uniform}) {
    ResidualOracle o;
    o.m = 99;
    o.noise = noise;
    const auto res = coverage_study(o, 0.5, 5000, 15);
    EXPECT_TRUE(res.within_band(3.0)) << res.coverage;
    EXPECT_NEAR(res.coverage, 0.5, 3.0 * res.se + 0.01);
  }
}

TEST(CoverageStudy, DeterministicAndThreadIndependent) {
  const auto a = coverage_study(ResidualOracle{}, 0.1, 500, 16, 1);
  const auto b = coverage_study(ResidualOracle{}, 0.1, 500, 16, 3);
  EXPECT_EQ(a.coverage, b.coverage);
  EXPECT_EQ(a.mean_length, b.mean_length);
  const auto j = to_json(a);
  EXPECT_EQ(j.at("replications").get<std::size_t>(), 500u);
  EXPECT_TRUE(j.contains("coverage"));
  EXPECT_TRUE(j.contains("se"));
}

TEST(CoverageStudy, SmallCalibrationIsAlwaysCovered) {
  ResidualOracle o;
  o.m = 5;
  const auto res = coverage_study(o, 0.05, 100, 17);
  EXPECT_EQ(res.unbounded, 100u);
  EXPECT_EQ(res.coverage, 1.0);
}

TEST(CoverageStudy, PipelineRunsEndToEnd) {
  PipelineStudy study;
  study.data.kind = ScenarioKind::Additive1;
  study.architecture = "4-8-4-1";
  study.fit_size = 150;
  study.calib_size = 60;
  study.test_points = 5;
  study.train.learning_rate = 0.05;
  study.train.max_epochs = 40;
  const auto res = coverage_study(study, 0.1, 4, 18);
  EXPECT_EQ(res.replications, 4u);
  EXPECT_EQ(res.evaluations, 20u);
  EXPECT_EQ(res.m, 60u);
  EXPECT_LE(res.weighted_runs, 4u);  // ill-conditioned runs fall back
  EXPECT_GE(res.coverage, 0.0);
  EXPECT_LE(res.coverage, 1.0);
  EXPECT_TRUE(std::isfinite(res.mean_length));
  study.policy = VariancePolicy::Unweighted;
  EXPECT_EQ(coverage_study(study, 0.1, 2, 18).weighted_runs, 0u);
}

TEST(PolicyNames, RoundTrip) {
  for (auto p : {VariancePolicy::Auto, VariancePolicy::WeightedOnly, VariancePolicy::Unweighted}) {
    EXPECT_EQ(parse_variance_policy(to_string(p)), p);
  }
  EXPECT_THROW(parse_variance_policy("sometimes"), Error);
  EXPECT_EQ(parse_weight_mode("weighted"), WeightMode::Weighted);
}
