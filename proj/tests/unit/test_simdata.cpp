#include "mlkm/error.hpp"
#include "mlkm/simdata.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace mlkm;

namespace {

Scenario scenario(ScenarioKind kind, std::size_t d, std::size_t n, std::uint64_t seed = 1) {
  Scenario s;
  s.kind = kind;
  s.d = d;
  s.n = n;
  s.seed = seed;
  return s;
}

double corr(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const Eigen::ArrayXd da = a.array() - a.mean();
  const Eigen::ArrayXd db = b.array() - b.mean();
  return (da * db).sum() / std::sqrt(da.square().sum() * db.square().sum());
}

// Transcriptions of the example regression functions, written out
// separately from the library's versions.
double additive_ref(const Eigen::VectorXd& x) {
  const double pi = std::numbers::pi;
  const double s1 = std::sin(2 * pi * x(0)), c1 = std::cos(2 * pi * x(0));
  const double f1 = 6 * (0.1 * s1 + 0.2 * c1 + 0.3 * std::pow(s1, 2) + 0.4 * std::pow(c1, 3) + 0.5 * std::pow(s1, 3));
  const double f2 = 3 * std::pow(2 * x(1) - 1, 2);
  const double f3 = 5 * x(2);
  const double f4 = 4 * std::sin(2 * pi * x(3)) / (2 - std::sin(2 * pi * x(3)));
  return f1 + f2 + f3 + f4;
}

double interaction_ref(const Eigen::VectorXd& x) {
  const double pi = std::numbers::pi;
  const double a2 = std::sqrt(2 / pi) * std::exp(-std::pow(x(0) - 1, 2) / 2);
  const double a3 = 3 * std::cos(2 * pi * x(0));
  return -2 * std::sin(2 * pi * x(0)) + a2 * (x(1) * x(1) - 1.0 / 3) + a3 * (x(2) - 0.5) +
         4 * (std::exp(x(3)) + std::exp(-1.0) - 1);
}

}  // namespace

TEST(Additive1, ComponentValues) {
  EXPECT_DOUBLE_EQ(additive1_component(3, 0.5), 2.5);
  EXPECT_DOUBLE_EQ(additive1_component(2, 0.5), 0.0);
  EXPECT_THROW(additive1_component(5, 0.5), Error);
}

TEST(Additive1, DesignCorrelation) {
  Scenario s = scenario(ScenarioKind::Additive1, 4, 50000, 3);
  s.t = 1.0;
  const auto data = generate(s);
  EXPECT_NEAR(corr(data.x.col(0), data.x.col(1)), 0.5, 0.02);
  EXPECT_GE(data.x.minCoeff(), 0.0);
  EXPECT_LE(data.x.maxCoeff(), 1.0);
}

TEST(TrueFunction, MatchesTranscriptions) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const TrueFunction add(scenario(ScenarioKind::Additive1, 6, 10));
  const TrueFunction inter(scenario(ScenarioKind::Interaction2, 5, 10));
  for (int t = 0; t < 1000; ++t) {
    Eigen::VectorXd x6(6), x5(5);
    for (auto& v : x6) v = u(rng);
    for (auto& v : x5) v = u(rng);
    EXPECT_NEAR(add(x6), additive_ref(x6), 1e-12);
    EXPECT_NEAR(inter(x5), interaction_ref(x5), 1e-12);
  }
}

TEST(TrueFunction, InteractionLastTermIsFourTimesF4) {
  const TrueFunction f(scenario(ScenarioKind::Interaction2, 4, 10));
  Eigen::VectorXd a(4), b(4);
  a << 0.3, 0.4, 0.6, 0.0;
  b << 0.3, 0.4, 0.6, 0.7;
  const auto f4 = [](double v) { return std::exp(v) + std::exp(-1.0) - 1.0; };
  EXPECT_NEAR(f(b) - f(a), 4.0 * (f4(0.7) - f4(0.0)), 1e-12);
}

TEST(TrueFunction, Exp4AtOrigin) {
  EXPECT_DOUBLE_EQ(true_function(scenario(ScenarioKind::Exp4, 1, 10), Eigen::VectorXd::Zero(1)), 2.0);
  Scenario s = scenario(ScenarioKind::Exp4, 20, 10);
  s.active = 10;
  // Inactive coordinates do not move the response.
  Eigen::VectorXd x = Eigen::VectorXd::Zero(20);
  const double base = true_function(s, x);
  x.tail(10).setConstant(0.9);
  EXPECT_DOUBLE_EQ(true_function(s, x), base);
  EXPECT_DOUBLE_EQ(base, 20.0);
}

TEST(TrueFunction, TrigCoefficientsFollowScenarioSeed) {
  Scenario s = scenario(ScenarioKind::TrigSin3, 4, 10, 5);
  s.trig = TrigKind::Mix;
  const TrueFunction a(s);
  Scenario r = s;
  r.replicate = 99;
  const TrueFunction b(r);
  EXPECT_EQ(a.trig_coef(), b.trig_coef());
  EXPECT_GE(a.trig_coef().minCoeff(), 1.0);
  EXPECT_LE(a.trig_coef().maxCoeff(), 2.0);
  EXPECT_GE(a.ratio_coef().minCoeff(), 1.0);
  EXPECT_LE(a.ratio_coef().maxCoeff(), 2.0);
  Eigen::VectorXd x(4);
  x << 0.3, -1.1, 0.7, 1.9;
  const auto& u = a.trig_coef();
  const auto& c = a.ratio_coef();
  double ref = 0.0;
  for (int j = 0; j < 2; ++j) ref += u(j, 0) * std::sin(x(j)) + u(j, 1) * std::cos(x(j)) + u(j, 2) * std::pow(std::sin(x(j)), 2);
  for (int j = 2; j < 4; ++j) ref += std::sin(c(j, 0) * x(j)) / (2 - std::sin(c(j, 1) * x(j)));
  EXPECT_NEAR(a(x), ref, 1e-12);
  s.seed = 6;
  EXPECT_NE(TrueFunction(s).trig_coef(), a.trig_coef());
}

TEST(Generate, NormalDesignLagOneCovariance) {
  Scenario s = scenario(ScenarioKind::TrigSin3, 3, 50000, 7);
  s.design = Design::Normal;
  const auto data = generate(s);
  const Eigen::ArrayXd a = data.x.col(0).array() - data.x.col(0).mean();
  const Eigen::ArrayXd b = data.x.col(1).array() - data.x.col(1).mean();
  EXPECT_NEAR((a * b).sum() / (50000.0 - 1), 0.5, 0.02);
  const Eigen::ArrayXd c = data.x.col(2).array() - data.x.col(2).mean();
  EXPECT_NEAR((a * c).sum() / (50000.0 - 1), 0.25, 0.02);
}

TEST(Generate, UniformDesignRanges) {
  const auto t = generate(scenario(ScenarioKind::TrigSin3, 3, 2000));
  EXPECT_GE(t.x.minCoeff(), -2.0);
  EXPECT_LE(t.x.maxCoeff(), 2.0);
  for (auto kind : {ScenarioKind::Interaction2, ScenarioKind::Exp4}) {
    const auto d = generate(scenario(kind, 4, 2000));
    EXPECT_GE(d.x.minCoeff(), 0.0);
    EXPECT_LE(d.x.maxCoeff(), 1.0);
  }
}

TEST(Generate, NoiseIsCentred) {
  Scenario s = scenario(ScenarioKind::Additive1, 4, 100000, 8);
  s.sigma = 1.0;
  const auto data = generate(s);
  ASSERT_TRUE(data.truth.has_value());
  const Eigen::VectorXd eps = data.y - *data.truth;
  EXPECT_LE(std::abs(eps.mean()), 3.0 * s.sigma / std::sqrt(100000.0));
  const double sd = std::sqrt((eps.array() - eps.mean()).square().mean());
  EXPECT_NEAR(sd, 1.0, 0.01);
}

TEST(Generate, SeedDeterminismAndDisjointStreams) {
  const Scenario s = scenario(ScenarioKind::Exp4, 3, 100, 9);
  const auto a = generate(s);
  const auto b = generate(s);
  EXPECT_EQ(a.x, b.x);
  EXPECT_EQ(a.y, b.y);
  const auto test = generate_test(s, 100);
  EXPECT_NE(test.x, a.x);
  Scenario r = s;
  r.replicate = 1;
  EXPECT_NE(generate(r).x, a.x);
  EXPECT_EQ(generate(r).x, generate(r).x);
}

TEST(Scenario, ValidationAndJson) {
  EXPECT_THROW(scenario(ScenarioKind::Additive1, 3, 10).validate(), Error);
  EXPECT_THROW(scenario(ScenarioKind::Interaction2, 2, 10).validate(), Error);
  Scenario neg = scenario(ScenarioKind::Exp4, 3, 10);
  neg.sigma = -1.0;
  EXPECT_THROW(neg.validate(), Error);
  Scenario act = scenario(ScenarioKind::Exp4, 3, 10);
  act.active = 4;
  try {
    act.validate();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::IncompatibleScenario);
  }

  Scenario s = scenario(ScenarioKind::TrigSin3, 6, 300, 11);
  s.trig = TrigKind::SinRatio;
  s.design = Design::Normal;
  s.sigma = 0.5;
  const nlohmann::json j = s;
  const auto back = j.get<Scenario>();
  EXPECT_EQ(back.kind, s.kind);
  EXPECT_EQ(back.trig, s.trig);
  EXPECT_EQ(back.design, s.design);
  EXPECT_EQ(back.d, 6u);
  EXPECT_EQ(back.sigma, 0.5);
  nlohmann::json bad = j;
  bad["noise"] = 1;
  EXPECT_THROW(bad.get<Scenario>(), Error);
}
