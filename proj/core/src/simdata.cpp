#include "mlkm/simdata.hpp"

#include "mlkm/error.hpp"
#include "mlkm/random.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <algorithm>

namespace mlkm {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Sub-seed streams of a scenario seed.
constexpr std::uint64_t kTrainStream = 0;
constexpr std::uint64_t kTestStream = 1;
constexpr std::uint64_t kCoefStream = 2;

std::size_t active_dims(const Scenario& s) { return s.active == 0 ? s.d : s.active; }

}  // namespace

std::string_view to_string(ScenarioKind kind) noexcept {
  switch (kind) {
    case ScenarioKind::Additive1: return "additive1";
    case ScenarioKind::Interaction2: return "interaction2";
    case ScenarioKind::TrigSin3: return "trigsin3";
    case ScenarioKind::Exp4: return "exp4";
  }
  return "unknown";
}

void Scenario::validate() const {
  const auto bad = [](const std::string& why) { fail(Errc::IncompatibleScenario, why); };
  if (d == 0) bad("scenario dimension must be >= 1");
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) bad("noise sigma must be >= 0");
  switch (kind) {
    case ScenarioKind::Additive1:
      if (d < 4) bad("additive1 needs d >= 4");
      if (!(t >= 0.0) || !std::isfinite(t)) bad("additive1 needs t >= 0");
      break;
    case ScenarioKind::Interaction2:
      if (d < 4) bad("interaction2 needs d >= 4");
      break;
    case ScenarioKind::TrigSin3:
      if (trig == TrigKind::Mix && d < 2) bad("trigsin3 mix needs d >= 2");
      break;
    case ScenarioKind::Exp4:
      if (active > d) bad("exp4 active coordinates exceed d");
      break;
  }
}

void to_json(nlohmann::json& j, const Scenario& s) {
  j = nlohmann::json{{"kind", to_string(s.kind)}, {"d", s.d}, {"n", s.n},
                     {"sigma", s.sigma},          {"seed", s.seed}};
  if (s.replicate != 0) j["replicate"] = s.replicate;
  switch (s.kind) {
    case ScenarioKind::Additive1: j["t"] = s.t; break;
    case ScenarioKind::TrigSin3:
      j["trig"] = s.trig == TrigKind::Trig ? "trig" : s.trig == TrigKind::SinRatio ? "sin" : "mix";
      j["design"] = s.design == Design::Uniform ? "uniform" : "normal";
      break;
    case ScenarioKind::Exp4: j["active"] = s.active; break;
    case ScenarioKind::Interaction2: break;
  }
}

void from_json(const nlohmann::json& j, Scenario& s) {
  static const char* const known[] = {"kind", "d", "n", "sigma", "t", "trig", "design", "active", "seed",
                                      "replicate"};
  for (const auto& [key, _] : j.items()) {
    if (std::find(std::begin(known), std::end(known), key) == std::end(known)) {
      fail(Errc::InvalidArgument, "unknown scenario key '" + key + "'");
    }
  }
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "additive1") s.kind = ScenarioKind::Additive1;
  else if (kind == "interaction2") s.kind = ScenarioKind::Interaction2;
  else if (kind == "trigsin3") s.kind = ScenarioKind::TrigSin3;
  else if (kind == "exp4") s.kind = ScenarioKind::Exp4;
  else fail(Errc::IncompatibleScenario, "unknown scenario kind '" + kind + "'");
  s.d = j.value("d", s.d);
  s.n = j.value("n", s.n);
  s.sigma = j.value("sigma", s.sigma);
  s.t = j.value("t", s.t);
  s.active = j.value("active", s.active);
  s.seed = j.value("seed", s.seed);
  s.replicate = j.value("replicate", s.replicate);
  const std::string trig = j.value("trig", std::string("trig"));
  if (trig == "trig") s.trig = TrigKind::Trig;
  else if (trig == "sin") s.trig = TrigKind::SinRatio;
  else if (trig == "mix") s.trig = TrigKind::Mix;
  else fail(Errc::IncompatibleScenario, "unknown trig kind '" + trig + "'");
  const std::string design = j.value("design", std::string("uniform"));
  if (design == "uniform") s.design = Design::Uniform;
  else if (design == "normal") s.design = Design::Normal;
  else fail(Errc::IncompatibleScenario, "unknown design '" + design + "'");
  s.validate();
}

double additive1_component(std::size_t j, double x) {
  const double s = std::sin(kTwoPi * x);
  const double c = std::cos(kTwoPi * x);
  switch (j) {
    case 1: return 6.0 * (0.1 * s + 0.2 * c + 0.3 * s * s + 0.4 * c * c * c + 0.5 * s * s * s);
    case 2: return 3.0 * (2.0 * x - 1.0) * (2.0 * x - 1.0);
    case 3: return 5.0 * x;
    case 4: return 4.0 * s / (2.0 - s);
    default: fail(Errc::InvalidArgument, "additive1 has components 1..4");
  }
}

TrueFunction::TrueFunction(const Scenario& scenario) : s_(scenario) {
  s_.validate();
  if (s_.kind == ScenarioKind::TrigSin3) {
    const auto d = static_cast<Eigen::Index>(s_.d);
    u_.resize(d, 3);
    c_.resize(d, 2);
    Rng rng = make_rng(s_.seed, kCoefStream);
    std::uniform_real_distribution<double> coef(1.0, 2.0);
    for (Eigen::Index j = 0; j < d; ++j) {
      for (Eigen::Index k = 0; k < 3; ++k) u_(j, k) = coef(rng);
      for (Eigen::Index k = 0; k < 2; ++k) c_(j, k) = coef(rng);
    }
  }
}

double TrueFunction::operator()(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (static_cast<std::size_t>(x.size()) != s_.d) {
    fail(Errc::DimMismatch, "true function expects " + std::to_string(s_.d) + " coordinates");
  }
  switch (s_.kind) {
    case ScenarioKind::Additive1: {
      double f = 0.0;
      for (std::size_t j = 1; j <= 4; ++j) f += additive1_component(j, x(static_cast<Eigen::Index>(j - 1)));
      return f;
    }
    case ScenarioKind::Interaction2: {
      const double x1 = x(0);
      const double f1 = -2.0 * std::sin(kTwoPi * x1);
      const double f2 = x(1) * x(1) - 1.0 / 3.0;
      const double f3 = x(2) - 0.5;
      const double f4 = std::exp(x(3)) + std::exp(-1.0) - 1.0;
      const double a2 = std::sqrt(2.0 / std::numbers::pi) * std::exp(-(x1 - 1.0) * (x1 - 1.0) / 2.0);
      const double a3 = 3.0 * std::cos(kTwoPi * x1);
      const double a4 = 4.0;
      return f1 + a2 * f2 + a3 * f3 + a4 * f4;
    }
    case ScenarioKind::TrigSin3: {
      double f = 0.0;
      const auto d = static_cast<Eigen::Index>(s_.d);
      const Eigen::Index half = d / 2;
      for (Eigen::Index j = 0; j < d; ++j) {
        const bool trig = s_.trig == TrigKind::Trig || (s_.trig == TrigKind::Mix && j < half);
        const double v = x(j);
        if (trig) {
          const double sv = std::sin(v);
          f += u_(j, 0) * sv + u_(j, 1) * std::cos(v) + u_(j, 2) * sv * sv;
        } else {
          f += std::sin(c_(j, 0) * v) / (2.0 - std::sin(c_(j, 1) * v));
        }
      }
      return f;
    }
    case ScenarioKind::Exp4: {
      double f = 0.0;
      for (std::size_t j = 0; j < active_dims(s_); ++j) {
        const double v = x(static_cast<Eigen::Index>(j));
        f += v + 2.0 * std::exp(-16.0 * v * v);
      }
      return f;
    }
  }
  return 0.0;
}

Eigen::VectorXd TrueFunction::batch(const Eigen::MatrixXd& x) const {
  Eigen::VectorXd f(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) f(i) = (*this)(x.row(i).transpose());
  return f;
}

double true_function(const Scenario& scenario, const Eigen::Ref<const Eigen::VectorXd>& x) {
  return TrueFunction(scenario)(x);
}

Eigen::MatrixXd sample_design(const Scenario& s, std::size_t n, std::uint64_t seed) {
  s.validate();
  const auto rows = static_cast<Eigen::Index>(n);
  const auto d = static_cast<Eigen::Index>(s.d);
  Eigen::MatrixXd x(rows, d);
  Rng rng = make_rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Eigen::Index i = 0; i < rows; ++i) {
    switch (s.kind) {
      case ScenarioKind::Additive1: {
        const double u = unit(rng);
        for (Eigen::Index j = 0; j < d; ++j) x(i, j) = (unit(rng) + s.t * u) / (1.0 + s.t);
        break;
      }
      case ScenarioKind::Interaction2:
      case ScenarioKind::Exp4:
        for (Eigen::Index j = 0; j < d; ++j) x(i, j) = unit(rng);
        break;
      case ScenarioKind::TrigSin3:
        if (s.design == Design::Uniform) {
          for (Eigen::Index j = 0; j < d; ++j) x(i, j) = -2.0 + 4.0 * unit(rng);
        } else {
          // AR(1) with coefficient 0.5 has covariance 0.5^|j-k|.
          x(i, 0) = normal(rng);
          const double innov = std::sqrt(1.0 - 0.25);
          for (Eigen::Index j = 1; j < d; ++j) x(i, j) = 0.5 * x(i, j - 1) + innov * normal(rng);
        }
        break;
    }
  }
  return x;
}

namespace {

Dataset draw(const Scenario& s, std::size_t n, std::uint64_t stream) {
  s.validate();
  std::uint64_t seed = derive_seed(s.seed, stream);
  if (s.replicate != 0) seed = derive_seed(seed, s.replicate);
  Dataset out;
  out.x = sample_design(s, n, seed);
  const TrueFunction f(s);
  out.truth = f.batch(out.x);
  out.y = *out.truth;
  Rng rng = make_rng(seed, 99);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (Eigen::Index i = 0; i < out.y.size(); ++i) out.y(i) += s.sigma * noise(rng);
  out.provenance = nlohmann::json{{"scenario", s}, {"stream", stream}, {"n", n}};
  return out;
}

}  // namespace

Dataset generate(const Scenario& scenario) { return draw(scenario, scenario.n, kTrainStream); }

Dataset generate_test(const Scenario& scenario, std::size_t n) {
  return draw(scenario, n, kTestStream);
}

}  // namespace mlkm
