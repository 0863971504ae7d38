#pragma once

#include "mlkm/data.hpp"

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include <cstdint>
#include <string_view>

namespace mlkm {

enum class ScenarioKind { Additive1, Interaction2, TrigSin3, Exp4 };
enum class TrigKind { Trig, SinRatio, Mix };
enum class Design { Uniform, Normal };

/// Simulation settings for the four synthetic regression models.
///
///  Additive1     f = f1(x1) + f2(x2) + f3(x3) + f4(x4), X_j = (E_j + tU)/(1+t)
///  Interaction2  f = f1(x1) + sum_{j=2..4} a_j(x1) f_j(x_j), X ~ U[0,1]^d
///  TrigSin3      f = sum_j f_j(x_j) with trigonometric-polynomial and/or
///                sin-ratio components; X ~ U[-2,2]^d or N(0, 0.5^|j-k|)
///  Exp4          f = sum_{j<=a} x_j + 2 exp(-16 x_j^2), X ~ U[0,1]^d
struct Scenario {
  ScenarioKind kind = ScenarioKind::Additive1;
  std::size_t d = 4;
  std::size_t n = 1000;
  double sigma = 1.0;
  double t = 1.0;                  // Additive1 design correlation parameter
  TrigKind trig = TrigKind::Trig;  // TrigSin3
  Design design = Design::Uniform; // TrigSin3
  std::size_t active = 0;          // Exp4: number of active coordinates, 0 = all d
  std::uint64_t seed = 0;
  std::uint64_t replicate = 0;     // redraws samples; the truth depends on seed only

  /// Throws IncompatibleScenario.
  void validate() const;
};

void to_json(nlohmann::json& j, const Scenario& s);
void from_json(const nlohmann::json& j, Scenario& s);

std::string_view to_string(ScenarioKind kind) noexcept;

/// The regression function of a scenario. Random coefficients (TrigSin3)
/// are drawn once from the scenario seed, so every split shares one truth.
class TrueFunction {
 public:
  explicit TrueFunction(const Scenario& scenario);

  double operator()(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  Eigen::VectorXd batch(const Eigen::MatrixXd& x) const;

  /// Example-3 coefficients: u is d x 3, c is d x 2 (empty otherwise).
  const Eigen::MatrixXd& trig_coef() const noexcept { return u_; }
  const Eigen::MatrixXd& ratio_coef() const noexcept { return c_; }

 private:
  Scenario s_;
  Eigen::MatrixXd u_;
  Eigen::MatrixXd c_;
};

double true_function(const Scenario& scenario, const Eigen::Ref<const Eigen::VectorXd>& x);

/// Additive1 component functions (j = 1..4), exposed for checks and plots.
double additive1_component(std::size_t j, double x);

/// Training sample of size scenario.n (sub-seed stream 0).
Dataset generate(const Scenario& scenario);

/// Independent test sample of size n from a disjoint sub-seed stream.
Dataset generate_test(const Scenario& scenario, std::size_t n);

/// Draws covariates only.
Eigen::MatrixXd sample_design(const Scenario& scenario, std::size_t n, std::uint64_t seed);

}  // namespace mlkm
