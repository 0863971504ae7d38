// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits nonzero when any criterion fails.

#include "../unit/oracles.hpp"

#include "mlkm/baselines.hpp"
#include "mlkm/conformal.hpp"
#include "mlkm/experiment.hpp"
#include "mlkm/features.hpp"
#include "mlkm/kernel.hpp"
#include "mlkm/network.hpp"
#include "mlkm/random.hpp"
#include "mlkm/simdata.hpp"
#include "mlkm/training.hpp"

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <limits>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace mlkm;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

int failures = 0;

void report(int id, const std::string& name, const std::function<void(Outcome&)>& body) {
  Outcome out;
  const auto t0 = Clock::now();
  try {
    body(out);
  } catch (const std::exception& e) {
    out.pass = false;
    out.detail << " [exception: " << e.what() << "]";
  }
  const double secs = seconds_since(t0);
  if (!out.pass) ++failures;
  std::printf("%s %d %s (%.1f s):%s\n", out.pass ? "PASS" : "FAIL", id, name.c_str(), secs,
              out.detail.str().c_str());
  std::fflush(stdout);
}

Eigen::VectorXd uniform_vector(std::size_t d, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::VectorXd v(static_cast<Eigen::Index>(d));
  for (auto& x : v) x = u(rng);
  return v;
}

void feature_fidelity(Outcome& out) {
  const auto t0 = Clock::now();
  const KernelSpec k = KernelSpec::gaussian(1.0);
  const FeatureMap fm = spectral_sample(k, 2, 2000, 20240101);
  std::mt19937_64 rng(99);
  std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>> pairs;
  for (int i = 0; i < 100; ++i) pairs.emplace_back(uniform_vector(2, rng), uniform_vector(2, rng));
  const double err = mc_kernel_error(k, fm, pairs);
  const double secs = seconds_since(t0);
  out.detail << " max error " << err << ", " << secs << " s";
  out.require(err <= 0.10, "error <= 0.10");
  out.require(secs < 2.0, "runtime < 2 s");
}

std::string random_architecture(std::mt19937_64& rng) {
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  const int d = pick(1, 4);
  const int w1 = pick(3, 16);
  std::string arch = std::to_string(d) + "-" + std::to_string(w1);
  if (pick(0, 1) == 1) arch += "-" + std::to_string(pick(2, std::min(8, w1 - 1)));
  return arch + "-1";
}

KernelSpec random_kernel(std::mt19937_64& rng) {
  const double scale = std::uniform_real_distribution<double>(0.5, 2.0)(rng);
  switch (std::uniform_int_distribution<int>(0, 3)(rng)) {
    case 0: return KernelSpec::gaussian(scale);
    case 1: return KernelSpec::laplacian(scale);
    case 2: return KernelSpec::cauchy(scale);
    default: return KernelSpec::matern(scale, 1.5);
  }
}

void gradient_exactness(Outcome& out) {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2718);
  std::size_t checked = 0, bad = 0;
  double worst = 0.0;
  for (int c = 0; c < 20; ++c) {
    const std::string text = random_architecture(rng);
    const bool residual = c % 2 == 1;
    std::vector<KernelSpec> kernels;
    const auto probe = Architecture::parse(text, {KernelSpec::gaussian(1.0)});
    for (std::size_t l = 0; l < probe.num_layers(); ++l) kernels.push_back(random_kernel(rng));
    const auto arch = Architecture::parse(text, kernels, residual);
    const Network net = make_network(arch, rng());
    const Weights w = init_weights(arch, rng());
    const auto n = static_cast<Eigen::Index>(std::uniform_int_distribution<int>(1, 12)(rng));
    const Eigen::MatrixXd x = oracle::uniform_matrix(n, static_cast<Eigen::Index>(arch.input_dim), 0, 1, rng);
    const Eigen::VectorXd y = oracle::uniform_matrix(n, 1, -2, 2, rng).col(0);
    const double ridge = c % 3 == 0 ? 0.0 : 1e-2;

    const Eigen::VectorXd analytic = backward(net, w, x, y, ridge).flatten();
    const Eigen::VectorXd numeric = oracle::central_diff(
        arch, w.flatten(), [&](const Weights& v) { return oracle::loss(net, v, x, y, ridge); });
    for (Eigen::Index i = 0; i < analytic.size(); ++i) {
      ++checked;
      if (!oracle::close(analytic(i), numeric(i), 1e-5, 1e-8)) ++bad;
      worst = std::max(worst, std::abs(analytic(i) - numeric(i)));
    }
  }
  const double secs = seconds_since(t0);
  out.detail << " " << checked << " partials, " << bad << " mismatched, max abs diff " << worst << ", "
             << secs << " s";
  out.require(bad == 0, "all partials within 1e-5 rel / 1e-8 abs");
  out.require(secs < 30.0, "runtime < 30 s");
}

void baseline_equivalence(Outcome& out) {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(31);
  double worst = 0.0;
  for (int n : {5, 17, 33, 50}) {
    const Eigen::MatrixXd x = oracle::uniform_matrix(n, 3, 0, 1, rng);
    const Eigen::VectorXd y = oracle::uniform_matrix(n, 1, -1, 1, rng).col(0);
    const KernelSpec k = KernelSpec::gaussian(0.7);
    const double lambda = 1e-3;
    const KrrModel model = krr_fit(x, y, k, lambda);
    const Eigen::MatrixXd gram = kernel_matrix(k, x, x);
    const Eigen::MatrixXd reg = gram + lambda * n * Eigen::MatrixXd::Identity(n, n);
    const Eigen::VectorXd alpha = reg.inverse() * y;
    const Eigen::MatrixXd xt = oracle::uniform_matrix(20, 3, 0, 1, rng);
    const Eigen::VectorXd ref = kernel_matrix(k, xt, x) * alpha;
    worst = std::max(worst, (model.predict_batch(xt) - ref).cwiseAbs().maxCoeff());
  }
  out.detail << " KRR vs dense inverse max diff " << worst;
  out.require(worst <= 1e-10, "KRR within 1e-10");

  Scenario sc;
  sc.kind = ScenarioKind::Additive1;
  sc.n = 100;
  sc.seed = 5;
  const Dataset data = generate(sc);
  const KernelSpec k = KernelSpec::gaussian(1.0);
  const double lambda = 1e-3;
  const KrrModel krr = krr_fit(data.x, data.y, k, lambda);
  const RfRidgeModel rf = rf_ridge_fit(data.x, data.y, spectral_sample(k, 4, 4000, 77), lambda);
  const Dataset test = generate_test(sc, 500);
  const double rmse = std::sqrt((krr.predict_batch(test.x) - rf.predict_batch(test.x)).squaredNorm() /
                                static_cast<double>(test.size()));
  const double sd = std::sqrt((data.y.array() - data.y.mean()).square().mean());
  const double secs = seconds_since(t0);
  out.detail << ", RF vs KRR RMSE " << rmse << " (limit " << 0.05 * sd << "), " << secs << " s";
  out.require(rmse <= 0.05 * sd, "RF-KRR RMSE <= 0.05 std(Y)");
  out.require(secs < 60.0, "runtime < 1 min");
}

void example_one(Outcome& out) {
  const auto t0 = Clock::now();
  std::size_t ordered = 0;
  bool all_below = true;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    ExperimentSpec s;
    Scenario sc;
    sc.kind = ScenarioKind::Additive1;
    sc.d = 4;
    sc.n = 4000;
    sc.seed = seed;
    s.scenario = sc;
    s.roster = {ModelKind::Rf, ModelKind::Mlkm};
    s.architecture = "4-32-8-1";
    s.kernels = {KernelSpec::gaussian(0.5), KernelSpec::gaussian(1.0)};
    s.rf_features = 500;
    s.test_size = 4000;
    s.train.learning_rate = 0.05;
    s.train.max_epochs = 1500;
    s.train.patience = std::numeric_limits<std::size_t>::max() / 2;
    s.seed = seed;
    const auto r = run_experiment(s);
    const auto* rf = r.find(ModelKind::Rf);
    const auto* mlkm = r.find(ModelKind::Mlkm);
    if (!rf->ok || !mlkm->ok) {
      out.require(false, "seed " + std::to_string(seed) + " failed: " + rf->error + mlkm->error);
      continue;
    }
    out.detail << " seed " << seed << ": MLKM " << mlkm->mean_test_mse << " RF " << rf->mean_test_mse << ";";
    all_below = all_below && mlkm->mean_test_mse <= 1.45;
    ordered += mlkm->mean_test_mse <= rf->mean_test_mse;
  }
  const double secs = seconds_since(t0);
  out.detail << " ordering holds for " << ordered << "/5";
  out.require(all_below, "every MLKM MSE <= 1.45");
  out.require(ordered >= 3, "MLKM <= RF for >= 3 of 5 seeds");
  out.require(secs < 1800.0, "runtime under 30 min");
}

void coverage_sandwich(Outcome& out) {
  const auto t0 = Clock::now();
  const CoverageResult oracle_run = coverage_study(ResidualOracle{}, 0.05, 10000, 17);
  out.detail << " oracle m=19 coverage " << oracle_run.coverage << " (SE " << oracle_run.se << ")";
  out.require(oracle_run.within_band(3.0), "oracle within 3 SE of [0.95, 1.0]");

  PipelineStudy study;
  study.data.kind = ScenarioKind::Additive1;
  study.data.d = 4;
  study.data.n = 1000;
  study.architecture = "4-32-8-1";
  study.kernels = {KernelSpec::gaussian(0.5), KernelSpec::gaussian(1.0)};
  study.train.learning_rate = 0.05;
  study.train.max_epochs = 1500;
  study.train.patience = 100;
  study.fit_size = 500;
  study.calib_size = 500;
  study.test_points = 100;
  const CoverageResult pipe = coverage_study(study, 0.05, 200, 23);
  const double secs = seconds_since(t0);
  out.detail << ", pipeline coverage " << pipe.coverage << " over " << pipe.evaluations
             << " evaluations, " << secs << " s";
  out.require(pipe.coverage >= 0.92 && pipe.coverage <= 0.975, "pipeline coverage in [0.92, 0.975]");
  out.require(secs < 600.0, "runtime < 10 min");
}

void complexity(Outcome& out) {
  const auto t0 = Clock::now();
  ScalingSpec ml;
  ml.model = ModelKind::Mlkm;
  ml.n_grid = {1000, 2000, 4000, 8000};
  ml.architecture = "4-32-8-1";
  ml.epochs = 5;
  ml.seed = 3;
  const ScalingResult mr = scaling_study(ml);
  out.detail << " MLKM epoch slope " << mr.slope;
  out.require(mr.slope >= 0.8 && mr.slope <= 1.3, "MLKM slope in [0.8, 1.3]");

  ScalingSpec kr;
  kr.model = ModelKind::Krr;
  kr.n_grid = {250, 500, 1000, 2000};
  kr.seed = 4;
  const ScalingResult kres = scaling_study(kr);
  out.detail << ", KRR fit slope " << kres.slope;
  out.require(kres.slope >= 2.2 && kres.slope <= 3.3, "KRR slope in [2.2, 3.3]");

  std::mt19937_64 rng(8);
  bool counts_ok = true;
  for (int t = 0; t < 50; ++t) {
    const std::string text = random_architecture(rng);
    const auto arch = Architecture::parse(text, {KernelSpec::gaussian(1.0)});
    std::vector<std::size_t> dims = arch.widths;
    dims.push_back(1);
    std::size_t sum = 0;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) sum += dims[l] * dims[l + 1];
    counts_ok = counts_ok && parameter_count(arch) == sum && init_weights(arch, 1).flatten().size() ==
                                                                  static_cast<Eigen::Index>(sum);
  }
  const auto big = Architecture::parse("128-256-16-1", {KernelSpec::gaussian(1.0)});
  out.detail << ", storage(128-256-16-1) " << storage_count(big);
  out.require(counts_ok, "parameter_count equals the sum of D_{l+1} D_l");
  out.require(storage_count(big) == 74032, "storage accounting 74032");
  const double secs = seconds_since(t0);
  out.detail << ", " << secs << " s";
  out.require(secs < 600.0, "runtime < 10 min");
}

void structural(Outcome& out) {
  std::mt19937_64 rng(12);
  std::size_t grids = 0;
  bool latin = true;
  for (int t = 0; t < 200; ++t) {
    const std::size_t L = std::uniform_int_distribution<std::size_t>(1, 6)(rng);
    const std::size_t n = std::uniform_int_distribution<std::size_t>(L, 300)(rng);
    const FoldPlan p = make_fold_plan(n, L, rng());
    ++grids;
    std::set<std::size_t> seen;
    for (const auto& f : p.folds) {
      for (auto i : f) latin = latin && seen.insert(i).second;
    }
    latin = latin && seen.size() == n && *seen.rbegin() == n - 1;
    for (std::size_t j = 0; j < L; ++j) {
      std::set<std::size_t> row, col;
      for (std::size_t l = 0; l < L; ++l) {
        row.insert(p.rotations[j][l]);
        col.insert(p.rotations[l][j]);
      }
      latin = latin && row.size() == L && col.size() == L;
    }
  }
  out.detail << " Latin square over " << grids << " random (n, L)";
  out.require(latin, "Latin-square and partition properties");

  const auto arch = Architecture::parse("3-10-4-1", {KernelSpec::gaussian(1.0)});
  const Network net = make_network(arch, 5);
  std::vector<Weights> subs;
  for (std::uint64_t s = 0; s < 2; ++s) subs.push_back(init_weights(arch, 100 + s));
  const CrossFitModel cf(net, subs);
  const Eigen::MatrixXd x = oracle::uniform_matrix(200, 3, 0, 1, rng);
  const Eigen::VectorXd mean = 0.5 * (forward_batch(net, subs[0], x) + forward_batch(net, subs[1], x));
  const double diff = (cf.predict_batch(x) - mean).cwiseAbs().maxCoeff();
  out.detail << ", cross-fit mean diff " << diff;
  out.require(diff <= 1e-15, "cross-fit mean to 1e-15");

  Scenario sc;
  sc.kind = ScenarioKind::Additive1;
  sc.n = 300;
  sc.seed = 6;
  const Dataset data = generate(sc);
  TrainConfig cfg;
  cfg.learning_rate = 0.05;
  cfg.max_epochs = 40;
  cfg.seed = 9;
  const auto arch4 = Architecture::parse("4-12-4-1", {KernelSpec::gaussian(0.5), KernelSpec::gaussian(1.0)});
  auto fit = [&](std::size_t threads) {
    TrainConfig c = cfg;
    c.threads = threads;
    return adds_fit(data, make_network(arch4, 11), make_fold_plan(data.size(), 2, 13), c);
  };
  const CrossFitModel a = fit(1);
  const CrossFitModel b = fit(1);
  const CrossFitModel c = fit(2);
  bool same = a.submodels().size() == b.submodels().size();
  for (std::size_t j = 0; same && j < a.submodels().size(); ++j) {
    same = a.submodels()[j] == b.submodels()[j] && a.submodels()[j] == c.submodels()[j];
  }
  out.detail << ", reruns " << (same ? "bit-identical" : "differ");
  out.require(same, "identical seeds give bit-identical models");
}

}  // namespace

int main() {
  report(1, "feature/kernel fidelity", feature_fidelity);
  report(2, "gradient exactness", gradient_exactness);
  report(3, "baseline oracle equivalence", baseline_equivalence);
  report(4, "example 1 desk reproduction", example_one);
  report(5, "coverage sandwich", coverage_sandwich);
  report(6, "complexity slopes and storage", complexity);
  report(7, "structural invariants", structural);
  std::printf("%d of 7 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
