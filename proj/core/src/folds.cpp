#include "mlkm/error.hpp"
#include "mlkm/random.hpp"
#include "mlkm/training.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace mlkm {

FoldPlan make_fold_plan(std::size_t n, std::size_t num_folds, std::uint64_t seed) {
  if (num_folds == 0) fail(Errc::InvalidArgument, "fold plan needs at least one fold");
  if (n < num_folds) {
    fail(Errc::TooFewSamples, "cannot split " + std::to_string(n) + " samples into " +
                                  std::to_string(num_folds) + " nonempty folds");
  }
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng = make_rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);

  FoldPlan plan;
  plan.n = n;
  plan.folds.resize(num_folds);
  const std::size_t base = n / num_folds;
  const std::size_t extra = n % num_folds;
  std::size_t pos = 0;
  for (std::size_t k = 0; k < num_folds; ++k) {
    const std::size_t size = base + (k < extra ? 1 : 0);
    auto& fold = plan.folds[k];
    fold.assign(perm.begin() + static_cast<std::ptrdiff_t>(pos),
                perm.begin() + static_cast<std::ptrdiff_t>(pos + size));
    std::sort(fold.begin(), fold.end());
    pos += size;
  }
  plan.rotations.resize(num_folds);
  for (std::size_t j = 0; j < num_folds; ++j) {
    for (std::size_t l = 0; l < num_folds; ++l) plan.rotations[j].push_back((j + l) % num_folds);
  }
  return plan;
}

}  // namespace mlkm
