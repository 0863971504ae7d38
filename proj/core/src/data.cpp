#include "mlkm/data.hpp"

#include "mlkm/error.hpp"
#include "mlkm/random.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace mlkm {

void Dataset::validate() const {
  if (y.size() != x.rows()) {
    fail(Errc::DimMismatch, "dataset has " + std::to_string(x.rows()) + " rows but " +
                                std::to_string(y.size()) + " responses");
  }
  if (truth && truth->size() != y.size()) fail(Errc::DimMismatch, "truth length differs from y");
  if (!x.allFinite() || !y.allFinite()) fail(Errc::NonFiniteInput, "dataset has non-finite entries");
}

Dataset Dataset::subset(const std::vector<std::size_t>& rows) const {
  Dataset out;
  out.x.resize(static_cast<Eigen::Index>(rows.size()), x.cols());
  out.y.resize(static_cast<Eigen::Index>(rows.size()));
  if (truth) out.truth = Eigen::VectorXd(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(rows[i]);
    if (r >= x.rows()) fail(Errc::InvalidArgument, "subset row out of range");
    const auto k = static_cast<Eigen::Index>(i);
    out.x.row(k) = x.row(r);
    out.y(k) = y(r);
    if (truth) (*out.truth)(k) = (*truth)(r);
  }
  out.provenance = provenance;
  return out;
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> random_split(
    std::size_t n, std::size_t first_size, std::uint64_t seed) {
  if (first_size > n) fail(Errc::TooFewSamples, "split larger than the sample");
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng = make_rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<std::size_t> a(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(first_size));
  std::vector<std::size_t> b(perm.begin() + static_cast<std::ptrdiff_t>(first_size), perm.end());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  return {std::move(a), std::move(b)};
}

double mean_squared_error(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size()) fail(Errc::DimMismatch, "mean_squared_error: length mismatch");
  if (a.size() == 0) return 0.0;
  return (a - b).squaredNorm() / static_cast<double>(a.size());
}

}  // namespace mlkm
