#include "mlkm/error.hpp"
#include "mlkm/training.hpp"

#include <algorithm>
#include <cmath>

namespace mlkm {

namespace {

void check_rates(const std::vector<LayerRate>& layers) {
  if (layers.empty()) fail(Errc::InvalidRate, "need at least one layer");
  for (const auto& r : layers) {
    if (std::isnan(r.q) || !(r.q > 0.0)) fail(Errc::InvalidRate, "smoothness q must be > 0");
    if (!(r.d >= 1.0) || !std::isfinite(r.d)) fail(Errc::InvalidRate, "layer dimension must be >= 1");
  }
}

double layer_exponent(const LayerRate& r) {
  if (std::isinf(r.q)) return 1.0;
  return 2.0 * r.q / (2.0 * r.q + r.d);
}

}  // namespace

std::vector<std::size_t> recommend_widths(std::size_t n, const std::vector<LayerRate>& layers,
                                          double c) {
  if (n < 2) fail(Errc::InvalidArgument, "width rule needs n >= 2");
  if (!(c > 0.0) || !std::isfinite(c)) fail(Errc::InvalidArgument, "width constant must be > 0");
  check_rates(layers);
  const double nn = static_cast<double>(n);
  std::vector<std::size_t> out;
  for (const auto& r : layers) {
    const double d = std::ceil(c * std::pow(nn, layer_exponent(r)) * std::log(nn));
    out.push_back(static_cast<std::size_t>(std::max(1.0, d)));
  }
  return out;
}

double rate_exponent(const std::vector<LayerRate>& layers) {
  check_rates(layers);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    double term = layer_exponent(layers[l]);
    for (std::size_t t = l + 1; t < layers.size(); ++t) term *= std::min(layers[t].q, 1.0);
    best = std::min(best, term);
  }
  return best;
}

}  // namespace mlkm
