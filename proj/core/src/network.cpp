#include "mlkm/network.hpp"

#include "mlkm/error.hpp"
#include "mlkm/random.hpp"

#include <charconv>
#include <cmath>
#include <string>

namespace mlkm {

std::size_t Architecture::feature_input_dim(std::size_t layer) const {
  if (layer >= widths.size()) fail(Errc::InvalidArgument, "layer index out of range");
  return layer == 0 ? input_dim : widths[layer];
}

void Architecture::validate() const {
  if (input_dim == 0) fail(Errc::InvalidDim, "architecture needs input_dim >= 1");
  if (widths.empty()) fail(Errc::InvalidWidth, "architecture needs at least one layer");
  for (std::size_t l = 0; l < widths.size(); ++l) {
    if (widths[l] == 0) fail(Errc::InvalidWidth, "layer widths must be >= 1");
    if (l > 0 && widths[l] >= widths[l - 1]) {
      fail(Errc::InvalidWidth, "layer widths must be strictly decreasing: " + layer_string());
    }
  }
  if (kernels.size() != widths.size()) {
    fail(Errc::DimMismatch, "architecture has " + std::to_string(widths.size()) +
                                " layers but " + std::to_string(kernels.size()) + " kernels");
  }
  for (const auto& k : kernels) k.validate();
}

Architecture Architecture::parse(std::string_view layers, std::vector<KernelSpec> kernels,
                                 bool residual) {
  std::vector<std::size_t> dims;
  std::size_t pos = 0;
  while (pos <= layers.size()) {
    const std::size_t dash = std::min(layers.find('-', pos), layers.size());
    const std::string_view tok = layers.substr(pos, dash - pos);
    std::size_t value = 0;
    const auto [end, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (tok.empty() || ec != std::errc{} || end != tok.data() + tok.size()) {
      fail(Errc::InvalidArgument, "malformed layer string '" + std::string(layers) + "'");
    }
    dims.push_back(value);
    pos = dash + 1;
  }
  if (dims.size() < 3 || dims.back() != 1) {
    fail(Errc::InvalidWidth,
         "layer string must look like d-D1-...-DL-1, got '" + std::string(layers) + "'");
  }
  Architecture arch;
  arch.input_dim = dims.front();
  arch.widths.assign(dims.begin() + 1, dims.end() - 1);
  arch.residual = residual;
  if (kernels.size() == 1 && arch.widths.size() > 1) {
    kernels.assign(arch.widths.size(), kernels.front());
  }
  arch.kernels = std::move(kernels);
  arch.validate();
  return arch;
}

std::string Architecture::layer_string() const {
  std::string s = std::to_string(input_dim);
  for (auto w : widths) s += "-" + std::to_string(w);
  return s + "-1";
}

std::vector<WeightShape> weight_shapes(const Architecture& arch) {
  const std::size_t layers = arch.num_layers();
  std::vector<WeightShape> out;
  if (!arch.residual) {
    for (std::size_t l = 0; l < layers; ++l) {
      const std::size_t next = l + 1 < layers ? arch.widths[l + 1] : 1;
      out.push_back({next, arch.widths[l], l});
    }
    return out;
  }
  for (std::size_t b = 1; b < layers; ++b) {
    out.push_back({arch.widths[b], arch.widths[b - 1], b - 1});
    out.push_back({arch.widths[b], arch.widths[b], b - 1});
  }
  out.push_back({1, arch.widths.back(), layers - 1});
  return out;
}

std::size_t parameter_count(const Architecture& arch) {
  std::size_t p = 0;
  for (const auto& s : weight_shapes(arch)) p += s.rows * s.cols;
  return p;
}

std::size_t storage_count(const Architecture& arch) {
  std::size_t links = arch.input_dim * arch.widths.front();
  std::size_t features = 0;
  for (std::size_t l = 0; l < arch.widths.size(); ++l) {
    const std::size_t next = l + 1 < arch.widths.size() ? arch.widths[l + 1] : 1;
    links += arch.widths[l] * next;
    features += arch.widths[l];
  }
  return 2 * links + features;
}

std::size_t Weights::parameter_count() const noexcept {
  std::size_t p = 0;
  for (const auto& m : mats) p += static_cast<std::size_t>(m.size());
  return p;
}

namespace {

Eigen::VectorXd flatten_mats(const std::vector<Eigen::MatrixXd>& mats) {
  std::size_t p = 0;
  for (const auto& m : mats) p += static_cast<std::size_t>(m.size());
  Eigen::VectorXd flat(static_cast<Eigen::Index>(p));
  Eigen::Index k = 0;
  for (const auto& m : mats) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) flat(k++) = m(r, c);
    }
  }
  return flat;
}

}  // namespace

Eigen::VectorXd Weights::flatten() const { return flatten_mats(mats); }

Eigen::VectorXd GradientBundle::flatten() const { return flatten_mats(grads); }

double Weights::squared_norm() const noexcept {
  double s = 0.0;
  for (const auto& m : mats) s += m.squaredNorm();
  return s;
}

bool Weights::operator==(const Weights& other) const {
  if (mats.size() != other.mats.size()) return false;
  for (std::size_t i = 0; i < mats.size(); ++i) {
    if (mats[i].rows() != other.mats[i].rows() || mats[i].cols() != other.mats[i].cols() ||
        mats[i] != other.mats[i]) {
      return false;
    }
  }
  return true;
}

void check_congruent(const Architecture& arch, const Weights& w) {
  const auto shapes = weight_shapes(arch);
  if (shapes.size() != w.mats.size()) {
    fail(Errc::DimMismatch, "expected " + std::to_string(shapes.size()) +
                                " weight matrices, got " + std::to_string(w.mats.size()));
  }
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    if (static_cast<std::size_t>(w.mats[i].rows()) != shapes[i].rows ||
        static_cast<std::size_t>(w.mats[i].cols()) != shapes[i].cols) {
      fail(Errc::DimMismatch, "weight matrix " + std::to_string(i) + " has shape " +
                                  std::to_string(w.mats[i].rows()) + "x" +
                                  std::to_string(w.mats[i].cols()) + ", expected " +
                                  std::to_string(shapes[i].rows) + "x" +
                                  std::to_string(shapes[i].cols));
    }
  }
}

Weights zero_weights(const Architecture& arch) {
  Weights w;
  for (const auto& s : weight_shapes(arch)) {
    w.mats.push_back(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(s.rows),
                                           static_cast<Eigen::Index>(s.cols)));
  }
  return w;
}

Weights init_weights(const Architecture& arch, std::uint64_t seed) {
  Weights w = zero_weights(arch);
  Rng rng = make_rng(seed);
  for (auto& m : w.mats) {
    const double bound = std::sqrt(6.0 / static_cast<double>(m.rows() + m.cols()));
    std::uniform_real_distribution<double> u(-bound, bound);
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = u(rng);
    }
  }
  return w;
}

Weights unflatten(const Architecture& arch, const Eigen::VectorXd& flat) {
  Weights w = zero_weights(arch);
  if (static_cast<std::size_t>(flat.size()) != w.parameter_count()) {
    fail(Errc::DimMismatch, "flat parameter vector has the wrong length");
  }
  Eigen::Index k = 0;
  for (auto& m : w.mats) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = flat(k++);
    }
  }
  return w;
}

void Network::validate() const {
  arch.validate();
  if (maps.size() != arch.num_layers()) {
    fail(Errc::DimMismatch, "network needs one feature map per layer");
  }
  for (std::size_t l = 0; l < maps.size(); ++l) {
    if (maps[l].input_dim() != arch.feature_input_dim(l) ||
        maps[l].num_features() != arch.widths[l]) {
      fail(Errc::DimMismatch, "feature map " + std::to_string(l) + " is " +
                                  std::to_string(maps[l].input_dim()) + "->" +
                                  std::to_string(maps[l].num_features()) +
                                  ", architecture expects " +
                                  std::to_string(arch.feature_input_dim(l)) + "->" +
                                  std::to_string(arch.widths[l]));
    }
  }
}

Network make_network(const Architecture& arch, std::uint64_t seed) {
  arch.validate();
  Network net{arch, {}};
  for (std::size_t l = 0; l < arch.num_layers(); ++l) {
    net.maps.push_back(spectral_sample(arch.kernels[l], arch.feature_input_dim(l),
                                       arch.widths[l], derive_seed(seed, l)));
  }
  return net;
}

namespace {

// Intermediate values of a batched forward pass.
//
// Plain:    z_1 = x, s_l = pre_l(z_l), h_l = a_l cos(s_l), z_{l+1} = h_l W_l^T.
// Residual: u_1 = h_1, a_b = u_{b-1} W1^T, s_b = pre_b(a_b), h_b = a cos(s_b),
//           u_b = h_b W2^T + a_b, f = u_L r^T.
struct Tape {
  std::vector<Eigen::MatrixXd> pre;   // s_l
  std::vector<Eigen::MatrixXd> feat;  // h_l
  std::vector<Eigen::MatrixXd> out;   // plain: z_{l+1}; residual: u_l
  Eigen::VectorXd f;
};

void check_inputs(const Network& net, const Weights& w, const Eigen::MatrixXd& x) {
  net.validate();
  check_congruent(net.arch, w);
  if (static_cast<std::size_t>(x.cols()) != net.arch.input_dim) {
    fail(Errc::DimMismatch, "input has " + std::to_string(x.cols()) + " columns, network expects " +
                                std::to_string(net.arch.input_dim));
  }
}

// pre[0] is never read by run_backward (no gradient flows into the input),
// so the pass can start from cached first-layer features.
Tape run_forward_from(const Network& net, const Weights& w, Eigen::MatrixXd feat0) {
  const std::size_t layers = net.arch.num_layers();
  Tape t;
  t.pre.resize(layers);
  t.feat.resize(layers);
  t.out.resize(layers);
  t.feat[0] = std::move(feat0);
  if (!net.arch.residual) {
    for (std::size_t l = 0; l < layers; ++l) {
      if (l > 0) {
        t.pre[l] = net.maps[l].preactivations(t.out[l - 1]);
        t.feat[l] = net.maps[l].amplitude() * t.pre[l].array().cos().matrix();
      }
      t.out[l].noalias() = t.feat[l] * w.mats[l].transpose();
    }
    t.f = t.out.back().col(0);
    return t;
  }
  t.out[0] = t.feat[0];
  for (std::size_t b = 1; b < layers; ++b) {
    const auto& w1 = w.mats[2 * (b - 1)];
    const auto& w2 = w.mats[2 * (b - 1) + 1];
    Eigen::MatrixXd a = t.out[b - 1] * w1.transpose();
    t.pre[b] = net.maps[b].preactivations(a);
    t.feat[b] = net.maps[b].amplitude() * t.pre[b].array().cos().matrix();
    t.out[b] = std::move(a);
    t.out[b].noalias() += t.feat[b] * w2.transpose();
  }
  t.f = t.out.back() * w.mats.back().transpose();
  return t;
}

Tape run_forward(const Network& net, const Weights& w, const Eigen::MatrixXd& x) {
  return run_forward_from(net, w, net.maps[0].apply_batch(x));
}

void check_features(const Network& net, const Weights& w, const Eigen::MatrixXd& features) {
  net.validate();
  check_congruent(net.arch, w);
  if (static_cast<std::size_t>(features.cols()) != net.arch.widths.front()) {
    fail(Errc::DimMismatch, "feature matrix has " + std::to_string(features.cols()) +
                                " columns, layer 1 has " + std::to_string(net.arch.widths.front()));
  }
}

// Back-propagates per-sample output sensitivities `gf` (n-vector). For every
// weight matrix in a group >= min_group, calls sink(index, g_out, input)
// where row i of g_out (n x rows) is d(gf_i * f_i)/d(pre-multiplied output)
// and row i of input (n x cols) is the vector the matrix multiplies; the
// matrix gradient is then g_out^T * input.
template <class Sink>
void run_backward(const Network& net, const Weights& w, const Tape& t, const Eigen::VectorXd& gf,
                  std::size_t min_group, Sink&& sink) {
  const std::size_t layers = net.arch.num_layers();
  if (!net.arch.residual) {
    Eigen::MatrixXd g = gf;  // n x D_{l+1}
    for (std::size_t l = layers; l-- > 0;) {
      sink(l, g, t.feat[l]);
      if (l == min_group) return;
      Eigen::MatrixXd gs = (g * w.mats[l]).cwiseProduct(
          (-net.maps[l].amplitude() * t.pre[l].array().sin()).matrix());
      g.noalias() = gs * net.maps[l].omegas();
    }
    return;
  }
  const std::size_t readout = w.mats.size() - 1;
  const Eigen::MatrixXd g_out = gf;
  sink(readout, g_out, t.out.back());
  if (min_group == layers - 1) return;
  Eigen::MatrixXd gu = gf * w.mats.back();  // n x D_L
  for (std::size_t b = layers - 1; b >= 1; --b) {
    const std::size_t i1 = 2 * (b - 1);
    const std::size_t i2 = i1 + 1;
    sink(i2, gu, t.feat[b]);
    Eigen::MatrixXd gs = (gu * w.mats[i2]).cwiseProduct(
        (-net.maps[b].amplitude() * t.pre[b].array().sin()).matrix());
    Eigen::MatrixXd ga = gs * net.maps[b].omegas() + gu;
    sink(i1, ga, t.out[b - 1]);
    if (b - 1 == min_group) return;
    gu.noalias() = ga * w.mats[i1];
  }
}

void check_targets(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double ridge) {
  if (x.rows() == 0) fail(Errc::TooFewSamples, "gradient needs a nonempty batch");
  if (y.size() != x.rows()) fail(Errc::DimMismatch, "targets and inputs differ in length");
  if (!x.allFinite() || !y.allFinite()) fail(Errc::NonFiniteInput, "batch has non-finite values");
  if (!(ridge >= 0.0)) fail(Errc::InvalidArgument, "ridge must be >= 0");
}

}  // namespace

std::vector<std::size_t> group_members(const Architecture& arch, std::size_t group) {
  std::vector<std::size_t> idx;
  const auto shapes = weight_shapes(arch);
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    if (shapes[i].group == group) idx.push_back(i);
  }
  if (idx.empty()) fail(Errc::InvalidArgument, "no weights in layer group " + std::to_string(group));
  return idx;
}

double forward(const Network& net, const Weights& w, const Eigen::Ref<const Eigen::VectorXd>& x) {
  Eigen::MatrixXd row = x.transpose();
  return forward_batch(net, w, row)(0);
}

Eigen::VectorXd forward_batch(const Network& net, const Weights& w, const Eigen::MatrixXd& x) {
  check_inputs(net, w, x);
  return run_forward(net, w, x).f;
}

GradientBundle backward(const Network& net, const Weights& w, const Eigen::MatrixXd& x,
                        const Eigen::VectorXd& y, double ridge) {
  check_inputs(net, w, x);
  check_targets(x, y, ridge);
  const Tape t = run_forward(net, w, x);
  const Eigen::VectorXd resid = t.f - y;
  const double n = static_cast<double>(x.rows());

  GradientBundle out;
  out.grads.resize(w.mats.size());
  out.loss = resid.squaredNorm() / n + ridge * w.squared_norm();
  const Eigen::VectorXd gf = (2.0 / n) * resid;
  run_backward(net, w, t, gf, 0, [&](std::size_t i, const Eigen::MatrixXd& g, const Eigen::MatrixXd& in) {
    out.grads[i].noalias() = g.transpose() * in;
    out.grads[i] += 2.0 * ridge * w.mats[i];
  });
  return out;
}

namespace {

GradientBundle layer_gradient_impl(const Network& net, const Weights& w, const Tape& t,
                                   const Eigen::VectorXd& y, std::size_t group, double ridge) {
  const auto members = group_members(net.arch, group);
  const Eigen::VectorXd resid = t.f - y;
  const double n = static_cast<double>(y.size());

  GradientBundle out;
  out.grads.resize(members.size());
  out.loss = resid.squaredNorm() / n + ridge * w.squared_norm();
  const Eigen::VectorXd gf = (2.0 / n) * resid;
  run_backward(net, w, t, gf, group, [&](std::size_t i, const Eigen::MatrixXd& g, const Eigen::MatrixXd& in) {
    for (std::size_t k = 0; k < members.size(); ++k) {
      if (members[k] != i) continue;
      out.grads[k].noalias() = g.transpose() * in;
      out.grads[k] += 2.0 * ridge * w.mats[i];
    }
  });
  return out;
}

}  // namespace

GradientBundle layer_gradient(const Network& net, const Weights& w, const Eigen::MatrixXd& x,
                              const Eigen::VectorXd& y, std::size_t group, double ridge) {
  check_inputs(net, w, x);
  check_targets(x, y, ridge);
  return layer_gradient_impl(net, w, run_forward(net, w, x), y, group, ridge);
}

Eigen::MatrixXd input_features(const Network& net, const Eigen::MatrixXd& x) {
  net.validate();
  return net.maps[0].apply_batch(x);
}

Eigen::VectorXd forward_from_features(const Network& net, const Weights& w,
                                      const Eigen::MatrixXd& features) {
  check_features(net, w, features);
  return run_forward_from(net, w, features).f;
}

GradientBundle layer_gradient_from_features(const Network& net, const Weights& w,
                                            const Eigen::MatrixXd& features,
                                            const Eigen::VectorXd& y, std::size_t group,
                                            double ridge) {
  check_features(net, w, features);
  check_targets(features, y, ridge);
  return layer_gradient_impl(net, w, run_forward_from(net, w, features), y, group, ridge);
}

Eigen::MatrixXd param_jacobian(const Network& net, const Weights& w, const Eigen::MatrixXd& x) {
  check_inputs(net, w, x);
  if (x.rows() == 0) fail(Errc::TooFewSamples, "param_jacobian needs at least one row");
  const Tape t = run_forward(net, w, x);
  const auto shapes = weight_shapes(net.arch);
  std::vector<Eigen::Index> offset(shapes.size());
  Eigen::Index p = 0;
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    offset[i] = p;
    p += static_cast<Eigen::Index>(shapes[i].rows * shapes[i].cols);
  }
  Eigen::MatrixXd jac(x.rows(), p);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(x.rows());
  run_backward(net, w, t, ones, 0, [&](std::size_t i, const Eigen::MatrixXd& g, const Eigen::MatrixXd& in) {
    // Row-major vec of g_i^T in_i is the Kronecker product g_i (x) in_i.
    const Eigen::Index cols = in.cols();
    for (Eigen::Index r = 0; r < g.cols(); ++r) {
      jac.middleCols(offset[i] + r * cols, cols) = in.array().colwise() * g.col(r).array();
    }
  });
  return jac;
}

}  // namespace mlkm
