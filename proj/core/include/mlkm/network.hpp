#pragma once

#include "mlkm/features.hpp"
#include "mlkm/kernel.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace mlkm {

/// Layer bookkeeping for a multi-layer kernel machine.
///
/// widths = (D_1, ..., D_L), strictly decreasing, with an implicit scalar
/// output D_{L+1} = 1. Layer 1 maps R^d -> R^{D_1}; layer l >= 2 maps
/// R^{D_l} -> R^{D_l}. The string form is "d-D_1-...-D_L-1".
struct Architecture {
  std::size_t input_dim = 0;
  std::vector<std::size_t> widths;
  std::vector<KernelSpec> kernels;  // one per layer
  bool residual = false;            // residual-kernel blocks instead of plain composition

  std::size_t num_layers() const noexcept { return widths.size(); }

  /// Input dimension of the l-th feature map (0-based).
  std::size_t feature_input_dim(std::size_t layer) const;

  void validate() const;

  /// Parses "4-32-8-1". `kernels` must hold one spec per layer, or a single
  /// spec that is then repeated for every layer.
  static Architecture parse(std::string_view layers, std::vector<KernelSpec> kernels,
                            bool residual = false);

  std::string layer_string() const;

  bool operator==(const Architecture&) const = default;
};

/// Shape of one weight matrix and the layer group it is trained with.
struct WeightShape {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t group = 0;  // 0-based layer index used by the alternating trainer
};

/// Canonical parameter layout: layers ascending, row-major within a matrix,
/// W^(1) before W^(2) inside a residual block, residual readout last.
///
/// Plain mode: W_l is D_{l+1} x D_l for l = 1..L, group l-1.
/// Residual mode: block l = 2..L holds W_l^(1) (D_l x D_{l-1}) and
/// W_l^(2) (D_l x D_l) in group l-2; the 1 x D_L readout is group L-1.
std::vector<WeightShape> weight_shapes(const Architecture& arch);

std::size_t parameter_count(const Architecture& arch);

/// Storage accounting used for the memory comparison against KRR and RF:
/// 2 * (d*D_1 + sum_l D_l*D_{l+1}) values for parameters and gradients
/// plus sum_l D_l values for the random features.
std::size_t storage_count(const Architecture& arch);

struct Weights {
  std::vector<Eigen::MatrixXd> mats;

  std::size_t parameter_count() const noexcept;
  Eigen::VectorXd flatten() const;
  /// Sum of squared entries.
  double squared_norm() const noexcept;
  bool operator==(const Weights& other) const;
};

/// Throws DimMismatch unless `w` matches the architecture's shapes.
void check_congruent(const Architecture& arch, const Weights& w);

Weights zero_weights(const Architecture& arch);

/// Uniform on [-sqrt(6/(fan_in+fan_out)), +sqrt(6/(fan_in+fan_out))].
Weights init_weights(const Architecture& arch, std::uint64_t seed);

Weights unflatten(const Architecture& arch, const Eigen::VectorXd& flat);

/// The frozen part of a machine: architecture plus one feature map per layer.
struct Network {
  Architecture arch;
  std::vector<FeatureMap> maps;

  /// Throws DimMismatch when the maps do not match the architecture.
  void validate() const;
};

/// Samples every layer's feature map from its kernel with derived seeds.
Network make_network(const Architecture& arch, std::uint64_t seed);

struct GradientBundle {
  std::vector<Eigen::MatrixXd> grads;  // same layout as Weights::mats
  double loss = 0.0;                   // MSE + ridge * |W|^2

  Eigen::VectorXd flatten() const;
};

double forward(const Network& net, const Weights& w,
               const Eigen::Ref<const Eigen::VectorXd>& x);

Eigen::VectorXd forward_batch(const Network& net, const Weights& w, const Eigen::MatrixXd& x);

/// Gradient of mean((y - f)^2) + ridge * |W|^2 with respect to every matrix.
GradientBundle backward(const Network& net, const Weights& w, const Eigen::MatrixXd& x,
                        const Eigen::VectorXd& y, double ridge = 0.0);

/// Same objective restricted to the matrices of one layer group; the
/// returned bundle only holds those matrices, in canonical order.
GradientBundle layer_gradient(const Network& net, const Weights& w, const Eigen::MatrixXd& x,
                              const Eigen::VectorXd& y, std::size_t group,
                              double ridge = 0.0);

/// Indices into Weights::mats that belong to a layer group.
std::vector<std::size_t> group_members(const Architecture& arch, std::size_t group);

/// First-layer features phi_1(x), n x D_1. They do not depend on the
/// weights, so trainers compute them once per sample.
Eigen::MatrixXd input_features(const Network& net, const Eigen::MatrixXd& x);

/// forward_batch / layer_gradient starting from precomputed input_features.
Eigen::VectorXd forward_from_features(const Network& net, const Weights& w,
                                      const Eigen::MatrixXd& features);
GradientBundle layer_gradient_from_features(const Network& net, const Weights& w,
                                            const Eigen::MatrixXd& features,
                                            const Eigen::VectorXd& y, std::size_t group,
                                            double ridge = 0.0);

/// n x p matrix whose i-th row is the gradient of f(x_i; W) in canonical order.
Eigen::MatrixXd param_jacobian(const Network& net, const Weights& w, const Eigen::MatrixXd& x);

}  // namespace mlkm
