#include "mlkm/serialize.hpp"

#include "mlkm/error.hpp"

#include <bit>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace mlkm {

using nlohmann::json;

std::uint64_t fnv1a(std::span<const double> values) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (double v : values) {
    auto bits = std::bit_cast<std::uint64_t>(v);
    for (int b = 0; b < 8; ++b) {
      h ^= bits & 0xffU;
      h *= 0x100000001b3ULL;
      bits >>= 8;
    }
  }
  return h;
}

std::string checksum_hex(std::span<const double> values) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(values)));
  return buf;
}

namespace {

json vec_json(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

Eigen::VectorXd json_vec(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

json mat_json(const Eigen::MatrixXd& m) {
  std::vector<double> flat;
  flat.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) flat.push_back(m(r, c));
  }
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", flat}};
}

Eigen::MatrixXd json_mat(const json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto flat = j.at("data").get<std::vector<double>>();
  if (rows < 0 || cols < 0 || static_cast<std::size_t>(rows * cols) != flat.size()) {
    fail(Errc::ParseError, "matrix record size does not match its shape");
  }
  Eigen::MatrixXd m(rows, cols);
  std::size_t k = 0;
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = flat[k++];
  }
  return m;
}

template <class F>
auto guarded(const char* what, F&& f) {
  try {
    return f();
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::ParseError, std::string(what) + ": " + e.what());
  }
}

void expect_kind(const json& j, const char* kind) {
  const auto got = j.at("kind").get<std::string>();
  if (got != kind) fail(Errc::ParseError, "expected a '" + std::string(kind) + "' record, got '" + got + "'");
}

}  // namespace

json to_json(const KernelSpec& k) {
  json j = {{"family", std::string(to_string(k.family))}, {"scale", k.scale}};
  if (k.family == KernelFamily::Matern) j["nu"] = k.nu;
  return j;
}

KernelSpec kernel_from_json(const json& j) {
  return guarded("kernel record", [&] {
    KernelSpec k;
    k.family = parse_kernel_family(j.at("family").get<std::string>());
    k.scale = j.at("scale").get<double>();
    if (j.contains("nu")) k.nu = j.at("nu").get<double>();
    k.validate();
    return k;
  });
}

json to_json(const Architecture& arch) {
  json kernels = json::array();
  for (const auto& k : arch.kernels) kernels.push_back(to_json(k));
  return {{"layers", arch.layer_string()}, {"kernels", kernels}, {"residual", arch.residual}};
}

Architecture architecture_from_json(const json& j) {
  return guarded("architecture record", [&] {
    std::vector<KernelSpec> kernels;
    for (const auto& k : j.at("kernels")) kernels.push_back(kernel_from_json(k));
    return Architecture::parse(j.at("layers").get<std::string>(), std::move(kernels),
                               j.value("residual", false));
  });
}

json to_json(const FeatureMap& fm) {
  return {{"kind", "feature_map"},
          {"version", kFormatVersion},
          {"kernel", to_json(fm.kernel())},
          {"input_dim", fm.input_dim()},
          {"num_features", fm.num_features()},
          {"seed", fm.seed()},
          {"omegas", mat_json(fm.omegas())},
          {"phases", vec_json(fm.phases())}};
}

FeatureMap feature_map_from_json(const json& j) {
  return guarded("feature map record", [&] {
    expect_kind(j, "feature_map");
    FeatureMap fm(kernel_from_json(j.at("kernel")), json_mat(j.at("omegas")),
                  json_vec(j.at("phases")), j.at("seed").get<std::uint64_t>());
    if (fm.input_dim() != j.at("input_dim").get<std::size_t>() ||
        fm.num_features() != j.at("num_features").get<std::size_t>()) {
      fail(Errc::ParseError, "feature map dimensions disagree with its arrays");
    }
    return fm;
  });
}

json to_json(const Network& net) {
  json maps = json::array();
  for (const auto& m : net.maps) maps.push_back(to_json(m));
  return {{"architecture", to_json(net.arch)}, {"maps", maps}};
}

Network network_from_json(const json& j) {
  return guarded("network record", [&] {
    Network net;
    net.arch = architecture_from_json(j.at("architecture"));
    for (const auto& m : j.at("maps")) net.maps.push_back(feature_map_from_json(m));
    net.validate();
    return net;
  });
}

json weights_to_json(const Architecture& arch, const Weights& w) {
  check_congruent(arch, w);
  const Eigen::VectorXd flat = w.flatten();
  return {{"kind", "weights"},
          {"architecture", arch.layer_string()},
          {"residual", arch.residual},
          {"count", flat.size()},
          {"checksum", checksum_hex({flat.data(), static_cast<std::size_t>(flat.size())})},
          {"values", vec_json(flat)}};
}

Weights weights_from_json(const json& j, const Architecture& arch) {
  return guarded("weights record", [&] {
    expect_kind(j, "weights");
    if (j.at("architecture").get<std::string>() != arch.layer_string() ||
        j.value("residual", false) != arch.residual) {
      fail(Errc::ChecksumMismatch, "weights were saved for architecture '" +
                                       j.at("architecture").get<std::string>() + "'");
    }
    const Eigen::VectorXd flat = json_vec(j.at("values"));
    const auto sum = checksum_hex({flat.data(), static_cast<std::size_t>(flat.size())});
    if (sum != j.at("checksum").get<std::string>()) {
      fail(Errc::ChecksumMismatch, "weights checksum " + sum + " does not match stored " +
                                       j.at("checksum").get<std::string>());
    }
    return unflatten(arch, flat);
  });
}

json model_to_json(const NetworkModel& model) {
  return {{"kind", "network"},
          {"version", kFormatVersion},
          {"network", to_json(model.network())},
          {"weights", weights_to_json(model.network().arch, model.weights())}};
}

json model_to_json(const CrossFitModel& model) {
  json subs = json::array();
  for (const auto& w : model.submodels()) subs.push_back(weights_to_json(model.network().arch, w));
  return {{"kind", "crossfit"},
          {"version", kFormatVersion},
          {"network", to_json(model.network())},
          {"submodels", subs}};
}

json model_to_json(const KrrModel& model) {
  return {{"kind", "krr"},
          {"version", kFormatVersion},
          {"kernel", to_json(model.kernel())},
          {"lambda", model.lambda()},
          {"train_x", mat_json(model.train_x())},
          {"alpha", vec_json(model.alpha())}};
}

json model_to_json(const RfRidgeModel& model) {
  return {{"kind", "rf_ridge"},
          {"version", kFormatVersion},
          {"features", to_json(model.features())},
          {"lambda", model.lambda()},
          {"coef", vec_json(model.coef())}};
}

json model_to_json(const Predictor& model) {
  if (const auto* m = dynamic_cast<const CrossFitModel*>(&model)) return model_to_json(*m);
  if (const auto* m = dynamic_cast<const NetworkModel*>(&model)) return model_to_json(*m);
  if (const auto* m = dynamic_cast<const KrrModel*>(&model)) return model_to_json(*m);
  if (const auto* m = dynamic_cast<const RfRidgeModel*>(&model)) return model_to_json(*m);
  fail(Errc::InvalidArgument, "predictor type has no serialized form");
}

std::unique_ptr<Predictor> model_from_json(const json& j) {
  return guarded("model record", [&]() -> std::unique_ptr<Predictor> {
    const auto kind = j.at("kind").get<std::string>();
    if (j.value("version", 0) != kFormatVersion) {
      fail(Errc::ParseError, "unsupported model format version");
    }
    if (kind == "network") {
      Network net = network_from_json(j.at("network"));
      Weights w = weights_from_json(j.at("weights"), net.arch);
      return std::make_unique<NetworkModel>(std::move(net), std::move(w));
    }
    if (kind == "crossfit") {
      Network net = network_from_json(j.at("network"));
      std::vector<Weights> subs;
      for (const auto& s : j.at("submodels")) subs.push_back(weights_from_json(s, net.arch));
      return std::make_unique<CrossFitModel>(std::move(net), std::move(subs));
    }
    if (kind == "krr") {
      return std::make_unique<KrrModel>(kernel_from_json(j.at("kernel")), json_mat(j.at("train_x")),
                                        json_vec(j.at("alpha")), j.at("lambda").get<double>());
    }
    if (kind == "rf_ridge") {
      return std::make_unique<RfRidgeModel>(feature_map_from_json(j.at("features")),
                                            json_vec(j.at("coef")), j.at("lambda").get<double>());
    }
    fail(Errc::ParseError, "unknown model kind '" + kind + "'");
  });
}

void write_json_file(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(Errc::InvalidArgument, "cannot write '" + path.string() + "'");
  out << j.dump(2) << '\n';
  if (!out) fail(Errc::InvalidArgument, "failed writing '" + path.string() + "'");
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::ParseError, "cannot open '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    fail(Errc::ParseError, path.string() + ": " + e.what());
  }
}

}  // namespace mlkm
