#include "pad/codec.hpp"

#include <algorithm>

namespace pad {

namespace {

std::pair<double, double> element_range(const ProblemSpec& spec, Role role, int i) {
  return role == Role::params ? spec.param_range(i) : spec.var_range(i);
}

int element_type(const ProblemSpec& spec, Role role, int i) {
  return static_cast<int>(role == Role::params ? spec.param_type(i) : spec.var_type(i));
}

int element_count(const ProblemSpec& spec, Role role) {
  return role == Role::params ? spec.x_len() : spec.y_len();
}

}  // namespace

std::vector<ElementToken> normalize(const ProblemSpec& spec, const Eigen::VectorXd& raw, Role role,
                                    int* clamped) {
  const int n = element_count(spec, role);
  if (raw.size() != n)
    fail(ErrorKind::schema, "normalize: vector length " + std::to_string(raw.size()) +
                                " does not match schema length " + std::to_string(n));
  std::vector<ElementToken> out(n);
  for (int i = 0; i < n; ++i) {
    const double v = raw[i];
    if (!std::isfinite(v)) fail(ErrorKind::domain, "normalize: non-finite element");
    auto [lo, hi] = element_range(spec, role, i);
    double u;
    if (hi <= lo) {
      u = 0.5;
    } else {
      u = (v - lo) / (hi - lo);
      if (u < 0.0 || u > 1.0) {
        u = std::clamp(u, 0.0, 1.0);
        if (clamped) ++*clamped;
      }
    }
    out[i] = {u, element_type(spec, role, i)};
  }
  return out;
}

Eigen::VectorXd denormalize(const ProblemSpec& spec, const Eigen::VectorXd& values01, Role role) {
  const int n = element_count(spec, role);
  if (values01.size() != n)
    fail(ErrorKind::schema, "denormalize: vector length " + std::to_string(values01.size()) +
                                " does not match schema length " + std::to_string(n));
  Eigen::VectorXd out(n);
  for (int i = 0; i < n; ++i) {
    auto [lo, hi] = element_range(spec, role, i);
    out[i] = hi <= lo ? lo : lo + std::clamp(values01[i], 0.0, 1.0) * (hi - lo);
  }
  return out;
}

CodecConfig CodecConfig::parse_echo(const std::string& echo) {
  CodecConfig c;
  for (const auto& [key, val] : detail::parse_echo_kv(echo)) {
    try {
      if (key == "encode_dims") c.encode_dims = detail::parse_echo_list(val);
      else if (key == "hidden_dim") c.hidden_dim = std::stoi(val);
      else if (key == "decode_dims") c.decode_dims = detail::parse_echo_list(val);
      else if (key == "type_num") c.type_num = std::stoi(val);
      else if (key == "epochs") c.epochs = std::stoi(val);
      else if (key == "init_lr") c.init_lr = std::stod(val);
      else if (key == "batch") c.batch = std::stoi(val);
      else if (key == "seed") c.seed = std::stoull(val);
      else fail(ErrorKind::config, "unknown codec checkpoint setting: " + key);
    } catch (const Error&) {
      throw;
    } catch (const std::exception&) {
      fail(ErrorKind::config, "bad codec checkpoint setting: " + key + " = " + val);
    }
  }
  c.validate();
  return c;
}

namespace detail {

CodecShard make_codec_shard(const Dataset& ds) {
  CodecShard sh;
  sh.spec = make_spec(ds.id, ds.M);
  const int xl = sh.spec.x_len(), yl = sh.spec.y_len();
  sh.values01.resize(ds.n(), xl + yl);
  sh.types.reserve(xl + yl);
  for (int j = 0; j < xl; ++j) sh.types.push_back(static_cast<int>(sh.spec.param_type(j)));
  for (int j = 0; j < yl; ++j) sh.types.push_back(static_cast<int>(sh.spec.var_type(j)));
  for (Eigen::Index i = 0; i < ds.n(); ++i) {
    const auto xt = normalize(sh.spec, ds.X.row(i).transpose(), Role::params);
    const auto yt = normalize(sh.spec, ds.Y.row(i).transpose(), Role::vars);
    for (int j = 0; j < xl; ++j) sh.values01(i, j) = xt[j].value;
    for (int j = 0; j < yl; ++j) sh.values01(i, xl + j) = yt[j].value;
  }
  return sh;
}

}  // namespace detail

}  // namespace pad
