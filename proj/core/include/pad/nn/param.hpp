// Named parameter tensors, their optimizer state, and initialization.
#pragma once

#include <Eigen/Core>
#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "pad/common.hpp"
#include "pad/rng.hpp"

namespace pad::nn {

template <typename S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <typename S>
using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;

template <typename S>
struct Parameter {
  std::string name;
  Mat<S> value;
  Mat<S> grad;
  Mat<S> m, v;  // Adam moments
  bool trainable = true;
};

template <typename S>
class ParamStore {
 public:
  Parameter<S>& add(const std::string& name, int rows, int cols) {
    if (find(name)) fail(ErrorKind::state, "duplicate parameter '" + name + "'");
    auto p = std::make_unique<Parameter<S>>();
    p->name = name;
    p->value = Mat<S>::Zero(rows, cols);
    p->grad = Mat<S>::Zero(rows, cols);
    p->m = Mat<S>::Zero(rows, cols);
    p->v = Mat<S>::Zero(rows, cols);
    items.push_back(std::move(p));
    return *items.back();
  }
  Parameter<S>* find(const std::string& name) {
    for (auto& p : items)
      if (p->name == name) return p.get();
    return nullptr;
  }
  Parameter<S>& at(const std::string& name) {
    if (auto* p = find(name)) return *p;
    fail(ErrorKind::state, "unknown parameter '" + name + "'");
  }
  void zero_grad() {
    for (auto& p : items) p->grad.setZero();
  }
  // Freezing stops the tape from tracking gradients through these tensors and
  // makes the optimizer skip them.
  void set_trainable(bool on) const {
    for (const auto& p : items) p->trainable = on;
  }
  long long scalar_count() const {
    long long n = 0;
    for (const auto& p : items) n += p->value.size();
    return n;
  }
  std::vector<std::unique_ptr<Parameter<S>>> items;  // stable addresses
};

template <typename S>
void xavier_uniform(Parameter<S>& p, Rng& rng) {
  const double limit = std::sqrt(6.0 / (p.value.rows() + p.value.cols()));
  for (Eigen::Index i = 0; i < p.value.size(); ++i)
    p.value.data()[i] = static_cast<S>(rng.uniform(-limit, limit));
}

template <typename S>
void normal_init(Parameter<S>& p, Rng& rng, double stddev) {
  for (Eigen::Index i = 0; i < p.value.size(); ++i)
    p.value.data()[i] = static_cast<S>(rng.normal() * stddev);
}

template <typename S>
struct Adam {
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  long long t = 0;
  void step(ParamStore<S>& ps, double lr) {
    ++t;
    const double c1 = 1.0 - std::pow(beta1, static_cast<double>(t));
    const double c2 = 1.0 - std::pow(beta2, static_cast<double>(t));
    for (auto& up : ps.items) {
      Parameter<S>& p = *up;
      if (!p.trainable) continue;
      p.m = static_cast<S>(beta1) * p.m + static_cast<S>(1.0 - beta1) * p.grad;
      p.v = static_cast<S>(beta2) * p.v.array().matrix() +
            static_cast<S>(1.0 - beta2) * p.grad.array().square().matrix();
      p.value.array() -= static_cast<S>(lr) * (p.m.array() / static_cast<S>(c1)) /
                         ((p.v.array() / static_cast<S>(c2)).sqrt() + static_cast<S>(eps));
    }
  }
};

// Per-epoch cosine annealing from lr0 at epoch 0 down to 0 at epoch `total`.
inline double cosine_lr(double lr0, int epoch, int total) {
  if (total <= 0) return lr0;
  const double frac = std::min(1.0, static_cast<double>(epoch) / total);
  return lr0 * 0.5 * (1.0 + std::cos(frac * 3.14159265358979323846));
}

}  // namespace pad::nn
