// Reverse-mode autodiff on a flat tape of matrix-valued nodes.  Each op
// records a closure that scatters the output gradient to its inputs; backward
// replays the tape in reverse creation order, which is a valid topological
// order by construction.
#pragma once

#include <cmath>
#include <functional>
#include <unordered_map>
#include <utility>
#include <vector>

#include "pad/nn/param.hpp"

namespace pad::nn {

struct Var {
  int i = -1;
};

template <typename S>
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // ------------------------------------------------------------- leaves

  Var constant(Mat<S> v) { return push(std::move(v), false); }

  Var input(Mat<S> v, bool needs_grad) { return push(std::move(v), needs_grad); }

  // Binding is cached: the same parameter always maps to the same node, so
  // repeated use accumulates into one gradient before the flush to p.grad.
  Var param(Parameter<S>& p) {
    auto it = bound_.find(&p);
    if (it != bound_.end()) return Var{it->second};
    Var v = push(p.value, p.trainable);
    bound_.emplace(&p, v.i);
    return v;
  }

  // Reference into node storage: invalidated by the next op call.
  const Mat<S>& value(Var v) const { return nodes_[check(v)].val; }
  const Mat<S>& grad(Var v) const {
    const Node& n = nodes_[check(v)];
    if (n.grad.size() == 0) fail(ErrorKind::state, "gradient was not propagated to this node");
    return n.grad;
  }

  // ---------------------------------------------------------------- ops

  Var matmul(Var a, Var b) {
    Var out = push(value(a) * value(b), needs(a) || needs(b));
    record(out, [this, a, b, out] {
      const Mat<S>& go = g(out);
      if (needs(a)) acc(a, go * value(b).transpose());
      if (needs(b)) acc(b, value(a).transpose() * go);
    });
    return out;
  }

  Var add(Var a, Var b) { return add_scaled(a, b, S(1), S(1)); }
  Var sub(Var a, Var b) { return add_scaled(a, b, S(1), S(-1)); }

  Var add_scaled(Var a, Var b, S ca, S cb) {
    Var out = push(ca * value(a) + cb * value(b), needs(a) || needs(b));
    record(out, [this, a, b, ca, cb, out] {
      if (needs(a)) acc(a, ca * g(out));
      if (needs(b)) acc(b, cb * g(out));
    });
    return out;
  }

  Var scale(Var a, S s) {
    Var out = push(s * value(a), needs(a));
    record(out, [this, a, s, out] {
      if (needs(a)) acc(a, s * g(out));
    });
    return out;
  }

  Var add_const(Var a, const Mat<S>& c) {
    Var out = push(value(a) + c, needs(a));
    record(out, [this, a, out] {
      if (needs(a)) acc(a, g(out));
    });
    return out;
  }

  // bias is 1 x C, broadcast over the rows of a
  Var add_rowvec(Var a, Var bias) {
    Mat<S> v = value(a);
    v.rowwise() += value(bias).row(0);
    Var out = push(std::move(v), needs(a) || needs(bias));
    record(out, [this, a, bias, out] {
      const Mat<S>& go = g(out);
      if (needs(a)) acc(a, go);
      if (needs(bias)) acc(bias, go.colwise().sum());
    });
    return out;
  }

  Var hadamard(Var a, Var b) {
    Var out = push(value(a).cwiseProduct(value(b)), needs(a) || needs(b));
    record(out, [this, a, b, out] {
      const Mat<S>& go = g(out);
      if (needs(a)) acc(a, go.cwiseProduct(value(b)));
      if (needs(b)) acc(b, go.cwiseProduct(value(a)));
    });
    return out;
  }

  Var gelu(Var a) {
    const Mat<S>& x = value(a);
    Mat<S> t(x.rows(), x.cols()), y(x.rows(), x.cols());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double xv = static_cast<double>(x.data()[i]);
      const double u = 0.7978845608028654 * (xv + 0.044715 * xv * xv * xv);
      const double th = std::tanh(u);
      t.data()[i] = static_cast<S>(th);
      y.data()[i] = static_cast<S>(0.5 * xv * (1.0 + th));
    }
    Var out = push(std::move(y), needs(a));
    nodes_[out.i].aux.push_back(std::move(t));
    record(out, [this, a, out] {
      if (!needs(a)) return;
      const Mat<S>& x2 = value(a);
      const Mat<S>& th = nodes_[out.i].aux[0];
      const Mat<S>& go = g(out);
      Mat<S> dx(x2.rows(), x2.cols());
      for (Eigen::Index i = 0; i < x2.size(); ++i) {
        const double xv = static_cast<double>(x2.data()[i]);
        const double tv = static_cast<double>(th.data()[i]);
        const double du = 0.7978845608028654 * (1.0 + 3.0 * 0.044715 * xv * xv);
        const double d = 0.5 * (1.0 + tv) + 0.5 * xv * (1.0 - tv * tv) * du;
        dx.data()[i] = static_cast<S>(d * static_cast<double>(go.data()[i]));
      }
      acc(a, dx);
    });
    return out;
  }

  Var sigmoid(Var a) {
    const Mat<S>& x = value(a);
    Mat<S> y(x.rows(), x.cols());
    for (Eigen::Index i = 0; i < x.size(); ++i)
      y.data()[i] = static_cast<S>(1.0 / (1.0 + std::exp(-static_cast<double>(x.data()[i]))));
    Var out = push(std::move(y), needs(a));
    record(out, [this, a, out] {
      if (!needs(a)) return;
      const Mat<S>& yv = value(out);
      acc(a, g(out).cwiseProduct(yv.cwiseProduct((Mat<S>::Ones(yv.rows(), yv.cols()) - yv))));
    });
    return out;
  }

  Var softmax_rows(Var a) {
    Mat<S> p = softmax(value(a));
    Var out = push(std::move(p), needs(a));
    record(out, [this, a, out] {
      if (!needs(a)) return;
      const Mat<S>& pv = value(out);
      const Mat<S>& go = g(out);
      Mat<S> gp = go.cwiseProduct(pv);
      Vec<S> rs = gp.rowwise().sum();
      acc(a, gp - pv.cwiseProduct(rs.replicate(1, pv.cols())));
    });
    return out;
  }

  // Row-wise layer norm; gamma and beta are 1 x C.
  Var layer_norm(Var x, Var gamma, Var beta, S eps) {
    const Mat<S>& xv = value(x);
    const int C = static_cast<int>(xv.cols());
    Mat<S> xhat(xv.rows(), C);
    Vec<S> inv_std(xv.rows());
    for (Eigen::Index r = 0; r < xv.rows(); ++r) {
      const S mu = xv.row(r).mean();
      const S var = (xv.row(r).array() - mu).square().sum() / C;
      const S is = S(1) / std::sqrt(var + eps);
      inv_std[r] = is;
      xhat.row(r) = (xv.row(r).array() - mu) * is;
    }
    Mat<S> y = xhat;
    y.array().rowwise() *= value(gamma).row(0).array();
    y.rowwise() += value(beta).row(0);
    Var out = push(std::move(y), needs(x) || needs(gamma) || needs(beta));
    nodes_[out.i].aux.push_back(std::move(xhat));
    nodes_[out.i].aux.push_back(inv_std);
    record(out, [this, x, gamma, beta, out, C] {
      const Mat<S>& go = g(out);
      const Mat<S>& xh = nodes_[out.i].aux[0];
      const Mat<S>& is = nodes_[out.i].aux[1];
      if (needs(gamma)) acc(gamma, go.cwiseProduct(xh).colwise().sum());
      if (needs(beta)) acc(beta, go.colwise().sum());
      if (!needs(x)) return;
      Mat<S> dxh = go;
      dxh.array().rowwise() *= value(gamma).row(0).array();
      Mat<S> dx(go.rows(), C);
      for (Eigen::Index r = 0; r < go.rows(); ++r) {
        const S m1 = dxh.row(r).mean();
        const S m2 = dxh.row(r).cwiseProduct(xh.row(r)).mean();
        dx.row(r) = is(r, 0) * (dxh.row(r).array() - m1 - xh.row(r).array() * m2);
      }
      acc(x, dx);
    });
    return out;
  }

  Var slice_rows(Var a, int r0, int n) {
    Var out = push(value(a).middleRows(r0, n), needs(a));
    record(out, [this, a, r0, n, out] {
      if (!needs(a)) return;
      Mat<S> da = Mat<S>::Zero(value(a).rows(), value(a).cols());
      da.middleRows(r0, n) = g(out);
      acc(a, da);
    });
    return out;
  }

  Var slice_cols(Var a, int c0, int n) {
    Var out = push(value(a).middleCols(c0, n), needs(a));
    record(out, [this, a, c0, n, out] {
      if (!needs(a)) return;
      Mat<S> da = Mat<S>::Zero(value(a).rows(), value(a).cols());
      da.middleCols(c0, n) = g(out);
      acc(a, da);
    });
    return out;
  }

  Var concat_rows(const std::vector<Var>& xs) {
    if (xs.empty()) fail(ErrorKind::state, "concat of zero blocks");
    Eigen::Index rows = 0;
    bool any = false;
    for (Var v : xs) {
      rows += value(v).rows();
      any = any || needs(v);
    }
    Mat<S> y(rows, value(xs[0]).cols());
    Eigen::Index r = 0;
    for (Var v : xs) {
      y.middleRows(r, value(v).rows()) = value(v);
      r += value(v).rows();
    }
    Var out = push(std::move(y), any);
    std::vector<Var> xs2 = xs;
    record(out, [this, xs2, out] {
      const Mat<S>& go = g(out);
      Eigen::Index r2 = 0;
      for (Var v : xs2) {
        const Eigen::Index nr = value(v).rows();
        if (needs(v)) acc(v, go.middleRows(r2, nr));
        r2 += nr;
      }
    });
    return out;
  }

  Var gather_rows(Var a, std::vector<int> idx) {
    const Mat<S>& av = value(a);
    Mat<S> y(static_cast<Eigen::Index>(idx.size()), av.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) {
      if (idx[i] < 0 || idx[i] >= av.rows()) fail(ErrorKind::state, "gather index out of range");
      y.row(static_cast<Eigen::Index>(i)) = av.row(idx[i]);
    }
    Var out = push(std::move(y), needs(a));
    record(out, [this, a, idx = std::move(idx), out] {
      if (!needs(a)) return;
      const Mat<S>& go = g(out);
      Mat<S> da = Mat<S>::Zero(value(a).rows(), value(a).cols());
      for (std::size_t i = 0; i < idx.size(); ++i)
        da.row(idx[i]) += go.row(static_cast<Eigen::Index>(i));
      acc(a, da);
    });
    return out;
  }

  Var replicate_rows(Var a, int times) {
    Var out = push(value(a).replicate(times, 1), needs(a));
    record(out, [this, a, times, out] {
      if (!needs(a)) return;
      const Mat<S>& go = g(out);
      const Eigen::Index nr = value(a).rows();
      Mat<S> da = Mat<S>::Zero(nr, value(a).cols());
      for (int k = 0; k < times; ++k) da += go.middleRows(k * nr, nr);
      acc(a, da);
    });
    return out;
  }

  // Inverted dropout; identity when p <= 0.
  Var dropout(Var a, S p, Rng& rng) {
    if (p <= S(0)) return a;
    const Mat<S>& x = value(a);
    Mat<S> mask(x.rows(), x.cols());
    const double keep = 1.0 - static_cast<double>(p);
    for (Eigen::Index i = 0; i < mask.size(); ++i)
      mask.data()[i] = rng.uniform() < keep ? static_cast<S>(1.0 / keep) : S(0);
    Var out = push(x.cwiseProduct(mask), needs(a));
    nodes_[out.i].aux.push_back(std::move(mask));
    record(out, [this, a, out] {
      if (needs(a)) acc(a, g(out).cwiseProduct(nodes_[out.i].aux[0]));
    });
    return out;
  }

  // Batched multi-head scaled dot-product attention over stacked sequences.
  // q is (batch*len_q) x d; k and v are (batch*len_kv) x d; d % heads == 0.
  Var attention(Var q, Var k, Var v, int batch, int len_q, int len_kv, int heads) {
    const Mat<S>& qv = value(q);
    const Mat<S>& kv = value(k);
    const Mat<S>& vv = value(v);
    const int d = static_cast<int>(qv.cols());
    if (d % heads != 0) fail(ErrorKind::config, "attention width not divisible by head count");
    if (qv.rows() != static_cast<Eigen::Index>(batch) * len_q ||
        kv.rows() != static_cast<Eigen::Index>(batch) * len_kv || vv.rows() != kv.rows())
      fail(ErrorKind::state, "attention input shape mismatch");
    const int dh = d / heads;
    const S alpha = static_cast<S>(1.0 / std::sqrt(static_cast<double>(dh)));
    Mat<S> y(qv.rows(), d);
    std::vector<Mat<S>> probs;
    probs.reserve(static_cast<std::size_t>(batch) * heads);
    for (int b = 0; b < batch; ++b) {
      for (int h = 0; h < heads; ++h) {
        const auto Q = qv.block(b * len_q, h * dh, len_q, dh);
        const auto K = kv.block(b * len_kv, h * dh, len_kv, dh);
        const auto V = vv.block(b * len_kv, h * dh, len_kv, dh);
        Mat<S> P = softmax(alpha * (Q * K.transpose()));
        y.block(b * len_q, h * dh, len_q, dh) = P * V;
        probs.push_back(std::move(P));
      }
    }
    Var out = push(std::move(y), needs(q) || needs(k) || needs(v));
    nodes_[out.i].aux = std::move(probs);
    record(out, [this, q, k, v, batch, len_q, len_kv, heads, dh, alpha, out] {
      const Mat<S>& go = g(out);
      const Mat<S>& qv2 = value(q);
      const Mat<S>& kv2 = value(k);
      const Mat<S>& vv2 = value(v);
      Mat<S> dq = Mat<S>::Zero(qv2.rows(), qv2.cols());
      Mat<S> dk = Mat<S>::Zero(kv2.rows(), kv2.cols());
      Mat<S> dv = Mat<S>::Zero(vv2.rows(), vv2.cols());
      for (int b = 0; b < batch; ++b) {
        for (int h = 0; h < heads; ++h) {
          const Mat<S>& P = nodes_[out.i].aux[static_cast<std::size_t>(b) * heads + h];
          const auto Q = qv2.block(b * len_q, h * dh, len_q, dh);
          const auto K = kv2.block(b * len_kv, h * dh, len_kv, dh);
          const auto V = vv2.block(b * len_kv, h * dh, len_kv, dh);
          const auto GO = go.block(b * len_q, h * dh, len_q, dh);
          dv.block(b * len_kv, h * dh, len_kv, dh) += P.transpose() * GO;
          Mat<S> dP = GO * V.transpose();
          Mat<S> gp = dP.cwiseProduct(P);
          Vec<S> rs = gp.rowwise().sum();
          Mat<S> dS = gp - P.cwiseProduct(rs.replicate(1, P.cols()));
          dq.block(b * len_q, h * dh, len_q, dh) += alpha * (dS * K);
          dk.block(b * len_kv, h * dh, len_kv, dh) += alpha * (dS.transpose() * Q);
        }
      }
      if (needs(q)) acc(q, dq);
      if (needs(k)) acc(k, dk);
      if (needs(v)) acc(v, dv);
    });
    return out;
  }

  // ------------------------------------------------------------- losses

  Var mean_sq_diff(Var a, const Mat<S>& target) {
    const Mat<S>& av = value(a);
    if (av.rows() != target.rows() || av.cols() != target.cols())
      fail(ErrorKind::state, "mean_sq_diff shape mismatch");
    Mat<S> out1(1, 1);
    out1(0, 0) = (av - target).squaredNorm() / static_cast<S>(av.size());
    Var out = push(std::move(out1), needs(a));
    nodes_[out.i].aux.push_back(target);
    record(out, [this, a, out] {
      if (!needs(a)) return;
      const Mat<S>& t = nodes_[out.i].aux[0];
      const S go = g(out)(0, 0);
      acc(a, (S(2) * go / static_cast<S>(t.size())) * (value(a) - t));
    });
    return out;
  }

  // Weighted mean of per-row cross entropy after a row softmax.
  Var softmax_xent(Var logits, std::vector<int> labels, std::vector<S> weights) {
    const Mat<S>& z = value(logits);
    if (static_cast<Eigen::Index>(labels.size()) != z.rows() || labels.size() != weights.size())
      fail(ErrorKind::state, "cross entropy batch size mismatch");
    Mat<S> p = softmax(z);
    S wsum = S(0), loss = S(0);
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] < 0 || labels[i] >= z.cols()) fail(ErrorKind::state, "label out of range");
      const double pi = std::max(1e-30, static_cast<double>(p(static_cast<Eigen::Index>(i), labels[i])));
      loss += weights[i] * static_cast<S>(-std::log(pi));
      wsum += weights[i];
    }
    if (wsum <= S(0)) fail(ErrorKind::state, "cross entropy needs positive total weight");
    Mat<S> out1(1, 1);
    out1(0, 0) = loss / wsum;
    Var out = push(std::move(out1), needs(logits));
    nodes_[out.i].aux.push_back(std::move(p));
    record(out, [this, logits, labels = std::move(labels), weights = std::move(weights), wsum, out] {
      if (!needs(logits)) return;
      const S go = g(out)(0, 0);
      Mat<S> dz = nodes_[out.i].aux[0];
      for (std::size_t i = 0; i < labels.size(); ++i) {
        auto row = dz.row(static_cast<Eigen::Index>(i));
        row(0, labels[i]) -= S(1);
        row *= go * weights[i] / wsum;
      }
      acc(logits, dz);
    });
    return out;
  }

  Var mean_all(Var a) {
    Mat<S> out1(1, 1);
    out1(0, 0) = value(a).mean();
    Var out = push(std::move(out1), needs(a));
    record(out, [this, a, out] {
      if (!needs(a)) return;
      const S go = g(out)(0, 0) / static_cast<S>(value(a).size());
      acc(a, Mat<S>::Constant(value(a).rows(), value(a).cols(), go));
    });
    return out;
  }

  // --------------------------------------------------------------- drive

  void backward(Var loss) {
    if (ran_backward_) fail(ErrorKind::state, "backward may run once per tape");
    ran_backward_ = true;
    Node& top = nodes_[check(loss)];
    if (top.val.size() != 1) fail(ErrorKind::state, "backward needs a scalar loss");
    top.grad = Mat<S>::Ones(1, 1);
    for (int i = loss.i; i >= 0; --i) {
      Node& n = nodes_[static_cast<std::size_t>(i)];
      if (n.back && n.grad.size() != 0) n.back();
    }
    for (auto& [p, idx] : bound_) {
      Node& n = nodes_[static_cast<std::size_t>(idx)];
      if (p->trainable && n.grad.size() != 0) p->grad += n.grad;
    }
  }

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Mat<S> val;
    Mat<S> grad;  // empty until touched
    bool needs = false;
    std::function<void()> back;
    std::vector<Mat<S>> aux;
  };

  static Mat<S> softmax(const Mat<S>& z) {
    Mat<S> p(z.rows(), z.cols());
    for (Eigen::Index r = 0; r < z.rows(); ++r) {
      const S mx = z.row(r).maxCoeff();
      Eigen::Array<S, 1, Eigen::Dynamic> e = (z.row(r).array() - mx).exp();
      p.row(r) = e / e.sum();
    }
    return p;
  }

  int check(Var v) const {
    if (v.i < 0 || v.i >= static_cast<int>(nodes_.size()))
      fail(ErrorKind::state, "use of a variable from another tape");
    return v.i;
  }

  bool needs(Var v) const { return nodes_[check(v)].needs; }

  // output gradient of a node; only read inside back closures, which run
  // only after the node's gradient has been populated
  const Mat<S>& g(Var v) const { return nodes_[check(v)].grad; }

  Var push(Mat<S> val, bool needs_grad) {
    Node n;
    n.val = std::move(val);
    n.needs = needs_grad;
    nodes_.push_back(std::move(n));
    return Var{static_cast<int>(nodes_.size()) - 1};
  }

  void record(Var out, std::function<void()> back) {
    if (nodes_[out.i].needs) nodes_[out.i].back = std::move(back);
  }

  template <typename D>
  void acc(Var v, const D& dv) {
    Node& n = nodes_[check(v)];
    if (n.grad.size() == 0)
      n.grad = dv;
    else
      n.grad += dv;
  }

  std::vector<Node> nodes_;
  std::unordered_map<Parameter<S>*, int> bound_;
  bool ran_backward_ = false;
};

}  // namespace pad::nn
