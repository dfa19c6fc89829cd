#include <doctest.h>

#include <cmath>

#include "pad/nn/layers.hpp"
#include "support.hpp"

using namespace pad;
using nn::Var;

namespace {

Eigen::MatrixXd randn(int r, int c, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = rng.normal();
  return m;
}

}  // namespace

TEST_CASE("elementwise and shape ops match finite differences") {
  nn::ParamStore<double> ps;
  Rng rng(1);
  auto& w = ps.add("w", 4, 3);
  nn::xavier_uniform(w, rng);
  auto& b = ps.add("b", 1, 3);
  const Eigen::MatrixXd x = randn(5, 4, 2);
  const Eigen::MatrixXd tgt = randn(5, 3, 3);

  auto run = [&](bool train) {
    nn::Tape<double> t;
    Var xv = t.constant(x);
    Var h = t.add_rowvec(t.matmul(xv, t.param(w)), t.param(b));
    Var g = t.gelu(h);
    Var s = t.sigmoid(t.scale(g, 0.7));
    Var mixed = t.hadamard(s, t.add_scaled(g, s, 0.3, -0.2));
    Var cat = t.concat_rows({mixed, t.slice_rows(mixed, 1, 2)});
    Var picked = t.gather_rows(cat, {0, 2, 4, 5, 6});
    Var loss = t.mean_sq_diff(t.slice_cols(picked, 0, 3), tgt.topRows(5));
    if (train) t.backward(loss);
    return static_cast<double>(t.value(loss)(0, 0));
  };
  CHECK(padtest::fd_gradcheck(ps, run, 40, 11) < 1e-6);
}

TEST_CASE("softmax cross-entropy gradients and normalization") {
  nn::ParamStore<double> ps;
  Rng rng(4);
  auto& w = ps.add("w", 6, 5);
  nn::xavier_uniform(w, rng);
  const Eigen::MatrixXd x = randn(7, 6, 5);
  const std::vector<int> labels = {0, 3, 2, 4, 1, 1, 0};
  const std::vector<double> weights = {1.0, 1.5, 1.0, 0.5, 2.0, 1.0, 1.0};

  auto run = [&](bool train) {
    nn::Tape<double> t;
    Var logits = t.matmul(t.constant(x), t.param(w));
    Var loss = t.softmax_xent(logits, labels, weights);
    if (train) t.backward(loss);
    return static_cast<double>(t.value(loss)(0, 0));
  };
  CHECK(padtest::fd_gradcheck(ps, run, 30, 12) < 1e-6);

  nn::Tape<double> t;
  Var p = t.softmax_rows(t.constant(randn(4, 9, 8)));
  const Eigen::MatrixXd pv = t.value(p);
  for (int i = 0; i < 4; ++i) CHECK(pv.row(i).sum() == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(pv.minCoeff() > 0.0);
}

TEST_CASE("layer norm and attention match finite differences") {
  nn::ParamStore<double> ps;
  Rng rng(6);
  const int d = 8, heads = 2, B = 2, L = 3;
  auto enc = nn::EncoderLayer<double>::create(ps, "enc", d, heads, 2 * d, rng);
  const Eigen::MatrixXd x = randn(B * L, d, 7);
  const Eigen::MatrixXd tgt = randn(B * L, d, 9);
  const nn::Ctx<double> ctx;  // eval mode: no dropout

  auto run = [&](bool train) {
    nn::Tape<double> t;
    Var out = enc.apply(t, t.constant(x), B, L, ctx);
    Var loss = t.mean_sq_diff(out, tgt);
    if (train) t.backward(loss);
    return static_cast<double>(t.value(loss)(0, 0));
  };
  CHECK(padtest::fd_gradcheck(ps, run, 50, 13) < 1e-5);
}

TEST_CASE("decoder cross-attention matches finite differences") {
  nn::ParamStore<double> ps;
  Rng rng(14);
  const int d = 6, heads = 2, B = 2, Lt = 2, Lm = 4;
  auto dec = nn::DecoderLayer<double>::create(ps, "dec", d, heads, 2 * d, rng);
  const Eigen::MatrixXd x = randn(B * Lt, d, 20);
  const Eigen::MatrixXd mem = randn(B * Lm, d, 21);
  const Eigen::MatrixXd tgt = randn(B * Lt, d, 22);
  const nn::Ctx<double> ctx;

  auto run = [&](bool train) {
    nn::Tape<double> t;
    Var out = dec.apply(t, t.constant(x), t.constant(mem), B, Lt, Lm, ctx);
    Var loss = t.mean_sq_diff(out, tgt);
    if (train) t.backward(loss);
    return static_cast<double>(t.value(loss)(0, 0));
  };
  CHECK(padtest::fd_gradcheck(ps, run, 50, 15) < 1e-5);
}

TEST_CASE("replicate_rows and mean_all gradients") {
  nn::ParamStore<double> ps;
  Rng rng(30);
  auto& w = ps.add("w", 1, 5);
  nn::xavier_uniform(w, rng);
  auto run = [&](bool train) {
    nn::Tape<double> t;
    Var rep = t.replicate_rows(t.param(w), 4);
    Var loss = t.mean_all(t.hadamard(rep, rep));
    if (train) t.backward(loss);
    return static_cast<double>(t.value(loss)(0, 0));
  };
  CHECK(padtest::fd_gradcheck(ps, run, 10, 31) < 1e-7);
}

TEST_CASE("adam minimizes a quadratic") {
  nn::ParamStore<double> ps;
  auto& w = ps.add("w", 1, 4);
  w.value.setConstant(3.0);
  nn::Adam<double> opt;
  const Eigen::MatrixXd target = randn(1, 4, 44);
  double last = 1e300;
  for (int it = 0; it < 400; ++it) {
    ps.zero_grad();
    nn::Tape<double> t;
    Var loss = t.mean_sq_diff(t.param(w), target);
    t.backward(loss);
    last = t.value(loss)(0, 0);
    opt.step(ps, 0.05);
  }
  CHECK(last < 1e-6);
}

TEST_CASE("cosine schedule starts at the initial rate and decays to zero") {
  CHECK(nn::cosine_lr(2e-4, 0, 70) == doctest::Approx(2e-4));
  CHECK(nn::cosine_lr(2e-4, 70, 70) == doctest::Approx(0.0).epsilon(1e-12));
  double prev = nn::cosine_lr(2e-4, 0, 70);
  for (int e = 1; e <= 70; ++e) {
    const double cur = nn::cosine_lr(2e-4, e, 70);
    CHECK(cur <= prev + 1e-18);
    prev = cur;
  }
}

TEST_CASE("frozen parameters receive no gradient and no update") {
  nn::ParamStore<double> ps;
  auto& w = ps.add("w", 2, 2);
  w.value.setConstant(1.0);
  w.trainable = false;
  const Eigen::MatrixXd before = w.value;
  nn::Adam<double> opt;
  ps.zero_grad();
  nn::Tape<double> t;
  Var loss = t.mean_sq_diff(t.param(w), Eigen::MatrixXd::Zero(2, 2));
  t.backward(loss);
  CHECK(w.grad.cwiseAbs().maxCoeff() == 0.0);
  opt.step(ps, 0.1);
  CHECK((w.value.array() == before.array()).all());
}

TEST_CASE("dropout is identity in eval mode and seeded in training") {
  nn::Tape<double> t;
  const Eigen::MatrixXd x = randn(3, 4, 50);
  Var xv = t.constant(x);
  Rng r1(5), r2(5), r3(6);
  const Eigen::MatrixXd a = t.value(t.dropout(xv, 0.5, r1));
  const Eigen::MatrixXd b = t.value(t.dropout(xv, 0.5, r2));
  CHECK((a.array() == b.array()).all());
  const Eigen::MatrixXd c = t.value(t.dropout(xv, 0.5, r3));
  CHECK_FALSE((a.array() == c.array()).all());
  Rng r4(7);
  CHECK((t.value(t.dropout(xv, 0.0, r4)).array() == x.array()).all());
}

TEST_CASE("sinusoidal embeddings have the expected shape and scale") {
  const Eigen::MatrixXd pe = nn::sinusoidal_positions<double>(10, 8);
  CHECK(pe.rows() == 10);
  CHECK(pe.cols() == 8);
  CHECK(pe.cwiseAbs().maxCoeff() <= 1.0 + 1e-12);
  const Eigen::MatrixXd te = nn::sinusoidal_time<double>(3.0, 8);
  CHECK(te.rows() == 1);
  CHECK(te.cols() == 8);
  CHECK((nn::sinusoidal_time<double>(3.0, 8).array() == te.array()).all());
}
