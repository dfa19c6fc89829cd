// Transformer building blocks on top of the tape: linear/layer-norm layers,
// multi-head attention, position-wise feed-forward, and post-LN encoder and
// decoder layers over batch-stacked sequences.
#pragma once

#include <string>
#include <vector>

#include "pad/nn/tape.hpp"

namespace pad::nn {

template <typename S>
struct Ctx {
  bool training = false;
  S dropout = S(0);
  Rng* rng = nullptr;
  S drop() const { return training ? dropout : S(0); }
};

template <typename S>
struct Linear {
  Parameter<S>* W = nullptr;  // in x out
  Parameter<S>* b = nullptr;  // 1 x out
  static Linear create(ParamStore<S>& ps, const std::string& name, int in, int out, Rng& rng) {
    Linear l;
    l.W = &ps.add(name + ".w", in, out);
    l.b = &ps.add(name + ".b", 1, out);
    xavier_uniform(*l.W, rng);
    return l;
  }
  Var operator()(Tape<S>& t, Var x) const {
    return t.add_rowvec(t.matmul(x, t.param(*W)), t.param(*b));
  }
};

template <typename S>
struct LayerNorm {
  Parameter<S>* gamma = nullptr;
  Parameter<S>* beta = nullptr;
  static LayerNorm create(ParamStore<S>& ps, const std::string& name, int d) {
    LayerNorm l;
    l.gamma = &ps.add(name + ".gamma", 1, d);
    l.beta = &ps.add(name + ".beta", 1, d);
    l.gamma->value.setOnes();
    return l;
  }
  Var operator()(Tape<S>& t, Var x) const {
    return t.layer_norm(x, t.param(*gamma), t.param(*beta), static_cast<S>(1e-5));
  }
};

template <typename S>
struct MultiHeadAttention {
  Linear<S> wq, wk, wv, wo;
  int heads = 1;
  static MultiHeadAttention create(ParamStore<S>& ps, const std::string& name, int d, int heads,
                                   Rng& rng) {
    MultiHeadAttention a;
    a.heads = heads;
    a.wq = Linear<S>::create(ps, name + ".q", d, d, rng);
    a.wk = Linear<S>::create(ps, name + ".k", d, d, rng);
    a.wv = Linear<S>::create(ps, name + ".v", d, d, rng);
    a.wo = Linear<S>::create(ps, name + ".o", d, d, rng);
    return a;
  }
  Var apply(Tape<S>& t, Var xq, Var xkv, int batch, int len_q, int len_kv) const {
    Var o = t.attention(wq(t, xq), wk(t, xkv), wv(t, xkv), batch, len_q, len_kv, heads);
    return wo(t, o);
  }
};

template <typename S>
struct FeedForward {
  Linear<S> fc1, fc2;
  static FeedForward create(ParamStore<S>& ps, const std::string& name, int d, int ff, Rng& rng) {
    FeedForward f;
    f.fc1 = Linear<S>::create(ps, name + ".fc1", d, ff, rng);
    f.fc2 = Linear<S>::create(ps, name + ".fc2", ff, d, rng);
    return f;
  }
  Var apply(Tape<S>& t, Var x) const { return fc2(t, t.gelu(fc1(t, x))); }
};

template <typename S>
struct EncoderLayer {
  MultiHeadAttention<S> attn;
  FeedForward<S> ff;
  LayerNorm<S> ln1, ln2;
  static EncoderLayer create(ParamStore<S>& ps, const std::string& name, int d, int heads, int ff,
                             Rng& rng) {
    EncoderLayer l;
    l.attn = MultiHeadAttention<S>::create(ps, name + ".attn", d, heads, rng);
    l.ff = FeedForward<S>::create(ps, name + ".ff", d, ff, rng);
    l.ln1 = LayerNorm<S>::create(ps, name + ".ln1", d);
    l.ln2 = LayerNorm<S>::create(ps, name + ".ln2", d);
    return l;
  }
  Var apply(Tape<S>& t, Var x, int batch, int len, const Ctx<S>& ctx) const {
    Var a = attn.apply(t, x, x, batch, len, len);
    if (ctx.drop() > S(0)) a = t.dropout(a, ctx.drop(), *ctx.rng);
    x = ln1(t, t.add(x, a));
    Var f = ff.apply(t, x);
    if (ctx.drop() > S(0)) f = t.dropout(f, ctx.drop(), *ctx.rng);
    return ln2(t, t.add(x, f));
  }
};

template <typename S>
struct DecoderLayer {
  MultiHeadAttention<S> self_attn, cross_attn;
  FeedForward<S> ff;
  LayerNorm<S> ln1, ln2, ln3;
  static DecoderLayer create(ParamStore<S>& ps, const std::string& name, int d, int heads, int ff,
                             Rng& rng) {
    DecoderLayer l;
    l.self_attn = MultiHeadAttention<S>::create(ps, name + ".self", d, heads, rng);
    l.cross_attn = MultiHeadAttention<S>::create(ps, name + ".cross", d, heads, rng);
    l.ff = FeedForward<S>::create(ps, name + ".ff", d, ff, rng);
    l.ln1 = LayerNorm<S>::create(ps, name + ".ln1", d);
    l.ln2 = LayerNorm<S>::create(ps, name + ".ln2", d);
    l.ln3 = LayerNorm<S>::create(ps, name + ".ln3", d);
    return l;
  }
  Var apply(Tape<S>& t, Var x, Var mem, int batch, int len_t, int len_m, const Ctx<S>& ctx) const {
    Var a = self_attn.apply(t, x, x, batch, len_t, len_t);
    if (ctx.drop() > S(0)) a = t.dropout(a, ctx.drop(), *ctx.rng);
    x = ln1(t, t.add(x, a));
    Var c = cross_attn.apply(t, x, mem, batch, len_t, len_m);
    if (ctx.drop() > S(0)) c = t.dropout(c, ctx.drop(), *ctx.rng);
    x = ln2(t, t.add(x, c));
    Var f = ff.apply(t, x);
    if (ctx.drop() > S(0)) f = t.dropout(f, ctx.drop(), *ctx.rng);
    return ln3(t, t.add(x, f));
  }
};

template <typename S>
struct TransformerEncoder {
  std::vector<EncoderLayer<S>> layers;
  static TransformerEncoder create(ParamStore<S>& ps, const std::string& name, int n, int d,
                                   int heads, int ff, Rng& rng) {
    TransformerEncoder e;
    for (int i = 0; i < n; ++i)
      e.layers.push_back(EncoderLayer<S>::create(ps, name + ".l" + std::to_string(i), d, heads, ff, rng));
    return e;
  }
  Var apply(Tape<S>& t, Var x, int batch, int len, const Ctx<S>& ctx) const {
    for (const auto& l : layers) x = l.apply(t, x, batch, len, ctx);
    return x;
  }
};

template <typename S>
struct TransformerDecoder {
  std::vector<DecoderLayer<S>> layers;
  static TransformerDecoder create(ParamStore<S>& ps, const std::string& name, int n, int d,
                                   int heads, int ff, Rng& rng) {
    TransformerDecoder e;
    for (int i = 0; i < n; ++i)
      e.layers.push_back(DecoderLayer<S>::create(ps, name + ".l" + std::to_string(i), d, heads, ff, rng));
    return e;
  }
  Var apply(Tape<S>& t, Var x, Var mem, int batch, int len_t, int len_m, const Ctx<S>& ctx) const {
    for (const auto& l : layers) x = l.apply(t, x, mem, batch, len_t, len_m, ctx);
    return x;
  }
};

// Standard sinusoidal table, one row per position.
template <typename S>
Mat<S> sinusoidal_positions(int len, int d) {
  Mat<S> pe(len, d);
  for (int pos = 0; pos < len; ++pos) {
    for (int i = 0; i < d; i += 2) {
      const double div = std::pow(10000.0, static_cast<double>(i) / d);
      pe(pos, i) = static_cast<S>(std::sin(pos / div));
      if (i + 1 < d) pe(pos, i + 1) = static_cast<S>(std::cos(pos / div));
    }
  }
  return pe;
}

// Same construction evaluated at a (possibly fractional) scalar position.
template <typename S>
Mat<S> sinusoidal_time(double tpos, int d) {
  Mat<S> e(1, d);
  for (int i = 0; i < d; i += 2) {
    const double div = std::pow(10000.0, static_cast<double>(i) / d);
    e(0, i) = static_cast<S>(std::sin(tpos / div));
    if (i + 1 < d) e(0, i + 1) = static_cast<S>(std::cos(tpos / div));
  }
  return e;
}

}  // namespace pad::nn
