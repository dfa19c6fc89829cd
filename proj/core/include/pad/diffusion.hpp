// Latent diffusion over codec solution tokens: squared-cosine noise schedule,
// an encoder-decoder Transformer noise predictor conditioned on the pooled
// formulation embedding and the encoded parameters, constraint-gated training,
// and deterministic DDIM sampling with parallel candidates.
#pragma once

#include <thread>

#include "pad/consnet.hpp"

namespace pad {

struct DiffusionConfig {
  int T = 50;
  int infer_steps = 5;
  int embed_dim = 768;
  int hidden_dim = 128;
  int enc_layers = 6;
  int dec_layers = 6;
  int heads = 8;
  int ffn_mult = 2;
  double dropout = 0.1;
  int epochs = 70;
  double init_lr = 2e-4;
  int batch = 352;
  int p_num = 2;
  double cons_start_ratio = 0.5;  // fraction of training with the constraint loss on
  bool gated_cons_loss = true;
  std::uint64_t seed = 1;

  static DiffusionConfig from(const RunConfig& rc) {
    DiffusionConfig c;
    c.T = static_cast<int>(rc.geti("diffusion_steps"));
    c.infer_steps = static_cast<int>(rc.geti("inference_diffusion_steps"));
    c.embed_dim = static_cast<int>(rc.geti("embedding_dim"));
    c.hidden_dim = static_cast<int>(rc.geti("hidden_dim"));
    c.enc_layers = static_cast<int>(rc.geti("transformer_encoder_num"));
    c.dec_layers = static_cast<int>(rc.geti("transformer_decoder_num"));
    c.heads = static_cast<int>(rc.geti("attention_header_num"));
    c.ffn_mult = static_cast<int>(rc.geti("ffn_mult"));
    c.dropout = rc.getd("transformer_dropout");
    c.epochs = static_cast<int>(rc.geti("diffusion_training_epochs"));
    c.init_lr = rc.getd("diffusion_init_lr");
    c.batch = static_cast<int>(rc.geti("diffusion_batch"));
    c.p_num = static_cast<int>(rc.geti("parallel_sampling_num"));
    c.cons_start_ratio = rc.getd("constrain_loss_start_ratio");
    c.gated_cons_loss = rc.getb("use_gated_constraint_loss");
    c.seed = rc.seed("seed");
    return c;
  }

  void validate() const {
    if (T < 1) fail(ErrorKind::config, "diffusion_steps must be >= 1");
    if (infer_steps < 1 || infer_steps > T)
      fail(ErrorKind::config, "inference step count must lie in [1, diffusion_steps]");
    if (embed_dim < 1 || hidden_dim < 1 || enc_layers < 1 || dec_layers < 1 || heads < 1 ||
        ffn_mult < 1)
      fail(ErrorKind::config, "bad backbone architecture settings");
    if (hidden_dim % heads != 0)
      fail(ErrorKind::config, "hidden_dim must be divisible by the head count");
    if (!(dropout >= 0.0 && dropout < 1.0)) fail(ErrorKind::config, "dropout must lie in [0,1)");
    if (epochs < 0 || batch < 1 || p_num < 1 || !(init_lr >= 0))
      fail(ErrorKind::config, "bad backbone training settings");
    if (!(cons_start_ratio >= 0.0 && cons_start_ratio <= 1.0))
      fail(ErrorKind::config, "constraint-loss start ratio must lie in [0,1]");
  }

  // First epoch (0-based) with the constraint loss active; epochs on and after
  // it make up the trailing cons_start_ratio share of training.
  int first_cons_epoch() const {
    return static_cast<int>(std::floor(epochs * (1.0 - cons_start_ratio)));
  }

  std::string echo() const;
  static DiffusionConfig parse_echo(const std::string& echo);
};

class NoiseSchedule {
 public:
  // Squared-cosine cumulative signal schedule with offset s = 0.008 and the
  // usual 0.999 per-step beta cap (keeps the terminal inversion well posed).
  static NoiseSchedule cosine(int T);

  int T() const { return static_cast<int>(abar_.size()) - 1; }
  double alpha_bar(int t) const {
    if (t < 0 || t > T()) fail(ErrorKind::domain, "schedule index out of [0, T]");
    return abar_[static_cast<std::size_t>(t)];
  }
  const std::vector<double>& values() const { return abar_; }

 private:
  std::vector<double> abar_;
};

// zt = sqrt(abar_t) z0 + sqrt(1 - abar_t) eps, t in [1, T].
template <typename S>
nn::Mat<S> forward_noise(const NoiseSchedule& ns, const nn::Mat<S>& z0, int t,
                         const nn::Mat<S>& eps) {
  if (t < 1 || t > ns.T()) fail(ErrorKind::domain, "diffusion time step out of [1, T]");
  if (eps.rows() != z0.rows() || eps.cols() != z0.cols())
    fail(ErrorKind::state, "noise shape does not match the latent");
  const double ab = ns.alpha_bar(t);
  return (std::sqrt(ab) * z0.template cast<double>() +
          std::sqrt(1.0 - ab) * eps.template cast<double>())
      .template cast<S>();
}

// Closed-form inversion of forward_noise given the (predicted) noise.
template <typename S>
nn::Mat<S> one_shot_denoise(const NoiseSchedule& ns, const nn::Mat<S>& zt, int t,
                            const nn::Mat<S>& eps) {
  if (t < 1 || t > ns.T()) fail(ErrorKind::domain, "diffusion time step out of [1, T]");
  const double ab = ns.alpha_bar(t);
  return ((zt.template cast<double>() - std::sqrt(1.0 - ab) * eps.template cast<double>()) /
          std::sqrt(ab))
      .template cast<S>();
}

// Ascending timestep ladder 0 = t_0 < ... < t_steps = T, evenly spaced.
std::vector<int> ddim_timesteps(int T, int steps);

template <typename S>
class BackboneT {
 public:
  explicit BackboneT(const DiffusionConfig& cfg) : cfg_(cfg), schedule_(NoiseSchedule::cosine(cfg.T)) {
    cfg_.validate();
    Rng rng(derive_seed(cfg_.seed, "backbone-init"));
    proj_ = nn::Linear<S>::create(ps_, "proj", cfg_.embed_dim, cfg_.hidden_dim, rng);
    enc_ = nn::TransformerEncoder<S>::create(ps_, "enc", cfg_.enc_layers, cfg_.hidden_dim,
                                             cfg_.heads, cfg_.ffn_mult * cfg_.hidden_dim, rng);
    dec_ = nn::TransformerDecoder<S>::create(ps_, "dec", cfg_.dec_layers, cfg_.hidden_dim,
                                             cfg_.heads, cfg_.ffn_mult * cfg_.hidden_dim, rng);
    out_ = nn::Linear<S>::create(ps_, "out", cfg_.hidden_dim, cfg_.hidden_dim, rng);
  }

  const DiffusionConfig& config() const { return cfg_; }
  const NoiseSchedule& schedule() const { return schedule_; }
  bool trained() const { return trained_; }
  void set_trained() { trained_ = true; }
  nn::ParamStore<S>& params() { return ps_; }
  const nn::ParamStore<S>& params() const { return ps_; }

  // Encoder memory over the condition sequence [projected pooled tokens;
  // encoded parameters], batch-stacked.  x_lat is (batch * x_len) x hidden.
  nn::Var memory_tape(nn::Tape<S>& t, const TokenMatrix& pooled, nn::Var x_lat, int batch,
                      const nn::Ctx<S>& ctx) const {
    if (pooled.cols() != cfg_.embed_dim)
      fail(ErrorKind::schema, "pooled embedding width does not match the configured embed_dim");
    const int m = static_cast<int>(pooled.rows());
    if (batch < 1 || t.value(x_lat).rows() % batch != 0)
      fail(ErrorKind::state, "latent row count must be a multiple of the batch size");
    const int xl = static_cast<int>(t.value(x_lat).rows()) / batch;
    const int L = m + xl;
    nn::Var e = proj_(t, t.constant(pooled.template cast<S>()));
    nn::Var blocks = t.concat_rows({t.replicate_rows(e, batch), x_lat});
    std::vector<int> order(static_cast<std::size_t>(batch) * L);
    for (int b = 0; b < batch; ++b) {
      int* row = order.data() + static_cast<std::size_t>(b) * L;
      for (int j = 0; j < m; ++j) row[j] = b * m + j;
      for (int j = 0; j < xl; ++j) row[m + j] = batch * m + b * xl + j;
    }
    nn::Var seq = t.add_const(t.gather_rows(blocks, std::move(order)),
                              nn::sinusoidal_positions<S>(L, cfg_.hidden_dim).replicate(batch, 1));
    return enc_.apply(t, seq, batch, L, ctx);
  }

  // Predicted noise for batch-stacked noisy latents; tsteps[b] is sample b's
  // diffusion step, added to its target tokens as a sinusoidal embedding.
  nn::Var noise_tape(nn::Tape<S>& t, nn::Var memory, int len_mem, nn::Var zt,
                     const std::vector<int>& tsteps, int batch, const nn::Ctx<S>& ctx) const {
    if (batch < 1 || t.value(zt).rows() % batch != 0 ||
        static_cast<int>(tsteps.size()) != batch)
      fail(ErrorKind::state, "noisy latent row count must match batch and time steps");
    const int yl = static_cast<int>(t.value(zt).rows()) / batch;
    const nn::Mat<S> pe = nn::sinusoidal_positions<S>(yl, cfg_.hidden_dim);
    nn::Mat<S> addend(static_cast<Eigen::Index>(batch) * yl, cfg_.hidden_dim);
    for (int b = 0; b < batch; ++b) {
      const nn::Mat<S> te = nn::sinusoidal_time<S>(tsteps[b], cfg_.hidden_dim);
      for (int j = 0; j < yl; ++j) addend.row(b * yl + j) = pe.row(j) + te.row(0);
    }
    nn::Var tgt = t.add_const(zt, addend);
    return out_(t, dec_.apply(t, tgt, memory, batch, yl, len_mem, ctx));
  }

  // Inference: condition memory as a plain matrix (dropout off, batch 1).
  nn::Mat<S> encode_condition(const TokenMatrix& pooled, const nn::Mat<S>& x_lat) const {
    require_trained();
    nn::Tape<S> t;
    nn::Ctx<S> ctx;
    return t.value(memory_tape(t, pooled, t.constant(x_lat), 1, ctx));
  }

  nn::Mat<S> predict_noise(const nn::Mat<S>& memory, const nn::Mat<S>& zt, int tstep) const {
    require_trained();
    nn::Tape<S> t;
    nn::Ctx<S> ctx;
    return t.value(noise_tape(t, t.constant(memory), static_cast<int>(memory.rows()),
                              t.constant(zt), {tstep}, 1, ctx));
  }

  // Deterministic DDIM (eta = 0) from `steps` evenly spaced timesteps; returns
  // p_num independently seeded candidate latents.  Candidates may be sampled
  // concurrently; outputs depend only on (seed, candidate index).
  std::vector<nn::Mat<S>> ddim_sample(const TokenMatrix& pooled, const nn::Mat<S>& x_lat,
                                      int y_len, int steps, std::uint64_t seed, int p_num,
                                      int workers = 1) const {
    require_trained();
    if (steps < 1 || steps > cfg_.T)
      fail(ErrorKind::config, "inference step count must lie in [1, diffusion_steps]");
    if (y_len < 1 || p_num < 1) fail(ErrorKind::config, "bad sampling request");
    const nn::Mat<S> memory = encode_condition(pooled, x_lat);
    const std::vector<int> ts = ddim_timesteps(cfg_.T, steps);
    std::vector<nn::Mat<S>> out(static_cast<std::size_t>(p_num));
    auto run_candidate = [&](int k) {
      Rng rng(derive_seed(seed, "ddim", k));
      nn::Mat<S> z(y_len, cfg_.hidden_dim);
      for (Eigen::Index i = 0; i < z.size(); ++i) z.data()[i] = static_cast<S>(rng.normal());
      for (std::size_t i = ts.size() - 1; i > 0; --i) {
        const int tc = ts[i], tn = ts[i - 1];
        const nn::Mat<S> eps = predict_noise(memory, z, tc);
        const nn::Mat<S> z0 = one_shot_denoise(schedule_, z, tc, eps);
        const double abn = schedule_.alpha_bar(tn);
        z = (std::sqrt(abn) * z0.template cast<double>() +
             std::sqrt(1.0 - abn) * eps.template cast<double>())
                .template cast<S>();
      }
      out[static_cast<std::size_t>(k)] = std::move(z);
    };
    const int n_workers = std::max(1, std::min(workers, p_num));
    if (n_workers == 1) {
      for (int k = 0; k < p_num; ++k) run_candidate(k);
    } else {
      std::vector<std::thread> pool;
      for (int w = 0; w < n_workers; ++w)
        pool.emplace_back([&, w] {
          for (int k = w; k < p_num; k += n_workers) run_candidate(k);
        });
      for (auto& th : pool) th.join();
    }
    return out;
  }

  void save(const std::filesystem::path& path) const {
    require_trained();
    save_checkpoint(path, "backbone", cfg_.echo(), ps_);
  }
  static BackboneT load(const std::filesystem::path& path) {
    BackboneT net(DiffusionConfig::parse_echo(peek_checkpoint(path).config));
    load_checkpoint(path, "backbone", net.ps_);
    net.trained_ = true;
    return net;
  }

 private:
  void require_trained() const {
    if (!trained_) fail(ErrorKind::state, "backbone is untrained; train or load a checkpoint first");
  }
  DiffusionConfig cfg_;
  NoiseSchedule schedule_;
  nn::ParamStore<S> ps_;
  nn::Linear<S> proj_, out_;
  nn::TransformerEncoder<S> enc_;
  nn::TransformerDecoder<S> dec_;
  bool trained_ = false;
};

using Backbone = BackboneT<float>;

struct PadTrainTrace {
  std::vector<double> eps_loss, cons_loss;  // one entry per epoch
};

template <typename S>
BackboneT<S> train_pad(const std::vector<Dataset>& data, const std::vector<EmbeddingSet>& embeds,
                       const CodecT<S>& codec, const ConsNetT<S>& cons, const DiffusionConfig& cfg,
                       PadTrainTrace* trace = nullptr) {
  if (data.empty()) fail(ErrorKind::config, "backbone training needs at least one dataset");
  if (!codec.trained() || !cons.trained())
    fail(ErrorKind::state, "backbone training needs trained codec and constraint module");
  codec.params().set_trainable(false);
  cons.params().set_trainable(false);
  struct Shard {
    detail::ConsBatchPlan plan;  // reuses the normalized-matrix layout; labels unused
    const EmbeddingSet* set;
  };
  std::vector<Shard> shards;
  for (const auto& ds : data) {
    if (ds.n() < 1) fail(ErrorKind::data, "backbone training dataset is empty");
    ConsShard raw;
    raw.id = ds.id;
    raw.M = ds.M;
    raw.samples.resize(ds.n());
    for (Eigen::Index i = 0; i < ds.n(); ++i) {
      raw.samples[static_cast<std::size_t>(i)].x = ds.X.row(i).transpose();
      raw.samples[static_cast<std::size_t>(i)].y = ds.Y.row(i).transpose();
    }
    Shard sh{detail::plan_cons_shard(raw), &detail::find_embedding_set(embeds, ds.id)};
    if (sh.set->eq.empty())
      fail(ErrorKind::data, std::string("no equivalent-variant embeddings for ") + name(ds.id));
    shards.push_back(std::move(sh));
  }
  BackboneT<S> net(cfg);
  const NoiseSchedule& ns = net.schedule();
  nn::Adam<S> opt;
  long long steps_per_epoch = std::numeric_limits<long long>::max();
  std::vector<int> batch_of(shards.size());
  for (std::size_t si = 0; si < shards.size(); ++si) {
    const int n = static_cast<int>(shards[si].plan.labels.size());
    batch_of[si] = std::min(cfg.batch, n);
    steps_per_epoch = std::min<long long>(steps_per_epoch, n / batch_of[si]);
  }
  const int first_cons = cfg.first_cons_epoch();
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = nn::cosine_lr(cfg.init_lr, epoch, cfg.epochs);
    const bool cons_phase = epoch >= first_cons;
    std::vector<std::vector<int>> order(shards.size());
    for (std::size_t si = 0; si < shards.size(); ++si) {
      order[si].resize(shards[si].plan.labels.size());
      std::iota(order[si].begin(), order[si].end(), 0);
      Rng rng(derive_seed(cfg.seed, "pad-shuffle", epoch, si));
      for (int i = static_cast<int>(order[si].size()) - 1; i > 0; --i)
        std::swap(order[si][i], order[si][rng.uniform_int(0, i)]);
    }
    Rng drop_rng(derive_seed(cfg.seed, "pad-dropout", epoch));
    nn::Ctx<S> train_ctx{true, static_cast<S>(cfg.dropout), &drop_rng};
    nn::Ctx<S> frozen_ctx;  // codec / constraint module run without dropout
    double ep_eps = 0.0, ep_cons = 0.0;
    for (long long step = 0; step < steps_per_epoch; ++step) {
      nn::Tape<S> t;
      net.params().zero_grad();
      nn::Var total{};
      double eps_acc = 0.0, cons_acc = 0.0;
      for (std::size_t si = 0; si < shards.size(); ++si) {
        const detail::ConsBatchPlan& plan = shards[si].plan;
        const int B = batch_of[si];
        const int yl = static_cast<int>(plan.yn.cols());
        std::vector<int> rows(order[si].begin() + step * B, order[si].begin() + (step + 1) * B);
        nn::Var x_lat, y_lat;
        detail::batch_latents(t, plan, codec, rows, &x_lat, &y_lat);
        Rng rng(derive_seed(cfg.seed, "pad-step", epoch, step, si));
        const auto& eq = shards[si].set->eq;
        const auto& miss = shards[si].set->miss;
        const auto pick =
            rng.uniform_int(0, static_cast<long long>(eq.size() + miss.size()) - 1);
        const bool is_eq = pick < static_cast<long long>(eq.size());
        const TokenMatrix& e =
            is_eq ? eq[static_cast<std::size_t>(pick)].tokens
                  : miss[static_cast<std::size_t>(pick) - eq.size()].tokens;
        std::vector<int> tsteps(B);
        for (int b = 0; b < B; ++b)
          tsteps[b] = static_cast<int>(rng.uniform_int(1, cfg.T));
        const nn::Mat<S> z0 = t.value(y_lat);  // copy: later ops invalidate node references
        nn::Mat<S> eps(z0.rows(), z0.cols());
        for (Eigen::Index i = 0; i < eps.size(); ++i) eps.data()[i] = static_cast<S>(rng.normal());
        nn::Mat<S> ztm(z0.rows(), z0.cols());
        for (int b = 0; b < B; ++b) {
          const double ab = ns.alpha_bar(tsteps[b]);
          ztm.middleRows(b * yl, yl) =
              (std::sqrt(ab) * z0.middleRows(b * yl, yl).template cast<double>() +
               std::sqrt(1.0 - ab) * eps.middleRows(b * yl, yl).template cast<double>())
                  .template cast<S>();
        }
        nn::Var zt = t.constant(ztm);
        nn::Var memory = net.memory_tape(t, e, x_lat, B, train_ctx);
        const int len_mem = static_cast<int>(e.rows() + plan.xn.cols());
        nn::Var eps_hat = net.noise_tape(t, memory, len_mem, zt, tsteps, B, train_ctx);
        nn::Var l_eps = t.mean_sq_diff(eps_hat, eps);
        eps_acc += static_cast<double>(t.value(l_eps)(0, 0));
        nn::Var l_total = l_eps;
        std::vector<int> qualifying;
        for (int b = 0; b < B; ++b)
          if (2 * tsteps[b] < cfg.T) qualifying.push_back(b);
        if (cons_phase && (is_eq || !cfg.gated_cons_loss) && !qualifying.empty()) {
          const int Bq = static_cast<int>(qualifying.size());
          const int xl = static_cast<int>(plan.xn.cols());
          std::vector<int> yrows(static_cast<std::size_t>(Bq) * yl);
          std::vector<int> xrows(static_cast<std::size_t>(Bq) * xl);
          nn::Mat<S> c_noise(static_cast<Eigen::Index>(Bq) * yl, z0.cols());
          nn::Mat<S> c_inv(static_cast<Eigen::Index>(Bq) * yl, z0.cols());
          std::vector<int> ytypes(static_cast<std::size_t>(Bq) * yl);
          for (int q = 0; q < Bq; ++q) {
            const int b = qualifying[static_cast<std::size_t>(q)];
            const double ab = ns.alpha_bar(tsteps[b]);
            for (int j = 0; j < yl; ++j) {
              yrows[static_cast<std::size_t>(q) * yl + j] = b * yl + j;
              ytypes[static_cast<std::size_t>(q) * yl + j] = plan.y_types[static_cast<std::size_t>(j)];
              c_noise.row(q * yl + j).setConstant(static_cast<S>(std::sqrt(1.0 - ab)));
              c_inv.row(q * yl + j).setConstant(static_cast<S>(1.0 / std::sqrt(ab)));
            }
            for (int j = 0; j < xl; ++j)
              xrows[static_cast<std::size_t>(q) * xl + j] = b * xl + j;
          }
          nn::Var zt_sel = t.gather_rows(zt, yrows);
          nn::Var eh_sel = t.gather_rows(eps_hat, std::move(yrows));
          nn::Var z0_hat = t.hadamard(
              t.sub(zt_sel, t.hadamard(eh_sel, t.constant(std::move(c_noise)))),
              t.constant(std::move(c_inv)));
          nn::Var v01 = codec.decode_value_tape(t, codec.decode_trunk_tape(t, z0_hat));
          nn::Var y_lat2 = codec.encode_tape(t, v01, ytypes);
          nn::Var x_sel = t.gather_rows(x_lat, std::move(xrows));
          nn::Var l_cons = t.mean_all(cons.violation_prob_tape(
              t, cons.logits_tape(t, e, x_sel, y_lat2, Bq, frozen_ctx)));
          cons_acc += static_cast<double>(t.value(l_cons)(0, 0));
          l_total = t.add(l_eps, l_cons);
        }
        total = si == 0 ? l_total : t.add(total, l_total);
      }
      total = t.scale(total, static_cast<S>(1.0 / shards.size()));
      const double loss = static_cast<double>(t.value(total)(0, 0));
      if (!std::isfinite(loss))
        fail(ErrorKind::state,
             "backbone training diverged at epoch " + std::to_string(epoch + 1));
      t.backward(total);
      opt.step(net.params(), lr);
      ep_eps += eps_acc / shards.size();
      ep_cons += cons_acc / shards.size();
    }
    if (trace && steps_per_epoch > 0) {
      trace->eps_loss.push_back(ep_eps / steps_per_epoch);
      trace->cons_loss.push_back(ep_cons / steps_per_epoch);
    }
  }
  net.set_trained();
  return net;
}

// Encode the instance, sample p_num DDIM candidates, decode by magnitude
// (binary threshold 0.5, integer rounding, continuous clamp), and label each
// candidate with feasibility and objective (NaN when undefined).
template <typename S>
std::vector<Solution> generate_solutions(const BackboneT<S>& net, const CodecT<S>& codec,
                                         const ProblemSpec& spec, const ProblemInstance& inst,
                                         const PooledEmbedding& pooled, int p_num,
                                         std::uint64_t seed, int workers = 1) {
  const auto xt = normalize(spec, inst.x, Role::params);
  std::vector<ElementToken> toks(xt.begin(), xt.end());
  const nn::Mat<S> x_lat = codec.encode(toks);
  const std::vector<nn::Mat<S>> latents = net.ddim_sample(
      pooled.tokens, x_lat, spec.y_len(), net.config().infer_steps, seed, p_num, workers);
  std::vector<Solution> out;
  for (const auto& z : latents) {
    auto [v01, probs] = codec.decode(z);
    (void)probs;
    Eigen::VectorXd y = denormalize(spec, v01, Role::vars);
    for (int j = 0; j < spec.y_len(); ++j) {
      const auto [lo, hi] = spec.var_range(j);
      switch (spec.var_kind(j)) {
        case VarKind::binary:
          y[j] = v01[j] >= 0.5 ? 1.0 : 0.0;
          break;
        case VarKind::integer:
          y[j] = std::clamp(std::round(y[j]), lo, hi);
          break;
        case VarKind::continuous:
          break;
      }
    }
    Solution s;
    s.y = std::move(y);
    s.type_labels = spec.var_labels();
    s.feasible = check_feasible(spec, inst, s.y).first;
    try {
      s.objective = objective(spec, inst, s.y);
    } catch (const Error&) {
      s.objective = std::numeric_limits<double>::quiet_NaN();
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace pad
