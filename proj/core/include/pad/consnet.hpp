// Constraint-aware module: a Transformer-encoder binary classifier over
// [CLS; projected pooled embedding; codec-encoded x; codec-encoded y] that
// predicts whether y violates the problem's constraints (class 1 = violates).
// Trained on uniformly sampled solutions labeled by the feasibility checker,
// with exact-balance oversampling and recall-driven class weights; used as a
// differentiable penalty while training the generator, never at inference.
#pragma once

#include <map>
#include <optional>

#include "pad/codec.hpp"
#include "pad/pool.hpp"

namespace pad {

struct ConsNetConfig {
  int embed_dim = 768;  // width of pooled formulation tokens
  int hidden_dim = 128;
  int layers = 6;
  int heads = 8;
  int ffn_mult = 2;
  double dropout = 0.1;
  int epochs = 30;
  double init_lr = 1.5e-4;
  int batch = 128;
  int samples_per_problem = 2000;
  std::uint64_t seed = 1;

  static ConsNetConfig from(const RunConfig& rc) {
    ConsNetConfig c;
    c.embed_dim = static_cast<int>(rc.geti("embedding_dim"));
    c.hidden_dim = static_cast<int>(rc.geti("hidden_dim"));
    c.layers = static_cast<int>(rc.geti("transformer_encoder_num"));
    c.heads = static_cast<int>(rc.geti("attention_header_num"));
    c.ffn_mult = static_cast<int>(rc.geti("ffn_mult"));
    c.dropout = rc.getd("transformer_dropout");
    c.epochs = static_cast<int>(rc.geti("constraint_module_train_epochs"));
    c.init_lr = rc.getd("constraint_module_init_lr");
    c.batch = static_cast<int>(rc.geti("constraint_module_batch"));
    c.samples_per_problem = static_cast<int>(rc.geti("cons_samples_per_problem"));
    c.seed = rc.seed("seed");
    return c;
  }

  void validate() const {
    if (embed_dim < 1 || hidden_dim < 1 || layers < 1 || heads < 1 || ffn_mult < 1)
      fail(ErrorKind::config, "bad constraint module architecture settings");
    if (hidden_dim % heads != 0)
      fail(ErrorKind::config, "hidden_dim must be divisible by the head count");
    if (!(dropout >= 0.0 && dropout < 1.0))
      fail(ErrorKind::config, "dropout must lie in [0,1)");
    if (epochs < 0 || batch < 1 || samples_per_problem < 1 || !(init_lr >= 0))
      fail(ErrorKind::config, "bad constraint module training settings");
  }

  std::string echo() const;
  static ConsNetConfig parse_echo(const std::string& echo);
};

// One labeled (x, y) pair; label 1 = y violates the constraints.
struct ConsSample {
  Eigen::VectorXd x, y;
  int label = 0;
};

struct ConsShard {
  ProblemId id = ProblemId::P1;
  int M = 0;
  std::vector<ConsSample> samples;
};

// Draws `count` uniformly random solutions per dataset (cycling through its
// parameter rows), labels them with the feasibility checker, then duplicates
// minority-class samples until the classes balance to within one.  A shard
// still single-class after 10x extra draws raises a data-imbalance error
// naming the problem.
std::vector<ConsShard> build_cons_shards(const std::vector<Dataset>& data, int count,
                                         std::uint64_t seed);

struct ConsTrainTrace {
  std::vector<double> loss, acc, tpr, tnr;      // one entry per epoch
  std::vector<double> weight_valid, weight_violate;  // class weights used that epoch
};

struct ClassifierEval {
  double acc = 0.0;
  std::optional<double> tpr, tnr;  // absent when the class is missing from the set
};

template <typename S>
class ConsNetT {
 public:
  ConsNetT(const ConsNetConfig& cfg, const CodecT<S>* codec) : cfg_(cfg), codec_(codec) {
    cfg_.validate();
    if (!codec_ || !codec_->trained())
      fail(ErrorKind::state, "constraint module needs a trained codec");
    if (codec_->hidden_dim() != cfg_.hidden_dim)
      fail(ErrorKind::config, "constraint module hidden_dim must match the codec latent width");
    Rng rng(derive_seed(cfg_.seed, "consnet-init"));
    proj_ = nn::Linear<S>::create(ps_, "proj", cfg_.embed_dim, cfg_.hidden_dim, rng);
    cls_ = &ps_.add("cls", 1, cfg_.hidden_dim);
    nn::normal_init(*cls_, rng, 0.02);
    enc_ = nn::TransformerEncoder<S>::create(ps_, "enc", cfg_.layers, cfg_.hidden_dim, cfg_.heads,
                                             cfg_.ffn_mult * cfg_.hidden_dim, rng);
    head_ = nn::Linear<S>::create(ps_, "head", cfg_.hidden_dim, 2, rng);
  }

  const ConsNetConfig& config() const { return cfg_; }
  const CodecT<S>& codec() const { return *codec_; }
  bool trained() const { return trained_; }
  void set_trained() { trained_ = true; }
  nn::ParamStore<S>& params() { return ps_; }
  const nn::ParamStore<S>& params() const { return ps_; }

  // Class logits (batch x 2) for a batch sharing one pooled embedding; x_lat
  // and y_lat are batch-stacked codec latents ((batch*len) x hidden_dim).
  nn::Var logits_tape(nn::Tape<S>& t, const TokenMatrix& pooled, nn::Var x_lat, nn::Var y_lat,
                      int batch, const nn::Ctx<S>& ctx) const {
    if (pooled.cols() != cfg_.embed_dim)
      fail(ErrorKind::schema, "pooled embedding width does not match the configured embed_dim");
    const int m = static_cast<int>(pooled.rows());
    if (batch < 1 || t.value(x_lat).rows() % batch != 0 || t.value(y_lat).rows() % batch != 0)
      fail(ErrorKind::state, "latent row counts must be multiples of the batch size");
    const int xl = static_cast<int>(t.value(x_lat).rows()) / batch;
    const int yl = static_cast<int>(t.value(y_lat).rows()) / batch;
    const int L = 1 + m + xl + yl;

    nn::Var e = proj_(t, t.constant(pooled.template cast<S>()));
    nn::Var blocks = t.concat_rows({t.replicate_rows(t.param(*cls_), batch),
                                    t.replicate_rows(e, batch), x_lat, y_lat});
    std::vector<int> order(static_cast<std::size_t>(batch) * L);
    const int off_e = batch, off_x = batch * (1 + m), off_y = batch * (1 + m + xl);
    for (int b = 0; b < batch; ++b) {
      int* row = order.data() + static_cast<std::size_t>(b) * L;
      row[0] = b;
      for (int j = 0; j < m; ++j) row[1 + j] = off_e + b * m + j;
      for (int j = 0; j < xl; ++j) row[1 + m + j] = off_x + b * xl + j;
      for (int j = 0; j < yl; ++j) row[1 + m + xl + j] = off_y + b * yl + j;
    }
    nn::Var seq = t.add_const(t.gather_rows(blocks, std::move(order)),
                              nn::sinusoidal_positions<S>(L, cfg_.hidden_dim).replicate(batch, 1));
    seq = enc_.apply(t, seq, batch, L, ctx);
    std::vector<int> cls_rows(batch);
    for (int b = 0; b < batch; ++b) cls_rows[b] = b * L;
    return head_(t, t.gather_rows(seq, std::move(cls_rows)));
  }

  // Violation probabilities (batch x 1) from class logits.
  nn::Var violation_prob_tape(nn::Tape<S>& t, nn::Var logits) const {
    return t.slice_cols(t.softmax_rows(logits), 1, 1);
  }

  double predict_violation(const ProblemSpec& spec, const PooledEmbedding& pooled,
                           const Eigen::VectorXd& x, const Eigen::VectorXd& y) const {
    if (!trained_) fail(ErrorKind::state, "constraint module is untrained");
    nn::Tape<S> t;
    nn::Ctx<S> ctx;  // inference: dropout off
    nn::Var logits = logits_tape(t, pooled.tokens, encode_input(t, spec, x, Role::params),
                                 encode_input(t, spec, y, Role::vars), 1, ctx);
    return static_cast<double>(t.value(violation_prob_tape(t, logits))(0, 0));
  }

  // Codec latent of a raw parameter or solution vector (normalizing first).
  nn::Var encode_input(nn::Tape<S>& t, const ProblemSpec& spec, const Eigen::VectorXd& raw,
                       Role role) const {
    const auto toks = normalize(spec, raw, role);
    nn::Mat<S> vals(static_cast<Eigen::Index>(toks.size()), 1);
    std::vector<int> types(toks.size());
    for (std::size_t i = 0; i < toks.size(); ++i) {
      vals(static_cast<Eigen::Index>(i), 0) = static_cast<S>(toks[i].value);
      types[i] = toks[i].type;
    }
    return codec_->encode_tape(t, t.constant(std::move(vals)), types);
  }

  void save(const std::filesystem::path& path) const {
    if (!trained_) fail(ErrorKind::state, "refusing to save an untrained constraint module");
    save_checkpoint(path, "consnet", cfg_.echo(), ps_);
  }
  static ConsNetT load(const std::filesystem::path& path, const CodecT<S>* codec) {
    ConsNetT net(ConsNetConfig::parse_echo(peek_checkpoint(path).config), codec);
    load_checkpoint(path, "consnet", net.ps_);
    net.trained_ = true;
    return net;
  }

 private:
  ConsNetConfig cfg_;
  const CodecT<S>* codec_;
  nn::ParamStore<S> ps_;
  nn::Linear<S> proj_, head_;
  nn::Parameter<S>* cls_ = nullptr;
  nn::TransformerEncoder<S> enc_;
  bool trained_ = false;
};

using ConsNet = ConsNetT<float>;

namespace detail {

// Normalized x/y value matrices plus tiled type labels for one shard.
struct ConsBatchPlan {
  ProblemSpec spec;
  Eigen::MatrixXd xn, yn;  // samples x len, normalized
  std::vector<int> labels;
  std::vector<int> x_types, y_types;
};

ConsBatchPlan plan_cons_shard(const ConsShard& shard);

struct Confusion {
  long long tp = 0, fn = 0, tn = 0, fp = 0;
  void count(int label, int predicted) {
    if (label == 1)
      (predicted == 1 ? tp : fn) += 1;
    else
      (predicted == 0 ? tn : fp) += 1;
  }
  double acc() const {
    const long long n = tp + fn + tn + fp;
    return n ? static_cast<double>(tp + tn) / n : 0.0;
  }
  std::optional<double> tpr() const {
    return tp + fn ? std::optional<double>(static_cast<double>(tp) / (tp + fn)) : std::nullopt;
  }
  std::optional<double> tnr() const {
    return tn + fp ? std::optional<double>(static_cast<double>(tn) / (tn + fp)) : std::nullopt;
  }
};

template <typename S>
void batch_latents(nn::Tape<S>& t, const ConsBatchPlan& plan, const CodecT<S>& codec,
                   const std::vector<int>& rows, nn::Var* x_lat, nn::Var* y_lat) {
  const int B = static_cast<int>(rows.size());
  const int xl = static_cast<int>(plan.xn.cols()), yl = static_cast<int>(plan.yn.cols());
  nn::Mat<S> xv(static_cast<Eigen::Index>(B) * xl, 1), yv(static_cast<Eigen::Index>(B) * yl, 1);
  std::vector<int> xt(static_cast<std::size_t>(B) * xl), yt(static_cast<std::size_t>(B) * yl);
  for (int b = 0; b < B; ++b) {
    for (int j = 0; j < xl; ++j) {
      xv(b * xl + j, 0) = static_cast<S>(plan.xn(rows[b], j));
      xt[static_cast<std::size_t>(b) * xl + j] = plan.x_types[j];
    }
    for (int j = 0; j < yl; ++j) {
      yv(b * yl + j, 0) = static_cast<S>(plan.yn(rows[b], j));
      yt[static_cast<std::size_t>(b) * yl + j] = plan.y_types[j];
    }
  }
  *x_lat = codec.encode_tape(t, t.constant(std::move(xv)), xt);
  *y_lat = codec.encode_tape(t, t.constant(std::move(yv)), yt);
}

const EmbeddingSet& find_embedding_set(const std::vector<EmbeddingSet>& sets, ProblemId id);

}  // namespace detail

template <typename S>
ConsNetT<S> train_constraint(const std::vector<Dataset>& data,
                             const std::vector<EmbeddingSet>& embeds, const CodecT<S>& codec,
                             const ConsNetConfig& cfg, ConsTrainTrace* trace = nullptr) {
  const std::vector<ConsShard> shards =
      build_cons_shards(data, cfg.samples_per_problem, derive_seed(cfg.seed, "cons-data"));
  std::vector<detail::ConsBatchPlan> plans;
  std::vector<const EmbeddingSet*> shard_sets;
  for (const auto& sh : shards) {
    plans.push_back(detail::plan_cons_shard(sh));
    const EmbeddingSet& set = detail::find_embedding_set(embeds, sh.id);
    if (set.eq.empty())
      fail(ErrorKind::data, std::string("no equivalent-variant embeddings for ") + name(sh.id));
    shard_sets.push_back(&set);
  }
  ConsNetT<S> net(cfg, &codec);
  nn::Adam<S> opt;
  long long steps_per_epoch = std::numeric_limits<long long>::max();
  std::vector<int> batch_of(plans.size());
  for (std::size_t si = 0; si < plans.size(); ++si) {
    const int n = static_cast<int>(plans[si].labels.size());
    batch_of[si] = std::min(cfg.batch, n);
    steps_per_epoch = std::min<long long>(steps_per_epoch, n / batch_of[si]);
  }
  double w_valid = 1.0, w_violate = 1.0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = nn::cosine_lr(cfg.init_lr, epoch, cfg.epochs);
    std::vector<std::vector<int>> order(plans.size());
    for (std::size_t si = 0; si < plans.size(); ++si) {
      order[si].resize(plans[si].labels.size());
      std::iota(order[si].begin(), order[si].end(), 0);
      Rng rng(derive_seed(cfg.seed, "cons-shuffle", epoch, si));
      for (int i = static_cast<int>(order[si].size()) - 1; i > 0; --i)
        std::swap(order[si][i], order[si][rng.uniform_int(0, i)]);
    }
    Rng pick(derive_seed(cfg.seed, "cons-pick", epoch));
    Rng drop_rng(derive_seed(cfg.seed, "cons-dropout", epoch));
    nn::Ctx<S> ctx{true, static_cast<S>(cfg.dropout), &drop_rng};
    detail::Confusion conf;
    double ep_loss = 0.0;
    for (long long step = 0; step < steps_per_epoch; ++step) {
      nn::Tape<S> t;
      net.params().zero_grad();
      nn::Var total{};
      for (std::size_t si = 0; si < plans.size(); ++si) {
        const detail::ConsBatchPlan& plan = plans[si];
        const int B = batch_of[si];
        std::vector<int> rows(order[si].begin() + step * B, order[si].begin() + (step + 1) * B);
        nn::Var x_lat, y_lat;
        detail::batch_latents(t, plan, codec, rows, &x_lat, &y_lat);
        const auto& eq = shard_sets[si]->eq;
        const TokenMatrix& e = eq[static_cast<std::size_t>(
            pick.uniform_int(0, static_cast<long long>(eq.size()) - 1))].tokens;
        nn::Var logits = net.logits_tape(t, e, x_lat, y_lat, B, ctx);
        std::vector<int> labels(B);
        std::vector<S> weights(B);
        for (int b = 0; b < B; ++b) {
          labels[b] = plan.labels[rows[b]];
          weights[b] = static_cast<S>(labels[b] == 1 ? w_violate : w_valid);
        }
        const nn::Mat<S>& lv = t.value(logits);
        for (int b = 0; b < B; ++b) conf.count(labels[b], lv(b, 1) > lv(b, 0) ? 1 : 0);
        nn::Var ce = t.softmax_xent(logits, std::move(labels), std::move(weights));
        total = si == 0 ? ce : t.add(total, ce);
      }
      total = t.scale(total, static_cast<S>(1.0 / plans.size()));
      const double loss = static_cast<double>(t.value(total)(0, 0));
      if (!std::isfinite(loss))
        fail(ErrorKind::state, "constraint module training diverged at epoch " +
                                   std::to_string(epoch + 1));
      t.backward(total);
      opt.step(net.params(), lr);
      ep_loss += loss;
    }
    if (trace && steps_per_epoch > 0) {
      trace->loss.push_back(ep_loss / steps_per_epoch);
      trace->acc.push_back(conf.acc());
      trace->tpr.push_back(conf.tpr().value_or(0.0));
      trace->tnr.push_back(conf.tnr().value_or(0.0));
      trace->weight_valid.push_back(w_valid);
      trace->weight_violate.push_back(w_violate);
    }
    // the class recovered worse last epoch gets a heavier vote next epoch
    w_violate = std::clamp(1.0 + 0.5 * (1.0 - conf.tpr().value_or(1.0)), 1.0, 1.5);
    w_valid = std::clamp(1.0 + 0.5 * (1.0 - conf.tnr().value_or(1.0)), 1.0, 1.5);
  }
  net.set_trained();
  return net;
}

// Confusion-matrix rates on labeled shards; each shard is scored against the
// first equivalent-variant embedding of its problem (the inference-time
// conditioning).  Positive class = violation.
template <typename S>
ClassifierEval evaluate_classifier(const ConsNetT<S>& net, const std::vector<ConsShard>& shards,
                                   const std::vector<EmbeddingSet>& embeds) {
  if (shards.empty()) fail(ErrorKind::data, "classifier evaluation needs at least one shard");
  detail::Confusion conf;
  nn::Ctx<S> ctx;
  for (const auto& sh : shards) {
    if (sh.samples.empty()) fail(ErrorKind::data, "classifier evaluation shard is empty");
    const detail::ConsBatchPlan plan = detail::plan_cons_shard(sh);
    const EmbeddingSet& set = detail::find_embedding_set(embeds, sh.id);
    if (set.eq.empty())
      fail(ErrorKind::data, std::string("no equivalent-variant embeddings for ") + name(sh.id));
    const int n = static_cast<int>(plan.labels.size());
    for (int start = 0; start < n; start += 256) {
      const int B = std::min(256, n - start);
      std::vector<int> rows(B);
      std::iota(rows.begin(), rows.end(), start);
      nn::Tape<S> t;
      nn::Var x_lat, y_lat;
      detail::batch_latents(t, plan, net.codec(), rows, &x_lat, &y_lat);
      const nn::Mat<S>& lv = t.value(net.logits_tape(t, set.eq[0].tokens, x_lat, y_lat, B, ctx));
      for (int b = 0; b < B; ++b)
        conf.count(plan.labels[rows[b]], lv(b, 1) > lv(b, 0) ? 1 : 0);
    }
  }
  return {conf.acc(), conf.tpr(), conf.tnr()};
}

}  // namespace pad
