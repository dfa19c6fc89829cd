// Element-wise latent codec: each scalar parameter/variable is min-max
// normalized by its schema range, pushed through a staged dense stack, and
// fused additively with a learned embedding of its physical-type label into a
// hidden_dim token.  Decoding recovers a sigmoid value in (0,1) and a type
// distribution.  Templated on the scalar so the same graph runs in float for
// training and double for finite-difference checks.
#pragma once

#include <cmath>
#include <filesystem>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "pad/checkpoint.hpp"
#include "pad/dataset.hpp"
#include "pad/nn/layers.hpp"
#include "pad/problems.hpp"
#include "pad/runconfig.hpp"

namespace pad {

struct CodecConfig {
  std::vector<int> encode_dims = {4, 32, 128};
  int hidden_dim = 128;
  std::vector<int> decode_dims = {128, 32};
  int type_num = kPhysicalTypeCount;
  int epochs = 20;
  double init_lr = 1.5e-4;
  int batch = 256;
  std::uint64_t seed = 1;

  static CodecConfig from(const RunConfig& rc) {
    CodecConfig c;
    c.encode_dims = rc.get_int_list("encode_dims");
    c.hidden_dim = static_cast<int>(rc.geti("hidden_dim"));
    c.decode_dims = rc.get_int_list("decode_dims");
    c.type_num = static_cast<int>(rc.geti("type_num"));
    c.epochs = static_cast<int>(rc.geti("encoder_decoder_train_epochs"));
    c.init_lr = rc.getd("encoder_decoder_init_lr");
    c.batch = static_cast<int>(rc.geti("encoder_decoder_batch"));
    c.seed = rc.seed("seed");
    return c;
  }

  void validate() const {
    if (encode_dims.empty() || decode_dims.empty())
      fail(ErrorKind::config, "codec dimension lists must be nonempty");
    if (encode_dims.back() != hidden_dim || decode_dims.front() != hidden_dim)
      fail(ErrorKind::config,
           "codec dimension chain broken: encode_dims must end and decode_dims start at hidden_dim");
    for (int d : encode_dims)
      if (d < 1) fail(ErrorKind::config, "encode_dims entries must be >= 1");
    for (int d : decode_dims)
      if (d < 1) fail(ErrorKind::config, "decode_dims entries must be >= 1");
    if (type_num < kPhysicalTypeCount)
      fail(ErrorKind::config, "type_num must cover all physical type labels");
    if (epochs < 0 || batch < 1 || !(init_lr >= 0))
      fail(ErrorKind::config, "bad codec training settings");
  }

  std::string echo() const {
    std::ostringstream os;
    os << "encode_dims = [";
    for (std::size_t i = 0; i < encode_dims.size(); ++i)
      os << (i ? "," : "") << encode_dims[i];
    os << "]\nhidden_dim = " << hidden_dim << "\ndecode_dims = [";
    for (std::size_t i = 0; i < decode_dims.size(); ++i)
      os << (i ? "," : "") << decode_dims[i];
    os << "]\ntype_num = " << type_num << "\nepochs = " << epochs << "\ninit_lr = " << init_lr
       << "\nbatch = " << batch << "\nseed = " << seed << "\n";
    return os.str();
  }
  static CodecConfig parse_echo(const std::string& echo);
};

struct ElementToken {
  double value = 0.0;  // normalized to [0,1]
  int type = 0;        // PhysicalType label
};

enum class Role { params, vars };

// Per-element min-max normalization by schema range; out-of-range inputs are
// clamped (counted in *clamped when given).  Constant-range elements map to
// 0.5 and denormalize back to the constant.
std::vector<ElementToken> normalize(const ProblemSpec& spec, const Eigen::VectorXd& raw, Role role,
                                    int* clamped = nullptr);
Eigen::VectorXd denormalize(const ProblemSpec& spec, const Eigen::VectorXd& values01, Role role);

template <typename S>
class CodecT {
 public:
  CodecT() : CodecT(CodecConfig{}) {}
  explicit CodecT(const CodecConfig& cfg) : cfg_(cfg) {
    cfg_.validate();
    Rng rng(derive_seed(cfg_.seed, "codec-init"));
    int in = 1;
    for (std::size_t i = 0; i < cfg_.encode_dims.size(); ++i) {
      enc_.push_back(nn::Linear<S>::create(ps_, "enc" + std::to_string(i), in, cfg_.encode_dims[i], rng));
      in = cfg_.encode_dims[i];
    }
    type_emb_ = &ps_.add("type_emb", cfg_.type_num, cfg_.hidden_dim);
    nn::normal_init(*type_emb_, rng, 0.02);
    in = cfg_.decode_dims.front();
    for (std::size_t i = 1; i < cfg_.decode_dims.size(); ++i) {
      dec_.push_back(nn::Linear<S>::create(ps_, "dec" + std::to_string(i - 1), in, cfg_.decode_dims[i], rng));
      in = cfg_.decode_dims[i];
    }
    value_head_ = nn::Linear<S>::create(ps_, "value_head", in, 1, rng);
    type_head_ = nn::Linear<S>::create(ps_, "type_head", in, cfg_.type_num, rng);
  }

  const CodecConfig& config() const { return cfg_; }
  int hidden_dim() const { return cfg_.hidden_dim; }
  bool trained() const { return trained_; }
  void set_trained() { trained_ = true; }
  nn::ParamStore<S>& params() { return ps_; }
  const nn::ParamStore<S>& params() const { return ps_; }

  // N tokens -> N x hidden_dim latent (graph-building; no trained gate)
  nn::Var encode_tape(nn::Tape<S>& t, nn::Var values_col, const std::vector<int>& types) const {
    if (t.value(values_col).cols() != 1 ||
        t.value(values_col).rows() != static_cast<Eigen::Index>(types.size()))
      fail(ErrorKind::state, "codec encode expects an N x 1 value column with N type labels");
    for (int ty : types)
      if (ty < 0 || ty >= cfg_.type_num) fail(ErrorKind::schema, "type label out of range");
    nn::Var h = values_col;
    for (std::size_t i = 0; i < enc_.size(); ++i) {
      h = enc_[i](t, h);
      if (i + 1 < enc_.size()) h = t.gelu(h);
    }
    nn::Var emb = t.gather_rows(t.param(*type_emb_), types);
    return t.add(h, emb);
  }

  nn::Var decode_trunk_tape(nn::Tape<S>& t, nn::Var z) const {
    nn::Var h = z;
    for (std::size_t i = 0; i < dec_.size(); ++i) h = t.gelu(dec_[i](t, h));
    return h;
  }
  nn::Var decode_value_tape(nn::Tape<S>& t, nn::Var trunk) const {
    return t.sigmoid(value_head_(t, trunk));
  }
  nn::Var decode_type_logits_tape(nn::Tape<S>& t, nn::Var trunk) const {
    return type_head_(t, trunk);
  }

  nn::Mat<S> encode(const std::vector<ElementToken>& toks) const {
    require_trained();
    nn::Tape<S> t;
    nn::Mat<S> vals(static_cast<Eigen::Index>(toks.size()), 1);
    std::vector<int> types(toks.size());
    for (std::size_t i = 0; i < toks.size(); ++i) {
      vals(static_cast<Eigen::Index>(i), 0) = static_cast<S>(toks[i].value);
      types[i] = toks[i].type;
    }
    return t.value(encode_tape(t, t.constant(std::move(vals)), types));
  }

  // -> (values in (0,1), row-stochastic type distributions)
  std::pair<Eigen::VectorXd, Eigen::MatrixXd> decode(const nn::Mat<S>& z) const {
    require_trained();
    nn::Tape<S> t;
    nn::Var trunk = decode_trunk_tape(t, t.constant(z));
    const nn::Mat<S> vals = t.value(decode_value_tape(t, trunk));
    const nn::Mat<S> probs = t.value(t.softmax_rows(decode_type_logits_tape(t, trunk)));
    return {vals.template cast<double>().col(0), probs.template cast<double>()};
  }

  void save(const std::filesystem::path& path) const {
    require_trained();
    save_checkpoint(path, "codec", cfg_.echo(), ps_);
  }
  static CodecT load(const std::filesystem::path& path) {
    CodecT codec(CodecConfig::parse_echo(peek_checkpoint(path).config));
    load_checkpoint(path, "codec", codec.ps_);
    codec.trained_ = true;
    return codec;
  }

 private:
  void require_trained() const {
    if (!trained_) fail(ErrorKind::state, "codec is untrained; train or load a checkpoint first");
  }
  CodecConfig cfg_;
  nn::ParamStore<S> ps_;
  std::vector<nn::Linear<S>> enc_, dec_;
  nn::Parameter<S>* type_emb_ = nullptr;
  nn::Linear<S> value_head_, type_head_;
  bool trained_ = false;
};

using Codec = CodecT<float>;

struct CodecTrainTrace {
  std::vector<double> value_mse, type_ce, total;  // one entry per epoch
};

namespace detail {

// Normalized values + labels for every element (x then y) of every sample.
struct CodecShard {
  ProblemSpec spec;
  Eigen::MatrixXd values01;  // n x (x_len + y_len)
  std::vector<int> types;    // per element column
};

CodecShard make_codec_shard(const Dataset& ds);

}  // namespace detail

template <typename S>
CodecT<S> train_codec(const std::vector<Dataset>& train, const CodecConfig& cfg,
                      CodecTrainTrace* trace = nullptr) {
  if (train.empty()) fail(ErrorKind::config, "codec training needs at least one dataset");
  std::vector<detail::CodecShard> shards;
  for (const auto& ds : train) {
    if (ds.n() < 1) fail(ErrorKind::data, "codec training dataset is empty");
    shards.push_back(detail::make_codec_shard(ds));
  }
  CodecT<S> codec(cfg);
  nn::Adam<S> opt;
  long long steps_per_epoch = std::numeric_limits<long long>::max();
  std::vector<int> batch_of(shards.size());
  for (std::size_t si = 0; si < shards.size(); ++si) {
    const int n = static_cast<int>(shards[si].values01.rows());
    batch_of[si] = std::min(cfg.batch, n);
    steps_per_epoch = std::min<long long>(steps_per_epoch, n / batch_of[si]);
  }
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = nn::cosine_lr(cfg.init_lr, epoch, cfg.epochs);
    std::vector<std::vector<int>> order(shards.size());
    for (std::size_t si = 0; si < shards.size(); ++si) {
      order[si].resize(shards[si].values01.rows());
      std::iota(order[si].begin(), order[si].end(), 0);
      Rng rng(derive_seed(cfg.seed, "codec-shuffle", epoch, si));
      for (int i = static_cast<int>(order[si].size()) - 1; i > 0; --i)
        std::swap(order[si][i], order[si][rng.uniform_int(0, i)]);
    }
    double ep_mse = 0.0, ep_ce = 0.0, ep_total = 0.0;
    for (long long step = 0; step < steps_per_epoch; ++step) {
      nn::Tape<S> t;
      codec.params().zero_grad();
      nn::Var total{};
      double mse_acc = 0.0, ce_acc = 0.0;
      for (std::size_t si = 0; si < shards.size(); ++si) {
        const detail::CodecShard& sh = shards[si];
        const int B = batch_of[si];
        const int L = static_cast<int>(sh.values01.cols());
        nn::Mat<S> vals(static_cast<Eigen::Index>(B) * L, 1);
        std::vector<int> types(static_cast<std::size_t>(B) * L);
        std::vector<S> wts(static_cast<std::size_t>(B) * L, S(1));
        for (int b = 0; b < B; ++b) {
          const int row = order[si][static_cast<std::size_t>(step) * B + b];
          for (int j = 0; j < L; ++j) {
            vals(b * L + j, 0) = static_cast<S>(sh.values01(row, j));
            types[static_cast<std::size_t>(b) * L + j] = sh.types[j];
          }
        }
        nn::Var z = codec.encode_tape(t, t.constant(vals), types);
        nn::Var trunk = codec.decode_trunk_tape(t, z);
        nn::Var vmse = t.mean_sq_diff(codec.decode_value_tape(t, trunk), vals);
        nn::Var ce = t.softmax_xent(codec.decode_type_logits_tape(t, trunk), types, wts);
        nn::Var lsum = t.add(vmse, ce);
        mse_acc += static_cast<double>(t.value(vmse)(0, 0));
        ce_acc += static_cast<double>(t.value(ce)(0, 0));
        total = si == 0 ? lsum : t.add(total, lsum);
      }
      total = t.scale(total, static_cast<S>(1.0 / shards.size()));
      const double loss = static_cast<double>(t.value(total)(0, 0));
      if (!std::isfinite(loss))
        fail(ErrorKind::state, "codec training diverged (non-finite loss) at epoch " +
                                   std::to_string(epoch + 1));
      t.backward(total);
      opt.step(codec.params(), lr);
      ep_mse += mse_acc / shards.size();
      ep_ce += ce_acc / shards.size();
      ep_total += loss;
    }
    if (trace && steps_per_epoch > 0) {
      trace->value_mse.push_back(ep_mse / steps_per_epoch);
      trace->type_ce.push_back(ep_ce / steps_per_epoch);
      trace->total.push_back(ep_total / steps_per_epoch);
    }
  }
  codec.set_trained();
  return codec;
}

struct CodecEval {
  double value_mse = 0.0;
  double type_accuracy = 0.0;
};

template <typename S>
CodecEval evaluate_codec(const CodecT<S>& codec, const std::vector<Dataset>& data) {
  long long n_el = 0, n_correct = 0;
  double sq = 0.0;
  for (const auto& ds : data) {
    const detail::CodecShard sh = detail::make_codec_shard(ds);
    const int L = static_cast<int>(sh.values01.cols());
    for (Eigen::Index row = 0; row < sh.values01.rows(); ++row) {
      std::vector<ElementToken> toks(L);
      for (int j = 0; j < L; ++j) toks[j] = {sh.values01(row, j), sh.types[j]};
      auto [vals, probs] = codec.decode(codec.encode(toks));
      for (int j = 0; j < L; ++j) {
        const double d = vals[j] - sh.values01(row, j);
        sq += d * d;
        Eigen::Index arg = 0;
        probs.row(j).maxCoeff(&arg);
        n_correct += arg == sh.types[j] ? 1 : 0;
        ++n_el;
      }
    }
  }
  if (n_el == 0) fail(ErrorKind::data, "codec evaluation needs data");
  return {sq / n_el, static_cast<double>(n_correct) / n_el};
}

}  // namespace pad
