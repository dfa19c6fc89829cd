#include "pad/pool.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "pad/binio.hpp"
#include "pad/common.hpp"
#include "pad/rng.hpp"

namespace pad {
namespace {

constexpr char kMagic[4] = {'P', 'A', 'D', 'E'};
constexpr std::uint16_t kVersion = 1;

void require_tokens(const TokenMatrix& T, int m) {
  if (T.rows() < 1 || T.cols() < 1) fail(ErrorKind::schema, "empty token matrix");
  if (m < 1) fail(ErrorKind::config, "pool length must be >= 1");
  if (m > T.rows())
    fail(ErrorKind::config, "pool length " + std::to_string(m) + " exceeds token count " +
                                std::to_string(T.rows()));
}

}  // namespace

const char* name(PoolKind k) {
  switch (k) {
    case PoolKind::rank: return "rank";
    case PoolKind::max: return "max";
    case PoolKind::avg: return "avg";
  }
  return "";
}

PoolKind pool_from_name(const std::string& s) {
  for (PoolKind k : {PoolKind::rank, PoolKind::max, PoolKind::avg})
    if (s == name(k)) return k;
  fail(ErrorKind::config, "unknown pool kind '" + s + "' (expected rank, max, or avg)");
}

Eigen::MatrixXd similarity_matrix(const TokenMatrix& T) {
  const int S = static_cast<int>(T.rows());
  if (S < 1 || T.cols() < 1) fail(ErrorKind::schema, "empty token matrix");
  if (!T.allFinite()) fail(ErrorKind::schema, "token matrix contains NaN or Inf");
  const Eigen::MatrixXd Td = T.cast<double>();
  Eigen::VectorXd norms(S);
  for (int i = 0; i < S; ++i) norms[i] = Td.row(i).norm();
  Eigen::MatrixXd M(S, S);
  for (int i = 0; i < S; ++i) {
    M(i, i) = 1.0;
    for (int j = i + 1; j < S; ++j) {
      double sim = 0.0;
      if (norms[i] > 0.0 && norms[j] > 0.0)
        sim = Td.row(i).dot(Td.row(j)) / (norms[i] * norms[j]);
      M(i, j) = M(j, i) = sim;
    }
  }
  return M;
}

Eigen::VectorXd similarity_sums(const Eigen::MatrixXd& M) {
  if (M.rows() != M.cols()) fail(ErrorKind::schema, "similarity matrix must be square");
  Eigen::VectorXd V(M.rows());
  for (int i = 0; i < M.rows(); ++i) V[i] = M.row(i).sum() - M(i, i);
  return V;
}

PooledEmbedding rank_pool(const TokenMatrix& T, int m) {
  require_tokens(T, m);
  const int S = static_cast<int>(T.rows());
  const Eigen::VectorXd V = similarity_sums(similarity_matrix(T));
  std::vector<int> order(S);
  std::iota(order.begin(), order.end(), 0);
  // lowest total similarity first; ties keep the lowest original index
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return V[a] < V[b]; });
  std::vector<int> sel(order.begin(), order.begin() + m);
  std::sort(sel.begin(), sel.end());
  PooledEmbedding out;
  out.indices = sel;
  out.tokens.resize(m, T.cols());
  for (int i = 0; i < m; ++i) out.tokens.row(i) = T.row(sel[i]);
  return out;
}

namespace {

// PyTorch-style adaptive windows: [floor(i*S/m), ceil((i+1)*S/m))
std::pair<int, int> window(int i, int S, int m) {
  const int lo = static_cast<int>((static_cast<long long>(i) * S) / m);
  const int hi = static_cast<int>((static_cast<long long>(i + 1) * S + m - 1) / m);
  return {lo, hi};
}

}  // namespace

PooledEmbedding max_pool(const TokenMatrix& T, int m) {
  require_tokens(T, m);
  const int S = static_cast<int>(T.rows());
  PooledEmbedding out;
  out.tokens.resize(m, T.cols());
  for (int i = 0; i < m; ++i) {
    auto [lo, hi] = window(i, S, m);
    out.indices.push_back(lo);
    out.tokens.row(i) = T.middleRows(lo, hi - lo).colwise().maxCoeff();
  }
  return out;
}

PooledEmbedding avg_pool(const TokenMatrix& T, int m) {
  require_tokens(T, m);
  const int S = static_cast<int>(T.rows());
  PooledEmbedding out;
  out.tokens.resize(m, T.cols());
  for (int i = 0; i < m; ++i) {
    auto [lo, hi] = window(i, S, m);
    out.indices.push_back(lo);
    out.tokens.row(i) = T.middleRows(lo, hi - lo).colwise().mean();
  }
  return out;
}

PooledEmbedding pool(const TokenMatrix& T, PoolKind kind, int m) {
  switch (kind) {
    case PoolKind::rank: return rank_pool(T, m);
    case PoolKind::max: return max_pool(T, m);
    case PoolKind::avg: return avg_pool(T, m);
  }
  fail(ErrorKind::config, "bad pool kind");
}

TokenMatrix synth_embed(const std::string& latex, int d, std::uint64_t seed) {
  if (latex.empty()) fail(ErrorKind::schema, "cannot embed an empty formulation");
  if (d < 1) fail(ErrorKind::config, "embedding dimension must be >= 1");
  std::vector<std::string> toks;
  std::istringstream in(latex);
  for (std::string w; in >> w;) toks.push_back(w);
  if (toks.empty()) fail(ErrorKind::schema, "formulation has no tokens");
  TokenMatrix T(static_cast<int>(toks.size()), d);
  for (std::size_t i = 0; i < toks.size(); ++i) {
    Rng rng(derive_seed(seed, "synth-token", toks[i]));
    Eigen::VectorXd v(d);
    for (int j = 0; j < d; ++j) v[j] = rng.normal();
    v /= v.norm();
    T.row(static_cast<int>(i)) = v.cast<float>().transpose();
  }
  return T;
}

void write_embedding(const std::filesystem::path& path, const Eigen::MatrixXf& tokens) {
  ByteWriter w;
  w.raw(kMagic, 4);
  w.u16(kVersion);
  w.u32(static_cast<std::uint32_t>(tokens.rows()));
  w.u32(static_cast<std::uint32_t>(tokens.cols()));
  for (Eigen::Index r = 0; r < tokens.rows(); ++r)
    for (Eigen::Index c = 0; c < tokens.cols(); ++c) w.f32(tokens(r, c));
  w.commit(path);
}

Eigen::MatrixXf read_embedding(const std::filesystem::path& path) {
  ByteReader r = ByteReader::from_file(path);
  char magic[4];
  r.raw(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0)
    fail(ErrorKind::data, path.string() + ": not an embedding file (bad magic)");
  if (r.u16() != kVersion) fail(ErrorKind::data, path.string() + ": unsupported embedding version");
  const std::uint32_t S = r.u32(), d = r.u32();
  if (S < 1 || d < 1) fail(ErrorKind::data, path.string() + ": empty embedding");
  if (r.remaining() != static_cast<std::size_t>(S) * d * sizeof(float))
    fail(ErrorKind::data, path.string() + ": truncated embedding data");
  Eigen::MatrixXf T(S, d);
  for (std::uint32_t rr = 0; rr < S; ++rr)
    for (std::uint32_t cc = 0; cc < d; ++cc) T(rr, cc) = r.f32();
  return T;
}

TokenMatrix Embedder::embed(const std::string& latex) {
  ++calls_;
  return do_embed(latex);
}

TokenMatrix SyntheticEmbedder::do_embed(const std::string& latex) {
  return synth_embed(latex, d_, seed_);
}

std::string FileEmbedder::key_for(const std::string& latex) {
  std::uint64_t h = 0xcbf29ce484222325ull;  // FNV-1a
  for (unsigned char c : latex) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

TokenMatrix FileEmbedder::do_embed(const std::string& latex) {
  const std::filesystem::path p = dir_ / (key_for(latex) + ".pade");
  if (!std::filesystem::exists(p))
    fail(ErrorKind::io, "no precomputed embedding " + p.string() +
                            " for this formulation; generate it or use the synthetic embedder");
  return read_embedding(p);
}

EmbeddingSet build_embedding_sets(ProblemId id, Embedder& embedder, PoolKind kind, int m,
                                  int eq_count, int miss_count,
                                  const std::filesystem::path& cache_dir) {
  if (eq_count < 1 || miss_count < 1)
    fail(ErrorKind::config, "embedding sets need at least one variant of each kind");
  EmbeddingSet set;
  set.id = id;
  auto build = [&](LatexVariant variant, const char* tag, int k) {
    std::ostringstream fn;
    fn << name(id) << "_" << tag << k << "_" << name(kind) << "_m" << m << ".pade";
    const std::filesystem::path cached = cache_dir / fn.str();
    PooledEmbedding pe;
    if (std::filesystem::exists(cached)) {
      pe.tokens = read_embedding(cached);
      if (pe.tokens.rows() != m)
        fail(ErrorKind::data, cached.string() + ": cached pooled length does not match m");
      return pe;
    }
    pe = pool(embedder.embed(emit_latex(id, variant, k)), kind, m);
    write_embedding(cached, pe.tokens);
    return pe;
  };
  for (int k = 0; k < eq_count; ++k) set.eq.push_back(build(LatexVariant::equivalent, "eq", k));
  for (int k = 0; k < miss_count; ++k)
    set.miss.push_back(build(LatexVariant::constraint_missing, "miss", k));
  return set;
}

}  // namespace pad
