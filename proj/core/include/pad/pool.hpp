// Formulation token embeddings and pooling: rank pool (lowest total cosine
// similarity, original order) plus contiguous-window max/avg baselines, a
// deterministic synthetic embedder, the .pade matrix format, and the cached
// equivalent/constraint-missing embedding sets used by training.
#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "pad/latex.hpp"
#include "pad/problems.hpp"

namespace pad {

using TokenMatrix = Eigen::MatrixXf;  // S x d token embeddings

struct PooledEmbedding {
  Eigen::MatrixXf tokens;    // m x d
  std::vector<int> indices;  // rank: selected original indices (increasing);
                             // max/avg: window start offsets; empty when loaded from cache
};

enum class PoolKind { rank, max, avg };
const char* name(PoolKind k);
PoolKind pool_from_name(const std::string& s);

// Pairwise cosine similarities, accumulated in double.  Zero-norm tokens get
// similarity 0 to everything (their diagonal stays 1).
Eigen::MatrixXd similarity_matrix(const TokenMatrix& T);

// V[i] = sum_{j != i} M[i][j]
Eigen::VectorXd similarity_sums(const Eigen::MatrixXd& M);

PooledEmbedding rank_pool(const TokenMatrix& T, int m);
PooledEmbedding max_pool(const TokenMatrix& T, int m);
PooledEmbedding avg_pool(const TokenMatrix& T, int m);
PooledEmbedding pool(const TokenMatrix& T, PoolKind kind, int m);

// Deterministic stand-in for an external math-text embedding model: one unit
// vector per whitespace token, fixed by (token text, seed).
TokenMatrix synth_embed(const std::string& latex, int d, std::uint64_t seed);

void write_embedding(const std::filesystem::path& path, const Eigen::MatrixXf& tokens);
Eigen::MatrixXf read_embedding(const std::filesystem::path& path);

class Embedder {
 public:
  virtual ~Embedder() = default;
  TokenMatrix embed(const std::string& latex);
  long long calls() const { return calls_; }

 private:
  virtual TokenMatrix do_embed(const std::string& latex) = 0;
  long long calls_ = 0;
};

class SyntheticEmbedder : public Embedder {
 public:
  SyntheticEmbedder(int d, std::uint64_t seed) : d_(d), seed_(seed) {}

 private:
  TokenMatrix do_embed(const std::string& latex) override;
  int d_;
  std::uint64_t seed_;
};

// Looks up precomputed .pade matrices by content hash of the LaTeX string.
class FileEmbedder : public Embedder {
 public:
  explicit FileEmbedder(std::filesystem::path dir) : dir_(std::move(dir)) {}
  static std::string key_for(const std::string& latex);  // 16-hex-digit content hash

 private:
  TokenMatrix do_embed(const std::string& latex) override;
  std::filesystem::path dir_;
};

struct EmbeddingSet {
  ProblemId id = ProblemId::P1;
  std::vector<PooledEmbedding> eq;    // equivalent reformulations
  std::vector<PooledEmbedding> miss;  // constraint-dropped variants
};

// Embeds and pools every variant of the problem's formulation, caching each
// pooled matrix under cache_dir; cache hits skip the embedder entirely.
EmbeddingSet build_embedding_sets(ProblemId id, Embedder& embedder, PoolKind kind, int m,
                                  int eq_count, int miss_count,
                                  const std::filesystem::path& cache_dir);

}  // namespace pad
