// Solution-quality metrics and reports: GT_GAP against oracle optima,
// constraint satisfaction over parallel candidates (CONS_ACC / CONS_IF),
// best-candidate selection, the uniform-random-feasible baseline, and
// deterministic text/CSV report files.
#pragma once

#include <functional>

#include "pad/diffusion.hpp"

namespace pad {

// |f_gen / f_opt - 1|; undefined for f_opt = 0 or non-finite inputs.
double gt_gap(double f_gen, double f_opt);

// Among feasible candidates the best objective in the problem's sense; if
// none is feasible, the best objective overall (still flagged infeasible).
// Candidates without an evaluable objective rank last.
const Solution& select_best(const std::vector<Solution>& candidates, Sense sense);

struct InstanceRecord {
  int index = 0;
  double f_opt = 0.0;
  double f_best = std::numeric_limits<double>::quiet_NaN();
  bool best_feasible = false;
  int n_feasible = 0;
  int p_num = 0;
  double gap = std::numeric_limits<double>::quiet_NaN();
  bool gap_excluded = false;  // f_opt = 0 or no evaluable candidate
};

struct ProblemReport {
  ProblemId id = ProblemId::P1;
  int M = 0;
  double gt_gap_mean = 0.0;
  long long gap_count = 0, gap_excluded = 0;
  double cons_acc = 0.0;  // share of all candidates that were feasible
  double cons_if = 0.0;   // share of instances with at least one feasible candidate
  std::vector<InstanceRecord> instances;
};

struct EvalReport {
  std::vector<ProblemReport> problems;
  double glob_gt_gap = 0.0;  // unweighted mean of per-problem GT_GAP means
  double glob_cons_acc = 0.0, glob_cons_if = 0.0;
  std::string config_echo;
};

// Draws candidates for one instance; must depend only on its arguments.
using CandidateFn =
    std::function<std::vector<Solution>(const ProblemInstance&, int, std::uint64_t)>;

// Runs `gen` on every row of the test set and aggregates the metrics.  The
// per-instance seed is derived from (seed, problem, M, row); workers split
// rows and results are merged in row order.
ProblemReport evaluate_candidates(const Dataset& test, const CandidateFn& gen, int p_num,
                                  std::uint64_t seed, int workers = 1);

// Uniform-random feasible reference: rejection-samples each candidate from the
// variable bounds (falling back to the constructive feasible point when
// rejection stalls).
std::vector<Solution> baseline_candidates(const ProblemSpec& spec, const ProblemInstance& inst,
                                          int p_num, std::uint64_t seed);

ProblemReport evaluate_baseline(const Dataset& test, int p_num, std::uint64_t seed,
                                int workers = 1);

EvalReport combine_reports(std::vector<ProblemReport> problems, std::string config_echo);

// report.txt (structured text) + report.csv (per-instance rows); byte-stable
// for fixed inputs.
void write_report(const std::filesystem::path& dir, const EvalReport& report);

template <typename S>
ProblemReport evaluate_problem(const BackboneT<S>& net, const CodecT<S>& codec,
                               const Dataset& test, const PooledEmbedding& pooled, int p_num,
                               std::uint64_t seed, int workers = 1) {
  const ProblemSpec spec = make_spec(test.id, test.M);
  CandidateFn gen = [&](const ProblemInstance& inst, int pn, std::uint64_t s) {
    return generate_solutions(net, codec, spec, inst, pooled, pn, s, 1);
  };
  return evaluate_candidates(test, gen, p_num, seed, workers);
}

// Scores every test set, conditioning each problem on the first
// equivalent-variant embedding (the inference-time choice).
template <typename S>
EvalReport evaluate_model(const BackboneT<S>& net, const CodecT<S>& codec,
                          const std::vector<Dataset>& testsets,
                          const std::vector<EmbeddingSet>& embeds, int p_num, std::uint64_t seed,
                          int workers = 1, std::string config_echo = {}) {
  if (testsets.empty()) fail(ErrorKind::config, "evaluation needs at least one test set");
  std::vector<ProblemReport> reports;
  for (const auto& test : testsets) {
    const EmbeddingSet& set = detail::find_embedding_set(embeds, test.id);
    if (set.eq.empty())
      fail(ErrorKind::data, std::string("no equivalent-variant embeddings for ") + name(test.id));
    reports.push_back(evaluate_problem(net, codec, test, set.eq[0], p_num, seed, workers));
  }
  return combine_reports(std::move(reports), std::move(config_echo));
}

}  // namespace pad
