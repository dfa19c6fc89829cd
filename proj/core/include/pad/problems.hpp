// The ten-network-optimization problem suite: dimension-parametric schemas,
// objective/feasibility evaluation, instance sampling, and solution helpers.
#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "pad/common.hpp"
#include "pad/rng.hpp"

namespace pad {

// Physical meaning of every parameter/variable element across the suite.
// Exactly 19 labels; every element of every problem maps to one of them.
enum class PhysicalType : int {
  channel_gain = 0,
  noise_psd,
  tx_power_var,
  total_power,
  block_bandwidth,
  block_count_var,
  total_blocks,
  min_rate,
  contribution_factor,
  fairness_threshold,
  data_volume,
  request_rate,
  content_size,
  freshness_tolerance,
  refresh_ratio_var,
  cache_decision_var,
  offload_decision_var,
  resource_alloc_var,
  cost_param,
};
inline constexpr int kPhysicalTypeCount = 19;
const char* name(PhysicalType t);

enum class ProblemId : int { P1 = 1, P2, P3, P4, P5, P6, P7, P8, P9, P10 };
inline constexpr std::array<ProblemId, 10> kAllProblems = {
    ProblemId::P1, ProblemId::P2, ProblemId::P3, ProblemId::P4, ProblemId::P5,
    ProblemId::P6, ProblemId::P7, ProblemId::P8, ProblemId::P9, ProblemId::P10};

const char* name(ProblemId id);
const char* summary(ProblemId id);
ProblemId problem_from_name(const std::string& s);  // accepts "P1".."P10"

enum class VarKind { continuous, integer, binary };
enum class Sense { minimize, maximize };

// One named field (scalar or per-channel vector) of a schema.  lo/hi give the
// sampling range for parameters and the decode bounds for variables; both are
// realized for a concrete M and double as the normalization range.
struct FieldSpec {
  std::string name;
  PhysicalType type;
  int count = 1;
  double lo = 0.0, hi = 0.0;
  std::string unit;
  VarKind kind = VarKind::continuous;
  bool derived = false;  // parameter derived from the others while sampling
};

struct ProblemSpec {
  ProblemId id;
  int M = 0;
  Sense sense = Sense::maximize;
  std::vector<FieldSpec> params;
  std::vector<FieldSpec> vars;

  int x_len() const;
  int y_len() const;

  PhysicalType param_type(int i) const;
  PhysicalType var_type(int i) const;
  std::pair<double, double> param_range(int i) const;
  std::pair<double, double> var_range(int i) const;
  VarKind var_kind(int i) const;
  std::vector<PhysicalType> param_labels() const;
  std::vector<PhysicalType> var_labels() const;
};

// Realize the schema of `id` for dimension M (M >= 1).
ProblemSpec make_spec(ProblemId id, int M);

// Dimensions used at full scale: {5,6,7} everywhere except P7's {3,4,5}.
std::vector<int> default_dims(ProblemId id);

struct ProblemInstance {
  ProblemId id;
  int M = 0;
  Eigen::VectorXd x;
  std::uint64_t seed = 0;
};

struct Violation {
  std::string constraint;  // e.g. "total_power", "min_rate[2]"
  double amount;           // positive magnitude of the violation
};

// Objective value of y on this instance.  Throws ErrorKind::domain when the
// formula is undefined (e.g. division by zero); see the per-problem notes in
// the implementation.  P10 returns +inf for zero-rate channels.
double objective(const ProblemSpec& spec, const ProblemInstance& inst, const Eigen::VectorXd& y);

// Constraint check with kConsEps relative slack on continuous constraints and
// exact arithmetic on integer budgets.  Never throws on weird y values.
std::pair<bool, std::vector<Violation>> check_feasible(const ProblemSpec& spec,
                                                       const ProblemInstance& inst,
                                                       const Eigen::VectorXd& y);

// Draw an instance.  Parameters are sampled in schema order from a stream
// derived from (id, M, seed); derived parameters (R_min and the fairness
// threshold) are set to 10% of the equal-split level so a constructive
// feasible point always exists.  A rejection loop re-draws (fresh sub-stream
// per attempt) until the feasibility probe passes; 1000 failures raise
// ErrorKind::infeasible.
ProblemInstance sample_instance(const ProblemSpec& spec, std::uint64_t seed);

// Constructive feasible point (equal split / all-zeros), used as the sampling
// probe and as the fallback for rejection-based baselines.
Eigen::VectorXd feasible_point(const ProblemSpec& spec, const ProblemInstance& inst);

// Uniform draw within variable bounds; integers uniform on their integer
// range, binaries uniform on {0,1}.
Eigen::VectorXd sample_uniform_solution(const ProblemSpec& spec, Rng& rng);

struct Solution {
  Eigen::VectorXd y;
  std::vector<PhysicalType> type_labels;
  bool feasible = false;
  double objective = std::numeric_limits<double>::quiet_NaN();
};

// Human-readable schema document (fields, ranges, kinds, canonical LaTeX).
std::string schema_document(ProblemId id, int M);

namespace views {

// Thin typed accessors over the flat x layout of each problem.  Layouts are
// fixed by make_spec's field order and relied on throughout the library.

struct P1 {  // also P5: [g(M), N(M), B, P_total, R_min]
  int M;
  const double* g;
  const double* N;
  double B, P_total, R_min;
  static P1 of(const ProblemInstance& inst);
  double snr_coeff(int m) const { return g[m] / (B * N[m]); }     // multiplies p
  double rate(int m, double p) const;                             // B log2(1+...)
  double min_power(int m) const;                                  // p with rate == R_min
};

struct P2 {  // also P4: [g(M), N(M), p(M), b, B_total, R_min]
  int M;
  const double* g;
  const double* N;
  const double* p;
  double b, R_min;
  long long B_total;
  static P2 of(const ProblemInstance& inst);
  double rate(int m, double blocks) const;  // blocks*b*log2(1+...), 0 at blocks==0
};

struct P3 {  // [g(M), N(M), p(M), alpha(M), b, B_total, theta]
  int M;
  const double* g;
  const double* N;
  const double* p;
  const double* alpha;
  double b, theta;
  long long B_total;
  static P3 of(const ProblemInstance& inst);
  double rate(int m, double blocks) const;
};

struct P6 {  // [lambda(M), S(M), Delta(M), mu, alpha]
  int M;
  const double* lambda;
  const double* S;
  const double* Delta;
  double mu, alpha;
  static P6 of(const ProblemInstance& inst);
};

struct P7 {  // [g(M), N(M), b, B_total, P_total, R_min]
  int M;
  const double* g;
  const double* N;
  double b, P_total, R_min;
  long long B_total;
  static P7 of(const ProblemInstance& inst);
  double rate(int m, double blocks, double p) const;
  double min_power(int m, double blocks) const;
};

struct P8 {  // [lambda(M), s(M), alpha, C]
  int M;
  const double* lambda;
  const double* s;
  double alpha, C;
  static P8 of(const ProblemInstance& inst);
  double value(int m) const { return lambda[m] * alpha * s[m]; }
};

struct P9 {  // [C_local(M), C_trans(M), C_offload(M)]
  int M;
  const double* C_local;
  const double* C_trans;
  const double* C_offload;
  static P9 of(const ProblemInstance& inst);
};

struct P10 {  // [g(M), N(M), d(M), B, P_total]
  int M;
  const double* g;
  const double* N;
  const double* d;
  double B, P_total;
  static P10 of(const ProblemInstance& inst);
  double rate(int m, double p) const;
};

}  // namespace views

// P6 keeps the refresh-load budget strictly inside the 1/(1-L) pole by using
// sum(u) <= kP6LoadCap as the budget constraint.
inline constexpr double kP6LoadCap = 0.95;

}  // namespace pad
