// Ground-truth solvers for the problem suite, one strategy per problem class:
// exhaustive enumeration for the discrete problems, projected-gradient ascent
// with multistart for the smooth continuous ones, dynamic programming for the
// knapsack, closed-form inner allocation for offloading, and bisection for
// the min-max delay problem.  Every result carries a certificate report.
#pragma once

#include <Eigen/Core>
#include <vector>

#include "pad/problems.hpp"

namespace pad {

inline constexpr const char* kOracleVersion = "1";

enum class CertificateKind { exhaustive, first_order, bisection_converged };
const char* name(CertificateKind k);

struct OracleReport {
  CertificateKind certificate = CertificateKind::exhaustive;
  long long iterations = 0;    // PGA iterations / enumeration candidates / bisection steps
  long long evaluations = 0;   // objective evaluations
  double wall_seconds = 0.0;   // informational only, never serialized
};

struct OracleResult {
  Eigen::VectorXd y;
  double objective = 0.0;
  OracleReport report;
};

// Solve one instance to optimality (within the solver's certificate class).
// Discrete enumerations abort with ErrorKind::scale when the candidate count
// exceeds kEnumBudget.
OracleResult solve(const ProblemSpec& spec, const ProblemInstance& inst);

inline constexpr long long kEnumBudget = 10'000'000;

// --- exposed building blocks (used by solve, tests, and the sampler) ---

// Closed-form resource shares for P9 given a binary offload vector: shares
// proportional to sqrt(C_offload) over the offloaded set (a single offloaded
// task receives the full budget), zero elsewhere.
Eigen::VectorXd p9_inner_allocation(const ProblemInstance& inst, const Eigen::VectorXd& D);

// Inner continuous solve of P7 for a fixed block vector.
struct P7Inner {
  bool feasible = false;
  Eigen::VectorXd p;
  double objective = 0.0;
  long long iterations = 0;
};
P7Inner p7_inner_solve(const ProblemInstance& inst, const Eigen::VectorXi& blocks);

// Per-channel powers that give every channel delay tau in P10.
Eigen::VectorXd p10_powers_for_delay(const ProblemInstance& inst, double tau);

// First-order optimality residual || y - Proj(y + step_into_descent) ||_2 with
// unit step, for the continuous problems (P1, P5, P6) and the power part of a
// P7 solution (blocks held fixed).  Zero at a constrained optimum.
double stationarity_residual(const ProblemSpec& spec, const ProblemInstance& inst,
                             const Eigen::VectorXd& y);

// Euclidean projection of y onto the continuous feasible set (same problems
// as stationarity_residual; for P7 the block part is passed through).
Eigen::VectorXd project_feasible(const ProblemSpec& spec, const ProblemInstance& inst,
                                 const Eigen::VectorXd& y);

// Fast probe used by instance sampling and baselines.
bool feasible_probe(const ProblemSpec& spec, const ProblemInstance& inst);

// All nonnegative integer vectors of length M with sum <= total, in
// lexicographic order.  Guarded by kEnumBudget.
std::vector<Eigen::VectorXi> all_block_vectors(int M, long long total);

}  // namespace pad
