#include "pad/oracle.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>
#include <vector>

#include "pad/common.hpp"
#include "pad/rng.hpp"

namespace pad {
namespace {

using Eigen::VectorXd;
using Eigen::VectorXi;

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLn2 = std::numbers::ln2;

double now_seconds() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

// ---------------------------------------------------------------- projection

// Euclidean projection of q onto {r >= 0, sum(r) <= budget} (Duchi et al.'s
// sort-based simplex projection when the budget is active).
VectorXd proj_nonneg_budget(const VectorXd& q, double budget) {
  if (budget <= 0.0) return VectorXd::Zero(q.size());
  VectorXd r = q.cwiseMax(0.0);
  if (r.sum() <= budget) return r;
  std::vector<double> u(q.data(), q.data() + q.size());
  std::sort(u.begin(), u.end(), std::greater<double>());
  double cumsum = 0.0, tau = 0.0;
  for (int k = 0; k < static_cast<int>(u.size()); ++k) {
    cumsum += u[k];
    const double t = (cumsum - budget) / (k + 1);
    if (u[k] - t > 0.0) tau = t;
  }
  return (q.array() - tau).cwiseMax(0.0);
}

// --------------------------------------------------- projected gradient ascent

struct PgaProblem {
  std::function<double(const VectorXd&)> value;  // maximized
  std::function<VectorXd(const VectorXd&)> grad;
  VectorXd lo;
  double budget = 0.0;  // sum(y) <= budget, with budget >= sum(lo)
};

VectorXd pga_project(const PgaProblem& pr, const VectorXd& y) {
  return pr.lo + proj_nonneg_budget(y - pr.lo, pr.budget - pr.lo.sum());
}

struct PgaOutcome {
  VectorXd y;
  double f = -kInf;
  long long iters = 0;
  long long evals = 0;
  double residual = kInf;
};

// Monotone projected gradient ascent with a Barzilai-Borwein warm step and
// Armijo backtracking along the projection arc.
PgaOutcome pga_max(const PgaProblem& pr, const VectorXd& y0, int max_iter, double tol) {
  PgaOutcome out;
  VectorXd y = pga_project(pr, y0);
  double fy = pr.value(y);
  VectorXd g = pr.grad(y);
  out.evals = 1;
  double alpha = 1.0;
  VectorXd y_prev, g_prev;
  for (int it = 0; it < max_iter; ++it) {
    out.iters = it + 1;
    if ((y - pga_project(pr, y + g)).norm() <= tol) break;
    if (y_prev.size() > 0) {
      const VectorXd dy = y - y_prev;
      const double denom = dy.dot(g_prev - g);  // curvature of -f along dy
      if (denom > 1e-300) alpha = dy.squaredNorm() / denom;
    }
    alpha = std::clamp(alpha * 2.0, 1e-14, 1e14);
    y_prev = y;
    g_prev = g;
    bool moved = false;
    for (int bt = 0; bt < 200; ++bt) {
      const VectorXd yn = pga_project(pr, y + alpha * g);
      const VectorXd d = yn - y;
      if (d.norm() == 0.0) {
        alpha *= 0.5;
        continue;
      }
      const double fn = pr.value(yn);
      ++out.evals;
      if (fn >= fy + 1e-4 * g.dot(d)) {
        y = yn;
        fy = fn;
        g = pr.grad(y);
        moved = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!moved) break;  // step shrank below floating-point resolution
  }
  out.residual = (y - pga_project(pr, y + g)).norm();
  out.y = y;
  out.f = fy;
  return out;
}

// Random interior/boundary start for multistart PGA.
VectorXd pga_random_start(const PgaProblem& pr, Rng& rng) {
  const int M = static_cast<int>(pr.lo.size());
  const double span = std::max(0.0, pr.budget - pr.lo.sum());
  VectorXd q(M);
  for (int m = 0; m < M; ++m) q[m] = rng.uniform(0.0, 2.0 * span / M);
  return pr.lo + proj_nonneg_budget(q, span);
}

PgaOutcome pga_multistart(const PgaProblem& pr, const std::vector<VectorXd>& fixed_starts,
                          int random_starts, std::uint64_t seed, OracleReport* rep) {
  PgaOutcome best;
  auto consider = [&](const VectorXd& y0) {
    PgaOutcome o = pga_max(pr, y0, 200000, 1e-9);
    rep->iterations += o.iters;
    rep->evaluations += o.evals;
    if (o.f > best.f) best = std::move(o);
  };
  for (const auto& y0 : fixed_starts) consider(y0);
  for (int s = 0; s < random_starts; ++s) {
    Rng rng(derive_seed(seed, "oracle-start", s));
    consider(pga_random_start(pr, rng));
  }
  return best;
}

// ------------------------------------------------- continuous problem setups

PgaProblem p1_setup(const ProblemInstance& inst) {
  auto v = views::P1::of(inst);
  const int M = v.M;
  PgaProblem pr;
  pr.lo.resize(M);
  for (int m = 0; m < M; ++m) pr.lo[m] = std::max(0.0, v.min_power(m));
  pr.budget = v.P_total;
  pr.value = [v, M](const VectorXd& p) {
    double acc = 0.0;
    for (int m = 0; m < M; ++m) acc += v.rate(m, p[m]);
    return acc;
  };
  pr.grad = [v, M](const VectorXd& p) {
    VectorXd g(M);
    for (int m = 0; m < M; ++m) {
      const double c = v.snr_coeff(m);
      g[m] = v.B * c / ((1.0 + c * p[m]) * kLn2);
    }
    return g;
  };
  return pr;
}

PgaProblem p5_setup(const ProblemInstance& inst) {
  auto v = views::P1::of(inst);
  const int M = v.M;
  PgaProblem pr;
  pr.lo.resize(M);
  const double floor_p = 1e-12 * std::max(1.0, v.P_total);
  for (int m = 0; m < M; ++m) pr.lo[m] = std::max(floor_p, v.min_power(m));
  pr.budget = v.P_total;
  pr.value = [v, M](const VectorXd& p) {
    double acc = 0.0;
    for (int m = 0; m < M; ++m) acc += v.rate(m, p[m]) / p[m];
    return acc;
  };
  pr.grad = [v, M](const VectorXd& p) {
    VectorXd g(M);
    for (int m = 0; m < M; ++m) {
      const double c = v.snr_coeff(m);
      const double lin = c * p[m] / ((1.0 + c * p[m]) * kLn2);
      g[m] = v.B * (lin - std::log2(1.0 + c * p[m])) / (p[m] * p[m]);
    }
    return g;
  };
  return pr;
}

// P6 is a minimization; the PGA engine maximizes -cost.
PgaProblem p6_setup(const ProblemInstance& inst) {
  auto v = views::P6::of(inst);
  const int M = v.M;
  PgaProblem pr;
  pr.lo = VectorXd::Zero(M);
  pr.budget = kP6LoadCap;
  pr.value = [v, M](const VectorXd& u) {
    double acc = 0.0;
    for (int m = 0; m < M; ++m)
      acc += v.lambda[m] * v.S[m] / (1.0 + v.Delta[m] * u[m] * v.mu / v.S[m]);
    const double L = u.sum();
    return -(acc + v.alpha * v.mu * L + L / (1.0 - L));
  };
  pr.grad = [v, M](const VectorXd& u) {
    const double L = u.sum();
    const double load_term = v.alpha * v.mu + 1.0 / ((1.0 - L) * (1.0 - L));
    VectorXd g(M);
    for (int m = 0; m < M; ++m) {
      const double k = v.Delta[m] * v.mu / v.S[m];
      const double den = 1.0 + k * u[m];
      g[m] = v.lambda[m] * v.S[m] * k / (den * den) - load_term;
    }
    return g;
  };
  return pr;
}

PgaProblem p7_inner_setup(const views::P7& v, const VectorXi& blocks) {
  const int M = v.M;
  PgaProblem pr;
  pr.lo.resize(M);
  for (int m = 0; m < M; ++m)
    pr.lo[m] = blocks[m] > 0 ? std::max(0.0, v.min_power(m, blocks[m])) : 0.0;
  pr.budget = v.P_total;
  pr.value = [v, blocks, M](const VectorXd& p) {
    double acc = 0.0;
    for (int m = 0; m < M; ++m) acc += v.rate(m, blocks[m], p[m]);
    return acc;
  };
  pr.grad = [v, blocks, M](const VectorXd& p) {
    VectorXd g(M);
    for (int m = 0; m < M; ++m) {
      if (blocks[m] == 0) {
        g[m] = 0.0;
        continue;
      }
      const double w = blocks[m] * v.b;
      const double c = v.g[m] / (w * v.N[m]);
      g[m] = w * c / ((1.0 + c * p[m]) * kLn2);
    }
    return g;
  };
  return pr;
}

// ------------------------------------------------------------- enumerations

double composition_count(int M, long long total) {
  double n = 1.0;  // C(total + M, M)
  for (int k = 1; k <= M; ++k) n *= static_cast<double>(total + k) / k;
  return n;
}

void require_enum_budget(double count, const char* what) {
  if (!(count <= static_cast<double>(kEnumBudget))) {
    std::ostringstream os;
    os << what << " enumeration needs " << count << " candidates, over the limit of "
       << kEnumBudget << "; reduce the instance size";
    fail(ErrorKind::scale, os.str());
  }
}

// Advance v to its lexicographic successor within {w >= 0, sum(w) <= total};
// returns false once exhausted.
bool next_block_vector(VectorXi& v, long long total) {
  const int M = static_cast<int>(v.size());
  long long sum = 0;
  for (int m = 0; m < M; ++m) sum += v[m];
  if (sum < total) {
    ++v[M - 1];
    return true;
  }
  long long prefix = sum;
  for (int i = M - 2; i >= 0; --i) {
    prefix -= v[i + 1];  // now sum of v[0..i]
    if (prefix + 1 <= total) {
      ++v[i];
      for (int j = i + 1; j < M; ++j) v[j] = 0;
      return true;
    }
  }
  return false;
}

// y-lexicographic order on bitmask subsets: the mask whose first differing
// item is absent compares smaller.
bool mask_lex_less(std::uint64_t a, std::uint64_t b, int M) {
  for (int m = 0; m < M; ++m) {
    const int ba = static_cast<int>((a >> m) & 1u);
    const int bb = static_cast<int>((b >> m) & 1u);
    if (ba != bb) return ba < bb;
  }
  return false;
}

// ------------------------------------------------------------ per-problem

OracleResult solve_p1_p5_p6(const ProblemSpec& spec, const ProblemInstance& inst) {
  PgaProblem pr;
  switch (spec.id) {
    case ProblemId::P1: pr = p1_setup(inst); break;
    case ProblemId::P5: pr = p5_setup(inst); break;
    default: pr = p6_setup(inst); break;
  }
  if (!leq_slack(pr.lo.sum(), pr.budget))
    fail(ErrorKind::infeasible, std::string(name(spec.id)) + " instance has an empty feasible set");
  OracleResult res;
  res.report.certificate = CertificateKind::first_order;
  const std::uint64_t seed =
      derive_seed(inst.seed, "oracle", static_cast<int>(spec.id), spec.M);
  const std::vector<VectorXd> fixed = {feasible_point(spec, inst)};
  PgaOutcome best = pga_multistart(pr, fixed, 7, seed, &res.report);
  res.y = best.y;
  res.objective = objective(spec, inst, res.y);
  return res;
}

OracleResult solve_blocks(const ProblemSpec& spec, const ProblemInstance& inst) {
  const long long B_total = spec.id == ProblemId::P3 ? views::P3::of(inst).B_total
                                                     : views::P2::of(inst).B_total;
  const int M = spec.M;
  require_enum_budget(composition_count(M, B_total), name(spec.id));
  OracleResult res;
  res.report.certificate = CertificateKind::exhaustive;
  const bool minimize = spec.sense == Sense::minimize;
  double best = minimize ? kInf : -kInf;
  VectorXd best_y;
  VectorXi v = VectorXi::Zero(M);
  do {
    ++res.report.iterations;
    const VectorXd y = v.cast<double>();
    if (!check_feasible(spec, inst, y).first) continue;
    const double f = objective(spec, inst, y);
    ++res.report.evaluations;
    if (minimize ? f < best : f > best) {
      best = f;
      best_y = y;
    }
  } while (next_block_vector(v, B_total));
  if (best_y.size() == 0)
    fail(ErrorKind::infeasible, std::string(name(spec.id)) + " instance has an empty feasible set");
  res.y = best_y;
  res.objective = best;
  return res;
}

OracleResult solve_p7(const ProblemSpec& spec, const ProblemInstance& inst) {
  auto v = views::P7::of(inst);
  const int M = spec.M;
  require_enum_budget(composition_count(M, v.B_total), "P7 block");
  OracleResult res;
  res.report.certificate = CertificateKind::exhaustive;
  double best = -kInf;
  VectorXd best_y;
  VectorXi blocks = VectorXi::Zero(M);
  do {
    ++res.report.iterations;
    if (v.R_min > 0.0 && blocks.minCoeff() == 0) continue;
    P7Inner inner = p7_inner_solve(inst, blocks);
    res.report.iterations += inner.iterations;
    if (!inner.feasible) continue;
    ++res.report.evaluations;
    if (inner.objective > best) {
      best = inner.objective;
      best_y.resize(2 * M);
      best_y.head(M) = blocks.cast<double>();
      best_y.tail(M) = inner.p;
    }
  } while (next_block_vector(blocks, v.B_total));
  if (best_y.size() == 0)
    fail(ErrorKind::infeasible, "P7 instance has an empty feasible set");
  res.y = best_y;
  res.objective = objective(spec, inst, res.y);
  return res;
}

OracleResult solve_p8(const ProblemSpec& spec, const ProblemInstance& inst) {
  auto v = views::P8::of(inst);
  const int M = spec.M;
  if (M > 60) fail(ErrorKind::scale, "P8 oracle supports at most 60 items");
  // Integer weights: contents are sized in exact multiples of 0.01, and the
  // capacity absorbs the checker's relative slack so DP-feasible and
  // checker-feasible coincide.
  std::vector<long long> w(M);
  for (int m = 0; m < M; ++m) {
    w[m] = std::llround(100.0 * v.s[m]);
    if (std::abs(100.0 * v.s[m] - static_cast<double>(w[m])) > 1e-6)
      fail(ErrorKind::schema, "P8 oracle requires content sizes quantized to 0.01");
  }
  const long long cap = static_cast<long long>(
      std::floor(100.0 * (v.C + kConsEps * std::max(1.0, v.C)) + 1e-9));
  struct Cell {
    double value = 0.0;
    std::uint64_t mask = 0;
  };
  std::vector<Cell> dp(static_cast<std::size_t>(std::max<long long>(cap, 0)) + 1);
  OracleResult res;
  res.report.certificate = CertificateKind::exhaustive;
  for (int i = 0; i < M; ++i) {
    const double vi = v.value(i);
    for (long long c = cap; c >= w[i]; --c) {
      const Cell& from = dp[static_cast<std::size_t>(c - w[i])];
      Cell cand{from.value + vi, from.mask | (1ull << i)};
      Cell& cur = dp[static_cast<std::size_t>(c)];
      ++res.report.iterations;
      if (cand.value > cur.value ||
          (cand.value == cur.value && mask_lex_less(cand.mask, cur.mask, M)))
        cur = cand;
    }
  }
  const Cell& bestc = dp[static_cast<std::size_t>(std::max<long long>(cap, 0))];
  res.y.resize(M);
  for (int m = 0; m < M; ++m) res.y[m] = static_cast<double>((bestc.mask >> m) & 1u);
  res.objective = objective(spec, inst, res.y);
  res.report.evaluations = res.report.iterations;
  return res;
}

OracleResult solve_p9(const ProblemSpec& spec, const ProblemInstance& inst) {
  const int M = spec.M;
  if (M > 23 || (1ll << M) > kEnumBudget)
    fail(ErrorKind::scale, "P9 oracle enumerates 2^M offload vectors; M is too large");
  OracleResult res;
  res.report.certificate = CertificateKind::exhaustive;
  double best = kInf;
  VectorXd best_y;
  VectorXd D(M);
  for (std::uint64_t k = 0; k < (1ull << M); ++k) {
    ++res.report.iterations;
    for (int m = 0; m < M; ++m) D[m] = static_cast<double>((k >> (M - 1 - m)) & 1u);
    VectorXd y(2 * M);
    y.head(M) = D;
    y.tail(M) = p9_inner_allocation(inst, D);
    const double f = objective(spec, inst, y);
    ++res.report.evaluations;
    if (f < best) {
      best = f;
      best_y = y;
    }
  }
  res.y = best_y;
  res.objective = best;
  return res;
}

OracleResult solve_p10(const ProblemSpec& spec, const ProblemInstance& inst) {
  auto v = views::P10::of(inst);
  const int M = spec.M;
  OracleResult res;
  res.report.certificate = CertificateKind::bisection_converged;
  auto total_power = [&](double tau) {
    return p10_powers_for_delay(inst, tau).sum();
  };
  // Upper bracket: the worst delay under an equal power split is achievable.
  double hi = 0.0;
  const double p_eq = v.P_total / M;
  for (int m = 0; m < M; ++m) {
    const double r = v.rate(m, p_eq);
    if (!(r > 0.0)) fail(ErrorKind::infeasible, "P10 instance has zero rate at equal split");
    hi = std::max(hi, v.d[m] / r);
  }
  double lo = hi;
  for (int it = 0; it < 200 && total_power(lo) <= v.P_total; ++it) {
    hi = lo;
    lo *= 0.5;
    ++res.report.iterations;
  }
  while (hi - lo > 1e-9) {
    const double mid = 0.5 * (lo + hi);
    if (total_power(mid) <= v.P_total)
      hi = mid;
    else
      lo = mid;
    ++res.report.iterations;
    ++res.report.evaluations;
  }
  res.y = p10_powers_for_delay(inst, hi);  // the feasible end of the bracket
  res.objective = objective(spec, inst, res.y);
  return res;
}

}  // namespace

const char* name(CertificateKind k) {
  switch (k) {
    case CertificateKind::exhaustive: return "exhaustive";
    case CertificateKind::first_order: return "first_order";
    case CertificateKind::bisection_converged: return "bisection_converged";
  }
  return "";
}

VectorXd p9_inner_allocation(const ProblemInstance& inst, const VectorXd& D) {
  auto v = views::P9::of(inst);
  const int M = v.M;
  if (D.size() != M) fail(ErrorKind::schema, "P9 offload vector has wrong length");
  VectorXd A = VectorXd::Zero(M);
  double denom = 0.0;
  for (int m = 0; m < M; ++m) {
    if (D[m] != 0.0 && D[m] != 1.0)
      fail(ErrorKind::schema, "P9 offload vector must be binary");
    if (D[m] == 1.0) denom += std::sqrt(v.C_offload[m]);
  }
  if (denom == 0.0) return A;
  for (int m = 0; m < M; ++m)
    if (D[m] == 1.0) A[m] = std::sqrt(v.C_offload[m]) / denom;
  return A;
}

P7Inner p7_inner_solve(const ProblemInstance& inst, const VectorXi& blocks) {
  auto v = views::P7::of(inst);
  if (blocks.size() != v.M) fail(ErrorKind::schema, "P7 block vector has wrong length");
  P7Inner out;
  if (blocks.minCoeff() < 0) return out;
  if (v.R_min > 0.0 && blocks.minCoeff() == 0) return out;
  PgaProblem pr = p7_inner_setup(v, blocks);
  if (!leq_slack(pr.lo.sum(), pr.budget)) return out;
  const int M = v.M;
  VectorXd start = pr.lo.array() + (pr.budget - pr.lo.sum()) / M;
  PgaOutcome o = pga_max(pr, start, 200000, 1e-9);
  out.feasible = true;
  out.p = o.y;
  out.objective = o.f;
  out.iterations = o.iters;
  return out;
}

VectorXd p10_powers_for_delay(const ProblemInstance& inst, double tau) {
  auto v = views::P10::of(inst);
  if (!(tau > 0.0)) fail(ErrorKind::domain, "P10 delay target must be positive");
  VectorXd p(v.M);
  for (int m = 0; m < v.M; ++m) {
    const double c = v.g[m] / (v.B * v.N[m]);
    p[m] = (std::exp2(v.d[m] / (v.B * tau)) - 1.0) / c;
  }
  return p;
}

double stationarity_residual(const ProblemSpec& spec, const ProblemInstance& inst,
                             const Eigen::VectorXd& y) {
  switch (spec.id) {
    case ProblemId::P1: {
      PgaProblem pr = p1_setup(inst);
      return (y - pga_project(pr, y + pr.grad(y))).norm();
    }
    case ProblemId::P5: {
      PgaProblem pr = p5_setup(inst);
      return (y - pga_project(pr, y + pr.grad(y))).norm();
    }
    case ProblemId::P6: {
      PgaProblem pr = p6_setup(inst);
      return (y - pga_project(pr, y + pr.grad(y))).norm();  // grad of -cost
    }
    case ProblemId::P7: {
      auto v = views::P7::of(inst);
      const int M = spec.M;
      if (y.size() != 2 * M) fail(ErrorKind::schema, "P7 solution has wrong length");
      VectorXi blocks(M);
      for (int m = 0; m < M; ++m) {
        const double b = y[m];
        if (b < 0.0 || b != std::floor(b))
          fail(ErrorKind::domain, "P7 stationarity needs integer block counts");
        blocks[m] = static_cast<int>(b);
      }
      if (v.R_min > 0.0 && blocks.minCoeff() == 0)
        fail(ErrorKind::domain, "P7 stationarity needs every user to hold blocks");
      PgaProblem pr = p7_inner_setup(v, blocks);
      const VectorXd p = y.tail(M);
      return (p - pga_project(pr, p + pr.grad(p))).norm();
    }
    default:
      fail(ErrorKind::schema,
           "stationarity residual is defined for the continuous problems P1, P5, P6, P7");
  }
}

Eigen::VectorXd project_feasible(const ProblemSpec& spec, const ProblemInstance& inst,
                                 const Eigen::VectorXd& y) {
  switch (spec.id) {
    case ProblemId::P1: return pga_project(p1_setup(inst), y);
    case ProblemId::P5: return pga_project(p5_setup(inst), y);
    case ProblemId::P6: return pga_project(p6_setup(inst), y);
    case ProblemId::P7: {
      auto v = views::P7::of(inst);
      const int M = spec.M;
      if (y.size() != 2 * M) fail(ErrorKind::schema, "P7 solution has wrong length");
      VectorXi blocks(M);
      for (int m = 0; m < M; ++m) blocks[m] = static_cast<int>(std::max(0.0, std::round(y[m])));
      VectorXd out = y;
      out.head(M) = blocks.cast<double>();
      out.tail(M) = pga_project(p7_inner_setup(v, blocks), y.tail(M));
      return out;
    }
    default:
      fail(ErrorKind::schema, "projection is defined for the continuous problems P1, P5, P6, P7");
  }
}

bool feasible_probe(const ProblemSpec& spec, const ProblemInstance& inst) {
  return check_feasible(spec, inst, feasible_point(spec, inst)).first;
}

std::vector<Eigen::VectorXi> all_block_vectors(int M, long long total) {
  if (M < 1 || total < 0) fail(ErrorKind::schema, "block enumeration needs M >= 1, total >= 0");
  require_enum_budget(composition_count(M, total), "block vector");
  std::vector<VectorXi> out;
  VectorXi v = VectorXi::Zero(M);
  do {
    out.push_back(v);
  } while (next_block_vector(v, total));
  return out;
}

OracleResult solve(const ProblemSpec& spec, const ProblemInstance& inst) {
  const double t0 = now_seconds();
  OracleResult res;
  switch (spec.id) {
    case ProblemId::P1:
    case ProblemId::P5:
    case ProblemId::P6: res = solve_p1_p5_p6(spec, inst); break;
    case ProblemId::P2:
    case ProblemId::P3:
    case ProblemId::P4: res = solve_blocks(spec, inst); break;
    case ProblemId::P7: res = solve_p7(spec, inst); break;
    case ProblemId::P8: res = solve_p8(spec, inst); break;
    case ProblemId::P9: res = solve_p9(spec, inst); break;
    case ProblemId::P10: res = solve_p10(spec, inst); break;
  }
  auto [ok, viol] = check_feasible(spec, inst, res.y);
  if (!ok)
    fail(ErrorKind::state, std::string(name(spec.id)) + " oracle produced an infeasible solution (" +
                               viol.front().constraint + ")");
  res.report.wall_seconds = now_seconds() - t0;
  return res;
}

}  // namespace pad
