#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "pad/rng.hpp"

namespace padtest {

using namespace pad;

ProblemSpec clamp_block_budget(ProblemSpec spec, long long cap) {
  for (auto& f : spec.params)
    if (f.type == PhysicalType::total_blocks) {
      f.lo = static_cast<double>(spec.M);
      f.hi = static_cast<double>(cap);
    }
  return spec;
}

namespace {

// Every nonnegative integer vector of length M with sum <= total.
template <typename Fn>
void each_budget_vector(int M, long long total, Eigen::VectorXd& cur, int i, long long used,
                        Fn&& fn) {
  if (i == M) {
    fn(cur);
    return;
  }
  for (long long v = 0; used + v <= total; ++v) {
    cur[i] = static_cast<double>(v);
    each_budget_vector(M, total, cur, i + 1, used + v, fn);
  }
}

}  // namespace

double enumerate_best(const ProblemSpec& spec, const ProblemInstance& inst) {
  const int M = spec.M;
  const bool maximize = spec.sense == Sense::maximize;
  double best = std::numeric_limits<double>::quiet_NaN();
  auto consider = [&](const Eigen::VectorXd& y) {
    if (!check_feasible(spec, inst, y).first) return;
    const double f = objective(spec, inst, y);
    if (std::isnan(best) || (maximize ? f > best : f < best)) best = f;
  };
  switch (spec.id) {
    case ProblemId::P2:
    case ProblemId::P3:
    case ProblemId::P4: {
      const long long B = spec.id == ProblemId::P3 ? views::P3::of(inst).B_total
                                                   : views::P2::of(inst).B_total;
      Eigen::VectorXd cur(M);
      each_budget_vector(M, B, cur, 0, 0, consider);
      break;
    }
    case ProblemId::P8: {
      for (unsigned mask = 0; mask < (1u << M); ++mask) {
        Eigen::VectorXd y(M);
        for (int m = 0; m < M; ++m) y[m] = static_cast<double>((mask >> m) & 1u);
        consider(y);
      }
      break;
    }
    case ProblemId::P7: {
      const auto v = views::P7::of(inst);
      Eigen::VectorXd cur(M);
      each_budget_vector(M, v.B_total, cur, 0, 0, [&](const Eigen::VectorXd& blocks) {
        Eigen::VectorXi bi(M);
        for (int m = 0; m < M; ++m) bi[m] = static_cast<int>(std::llround(blocks[m]));
        const P7Inner inner = p7_inner_solve(inst, bi);
        if (!inner.feasible) return;
        if (std::isnan(best) || inner.objective > best) best = inner.objective;
      });
      break;
    }
    case ProblemId::P9: {
      for (unsigned mask = 0; mask < (1u << M); ++mask) {
        Eigen::VectorXd y = Eigen::VectorXd::Zero(2 * M);
        for (int m = 0; m < M; ++m) y[m] = static_cast<double>((mask >> m) & 1u);
        if (mask) {
          const Eigen::VectorXd D = y.head(M);
          y.tail(M) = p9_inner_allocation(inst, D);
        }
        consider(y);
      }
      break;
    }
    default:
      fail(ErrorKind::domain, "enumerate_best: not a discrete problem");
  }
  return best;
}

std::vector<int> rank_pool_reference(const TokenMatrix& T, int m) {
  const int S = static_cast<int>(T.rows());
  std::vector<Eigen::VectorXd> rows(S);
  for (int i = 0; i < S; ++i) rows[i] = T.row(i).cast<double>();
  Eigen::VectorXd V = Eigen::VectorXd::Zero(S);
  for (int i = 0; i < S; ++i)
    for (int j = 0; j < S; ++j) {
      if (i == j) continue;
      const double ni = rows[i].norm(), nj = rows[j].norm();
      V[i] += (ni == 0.0 || nj == 0.0) ? 0.0 : rows[i].dot(rows[j]) / (ni * nj);
    }
  std::vector<int> order(S);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return V[a] < V[b]; });
  order.resize(m);
  std::sort(order.begin(), order.end());
  return order;
}

std::vector<unsigned char> file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::io, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

double fd_gradcheck(nn::ParamStore<double>& ps, const std::function<double(bool)>& run, int probes,
                    std::uint64_t seed, double eps) {
  ps.zero_grad();
  run(true);
  std::vector<Eigen::MatrixXd> grads;
  grads.reserve(ps.items.size());
  for (const auto& p : ps.items) grads.push_back(p->grad);
  Rng rng(seed);
  double worst = 0.0;
  for (int k = 0; k < probes; ++k) {
    const int pi = static_cast<int>(rng.uniform_int(0, static_cast<long long>(ps.items.size()) - 1));
    auto& p = *ps.items[pi];
    const int r = static_cast<int>(rng.uniform_int(0, p.value.rows() - 1));
    const int c = static_cast<int>(rng.uniform_int(0, p.value.cols() - 1));
    const double keep = p.value(r, c);
    p.value(r, c) = keep + eps;
    const double fp = run(false);
    p.value(r, c) = keep - eps;
    const double fm = run(false);
    p.value(r, c) = keep;
    const double fd = (fp - fm) / (2.0 * eps);
    const double an = grads[pi](r, c);
    worst = std::max(worst, std::abs(fd - an) / std::max(1e-8, std::abs(fd) + std::abs(an)));
  }
  return worst;
}

}  // namespace padtest
