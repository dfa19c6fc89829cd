#include "pad/problems.hpp"

#include <cmath>
#include <sstream>

#include "pad/latex.hpp"

namespace pad {

namespace {

constexpr double kGainLo = 0.1, kGainHi = 1.0;
constexpr double kNoiseLo = 1e-3, kNoiseHi = 1e-2;  // W/Hz
constexpr double kChanBw = 1e6;                     // Hz, OFDMA channel bandwidth
constexpr double kBlockBw = 180e3;                  // Hz, resource-block bandwidth
constexpr double kTxLo = 0.1, kTxHi = 1.0;          // W, fixed per-channel powers
constexpr double kCostLo = 0.1, kCostHi = 10.0;     // generic cost/caching params
constexpr double kDerivedFrac = 0.1;  // derived thresholds sit at 10% of equal split

double log2_checked(double arg, const char* what, int m) {
  if (!(arg > 0.0)) {
    std::ostringstream os;
    os << "objective domain error: log2 argument " << arg << " at " << what << "_" << (m + 1);
    fail(ErrorKind::domain, os.str());
  }
  return std::log2(arg);
}

// Normalization cap for derived min-rate parameters: 10% of the best-case
// equal-split rate under the sampling ranges.
double p1_rmin_cap(int M) {
  (void)M;  // equal split power P_total/M <= 1 for all M
  return kDerivedFrac * kChanBw * std::log2(1.0 + kGainHi * 1.0 / (kChanBw * kNoiseLo));
}
double block_rmin_cap(int M) {
  (void)M;  // floor(B_total/M) <= 3 blocks per channel
  const double w = 3.0 * kBlockBw;
  return kDerivedFrac * w * std::log2(1.0 + kGainHi * kTxHi / (w * kNoiseLo));
}
double p3_theta_cap(int M) { return block_rmin_cap(M) / kGainLo; }  // alpha_lo == 0.1

FieldSpec param(std::string name, PhysicalType t, int count, double lo, double hi,
                std::string unit = "", VarKind kind = VarKind::continuous, bool derived = false) {
  return FieldSpec{std::move(name), t, count, lo, hi, std::move(unit), kind, derived};
}

}  // namespace

const char* name(PhysicalType t) {
  switch (t) {
    case PhysicalType::channel_gain: return "channel_gain";
    case PhysicalType::noise_psd: return "noise_psd";
    case PhysicalType::tx_power_var: return "tx_power_var";
    case PhysicalType::total_power: return "total_power";
    case PhysicalType::block_bandwidth: return "block_bandwidth";
    case PhysicalType::block_count_var: return "block_count_var";
    case PhysicalType::total_blocks: return "total_blocks";
    case PhysicalType::min_rate: return "min_rate";
    case PhysicalType::contribution_factor: return "contribution_factor";
    case PhysicalType::fairness_threshold: return "fairness_threshold";
    case PhysicalType::data_volume: return "data_volume";
    case PhysicalType::request_rate: return "request_rate";
    case PhysicalType::content_size: return "content_size";
    case PhysicalType::freshness_tolerance: return "freshness_tolerance";
    case PhysicalType::refresh_ratio_var: return "refresh_ratio_var";
    case PhysicalType::cache_decision_var: return "cache_decision_var";
    case PhysicalType::offload_decision_var: return "offload_decision_var";
    case PhysicalType::resource_alloc_var: return "resource_alloc_var";
    case PhysicalType::cost_param: return "cost_param";
  }
  return "?";
}

const char* name(ProblemId id) {
  static const char* names[] = {"P1", "P2", "P3", "P4", "P5", "P6", "P7", "P8", "P9", "P10"};
  return names[static_cast<int>(id) - 1];
}

const char* summary(ProblemId id) {
  switch (id) {
    case ProblemId::P1: return "continuous power allocation maximizing sum rate under a power budget and per-channel minimum rates";
    case ProblemId::P2: return "integer resource-block allocation maximizing sum rate under a block budget and minimum rates";
    case ProblemId::P3: return "integer resource-block allocation maximizing sum rate under proportional-fairness floors";
    case ProblemId::P4: return "integer resource-block allocation maximizing spectral efficiency per block";
    case ProblemId::P5: return "continuous power allocation maximizing sum power efficiency (rate per watt)";
    case ProblemId::P6: return "continuous cache-refresh ratios minimizing staleness latency plus refresh load cost";
    case ProblemId::P7: return "joint block-count and power allocation maximizing sum rate under both budgets";
    case ProblemId::P8: return "binary content caching maximizing cached request value under a capacity budget";
    case ProblemId::P9: return "joint binary offloading and resource shares minimizing total processing cost";
    case ProblemId::P10: return "continuous power allocation minimizing the maximum transmission delay over channels";
  }
  return "";
}

ProblemId problem_from_name(const std::string& s) {
  for (ProblemId id : kAllProblems)
    if (s == name(id)) return id;
  fail(ErrorKind::schema, "unknown problem '" + s + "' (expected P1..P10)");
}

int ProblemSpec::x_len() const {
  int n = 0;
  for (const auto& f : params) n += f.count;
  return n;
}
int ProblemSpec::y_len() const {
  int n = 0;
  for (const auto& f : vars) n += f.count;
  return n;
}

namespace {
const FieldSpec& field_at(const std::vector<FieldSpec>& fields, int i, const char* what) {
  int off = 0;
  for (const auto& f : fields) {
    if (i < off + f.count) return f;
    off += f.count;
  }
  fail(ErrorKind::schema, std::string("element index out of range for ") + what);
}
}  // namespace

PhysicalType ProblemSpec::param_type(int i) const { return field_at(params, i, "params").type; }
PhysicalType ProblemSpec::var_type(int i) const { return field_at(vars, i, "vars").type; }
std::pair<double, double> ProblemSpec::param_range(int i) const {
  const auto& f = field_at(params, i, "params");
  return {f.lo, f.hi};
}
std::pair<double, double> ProblemSpec::var_range(int i) const {
  const auto& f = field_at(vars, i, "vars");
  return {f.lo, f.hi};
}
VarKind ProblemSpec::var_kind(int i) const { return field_at(vars, i, "vars").kind; }

std::vector<PhysicalType> ProblemSpec::param_labels() const {
  std::vector<PhysicalType> out;
  out.reserve(x_len());
  for (const auto& f : params)
    for (int c = 0; c < f.count; ++c) out.push_back(f.type);
  return out;
}
std::vector<PhysicalType> ProblemSpec::var_labels() const {
  std::vector<PhysicalType> out;
  out.reserve(y_len());
  for (const auto& f : vars)
    for (int c = 0; c < f.count; ++c) out.push_back(f.type);
  return out;
}

ProblemSpec make_spec(ProblemId id, int M) {
  if (M < 1) fail(ErrorKind::schema, "dimension M must be >= 1");
  ProblemSpec s;
  s.id = id;
  s.M = M;
  const double dM = static_cast<double>(M);
  using PT = PhysicalType;
  switch (id) {
    case ProblemId::P1:
    case ProblemId::P5:
      s.sense = Sense::maximize;
      s.params = {param("g", PT::channel_gain, M, kGainLo, kGainHi),
                  param("N", PT::noise_psd, M, kNoiseLo, kNoiseHi, "W/Hz"),
                  param("B", PT::block_bandwidth, 1, kChanBw, kChanBw, "Hz"),
                  param("P_total", PT::total_power, 1, 1.0, dM, "W"),
                  param("R_min", PT::min_rate, 1, 0.0, p1_rmin_cap(M), "bit/s",
                        VarKind::continuous, true)};
      s.vars = {param("p", PT::tx_power_var, M, 0.0, dM, "W")};
      break;
    case ProblemId::P2:
    case ProblemId::P4:
      s.sense = Sense::maximize;
      s.params = {param("g", PT::channel_gain, M, kGainLo, kGainHi),
                  param("N", PT::noise_psd, M, kNoiseLo, kNoiseHi, "W/Hz"),
                  param("p", PT::tx_power_var, M, kTxLo, kTxHi, "W"),
                  param("b", PT::block_bandwidth, 1, kBlockBw, kBlockBw, "Hz"),
                  param("B_total", PT::total_blocks, 1, dM, 3.0 * dM, "", VarKind::integer),
                  param("R_min", PT::min_rate, 1, 0.0, block_rmin_cap(M), "bit/s",
                        VarKind::continuous, true)};
      s.vars = {param("B", PT::block_count_var, M, 0.0, 3.0 * dM, "", VarKind::integer)};
      break;
    case ProblemId::P3:
      s.sense = Sense::maximize;
      s.params = {param("g", PT::channel_gain, M, kGainLo, kGainHi),
                  param("N", PT::noise_psd, M, kNoiseLo, kNoiseHi, "W/Hz"),
                  param("p", PT::tx_power_var, M, kTxLo, kTxHi, "W"),
                  param("alpha", PT::contribution_factor, M, 0.1, 1.0),
                  param("b", PT::block_bandwidth, 1, kBlockBw, kBlockBw, "Hz"),
                  param("B_total", PT::total_blocks, 1, dM, 3.0 * dM, "", VarKind::integer),
                  param("theta", PT::fairness_threshold, 1, 0.0, p3_theta_cap(M), "bit/s",
                        VarKind::continuous, true)};
      s.vars = {param("B", PT::block_count_var, M, 0.0, 3.0 * dM, "", VarKind::integer)};
      break;
    case ProblemId::P6:
      s.sense = Sense::minimize;
      s.params = {param("lambda", PT::request_rate, M, kCostLo, kCostHi, "req/s"),
                  param("S", PT::content_size, M, kCostLo, kCostHi, "MB"),
                  param("Delta", PT::freshness_tolerance, M, kCostLo, kCostHi, "s"),
                  param("mu", PT::cost_param, 1, kCostLo, kCostHi, "MB/s"),
                  param("alpha", PT::cost_param, 1, kCostLo, kCostHi, "s/MB")};
      s.vars = {param("u", PT::refresh_ratio_var, M, 0.0, kP6LoadCap)};
      break;
    case ProblemId::P7:
      s.sense = Sense::maximize;
      s.params = {param("g", PT::channel_gain, M, kGainLo, kGainHi),
                  param("N", PT::noise_psd, M, kNoiseLo, kNoiseHi, "W/Hz"),
                  param("b", PT::block_bandwidth, 1, kBlockBw, kBlockBw, "Hz"),
                  param("B_total", PT::total_blocks, 1, dM, 3.0 * dM, "", VarKind::integer),
                  param("P_total", PT::total_power, 1, 1.0, dM, "W"),
                  param("R_min", PT::min_rate, 1, 0.0, block_rmin_cap(M), "bit/s",
                        VarKind::continuous, true)};
      s.vars = {param("B", PT::block_count_var, M, 0.0, 3.0 * dM, "", VarKind::integer),
                param("p", PT::tx_power_var, M, 0.0, dM, "W")};
      break;
    case ProblemId::P8:
      s.sense = Sense::maximize;
      s.params = {param("lambda", PT::request_rate, M, kCostLo, kCostHi, "req/s"),
                  param("s", PT::content_size, M, kCostLo, kCostHi, "MB"),
                  param("alpha", PT::cost_param, 1, kCostLo, kCostHi),
                  param("C", PT::cost_param, 1, 1.0, kCostHi, "MB")};
      s.vars = {param("x", PT::cache_decision_var, M, 0.0, 1.0, "", VarKind::binary)};
      break;
    case ProblemId::P9:
      s.sense = Sense::minimize;
      s.params = {param("C_local", PT::cost_param, M, kCostLo, kCostHi),
                  param("C_trans", PT::cost_param, M, kCostLo, kCostHi),
                  param("C_offload", PT::cost_param, M, kCostLo, kCostHi)};
      s.vars = {param("D", PT::offload_decision_var, M, 0.0, 1.0, "", VarKind::binary),
                param("A", PT::resource_alloc_var, M, 0.0, 1.0)};
      break;
    case ProblemId::P10:
      s.sense = Sense::minimize;
      s.params = {param("g", PT::channel_gain, M, kGainLo, kGainHi),
                  param("N", PT::noise_psd, M, kNoiseLo, kNoiseHi, "W/Hz"),
                  param("d", PT::data_volume, M, 1e3, 1e4, "bit"),
                  param("B", PT::block_bandwidth, 1, kChanBw, kChanBw, "Hz"),
                  param("P_total", PT::total_power, 1, 1.0, dM, "W")};
      s.vars = {param("p", PT::tx_power_var, M, 0.0, dM, "W")};
      break;
  }
  return s;
}

std::vector<int> default_dims(ProblemId id) {
  if (id == ProblemId::P7) return {3, 4, 5};
  return {5, 6, 7};
}

namespace views {

P1 P1::of(const ProblemInstance& inst) {
  const int M = inst.M;
  const double* x = inst.x.data();
  return P1{M, x, x + M, x[2 * M], x[2 * M + 1], x[2 * M + 2]};
}
double P1::rate(int m, double p) const {
  const double arg = 1.0 + g[m] * p / (B * N[m]);
  return arg > 0.0 ? B * std::log2(arg) : -std::numeric_limits<double>::infinity();
}
double P1::min_power(int m) const {
  return (std::exp2(R_min / B) - 1.0) * B * N[m] / g[m];
}

P2 P2::of(const ProblemInstance& inst) {
  const int M = inst.M;
  const double* x = inst.x.data();
  return P2{M, x, x + M, x + 2 * M, x[3 * M], x[3 * M + 2],
            static_cast<long long>(std::llround(x[3 * M + 1]))};
}
double P2::rate(int m, double blocks) const {
  if (blocks == 0.0) return 0.0;
  const double w = blocks * b;
  const double arg = 1.0 + g[m] * p[m] / (w * N[m]);
  return arg > 0.0 ? w * std::log2(arg) : -std::numeric_limits<double>::infinity();
}

P3 P3::of(const ProblemInstance& inst) {
  const int M = inst.M;
  const double* x = inst.x.data();
  return P3{M, x, x + M, x + 2 * M, x + 3 * M, x[4 * M], x[4 * M + 2],
            static_cast<long long>(std::llround(x[4 * M + 1]))};
}
double P3::rate(int m, double blocks) const {
  if (blocks == 0.0) return 0.0;
  const double w = blocks * b;
  const double arg = 1.0 + g[m] * p[m] / (w * N[m]);
  return arg > 0.0 ? w * std::log2(arg) : -std::numeric_limits<double>::infinity();
}

P6 P6::of(const ProblemInstance& inst) {
  const int M = inst.M;
  const double* x = inst.x.data();
  return P6{M, x, x + M, x + 2 * M, x[3 * M], x[3 * M + 1]};
}

P7 P7::of(const ProblemInstance& inst) {
  const int M = inst.M;
  const double* x = inst.x.data();
  return P7{M, x, x + M, x[2 * M], x[2 * M + 2], x[2 * M + 3],
            static_cast<long long>(std::llround(x[2 * M + 1]))};
}
double P7::rate(int m, double blocks, double p) const {
  if (blocks == 0.0) return 0.0;
  const double w = blocks * b;
  const double arg = 1.0 + g[m] * p / (w * N[m]);
  return arg > 0.0 ? w * std::log2(arg) : -std::numeric_limits<double>::infinity();
}
double P7::min_power(int m, double blocks) const {
  const double w = blocks * b;
  return (std::exp2(R_min / w) - 1.0) * w * N[m] / g[m];
}

P8 P8::of(const ProblemInstance& inst) {
  const int M = inst.M;
  const double* x = inst.x.data();
  return P8{M, x, x + M, x[2 * M], x[2 * M + 1]};
}

P9 P9::of(const ProblemInstance& inst) {
  const int M = inst.M;
  const double* x = inst.x.data();
  return P9{M, x, x + M, x + 2 * M};
}

P10 P10::of(const ProblemInstance& inst) {
  const int M = inst.M;
  const double* x = inst.x.data();
  return P10{M, x, x + M, x + 2 * M, x[3 * M], x[3 * M + 1]};
}
double P10::rate(int m, double p) const {
  const double arg = 1.0 + g[m] * p / (B * N[m]);
  return arg > 0.0 ? B * std::log2(arg) : -std::numeric_limits<double>::infinity();
}

}  // namespace views

namespace {

void require_y(const ProblemSpec& spec, const Eigen::VectorXd& y) {
  if (y.size() != spec.y_len()) {
    std::ostringstream os;
    os << name(spec.id) << ": y has length " << y.size() << ", expected " << spec.y_len();
    fail(ErrorKind::schema, os.str());
  }
}

void require_instance(const ProblemSpec& spec, const ProblemInstance& inst) {
  if (inst.id != spec.id || inst.M != spec.M)
    fail(ErrorKind::schema, "instance does not match spec");
  if (inst.x.size() != spec.x_len())
    fail(ErrorKind::schema, "instance x length does not match schema");
}

}  // namespace

double objective(const ProblemSpec& spec, const ProblemInstance& inst, const Eigen::VectorXd& y) {
  require_instance(spec, inst);
  require_y(spec, y);
  const int M = spec.M;
  switch (spec.id) {
    case ProblemId::P1: {
      auto v = views::P1::of(inst);
      double acc = 0.0;
      for (int m = 0; m < M; ++m)
        acc += v.B * log2_checked(1.0 + v.snr_coeff(m) * y[m], "p", m);
      return acc;
    }
    case ProblemId::P2: {
      auto v = views::P2::of(inst);
      double acc = 0.0;
      for (int m = 0; m < M; ++m) {
        if (y[m] < 0.0)
          fail(ErrorKind::domain, "P2 objective: negative block count B_" + std::to_string(m + 1));
        if (y[m] == 0.0) continue;  // lim_{B->0} B*b*log2(1+c/(B*b)) = 0
        const double w = y[m] * v.b;
        acc += w * log2_checked(1.0 + v.g[m] * v.p[m] / (w * v.N[m]), "B", m);
      }
      return acc;
    }
    case ProblemId::P3: {
      auto v = views::P3::of(inst);
      double acc = 0.0;
      for (int m = 0; m < M; ++m) {
        if (y[m] < 0.0)
          fail(ErrorKind::domain, "P3 objective: negative block count B_" + std::to_string(m + 1));
        if (y[m] == 0.0) continue;
        const double w = y[m] * v.b;
        acc += w * log2_checked(1.0 + v.g[m] * v.p[m] / (w * v.N[m]), "B", m);
      }
      return acc;
    }
    case ProblemId::P4: {
      auto v = views::P2::of(inst);
      double acc = 0.0;
      for (int m = 0; m < M; ++m) {
        if (y[m] <= 0.0)
          fail(ErrorKind::domain,
               "P4 objective: division by zero at B_" + std::to_string(m + 1));
        const double w = y[m] * v.b;
        acc += log2_checked(1.0 + v.g[m] * v.p[m] / (w * v.N[m]), "B", m) / y[m];
      }
      return acc;
    }
    case ProblemId::P5: {
      auto v = views::P1::of(inst);
      double acc = 0.0;
      for (int m = 0; m < M; ++m) {
        if (y[m] == 0.0)
          fail(ErrorKind::domain,
               "P5 objective: division by zero at p_" + std::to_string(m + 1));
        acc += v.B * log2_checked(1.0 + v.snr_coeff(m) * y[m], "p", m) / y[m];
      }
      return acc;
    }
    case ProblemId::P6: {
      auto v = views::P6::of(inst);
      const double L = y.sum();
      if (L >= 1.0)
        fail(ErrorKind::domain, "P6 objective: refresh load sum(u) >= 1 hits the 1/(1-L) pole");
      double acc = 0.0;
      for (int m = 0; m < M; ++m) {
        const double den = 1.0 + v.Delta[m] * y[m] * v.mu / v.S[m];
        if (den <= 0.0)
          fail(ErrorKind::domain, "P6 objective: nonpositive staleness term at u_" + std::to_string(m + 1));
        acc += v.lambda[m] * v.S[m] / den;
      }
      return acc + v.alpha * v.mu * L + L / (1.0 - L);
    }
    case ProblemId::P7: {
      auto v = views::P7::of(inst);
      double acc = 0.0;
      for (int m = 0; m < M; ++m) {
        const double blocks = y[m];
        const double p = y[M + m];
        if (blocks < 0.0)
          fail(ErrorKind::domain, "P7 objective: negative block count B_" + std::to_string(m + 1));
        if (blocks == 0.0) continue;
        const double w = blocks * v.b;
        acc += w * log2_checked(1.0 + v.g[m] * p / (w * v.N[m]), "B", m);
      }
      return acc;
    }
    case ProblemId::P8: {
      auto v = views::P8::of(inst);
      double acc = 0.0;
      for (int m = 0; m < M; ++m) acc += v.value(m) * y[m];
      return acc;
    }
    case ProblemId::P9: {
      auto v = views::P9::of(inst);
      double acc = 0.0;
      for (int m = 0; m < M; ++m) {
        const double D = y[m];
        const double A = y[M + m];
        acc += (1.0 - D) * v.C_local[m];
        if (D != 0.0) {
          if (A == 0.0)
            fail(ErrorKind::domain,
                 "P9 objective: division by zero at A_" + std::to_string(m + 1) +
                     " with D_" + std::to_string(m + 1) + " = 1");
          acc += D * (v.C_trans[m] + v.C_offload[m] / A);
        }
      }
      return acc;
    }
    case ProblemId::P10: {
      auto v = views::P10::of(inst);
      double worst = 0.0;
      for (int m = 0; m < M; ++m) {
        const double r = v.rate(m, y[m]);
        if (!(r > 0.0)) {
          if (y[m] < 0.0)
            fail(ErrorKind::domain, "P10 objective: negative power p_" + std::to_string(m + 1));
          return std::numeric_limits<double>::infinity();  // zero rate, unbounded delay
        }
        worst = std::max(worst, v.d[m] / r);
      }
      return worst;
    }
  }
  fail(ErrorKind::schema, "unhandled problem id");
}

namespace {

struct Checker {
  std::vector<Violation> v;
  void leq(double lhs, double rhs, const std::string& cname) {
    if (!leq_slack(lhs, rhs)) v.push_back({cname, lhs - rhs});
  }
  void geq(double lhs, double rhs, const std::string& cname) {
    if (!geq_slack(lhs, rhs)) v.push_back({cname, rhs - lhs});
  }
  void exact_leq(long long lhs, long long rhs, const std::string& cname) {
    if (lhs > rhs) v.push_back({cname, static_cast<double>(lhs - rhs)});
  }
};

bool is_exact_integer(double x) { return std::isfinite(x) && x == std::nearbyint(x); }

std::string idx(const char* base, int m) { return std::string(base) + "[" + std::to_string(m + 1) + "]"; }

// Integrality of integer/binary variables is required exactly; returns true
// when all named elements are exact integers (binaries additionally in {0,1}).
bool check_integrality(Checker& c, const Eigen::VectorXd& y, int off, int count, VarKind kind,
                       const char* cname) {
  bool ok = true;
  for (int m = 0; m < count; ++m) {
    const double val = y[off + m];
    const bool exact = is_exact_integer(val) && (kind != VarKind::binary || val == 0.0 || val == 1.0);
    if (!exact) {
      c.v.push_back({idx(cname, m), std::abs(val - std::nearbyint(val))});
      ok = false;
    }
  }
  return ok;
}

}  // namespace

std::pair<bool, std::vector<Violation>> check_feasible(const ProblemSpec& spec,
                                                       const ProblemInstance& inst,
                                                       const Eigen::VectorXd& y) {
  require_instance(spec, inst);
  require_y(spec, y);
  const int M = spec.M;
  Checker c;
  switch (spec.id) {
    case ProblemId::P1:
    case ProblemId::P5: {
      auto v = views::P1::of(inst);
      c.leq(y.sum(), v.P_total, "total_power");
      for (int m = 0; m < M; ++m) c.geq(v.rate(m, y[m]), v.R_min, idx("min_rate", m));
      for (int m = 0; m < M; ++m) c.geq(y[m], 0.0, idx("nonneg", m));
      break;
    }
    case ProblemId::P2:
    case ProblemId::P4: {
      auto v = views::P2::of(inst);
      const bool ints = check_integrality(c, y, 0, M, VarKind::integer, "integrality");
      if (ints)
        c.exact_leq(static_cast<long long>(std::llround(y.sum())), v.B_total, "total_blocks");
      else
        c.leq(y.sum(), static_cast<double>(v.B_total), "total_blocks");
      for (int m = 0; m < M; ++m) c.geq(v.rate(m, y[m]), v.R_min, idx("min_rate", m));
      for (int m = 0; m < M; ++m) c.geq(y[m], 0.0, idx("nonneg", m));
      break;
    }
    case ProblemId::P3: {
      auto v = views::P3::of(inst);
      const bool ints = check_integrality(c, y, 0, M, VarKind::integer, "integrality");
      if (ints)
        c.exact_leq(static_cast<long long>(std::llround(y.sum())), v.B_total, "total_blocks");
      else
        c.leq(y.sum(), static_cast<double>(v.B_total), "total_blocks");
      for (int m = 0; m < M; ++m)
        c.geq(v.rate(m, y[m]) / v.alpha[m], v.theta, idx("fairness", m));
      for (int m = 0; m < M; ++m) c.geq(y[m], 0.0, idx("nonneg", m));
      break;
    }
    case ProblemId::P6: {
      c.leq(y.sum(), kP6LoadCap, "refresh_budget");
      for (int m = 0; m < M; ++m) c.geq(y[m], 0.0, idx("nonneg", m));
      break;
    }
    case ProblemId::P7: {
      auto v = views::P7::of(inst);
      const bool ints = check_integrality(c, y, 0, M, VarKind::integer, "integrality");
      if (ints)
        c.exact_leq(static_cast<long long>(std::llround(y.head(M).sum())), v.B_total,
                    "total_blocks");
      else
        c.leq(y.head(M).sum(), static_cast<double>(v.B_total), "total_blocks");
      c.leq(y.tail(M).sum(), v.P_total, "total_power");
      for (int m = 0; m < M; ++m)
        c.geq(v.rate(m, y[m], y[M + m]), v.R_min, idx("min_rate", m));
      for (int m = 0; m < M; ++m) c.geq(y[m], 0.0, idx("nonneg_blocks", m));
      for (int m = 0; m < M; ++m) c.geq(y[M + m], 0.0, idx("nonneg_power", m));
      break;
    }
    case ProblemId::P8: {
      auto v = views::P8::of(inst);
      check_integrality(c, y, 0, M, VarKind::binary, "binary");
      double load = 0.0;
      for (int m = 0; m < M; ++m) load += v.s[m] * y[m];
      c.leq(load, v.C, "cache_capacity");
      break;
    }
    case ProblemId::P9: {
      check_integrality(c, y, 0, M, VarKind::binary, "binary");
      double load = 0.0;
      for (int m = 0; m < M; ++m) load += y[m] * y[M + m];
      c.leq(load, 1.0, "alloc_budget");
      for (int m = 0; m < M; ++m) {
        c.geq(y[M + m], 0.0, idx("alloc_range_lo", m));
        c.leq(y[M + m], 1.0, idx("alloc_range_hi", m));
      }
      break;
    }
    case ProblemId::P10: {
      auto v = views::P10::of(inst);
      c.leq(y.sum(), v.P_total, "total_power");
      for (int m = 0; m < M; ++m) c.geq(y[m], 0.0, idx("nonneg", m));
      break;
    }
  }
  return {c.v.empty(), std::move(c.v)};
}

namespace {

// Derived minimum-rate / fairness parameters are set to kDerivedFrac of the
// equal-split level so that the constructive probe is feasible with headroom.
double derive_p1_rmin(const ProblemInstance& inst) {
  auto v = views::P1::of(inst);
  double worst = std::numeric_limits<double>::infinity();
  for (int m = 0; m < v.M; ++m) worst = std::min(worst, v.rate(m, v.P_total / v.M));
  return kDerivedFrac * worst;
}

double derive_block_rmin(const ProblemInstance& inst, bool p3) {
  double worst = std::numeric_limits<double>::infinity();
  if (p3) {
    auto v = views::P3::of(inst);
    const double blocks = static_cast<double>(v.B_total / v.M);
    for (int m = 0; m < v.M; ++m) worst = std::min(worst, v.rate(m, blocks) / v.alpha[m]);
  } else {
    auto v = views::P2::of(inst);
    const double blocks = static_cast<double>(v.B_total / v.M);
    for (int m = 0; m < v.M; ++m) worst = std::min(worst, v.rate(m, blocks));
  }
  return kDerivedFrac * worst;
}

double derive_p7_rmin(const ProblemInstance& inst) {
  auto v = views::P7::of(inst);
  const double blocks = static_cast<double>(v.B_total / v.M);
  double worst = std::numeric_limits<double>::infinity();
  for (int m = 0; m < v.M; ++m)
    worst = std::min(worst, v.rate(m, blocks, v.P_total / v.M));
  return kDerivedFrac * worst;
}

}  // namespace

ProblemInstance sample_instance(const ProblemSpec& spec, std::uint64_t seed) {
  for (int attempt = 0; attempt < 1000; ++attempt) {
    Rng rng(derive_seed(seed, "inst", static_cast<int>(spec.id), spec.M, attempt));
    ProblemInstance inst;
    inst.id = spec.id;
    inst.M = spec.M;
    inst.seed = seed;
    inst.x.resize(spec.x_len());
    int off = 0;
    for (const auto& f : spec.params) {
      for (int ci = 0; ci < f.count; ++ci) {
        double val;
        if (f.derived) {
          val = 0.0;  // placeholder, filled below once all plain params exist
        } else if (f.kind == VarKind::integer) {
          val = static_cast<double>(rng.uniform_int(std::llround(f.lo), std::llround(f.hi)));
        } else if (f.lo == f.hi) {
          val = f.lo;
        } else {
          val = rng.uniform(f.lo, f.hi);
          if (spec.id == ProblemId::P8 && f.name == "s")
            val = std::round(val * 100.0) / 100.0;  // sizes quantized for the solver
        }
        inst.x[off++] = val;
      }
    }
    switch (spec.id) {
      case ProblemId::P1:
      case ProblemId::P5:
        inst.x[spec.x_len() - 1] = derive_p1_rmin(inst);
        break;
      case ProblemId::P2:
      case ProblemId::P4:
        inst.x[spec.x_len() - 1] = derive_block_rmin(inst, false);
        break;
      case ProblemId::P3:
        inst.x[spec.x_len() - 1] = derive_block_rmin(inst, true);
        break;
      case ProblemId::P7:
        inst.x[spec.x_len() - 1] = derive_p7_rmin(inst);
        break;
      default:
        break;
    }
    const Eigen::VectorXd probe = feasible_point(spec, inst);
    if (check_feasible(spec, inst, probe).first) return inst;
  }
  fail(ErrorKind::infeasible,
       std::string(name(spec.id)) + ": could not sample a feasible instance in 1000 attempts");
}

Eigen::VectorXd feasible_point(const ProblemSpec& spec, const ProblemInstance& inst) {
  require_instance(spec, inst);
  const int M = spec.M;
  Eigen::VectorXd y = Eigen::VectorXd::Zero(spec.y_len());
  switch (spec.id) {
    case ProblemId::P1:
    case ProblemId::P5:
    case ProblemId::P10: {
      const double P_total = inst.x[spec.id == ProblemId::P10 ? 3 * M + 1 : 2 * M + 1];
      y.setConstant(P_total / M);
      break;
    }
    case ProblemId::P2:
    case ProblemId::P3:
    case ProblemId::P4: {
      auto B_total = (spec.id == ProblemId::P3) ? views::P3::of(inst).B_total
                                                : views::P2::of(inst).B_total;
      y.setConstant(static_cast<double>(B_total / M));
      break;
    }
    case ProblemId::P6:
    case ProblemId::P8:
      break;  // all-zeros
    case ProblemId::P7: {
      auto v = views::P7::of(inst);
      y.head(M).setConstant(static_cast<double>(v.B_total / M));
      y.tail(M).setConstant(v.P_total / M);
      break;
    }
    case ProblemId::P9:
      break;  // nothing offloaded, no allocation
  }
  return y;
}

Eigen::VectorXd sample_uniform_solution(const ProblemSpec& spec, Rng& rng) {
  Eigen::VectorXd y(spec.y_len());
  int off = 0;
  for (const auto& f : spec.vars) {
    for (int ci = 0; ci < f.count; ++ci) {
      switch (f.kind) {
        case VarKind::continuous:
          y[off] = rng.uniform(f.lo, f.hi);
          break;
        case VarKind::integer:
          y[off] = static_cast<double>(rng.uniform_int(std::llround(f.lo), std::llround(f.hi)));
          break;
        case VarKind::binary:
          y[off] = static_cast<double>(rng.uniform_int(0, 1));
          break;
      }
      ++off;
    }
  }
  return y;
}

std::string schema_document(ProblemId id, int M) {
  const ProblemSpec spec = make_spec(id, M);
  std::ostringstream os;
  os << name(id) << " (M = " << M << "): " << summary(id) << "\n";
  os << "sense: " << (spec.sense == Sense::maximize ? "maximize" : "minimize") << "\n";
  os << "parameters (x, length " << spec.x_len() << "):\n";
  auto kind_str = [](VarKind k) {
    return k == VarKind::continuous ? "continuous" : (k == VarKind::integer ? "integer" : "binary");
  };
  for (const auto& f : spec.params) {
    os << "  " << f.name << (f.count > 1 ? "[" + std::to_string(f.count) + "]" : "")
       << "  type=" << name(f.type) << "  range=[" << f.lo << ", " << f.hi << "]";
    if (!f.unit.empty()) os << " " << f.unit;
    if (f.kind == VarKind::integer) os << "  integer";
    if (f.derived) os << "  (derived at sampling time)";
    os << "\n";
  }
  os << "variables (y, length " << spec.y_len() << "):\n";
  for (const auto& f : spec.vars) {
    os << "  " << f.name << (f.count > 1 ? "[" + std::to_string(f.count) + "]" : "")
       << "  type=" << name(f.type) << "  " << kind_str(f.kind) << "  bounds=[" << f.lo
       << ", " << f.hi << "]";
    if (!f.unit.empty()) os << " " << f.unit;
    os << "\n";
  }
  os << "formulation:\n" << emit_latex(id, LatexVariant::canonical) << "\n";
  return os.str();
}

}  // namespace pad
