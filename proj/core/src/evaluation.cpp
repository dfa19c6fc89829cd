#include "pad/evaluation.hpp"

#include <mutex>
#include <sstream>

namespace pad {

double gt_gap(double f_gen, double f_opt) {
  if (f_opt == 0.0) fail(ErrorKind::domain, "GT_GAP undefined for a zero oracle objective");
  if (!std::isfinite(f_gen) || !std::isfinite(f_opt))
    fail(ErrorKind::domain, "GT_GAP undefined for non-finite objectives");
  return std::abs(f_gen / f_opt - 1.0);
}

const Solution& select_best(const std::vector<Solution>& candidates, Sense sense) {
  if (candidates.empty()) fail(ErrorKind::state, "candidate selection needs at least one solution");
  // (feasible, evaluable, objective-in-sense) lexicographic preference
  auto better = [&](const Solution& a, const Solution& b) {
    if (a.feasible != b.feasible) return a.feasible;
    const bool ea = std::isfinite(a.objective), eb = std::isfinite(b.objective);
    if (ea != eb) return ea;
    if (!ea) return false;
    return sense == Sense::maximize ? a.objective > b.objective : a.objective < b.objective;
  };
  const Solution* best = &candidates.front();
  for (const auto& c : candidates)
    if (better(c, *best)) best = &c;
  return *best;
}

ProblemReport evaluate_candidates(const Dataset& test, const CandidateFn& gen, int p_num,
                                  std::uint64_t seed, int workers) {
  if (p_num < 1) fail(ErrorKind::config, "evaluation needs p_num >= 1");
  if (test.n() < 1) fail(ErrorKind::data, "empty test set");
  const ProblemSpec spec = make_spec(test.id, test.M);
  const int n = static_cast<int>(test.n());
  ProblemReport rep;
  rep.id = test.id;
  rep.M = test.M;
  rep.instances.resize(n);

  std::mutex err_mu;
  std::exception_ptr first_error;
  auto run_rows = [&](int begin, int step) {
    try {
      for (int i = begin; i < n; i += step) {
        ProblemInstance inst{test.id, test.M, test.X.row(i).transpose(), 0};
        const std::uint64_t s = derive_seed(seed, "eval", static_cast<int>(test.id), test.M, i);
        const std::vector<Solution> cands = gen(inst, p_num, s);
        if (static_cast<int>(cands.size()) != p_num)
          fail(ErrorKind::state, "candidate generator returned the wrong count");
        InstanceRecord rec;
        rec.index = i;
        rec.p_num = p_num;
        rec.f_opt = test.f[static_cast<std::size_t>(i)];
        for (const auto& c : cands) rec.n_feasible += c.feasible ? 1 : 0;
        const Solution& best = select_best(cands, spec.sense);
        rec.f_best = best.objective;
        rec.best_feasible = best.feasible;
        try {
          rec.gap = gt_gap(best.objective, rec.f_opt);
        } catch (const Error&) {
          rec.gap_excluded = true;
        }
        rep.instances[static_cast<std::size_t>(i)] = rec;
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(err_mu);
      if (!first_error) first_error = std::current_exception();
    }
  };
  const int n_workers = std::max(1, std::min(workers, n));
  if (n_workers == 1) {
    run_rows(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(run_rows, w, n_workers);
    for (auto& th : pool) th.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  double gap_sum = 0.0;
  long long feas_cands = 0, if_hits = 0;
  for (const auto& rec : rep.instances) {
    if (rec.gap_excluded) {
      ++rep.gap_excluded;
    } else {
      gap_sum += rec.gap;
      ++rep.gap_count;
    }
    feas_cands += rec.n_feasible;
    if_hits += rec.n_feasible > 0 ? 1 : 0;
  }
  rep.gt_gap_mean = rep.gap_count ? gap_sum / rep.gap_count : 0.0;
  rep.cons_acc = static_cast<double>(feas_cands) / (static_cast<long long>(n) * p_num);
  rep.cons_if = static_cast<double>(if_hits) / n;
  return rep;
}

std::vector<Solution> baseline_candidates(const ProblemSpec& spec, const ProblemInstance& inst,
                                          int p_num, std::uint64_t seed) {
  std::vector<Solution> out;
  for (int k = 0; k < p_num; ++k) {
    Rng rng(derive_seed(seed, "baseline", k));
    Eigen::VectorXd y;
    bool ok = false;
    for (int attempt = 0; attempt < 10000 && !ok; ++attempt) {
      y = sample_uniform_solution(spec, rng);
      ok = check_feasible(spec, inst, y).first;
    }
    if (!ok) y = feasible_point(spec, inst);
    Solution s;
    s.y = std::move(y);
    s.type_labels = spec.var_labels();
    s.feasible = check_feasible(spec, inst, s.y).first;
    try {
      s.objective = objective(spec, inst, s.y);
    } catch (const Error&) {
      s.objective = std::numeric_limits<double>::quiet_NaN();
    }
    out.push_back(std::move(s));
  }
  return out;
}

ProblemReport evaluate_baseline(const Dataset& test, int p_num, std::uint64_t seed, int workers) {
  const ProblemSpec spec = make_spec(test.id, test.M);
  CandidateFn gen = [&spec](const ProblemInstance& inst, int pn, std::uint64_t s) {
    return baseline_candidates(spec, inst, pn, s);
  };
  return evaluate_candidates(test, gen, p_num, seed, workers);
}

EvalReport combine_reports(std::vector<ProblemReport> problems, std::string config_echo) {
  if (problems.empty()) fail(ErrorKind::state, "no problem reports to combine");
  EvalReport rep;
  rep.problems = std::move(problems);
  rep.config_echo = std::move(config_echo);
  double gap = 0.0, acc = 0.0, ifr = 0.0;
  for (const auto& p : rep.problems) {
    gap += p.gt_gap_mean;
    acc += p.cons_acc;
    ifr += p.cons_if;
  }
  const double n = static_cast<double>(rep.problems.size());
  rep.glob_gt_gap = gap / n;
  rep.glob_cons_acc = acc / n;
  rep.glob_cons_if = ifr / n;
  return rep;
}

namespace {

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

}  // namespace

void write_report(const std::filesystem::path& dir, const EvalReport& report) {
  std::filesystem::create_directories(dir);
  std::ostringstream txt;
  txt << "solution quality report\n=======================\n\n";
  for (const auto& p : report.problems) {
    txt << name(p.id) << " (M=" << p.M << ", " << p.instances.size() << " instances)\n"
        << "  GT_GAP   " << fmt(p.gt_gap_mean) << " over " << p.gap_count << " instances";
    if (p.gap_excluded) txt << " (" << p.gap_excluded << " excluded: undefined ratio)";
    txt << "\n  CONS_ACC " << fmt(p.cons_acc) << "\n  CONS_IF  " << fmt(p.cons_if) << "\n\n";
  }
  txt << "GLOB_GT_GAP " << fmt(report.glob_gt_gap) << "\nGLOB_CONS_ACC " << fmt(report.glob_cons_acc)
      << "\nGLOB_CONS_IF " << fmt(report.glob_cons_if) << "\n";
  if (!report.config_echo.empty()) txt << "\nconfiguration\n-------------\n" << report.config_echo;
  write_text_atomic(dir / "report.txt", txt.str());

  std::ostringstream csv;
  csv << "problem,M,instance,f_opt,f_best,best_feasible,n_feasible,p_num,gap,gap_excluded\n";
  for (const auto& p : report.problems)
    for (const auto& r : p.instances)
      csv << name(p.id) << ',' << p.M << ',' << r.index << ',' << fmt(r.f_opt) << ','
          << fmt(r.f_best) << ',' << (r.best_feasible ? 1 : 0) << ',' << r.n_feasible << ','
          << r.p_num << ',' << (r.gap_excluded ? "" : fmt(r.gap)) << ','
          << (r.gap_excluded ? 1 : 0) << '\n';
  write_text_atomic(dir / "report.csv", csv.str());
}

}  // namespace pad
