#include <cmath>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "pad/evaluation.hpp"
#include "support.hpp"

using namespace pad;
using padtest::file_bytes;

namespace {

Solution sol(double obj, bool feas) {
  Solution s;
  s.y = Eigen::VectorXd::Zero(1);
  s.feasible = feas;
  s.objective = obj;
  return s;
}

CodecConfig ev_codec_config() {
  CodecConfig c;
  c.encode_dims = {4, 16};
  c.hidden_dim = 16;
  c.decode_dims = {16, 8};
  c.epochs = 0;
  c.seed = 3;
  return c;
}

ConsNetConfig ev_cons_config() {
  ConsNetConfig c;
  c.embed_dim = 16;
  c.hidden_dim = 16;
  c.layers = 1;
  c.heads = 2;
  c.ffn_mult = 2;
  c.dropout = 0.0;
  c.epochs = 0;
  c.batch = 16;
  c.samples_per_problem = 16;
  c.seed = 17;
  return c;
}

DiffusionConfig ev_diff_config() {
  DiffusionConfig c;
  c.T = 8;
  c.infer_steps = 4;
  c.embed_dim = 16;
  c.hidden_dim = 16;
  c.enc_layers = 1;
  c.dec_layers = 1;
  c.heads = 2;
  c.ffn_mult = 2;
  c.dropout = 0.0;
  c.epochs = 0;
  c.batch = 4;
  c.p_num = 2;
  c.seed = 9;
  return c;
}

std::vector<EmbeddingSet> tiny_embeds(const std::vector<Dataset>& data, int d) {
  SyntheticEmbedder emb(d, 5);
  std::vector<EmbeddingSet> sets;
  for (const auto& ds : data) {
    EmbeddingSet s;
    s.id = ds.id;
    for (int k = 0; k < 2; ++k)
      s.eq.push_back(rank_pool(emb.embed(emit_latex(ds.id, LatexVariant::equivalent, k)), 4));
    sets.push_back(std::move(s));
  }
  return sets;
}

// Hand test set whose first two parameter entries drive the synthetic
// candidate generator: X(i,0) = feasible candidate count, X(i,1) = objective
// of the best candidate.
Dataset control_set() {
  const ProblemSpec spec = make_spec(ProblemId::P1, 2);
  Dataset ds;
  ds.id = ProblemId::P1;
  ds.M = 2;
  ds.X = Eigen::MatrixXd::Zero(4, spec.x_len());
  ds.X(0, 0) = 0;
  ds.X(1, 0) = 1;
  ds.X(2, 0) = 3;
  ds.X(3, 0) = 2;
  ds.X(0, 1) = 1.9;
  ds.X(1, 1) = 4.4;
  ds.X(2, 1) = 0.5;
  ds.X(3, 1) = 8.8;
  ds.Y = Eigen::MatrixXd::Zero(4, spec.y_len());
  ds.f.resize(4);
  ds.f << 2.0, 4.0, 0.0, 8.0;
  return ds;
}

// Candidate k is feasible iff k < X(i,0); objectives descend from X(i,1).
std::vector<Solution> control_candidates(const ProblemInstance& inst, int pn) {
  std::vector<Solution> out;
  for (int k = 0; k < pn; ++k)
    out.push_back(sol(inst.x[1] - k, k < static_cast<int>(inst.x[0])));
  return out;
}

}  // namespace

TEST_CASE("the optimality gap is a plain ratio with hard domain edges") {
  CHECK(gt_gap(95.0, 100.0) == doctest::Approx(0.05));
  CHECK(gt_gap(100.0, 100.0) == 0.0);
  CHECK(gt_gap(110.0, 100.0) == doctest::Approx(0.1));
  CHECK(gt_gap(-90.0, -100.0) == doctest::Approx(0.1));
  CHECK(gt_gap(2.0, 4.0) == doctest::Approx(0.5));
  CHECK_THROWS_AS(gt_gap(1.0, 0.0), Error);
  CHECK_THROWS_AS(gt_gap(std::numeric_limits<double>::quiet_NaN(), 1.0), Error);
  CHECK_THROWS_AS(gt_gap(1.0, std::numeric_limits<double>::infinity()), Error);
}

TEST_CASE("best-candidate selection prefers feasible, then evaluable, then the sense") {
  const std::vector<Solution> mixed = {sol(5.0, false), sol(3.0, true), sol(4.0, true)};
  CHECK(select_best(mixed, Sense::maximize).objective == 4.0);
  CHECK(select_best(mixed, Sense::maximize).feasible);
  CHECK(select_best(mixed, Sense::minimize).objective == 3.0);

  const std::vector<Solution> dominated = {sol(100.0, false), sol(1.0, true)};
  CHECK(select_best(dominated, Sense::maximize).objective == 1.0);

  const std::vector<Solution> infeasible = {sol(2.0, false), sol(7.0, false)};
  CHECK(select_best(infeasible, Sense::maximize).objective == 7.0);
  CHECK(!select_best(infeasible, Sense::maximize).feasible);

  const double nan = std::numeric_limits<double>::quiet_NaN();
  const std::vector<Solution> with_nan = {sol(nan, true), sol(1.0, true)};
  CHECK(select_best(with_nan, Sense::maximize).objective == 1.0);
  const std::vector<Solution> nan_feasible = {sol(nan, true), sol(5.0, false)};
  CHECK(select_best(nan_feasible, Sense::maximize).feasible);
  const std::vector<Solution> all_nan = {sol(nan, false), sol(nan, false)};
  CHECK(&select_best(all_nan, Sense::maximize) == &all_nan.front());

  CHECK_THROWS_AS(select_best({}, Sense::maximize), Error);
}

TEST_CASE("candidate evaluation aggregates gaps, exclusions, and feasibility shares") {
  const Dataset test = control_set();
  CandidateFn gen = [](const ProblemInstance& inst, int pn, std::uint64_t) {
    return control_candidates(inst, pn);
  };
  const ProblemReport rep = evaluate_candidates(test, gen, 3, 5);
  REQUIRE(rep.instances.size() == 4);
  CHECK(rep.gap_count == 3);
  CHECK(rep.gap_excluded == 1);
  CHECK(rep.gt_gap_mean == doctest::Approx((0.05 + 0.1 + 0.1) / 3.0));
  CHECK(rep.cons_acc == doctest::Approx(6.0 / 12.0));
  CHECK(rep.cons_if == doctest::Approx(3.0 / 4.0));
  CHECK(rep.cons_if >= rep.cons_acc);

  const InstanceRecord& none = rep.instances[0];
  CHECK(none.n_feasible == 0);
  CHECK(!none.best_feasible);
  CHECK(none.f_best == 1.9);
  CHECK(none.gap == doctest::Approx(0.05));
  const InstanceRecord& zero_opt = rep.instances[2];
  CHECK(zero_opt.gap_excluded);
  CHECK(zero_opt.n_feasible == 3);

  // row splitting across workers merges back into the identical report
  const ProblemReport par = evaluate_candidates(test, gen, 3, 5, 4);
  CHECK(par.gt_gap_mean == rep.gt_gap_mean);
  CHECK(par.cons_acc == rep.cons_acc);
  CHECK(par.cons_if == rep.cons_if);
  for (std::size_t i = 0; i < rep.instances.size(); ++i) {
    CHECK(par.instances[i].index == rep.instances[i].index);
    CHECK(par.instances[i].n_feasible == rep.instances[i].n_feasible);
    CHECK((par.instances[i].gap == rep.instances[i].gap ||
           (std::isnan(par.instances[i].gap) && std::isnan(rep.instances[i].gap))));
  }

  CandidateFn short_gen = [](const ProblemInstance&, int pn, std::uint64_t) {
    return std::vector<Solution>(static_cast<std::size_t>(pn - 1), sol(1.0, true));
  };
  CHECK_THROWS_AS(evaluate_candidates(test, short_gen, 2, 5), Error);
  CHECK_THROWS_AS(evaluate_candidates(test, gen, 0, 5), Error);
}

TEST_CASE("an oracle candidate closes the gap exactly") {
  const Dataset test = generate_dataset(ProblemId::P1, 2, 6, 601);
  CandidateFn oracle_gen = [&test](const ProblemInstance& inst, int pn, std::uint64_t) {
    int row = -1;
    for (int i = 0; i < test.n(); ++i)
      if ((test.X.row(i).transpose().array() == inst.x.array()).all()) {
        row = i;
        break;
      }
    if (row < 0) throw std::runtime_error("instance not found in its own test set");
    Solution s;
    s.y = test.Y.row(row).transpose();
    s.feasible = true;
    s.objective = test.f[row];
    return std::vector<Solution>(static_cast<std::size_t>(pn), s);
  };
  const ProblemReport rep = evaluate_candidates(test, oracle_gen, 2, 5);
  CHECK(rep.gt_gap_mean == 0.0);
  CHECK(rep.gap_count == 6);
  CHECK(rep.cons_acc == 1.0);
  CHECK(rep.cons_if == 1.0);
}

TEST_CASE("the uniform baseline only emits feasible candidates") {
  const ProblemSpec spec = make_spec(ProblemId::P1, 2);
  const ProblemInstance inst = sample_instance(spec, 88);
  const auto cands = baseline_candidates(spec, inst, 5, 3);
  REQUIRE(cands.size() == 5);
  for (const auto& c : cands) {
    CHECK(c.feasible);
    CHECK(c.objective == objective(spec, inst, c.y));
  }
  const auto again = baseline_candidates(spec, inst, 5, 3);
  for (int k = 0; k < 5; ++k)
    CHECK((cands[static_cast<std::size_t>(k)].y.array() ==
           again[static_cast<std::size_t>(k)].y.array())
              .all());

  const Dataset test = generate_dataset(ProblemId::P8, 2, 6, 602);
  const ProblemReport rep = evaluate_baseline(test, 3, 5);
  CHECK(rep.cons_acc == 1.0);
  CHECK(rep.cons_if == 1.0);
  CHECK(rep.gt_gap_mean >= 0.0);
}

TEST_CASE("growing the candidate budget never hurts instance feasibility") {
  const std::vector<Dataset> data = {generate_dataset(ProblemId::P1, 2, 6, 603)};
  const Codec codec = train_codec<float>(data, ev_codec_config());
  const auto embeds = tiny_embeds(data, 16);
  const ConsNet cons = train_constraint<float>(data, embeds, codec, ev_cons_config());
  const Backbone net = train_pad<float>(data, embeds, codec, cons, ev_diff_config());

  const ProblemReport r2 = evaluate_problem(net, codec, data[0], embeds[0].eq[0], 2, 5);
  const ProblemReport r4 = evaluate_problem(net, codec, data[0], embeds[0].eq[0], 4, 5);
  CHECK(r4.cons_if >= r2.cons_if);
  for (std::size_t i = 0; i < r2.instances.size(); ++i)
    CHECK(r4.instances[i].n_feasible >= r2.instances[i].n_feasible);
  CHECK(r2.cons_if >= r2.cons_acc);
  CHECK(r4.cons_if >= r4.cons_acc);

  // the first two candidates of the bigger batch are the smaller batch
  const ProblemSpec spec = make_spec(ProblemId::P1, 2);
  const ProblemInstance inst = sample_instance(spec, 89);
  const auto two = generate_solutions<float>(net, codec, spec, inst, embeds[0].eq[0], 2, 42);
  const auto four = generate_solutions<float>(net, codec, spec, inst, embeds[0].eq[0], 4, 42);
  for (int k = 0; k < 2; ++k)
    CHECK((two[static_cast<std::size_t>(k)].y.array() ==
           four[static_cast<std::size_t>(k)].y.array())
              .all());
}

TEST_CASE("report combination averages per-problem means and keeps the echo") {
  ProblemReport p1;
  p1.id = ProblemId::P1;
  p1.gt_gap_mean = 0.1;
  p1.cons_acc = 0.5;
  p1.cons_if = 0.75;
  ProblemReport p2;
  p2.id = ProblemId::P8;
  p2.gt_gap_mean = 0.3;
  p2.cons_acc = 1.0;
  p2.cons_if = 1.0;
  const EvalReport rep = combine_reports({p1, p2}, "k = v\n");
  CHECK(rep.glob_gt_gap == (0.1 + 0.3) / 2.0);
  CHECK(rep.glob_cons_acc == (0.5 + 1.0) / 2.0);
  CHECK(rep.glob_cons_if == (0.75 + 1.0) / 2.0);
  CHECK(rep.config_echo == "k = v\n");
  CHECK_THROWS_AS(combine_reports({}, ""), Error);
}

TEST_CASE("report files are byte-stable with fixed columns") {
  const Dataset test = control_set();
  CandidateFn gen = [](const ProblemInstance& inst, int pn, std::uint64_t) {
    return control_candidates(inst, pn);
  };
  const EvalReport rep = combine_reports({evaluate_candidates(test, gen, 3, 5)}, "key = 1\n");

  const auto dir = std::filesystem::temp_directory_path() / "pad_eval_report_test";
  std::filesystem::remove_all(dir);
  write_report(dir, rep);
  const auto txt = file_bytes(dir / "report.txt");
  const auto csv = file_bytes(dir / "report.csv");
  write_report(dir, rep);
  CHECK(txt == file_bytes(dir / "report.txt"));
  CHECK(csv == file_bytes(dir / "report.csv"));

  const std::string text(txt.begin(), txt.end());
  CHECK(text.find("GLOB_GT_GAP") != std::string::npos);
  CHECK(text.find("CONS_ACC") != std::string::npos);
  CHECK(text.find("excluded") != std::string::npos);
  CHECK(text.find("configuration") != std::string::npos);

  std::istringstream lines(std::string(csv.begin(), csv.end()));
  std::string line;
  std::getline(lines, line);
  CHECK(line == "problem,M,instance,f_opt,f_best,best_feasible,n_feasible,p_num,gap,gap_excluded");
  int rows = 0;
  std::string excluded_row;
  while (std::getline(lines, line)) {
    if (rows == 2) excluded_row = line;
    ++rows;
  }
  CHECK(rows == 4);
  // the zero-optimum instance leaves the gap cell empty and sets the flag
  CHECK(excluded_row.substr(excluded_row.size() - 3) == ",,1");
  std::filesystem::remove_all(dir);
}

TEST_CASE("full-model evaluation walks every test set and averages globally") {
  const std::vector<Dataset> data = {generate_dataset(ProblemId::P1, 2, 5, 604),
                                     generate_dataset(ProblemId::P8, 2, 5, 605)};
  const Codec codec = train_codec<float>(data, ev_codec_config());
  const auto embeds = tiny_embeds(data, 16);
  const ConsNet cons = train_constraint<float>(data, embeds, codec, ev_cons_config());
  const Backbone net = train_pad<float>(data, embeds, codec, cons, ev_diff_config());

  const EvalReport rep = evaluate_model(net, codec, data, embeds, 2, 5, 1, "echo = yes\n");
  REQUIRE(rep.problems.size() == 2);
  CHECK(rep.problems[0].id == ProblemId::P1);
  CHECK(rep.problems[1].id == ProblemId::P8);
  CHECK(rep.glob_gt_gap ==
        (rep.problems[0].gt_gap_mean + rep.problems[1].gt_gap_mean) / 2.0);
  CHECK(rep.config_echo == "echo = yes\n");
  for (const auto& p : rep.problems) CHECK(p.cons_if >= p.cons_acc);

  const EvalReport par = evaluate_model(net, codec, data, embeds, 2, 5, 3);
  CHECK(par.glob_gt_gap == rep.glob_gt_gap);
  CHECK(par.glob_cons_acc == rep.glob_cons_acc);

  const std::vector<Dataset> missing = {generate_dataset(ProblemId::P2, 2, 3, 606)};
  CHECK_THROWS_AS(evaluate_model(net, codec, missing, embeds, 2, 5), Error);
  CHECK_THROWS_AS(evaluate_model(net, codec, {}, embeds, 2, 5), Error);
}
