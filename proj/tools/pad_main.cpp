// `pad` CLI: data generation, embedding pooling, the three training stages,
// inference, evaluation, plotting, and the end-to-end pipeline.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "pad/evaluation.hpp"
#include "pad/oracle.hpp"

namespace {

using namespace pad;

const char* kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::schema: return "schema";
    case ErrorKind::domain: return "domain";
    case ErrorKind::state: return "state";
    case ErrorKind::scale: return "scale";
    case ErrorKind::io: return "io";
    case ErrorKind::config: return "config";
    case ErrorKind::data: return "data";
    case ErrorKind::infeasible: return "infeasible";
  }
  return "unknown";
}

// Options shared by every data/model subcommand; resolution order is
// preset -> config file -> individual --set overrides.
struct ConfigArgs {
  std::string preset;
  std::string config_file;
  std::vector<std::string> sets;
  int workers = -1;

  void attach(CLI::App* cmd) {
    cmd->add_option("--preset", preset, "configuration preset (paper or desk)");
    cmd->add_option("--config", config_file, "key=value configuration file");
    cmd->add_option("--set", sets, "override a single key, e.g. --set seed=3")
        ->type_name("KEY=VALUE");
    cmd->add_option("--workers", workers, "worker threads for data-parallel stages");
  }

  RunConfig resolve() const {
    RunConfig rc = preset.empty() ? RunConfig::defaults() : RunConfig::preset(preset);
    if (!config_file.empty()) rc.apply_file(config_file);
    for (const auto& kv : sets) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos)
        fail(ErrorKind::config, "--set expects KEY=VALUE, got '" + kv + "'");
      rc.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (workers >= 0) rc.set("workers", std::to_string(workers));
    rc.validate();
    return rc;
  }
};

void log_config(const RunConfig& rc) {
  std::cout << "resolved configuration:\n" << rc.dump() << "\n";
}

std::vector<ProblemId> selected_problems(const RunConfig& rc) {
  std::vector<ProblemId> out;
  for (const auto& p : rc.get_text_list("problems")) out.push_back(problem_from_name(p));
  return out;
}

std::filesystem::path out_dir(const RunConfig& rc) { return rc.gets("out_dir"); }
std::filesystem::path data_dir(const RunConfig& rc) { return out_dir(rc) / "data"; }

std::filesystem::path cache_dir(const RunConfig& rc) {
  if (const char* env = std::getenv("PAD_CACHE_DIR")) return env;
  return out_dir(rc) / "cache";
}

Dataset load_split(const RunConfig& rc, ProblemId id, int M, const std::string& split) {
  return read_dataset(data_dir(rc) / dataset_filename(id, M, split));
}

std::vector<Dataset> load_all(const RunConfig& rc, const std::string& split) {
  std::vector<Dataset> out;
  for (ProblemId id : selected_problems(rc))
    for (int M : rc.get_int_list("dims")) out.push_back(load_split(rc, id, M, split));
  return out;
}

std::vector<EmbeddingSet> load_embedding_sets(const RunConfig& rc) {
  std::unique_ptr<Embedder> embedder;
  if (rc.getb("synthetic_embeddings"))
    embedder = std::make_unique<SyntheticEmbedder>(static_cast<int>(rc.geti("embedding_dim")),
                                                   rc.seed("embed_seed"));
  else
    embedder = std::make_unique<FileEmbedder>(cache_dir(rc) / "raw");
  const PoolKind kind = pool_from_name(rc.gets("pool_type"));
  std::vector<EmbeddingSet> sets;
  for (ProblemId id : selected_problems(rc))
    sets.push_back(build_embedding_sets(id, *embedder, kind, static_cast<int>(rc.geti("pool_length")),
                                        static_cast<int>(rc.geti("eq_variant_num")),
                                        static_cast<int>(rc.geti("miss_variant_num")),
                                        cache_dir(rc)));
  return sets;
}

// ------------------------------------------------------------------ stages

void run_gen_data(const RunConfig& rc) {
  std::filesystem::create_directories(data_dir(rc));
  const int workers = static_cast<int>(rc.geti("workers"));
  for (ProblemId id : selected_problems(rc)) {
    for (int M : rc.get_int_list("dims")) {
      struct SplitPlan {
        const char* split;
        const char* seed_key;
        const char* count_key;
      };
      for (const SplitPlan& plan : {SplitPlan{"train", "data_seed_train", "train_samples"},
                                    SplitPlan{"test", "data_seed_test", "test_samples"}}) {
        const auto path = data_dir(rc) / dataset_filename(id, M, plan.split);
        const std::uint64_t seed =
            derive_seed(rc.seed(plan.seed_key), "dataset", static_cast<int>(id), M);
        const int n = static_cast<int>(rc.geti(plan.count_key));
        Dataset ds = generate_dataset(id, M, n, seed, workers);
        write_dataset(ds, path);
        std::cout << path.string() << ": " << ds.n() << " solved instances\n";
      }
    }
  }
}

void run_pool_embed(const RunConfig& rc) {
  const auto sets = load_embedding_sets(rc);
  for (const auto& set : sets)
    std::cout << name(set.id) << ": " << set.eq.size() << " equivalent + " << set.miss.size()
              << " constraint-missing pooled embeddings cached\n";
}

void run_train_encdec(const RunConfig& rc, const std::string& out_path) {
  const auto train = load_all(rc, "train");
  CodecTrainTrace trace;
  Codec codec = train_codec<float>(train, CodecConfig::from(rc), &trace);
  for (std::size_t e = 0; e < trace.total.size(); ++e)
    std::cout << "epoch " << e + 1 << ": value_mse " << trace.value_mse[e] << " type_ce "
              << trace.type_ce[e] << " total " << trace.total[e] << "\n";
  const auto ev = evaluate_codec(codec, load_all(rc, "test"));
  std::cout << "test: value_mse " << ev.value_mse << " type_accuracy " << ev.type_accuracy << "\n";
  codec.save(out_path);
  std::cout << "saved " << out_path << "\n";
}

void run_train_cons(const RunConfig& rc, const std::string& codec_path,
                    const std::string& out_path) {
  const Codec codec = Codec::load(codec_path);
  const auto train = load_all(rc, "train");
  const auto embeds = load_embedding_sets(rc);
  ConsTrainTrace trace;
  ConsNet net = train_constraint<float>(train, embeds, codec, ConsNetConfig::from(rc), &trace);
  for (std::size_t e = 0; e < trace.loss.size(); ++e)
    std::cout << "epoch " << e + 1 << ": loss " << trace.loss[e] << " acc " << trace.acc[e]
              << " tpr " << trace.tpr[e] << " tnr " << trace.tnr[e] << "\n";
  net.save(out_path);
  std::cout << "saved " << out_path << "\n";
}

void run_train_pad(const RunConfig& rc, const std::string& codec_path,
                   const std::string& cons_path, const std::string& out_path) {
  const Codec codec = Codec::load(codec_path);
  const ConsNet cons = ConsNet::load(cons_path, &codec);
  const auto train = load_all(rc, "train");
  const auto embeds = load_embedding_sets(rc);
  PadTrainTrace trace;
  Backbone net = train_pad<float>(train, embeds, codec, cons, DiffusionConfig::from(rc), &trace);
  for (std::size_t e = 0; e < trace.eps_loss.size(); ++e)
    std::cout << "epoch " << e + 1 << ": eps_loss " << trace.eps_loss[e] << " cons_loss "
              << trace.cons_loss[e] << "\n";
  net.save(out_path);
  std::cout << "saved " << out_path << "\n";
}

void run_infer(const RunConfig& rc, const std::string& model_path, const std::string& codec_path,
               const std::string& problem, int M, int p_num, std::uint64_t seed,
               std::uint64_t instance_seed, bool with_oracle) {
  const Codec codec = Codec::load(codec_path);
  const Backbone net = Backbone::load(model_path);
  const ProblemId id = problem_from_name(problem);
  const ProblemSpec spec = make_spec(id, M);
  RunConfig scoped = rc;
  scoped.set("problems", problem);
  const auto embeds = load_embedding_sets(scoped);
  const ProblemInstance inst = sample_instance(spec, instance_seed);
  const auto sols =
      generate_solutions(net, codec, spec, inst, embeds.front().eq.front(), p_num, seed,
                         static_cast<int>(rc.geti("workers")));
  std::cout << name(id) << " M=" << M << " instance seed " << instance_seed << "\n";
  for (std::size_t k = 0; k < sols.size(); ++k) {
    std::cout << "candidate " << k << ": feasible=" << (sols[k].feasible ? "yes" : "no")
              << " objective=" << sols[k].objective << " y=[";
    for (Eigen::Index j = 0; j < sols[k].y.size(); ++j)
      std::cout << (j ? ", " : "") << sols[k].y[j];
    std::cout << "]\n";
  }
  const Solution& best = select_best(sols, spec.sense);
  std::cout << "selected: objective=" << best.objective
            << " feasible=" << (best.feasible ? "yes" : "no") << "\n";
  if (with_oracle) {
    const OracleResult opt = solve(spec, inst);
    std::cout << "oracle: objective=" << opt.objective << " gap="
              << (opt.objective != 0.0 && std::isfinite(best.objective)
                      ? std::to_string(gt_gap(best.objective, opt.objective))
                      : "undefined")
              << "\n";
  }
}

void run_eval(const RunConfig& rc, const std::string& model_path, const std::string& codec_path,
              const std::string& report_dir, bool with_baseline) {
  const Codec codec = Codec::load(codec_path);
  const Backbone net = Backbone::load(model_path);
  const auto tests = load_all(rc, "test");
  const auto embeds = load_embedding_sets(rc);
  const int p_num = static_cast<int>(rc.geti("parallel_sampling_num"));
  const int workers = static_cast<int>(rc.geti("workers"));
  EvalReport report =
      evaluate_model(net, codec, tests, embeds, p_num, rc.seed("seed"), workers, rc.dump());
  write_report(report_dir, report);
  for (const auto& p : report.problems)
    std::cout << name(p.id) << " M=" << p.M << ": GT_GAP " << p.gt_gap_mean << " CONS_ACC "
              << p.cons_acc << " CONS_IF " << p.cons_if << "\n";
  std::cout << "GLOB_GT_GAP " << report.glob_gt_gap << "\nreport written to " << report_dir
            << "\n";
  if (with_baseline) {
    std::vector<ProblemReport> base;
    for (const auto& test : tests)
      base.push_back(evaluate_baseline(test, p_num, rc.seed("seed"), workers));
    EvalReport brep = combine_reports(std::move(base), "uniform-random-feasible baseline\n");
    write_report(std::filesystem::path(report_dir) / "baseline", brep);
    std::cout << "baseline GLOB_GT_GAP " << brep.glob_gt_gap << "\n";
  }
}

// Minimal grouped-bar SVG so reports can be eyeballed without extra tooling.
void run_plot(const std::string& csv_path, const std::string& out_path) {
  std::ifstream in(csv_path);
  if (!in) fail(ErrorKind::io, "cannot open " + csv_path);
  std::string line;
  std::getline(in, line);  // header
  struct Agg {
    double gap_sum = 0;
    long long gap_n = 0, feas = 0, cands = 0, hits = 0, rows = 0;
  };
  std::map<std::string, Agg> agg;
  while (std::getline(in, line)) {
    std::vector<std::string> cell;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) cell.push_back(item);
    if (cell.size() < 10) continue;
    Agg& a = agg[cell[0] + " M=" + cell[1]];
    a.rows += 1;
    const int n_feas = std::stoi(cell[6]);
    a.feas += n_feas;
    a.cands += std::stoi(cell[7]);
    a.hits += n_feas > 0 ? 1 : 0;
    if (cell[9] == "0" && !cell[8].empty()) {
      a.gap_sum += std::stod(cell[8]);
      a.gap_n += 1;
    }
  }
  if (agg.empty()) fail(ErrorKind::data, "no rows in " + csv_path);

  const int bar_w = 38, group_gap = 30, h = 300, base_y = 250, left = 60;
  const int group_w = 3 * bar_w + group_gap;
  const int w = left + static_cast<int>(agg.size()) * group_w + 20;
  std::ostringstream svg;
  svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << w << "' height='" << h << "'>\n"
      << "<style>text{font:12px sans-serif}</style>\n"
      << "<line x1='" << left - 10 << "' y1='" << base_y << "' x2='" << w - 10 << "' y2='"
      << base_y << "' stroke='black'/>\n";
  double max_gap = 1e-12;
  for (const auto& [k, a] : agg)
    if (a.gap_n) max_gap = std::max(max_gap, a.gap_sum / a.gap_n);
  int gx = left;
  for (const auto& [k, a] : agg) {
    const double gap = a.gap_n ? a.gap_sum / a.gap_n : 0.0;
    const double acc = a.cands ? static_cast<double>(a.feas) / a.cands : 0.0;
    const double ifr = a.rows ? static_cast<double>(a.hits) / a.rows : 0.0;
    const double vals[3] = {gap / max_gap, acc, ifr};
    const char* cols[3] = {"#4878a8", "#e49444", "#6a9f58"};
    for (int i = 0; i < 3; ++i) {
      const int bh = static_cast<int>(200 * std::clamp(vals[i], 0.0, 1.0));
      svg << "<rect x='" << gx + i * bar_w << "' y='" << base_y - bh << "' width='" << bar_w - 6
          << "' height='" << bh << "' fill='" << cols[i] << "'/>\n";
    }
    svg << "<text x='" << gx << "' y='" << base_y + 16 << "'>" << k << "</text>\n"
        << "<text x='" << gx << "' y='" << base_y + 32 << "'>gap " << std::setprecision(3) << gap
        << "</text>\n";
    gx += group_w;
  }
  svg << "<text x='" << left << "' y='20'>GT_GAP (scaled) / CONS_ACC / CONS_IF per problem"
      << "</text>\n</svg>\n";
  write_text_atomic(out_path, svg.str());
  std::cout << "wrote " << out_path << "\n";
}

void run_pipeline(const RunConfig& rc) {
  const auto dir = out_dir(rc);
  std::filesystem::create_directories(dir);
  run_gen_data(rc);
  run_pool_embed(rc);
  run_train_encdec(rc, (dir / "codec.ckpt").string());
  run_train_cons(rc, (dir / "codec.ckpt").string(), (dir / "consnet.ckpt").string());
  run_train_pad(rc, (dir / "codec.ckpt").string(), (dir / "consnet.ckpt").string(),
                (dir / "backbone.ckpt").string());
  run_eval(rc, (dir / "backbone.ckpt").string(), (dir / "codec.ckpt").string(),
           (dir / "report").string(), false);
  run_plot((dir / "report" / "report.csv").string(), (dir / "report" / "report.svg").string());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"problem-aware diffusion for network resource allocation"};
  app.require_subcommand(1);

  // problems
  auto* problems = app.add_subcommand("problems", "list problems or show a schema");
  auto* plist = problems->add_subcommand("list", "one line per problem");
  std::string show_name;
  int show_m = 3;
  auto* pshow = problems->add_subcommand("show", "print a problem's schema document");
  pshow->add_option("problem", show_name, "problem name, e.g. P3")->required();
  pshow->add_option("--m", show_m, "dimension");
  problems->require_subcommand(1);

  ConfigArgs gen_args, pool_args, encdec_args, cons_args, padt_args, infer_args, eval_args,
      pipe_args;

  auto* gen = app.add_subcommand("gen-data", "sample instances and solve them with the oracles");
  gen_args.attach(gen);

  auto* pool = app.add_subcommand("pool-embed", "embed formulation variants and cache pooled sets");
  pool_args.attach(pool);

  std::string encdec_out;
  auto* encdec = app.add_subcommand("train-encdec", "train the value/type codec");
  encdec_args.attach(encdec);
  encdec->add_option("--out", encdec_out, "checkpoint path (default <out_dir>/codec.ckpt)");

  std::string cons_codec, cons_out;
  auto* cons = app.add_subcommand("train-cons", "train the constraint-aware classifier");
  cons_args.attach(cons);
  cons->add_option("--codec", cons_codec, "codec checkpoint (default <out_dir>/codec.ckpt)");
  cons->add_option("--out", cons_out, "checkpoint path (default <out_dir>/consnet.ckpt)");

  std::string padt_codec, padt_cons, padt_out;
  auto* padt = app.add_subcommand("train-pad", "train the diffusion backbone");
  padt_args.attach(padt);
  padt->add_option("--codec", padt_codec, "codec checkpoint (default <out_dir>/codec.ckpt)");
  padt->add_option("--cons", padt_cons, "constraint checkpoint (default <out_dir>/consnet.ckpt)");
  padt->add_option("--out", padt_out, "checkpoint path (default <out_dir>/backbone.ckpt)");

  std::string infer_model, infer_codec, infer_problem = "P1";
  int infer_m = 3, infer_pnum = 0;
  std::uint64_t infer_seed = 0, infer_inst_seed = 0;
  bool infer_oracle = false;
  auto* infer = app.add_subcommand("infer", "generate solutions for one sampled instance");
  infer_args.attach(infer);
  infer->add_option("--model", infer_model, "backbone checkpoint")->required();
  infer->add_option("--codec", infer_codec, "codec checkpoint (default <out_dir>/codec.ckpt)");
  infer->add_option("--problem", infer_problem, "problem name")->required();
  infer->add_option("--m", infer_m, "dimension");
  infer->add_option("--pnum", infer_pnum, "parallel candidates (default from config)");
  infer->add_option("--seed", infer_seed, "sampling seed");
  infer->add_option("--instance-seed", infer_inst_seed, "instance draw seed");
  infer->add_flag("--oracle", infer_oracle, "also solve with the oracle and print the gap");

  std::string eval_model, eval_codec, eval_out, eval_problems;
  int eval_pnum = 0;
  bool eval_baseline = false;
  auto* evalc = app.add_subcommand("eval", "score a trained model on the test sets");
  eval_args.attach(evalc);
  evalc->add_option("--model", eval_model, "backbone checkpoint")->required();
  evalc->add_option("--codec", eval_codec, "codec checkpoint (default <out_dir>/codec.ckpt)");
  evalc->add_option("--problems", eval_problems, "comma list or 'all' (default from config)");
  evalc->add_option("--pnum", eval_pnum, "parallel candidates (default from config)");
  evalc->add_option("--out", eval_out, "report directory (default <out_dir>/report)");
  evalc->add_flag("--baseline", eval_baseline, "also score the uniform-random-feasible baseline");

  std::string plot_csv, plot_out = "report.svg";
  auto* plot = app.add_subcommand("plot", "render a report CSV as an SVG bar chart");
  plot->add_option("--report", plot_csv, "report.csv path")->required();
  plot->add_option("--out", plot_out, "output SVG path");

  auto* pipe = app.add_subcommand("pipeline", "gen-data through eval in one run");
  pipe_args.attach(pipe);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help() << "\n";
    return 2;
  }

  try {
    if (plist->parsed()) {
      for (ProblemId id : kAllProblems)
        std::printf("%-4s %s\n", name(id), summary(id));
    } else if (pshow->parsed()) {
      std::cout << schema_document(problem_from_name(show_name), show_m);
    } else if (gen->parsed()) {
      const RunConfig rc = gen_args.resolve();
      log_config(rc);
      run_gen_data(rc);
    } else if (pool->parsed()) {
      const RunConfig rc = pool_args.resolve();
      log_config(rc);
      run_pool_embed(rc);
    } else if (encdec->parsed()) {
      const RunConfig rc = encdec_args.resolve();
      log_config(rc);
      if (encdec_out.empty()) encdec_out = (out_dir(rc) / "codec.ckpt").string();
      run_train_encdec(rc, encdec_out);
    } else if (cons->parsed()) {
      const RunConfig rc = cons_args.resolve();
      log_config(rc);
      if (cons_codec.empty()) cons_codec = (out_dir(rc) / "codec.ckpt").string();
      if (cons_out.empty()) cons_out = (out_dir(rc) / "consnet.ckpt").string();
      run_train_cons(rc, cons_codec, cons_out);
    } else if (padt->parsed()) {
      const RunConfig rc = padt_args.resolve();
      log_config(rc);
      if (padt_codec.empty()) padt_codec = (out_dir(rc) / "codec.ckpt").string();
      if (padt_cons.empty()) padt_cons = (out_dir(rc) / "consnet.ckpt").string();
      if (padt_out.empty()) padt_out = (out_dir(rc) / "backbone.ckpt").string();
      run_train_pad(rc, padt_codec, padt_cons, padt_out);
    } else if (infer->parsed()) {
      const RunConfig rc = infer_args.resolve();
      log_config(rc);
      if (infer_codec.empty()) infer_codec = (out_dir(rc) / "codec.ckpt").string();
      if (infer_pnum <= 0) infer_pnum = static_cast<int>(rc.geti("parallel_sampling_num"));
      run_infer(rc, infer_model, infer_codec, infer_problem, infer_m, infer_pnum, infer_seed,
                infer_inst_seed, infer_oracle);
    } else if (evalc->parsed()) {
      RunConfig rc = eval_args.resolve();
      if (!eval_problems.empty())
        rc.set("problems", eval_problems == "all" ? "P1,P2,P3,P4,P5,P6,P7,P8,P9,P10"
                                                  : eval_problems);
      if (eval_pnum > 0) rc.set("parallel_sampling_num", std::to_string(eval_pnum));
      log_config(rc);
      if (eval_codec.empty()) eval_codec = (out_dir(rc) / "codec.ckpt").string();
      if (eval_out.empty()) eval_out = (out_dir(rc) / "report").string();
      run_eval(rc, eval_model, eval_codec, eval_out, eval_baseline);
    } else if (plot->parsed()) {
      run_plot(plot_csv, plot_out);
    } else if (pipe->parsed()) {
      const RunConfig rc = pipe_args.resolve();
      log_config(rc);
      run_pipeline(rc);
    }
  } catch (const Error& e) {
    std::cerr << "error [" << kind_name(e.kind()) << "]: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
