#include "pad/consnet.hpp"

namespace pad {

std::string ConsNetConfig::echo() const {
  std::ostringstream os;
  os << "embed_dim = " << embed_dim << "\nhidden_dim = " << hidden_dim << "\nlayers = " << layers
     << "\nheads = " << heads << "\nffn_mult = " << ffn_mult << "\ndropout = " << dropout
     << "\nepochs = " << epochs << "\ninit_lr = " << init_lr << "\nbatch = " << batch
     << "\nsamples_per_problem = " << samples_per_problem << "\nseed = " << seed << "\n";
  return os.str();
}

ConsNetConfig ConsNetConfig::parse_echo(const std::string& echo) {
  ConsNetConfig c;
  for (const auto& [key, val] : detail::parse_echo_kv(echo)) {
    try {
      if (key == "embed_dim") c.embed_dim = std::stoi(val);
      else if (key == "hidden_dim") c.hidden_dim = std::stoi(val);
      else if (key == "layers") c.layers = std::stoi(val);
      else if (key == "heads") c.heads = std::stoi(val);
      else if (key == "ffn_mult") c.ffn_mult = std::stoi(val);
      else if (key == "dropout") c.dropout = std::stod(val);
      else if (key == "epochs") c.epochs = std::stoi(val);
      else if (key == "init_lr") c.init_lr = std::stod(val);
      else if (key == "batch") c.batch = std::stoi(val);
      else if (key == "samples_per_problem") c.samples_per_problem = std::stoi(val);
      else if (key == "seed") c.seed = std::stoull(val);
      else fail(ErrorKind::config, "unknown constraint module checkpoint setting: " + key);
    } catch (const Error&) {
      throw;
    } catch (const std::exception&) {
      fail(ErrorKind::config, "bad constraint module checkpoint setting: " + key + " = " + val);
    }
  }
  c.validate();
  return c;
}

std::vector<ConsShard> build_cons_shards(const std::vector<Dataset>& data, int count,
                                         std::uint64_t seed) {
  if (data.empty()) fail(ErrorKind::config, "constraint training needs at least one dataset");
  if (count < 1) fail(ErrorKind::config, "constraint sample count must be >= 1");
  std::vector<ConsShard> shards;
  for (const auto& ds : data) {
    if (ds.n() < 1) fail(ErrorKind::data, "constraint training dataset is empty");
    const ProblemSpec spec = make_spec(ds.id, ds.M);
    ConsShard sh;
    sh.id = ds.id;
    sh.M = ds.M;
    Rng rng(derive_seed(seed, "shard", static_cast<int>(ds.id), ds.M));
    std::vector<int> valid_idx, violate_idx;
    auto draw = [&](int j) {
      ConsSample s;
      s.x = ds.X.row(j % ds.n()).transpose();
      ProblemInstance inst{ds.id, ds.M, s.x, 0};
      s.y = sample_uniform_solution(spec, rng);
      s.label = check_feasible(spec, inst, s.y).first ? 0 : 1;
      (s.label ? violate_idx : valid_idx).push_back(static_cast<int>(sh.samples.size()));
      sh.samples.push_back(std::move(s));
    };
    for (int j = 0; j < count; ++j) draw(j);
    for (int j = count; (valid_idx.empty() || violate_idx.empty()) && j < 10 * count; ++j) draw(j);
    if (valid_idx.empty() || violate_idx.empty())
      fail(ErrorKind::data, std::string("random solutions for ") + name(ds.id) + " M=" +
                                std::to_string(ds.M) + " are all " +
                                (valid_idx.empty() ? "infeasible" : "feasible") +
                                "; cannot balance classes");
    // oversample the minority class to exact balance
    auto& minority = valid_idx.size() < violate_idx.size() ? valid_idx : violate_idx;
    const long long deficit = std::llabs(static_cast<long long>(valid_idx.size()) -
                                         static_cast<long long>(violate_idx.size()));
    for (long long j = 0; j < deficit; ++j)
      sh.samples.push_back(sh.samples[minority[j % minority.size()]]);
    shards.push_back(std::move(sh));
  }
  return shards;
}

namespace detail {

ConsBatchPlan plan_cons_shard(const ConsShard& shard) {
  ConsBatchPlan plan;
  plan.spec = make_spec(shard.id, shard.M);
  const int xl = plan.spec.x_len(), yl = plan.spec.y_len();
  const int n = static_cast<int>(shard.samples.size());
  plan.xn.resize(n, xl);
  plan.yn.resize(n, yl);
  plan.labels.resize(n);
  for (int i = 0; i < n; ++i) {
    const auto xt = normalize(plan.spec, shard.samples[i].x, Role::params);
    const auto yt = normalize(plan.spec, shard.samples[i].y, Role::vars);
    for (int j = 0; j < xl; ++j) plan.xn(i, j) = xt[j].value;
    for (int j = 0; j < yl; ++j) plan.yn(i, j) = yt[j].value;
    plan.labels[i] = shard.samples[i].label;
  }
  for (int j = 0; j < xl; ++j) plan.x_types.push_back(static_cast<int>(plan.spec.param_type(j)));
  for (int j = 0; j < yl; ++j) plan.y_types.push_back(static_cast<int>(plan.spec.var_type(j)));
  return plan;
}

const EmbeddingSet& find_embedding_set(const std::vector<EmbeddingSet>& sets, ProblemId id) {
  for (const auto& s : sets)
    if (s.id == id) return s;
  fail(ErrorKind::data, std::string("no embedding set for ") + name(id));
}

}  // namespace detail

}  // namespace pad
