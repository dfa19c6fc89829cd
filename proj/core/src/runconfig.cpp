#include "pad/runconfig.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "pad/common.hpp"
#include "pad/problems.hpp"

namespace pad {
namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

// Shortest decimal spelling that parses back to exactly the same double.
std::string format_real(double v) {
  for (int prec = 1; prec <= 17; ++prec) {
    std::ostringstream os;
    os.precision(prec);
    os << v;
    std::istringstream is(os.str());
    double back = 0.0;
    is >> back;
    if (back == v) return os.str();
  }
  return std::to_string(v);
}

long long parse_int(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  long long out = 0;
  try {
    out = std::stoll(v, &pos);
  } catch (...) {
    fail(ErrorKind::config, "key '" + key + "': '" + v + "' is not an integer");
  }
  if (pos != v.size()) fail(ErrorKind::config, "key '" + key + "': '" + v + "' is not an integer");
  return out;
}

double parse_real(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &pos);
  } catch (...) {
    fail(ErrorKind::config, "key '" + key + "': '" + v + "' is not a number");
  }
  if (pos != v.size()) fail(ErrorKind::config, "key '" + key + "': '" + v + "' is not a number");
  return out;
}

std::vector<std::string> split_list(std::string v) {
  v = trim(v);
  if (!v.empty() && v.front() == '[') {
    if (v.back() != ']') fail(ErrorKind::config, "unbalanced brackets in list value");
    v = v.substr(1, v.size() - 2);
  }
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(v);
  while (std::getline(is, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void parse_into(RunConfig& cfg, const std::string& text, const std::filesystem::path& base_dir,
                int depth) {
  if (depth > 16) fail(ErrorKind::config, "config include depth exceeds 16 (include cycle?)");
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string s = trim(line);
    if (s.empty() || s[0] == '#') continue;
    if (s.rfind("include ", 0) == 0) {
      const std::filesystem::path inc = base_dir / trim(s.substr(8));
      std::ifstream f(inc);
      if (!f) fail(ErrorKind::io, "cannot open included config " + inc.string());
      std::stringstream buf;
      buf << f.rdbuf();
      parse_into(cfg, buf.str(), inc.parent_path(), depth + 1);
      continue;
    }
    const std::size_t eq = s.find('=');
    if (eq == std::string::npos)
      fail(ErrorKind::config, "config line " + std::to_string(lineno) + " is not key=value: " + s);
    cfg.set(trim(s.substr(0, eq)), trim(s.substr(eq + 1)));
  }
}

}  // namespace

const std::vector<RunConfig::KeySpec>& RunConfig::known_keys() {
  using K = Kind;
  static const std::vector<KeySpec> keys = {
      // model hyperparameters (defaults are the published settings)
      {"encode_dims", K::int_list, "[4,32,128]"},
      {"hidden_dim", K::integer, "128"},
      {"decode_dims", K::int_list, "[128,32]"},
      {"type_num", K::integer, "19"},
      {"encoder_decoder_train_epochs", K::integer, "20"},
      {"encoder_decoder_init_lr", K::real, "0.00015"},
      {"transformer_encoder_num", K::integer, "6"},
      {"transformer_decoder_num", K::integer, "6"},
      {"attention_header_num", K::integer, "8"},
      {"transformer_dropout", K::real, "0.1"},
      {"constraint_module_train_epochs", K::integer, "30"},
      {"constraint_module_init_lr", K::real, "0.00015"},
      {"pool_type", K::text, "rank"},
      {"pool_length", K::integer, "20"},
      {"diffusion_type", K::text, "gaussian"},
      {"diffusion_steps", K::integer, "50"},
      {"inference_diffusion_steps", K::integer, "5"},
      {"parallel_sampling_num", K::integer, "2"},
      {"constrain_loss_start_ratio", K::real, "0.5"},
      {"use_gated_constraint_loss", K::boolean, "true"},
      {"diffusion_training_epochs", K::integer, "70"},
      {"diffusion_init_lr", K::real, "0.0002"},
      // batch sizes (stated in prose, not the hyperparameter table)
      {"encoder_decoder_batch", K::integer, "256"},
      {"constraint_module_batch", K::integer, "128"},
      {"diffusion_batch", K::integer, "352"},
      // data / run plumbing
      {"problems", K::text_list, "P1,P2,P3,P4"},
      {"dims", K::int_list, "[5,6,7]"},
      {"train_samples", K::integer, "60000"},
      {"test_samples", K::integer, "500"},
      {"cons_samples_per_problem", K::integer, "2000"},
      {"embedding_dim", K::integer, "768"},
      {"eq_variant_num", K::integer, "4"},
      {"miss_variant_num", K::integer, "4"},
      {"synthetic_embeddings", K::boolean, "true"},
      {"ffn_mult", K::integer, "2"},
      {"seed", K::integer, "7"},
      {"data_seed_train", K::integer, "11"},
      {"data_seed_test", K::integer, "13"},
      {"embed_seed", K::integer, "9"},
      {"workers", K::integer, "1"},
      {"out_dir", K::text, "out"},
  };
  return keys;
}

RunConfig RunConfig::defaults() {
  RunConfig cfg;
  for (const auto& k : known_keys()) cfg.set(k.name, k.def);
  return cfg;
}

RunConfig RunConfig::preset(const std::string& name) {
  RunConfig cfg = defaults();
  if (name == "paper") return cfg;
  if (name == "desk") {
    // CPU-minute scale: shallower transformers and shorter pools, larger
    // learning rates to compensate for the reduced step budget.  Sample
    // counts, diffusion steps, and epoch counts follow the reduced-scale
    // evaluation protocol.
    cfg.set("problems", "P1,P8");
    cfg.set("dims", "[3]");
    cfg.set("train_samples", "5000");
    cfg.set("test_samples", "200");
    cfg.set("transformer_encoder_num", "2");
    cfg.set("transformer_decoder_num", "2");
    cfg.set("pool_length", "12");
    cfg.set("encoder_decoder_batch", "64");
    cfg.set("encoder_decoder_init_lr", "0.003");
    cfg.set("constraint_module_batch", "64");
    cfg.set("constraint_module_init_lr", "0.001");
    cfg.set("diffusion_batch", "64");
    cfg.set("diffusion_init_lr", "0.001");
    cfg.set("diffusion_training_epochs", "30");
    cfg.set("parallel_sampling_num", "4");
    return cfg;
  }
  fail(ErrorKind::config, "unknown preset '" + name + "' (expected paper or desk)");
}

RunConfig RunConfig::from_file(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) fail(ErrorKind::io, "cannot open config " + path.string());
  std::stringstream buf;
  buf << f.rdbuf();
  return from_string(buf.str(), path.parent_path());
}

RunConfig RunConfig::from_string(const std::string& text, const std::filesystem::path& base_dir) {
  RunConfig cfg = defaults();
  parse_into(cfg, text, base_dir, 0);
  return cfg;
}

void RunConfig::apply_file(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) fail(ErrorKind::io, "cannot open config " + path.string());
  std::stringstream buf;
  buf << f.rdbuf();
  parse_into(*this, buf.str(), path.parent_path(), 0);
}

void RunConfig::apply_string(const std::string& text, const std::filesystem::path& base_dir) {
  parse_into(*this, text, base_dir, 0);
}

const RunConfig::KeySpec& RunConfig::spec_of(const std::string& key) const {
  for (const auto& k : known_keys())
    if (key == k.name) return k;
  fail(ErrorKind::config, "unknown config key '" + key + "'");
}

void RunConfig::set(const std::string& key, const std::string& value) {
  const KeySpec& ks = spec_of(key);
  switch (ks.kind) {
    case Kind::integer: values_[key] = std::to_string(parse_int(key, value)); break;
    case Kind::real: values_[key] = format_real(parse_real(key, value)); break;
    case Kind::boolean: {
      std::string v = value;
      std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
      if (v != "true" && v != "false")
        fail(ErrorKind::config, "key '" + key + "': expected true or false, got '" + value + "'");
      values_[key] = v;
      break;
    }
    case Kind::text: values_[key] = trim(value); break;
    case Kind::int_list: {
      std::string out = "[";
      bool first = true;
      for (const auto& item : split_list(value)) {
        out += (first ? "" : ",") + std::to_string(parse_int(key, item));
        first = false;
      }
      values_[key] = out + "]";
      break;
    }
    case Kind::text_list: {
      std::string out;
      bool first = true;
      for (const auto& item : split_list(value)) {
        out += (first ? "" : ",") + item;
        first = false;
      }
      values_[key] = out;
      break;
    }
  }
}

std::string RunConfig::dump() const {
  std::ostringstream os;
  for (const auto& k : known_keys()) {
    auto it = values_.find(k.name);
    os << k.name << " = " << (it != values_.end() ? it->second : k.def) << "\n";
  }
  return os.str();
}

void RunConfig::save(const std::filesystem::path& path) const {
  std::ofstream f(path);
  if (!f) fail(ErrorKind::io, "cannot write config " + path.string());
  f << dump();
}

long long RunConfig::geti(const std::string& key) const {
  const KeySpec& ks = spec_of(key);
  if (ks.kind != Kind::integer) fail(ErrorKind::config, "key '" + key + "' is not an integer");
  auto it = values_.find(key);
  return parse_int(key, it != values_.end() ? it->second : ks.def);
}

double RunConfig::getd(const std::string& key) const {
  const KeySpec& ks = spec_of(key);
  if (ks.kind != Kind::real) fail(ErrorKind::config, "key '" + key + "' is not a real number");
  auto it = values_.find(key);
  return parse_real(key, it != values_.end() ? it->second : ks.def);
}

bool RunConfig::getb(const std::string& key) const {
  const KeySpec& ks = spec_of(key);
  if (ks.kind != Kind::boolean) fail(ErrorKind::config, "key '" + key + "' is not a boolean");
  auto it = values_.find(key);
  return (it != values_.end() ? it->second : std::string(ks.def)) == "true";
}

const std::string& RunConfig::gets(const std::string& key) const {
  const KeySpec& ks = spec_of(key);
  auto it = values_.find(key);
  if (it != values_.end()) return it->second;
  static thread_local std::string def;
  def = ks.def;
  return def;
}

std::vector<int> RunConfig::get_int_list(const std::string& key) const {
  const KeySpec& ks = spec_of(key);
  if (ks.kind != Kind::int_list) fail(ErrorKind::config, "key '" + key + "' is not an integer list");
  auto it = values_.find(key);
  std::vector<int> out;
  for (const auto& item : split_list(it != values_.end() ? it->second : ks.def))
    out.push_back(static_cast<int>(parse_int(key, item)));
  return out;
}

std::vector<std::string> RunConfig::get_text_list(const std::string& key) const {
  const KeySpec& ks = spec_of(key);
  if (ks.kind != Kind::text_list) fail(ErrorKind::config, "key '" + key + "' is not a list");
  auto it = values_.find(key);
  return split_list(it != values_.end() ? it->second : ks.def);
}

std::uint64_t RunConfig::seed(const std::string& key) const {
  const long long v = geti(key);
  if (v < 0) fail(ErrorKind::config, "key '" + key + "' must be a nonnegative seed");
  return static_cast<std::uint64_t>(v);
}

void RunConfig::validate() const {
  const auto enc = get_int_list("encode_dims");
  const auto dec = get_int_list("decode_dims");
  const long long hidden = geti("hidden_dim");
  if (enc.empty() || dec.empty()) fail(ErrorKind::config, "encode_dims and decode_dims must be nonempty");
  if (enc.back() != hidden || dec.front() != hidden)
    fail(ErrorKind::config,
         "dimension chain broken: encode_dims must end and decode_dims must start at hidden_dim");
  for (const char* k : {"hidden_dim", "type_num", "attention_header_num", "pool_length",
                        "diffusion_steps", "inference_diffusion_steps", "parallel_sampling_num",
                        "encoder_decoder_batch", "constraint_module_batch", "diffusion_batch",
                        "embedding_dim", "eq_variant_num", "miss_variant_num", "ffn_mult",
                        "train_samples", "test_samples", "cons_samples_per_problem"})
    if (geti(k) < 1) fail(ErrorKind::config, std::string("key '") + k + "' must be >= 1");
  for (const char* k : {"encoder_decoder_train_epochs", "constraint_module_train_epochs",
                        "diffusion_training_epochs"})
    if (geti(k) < 0) fail(ErrorKind::config, std::string("key '") + k + "' must be >= 0");
  const double ratio = getd("constrain_loss_start_ratio");
  if (ratio < 0.0 || ratio > 1.0)
    fail(ErrorKind::config, "constrain_loss_start_ratio must lie in [0,1]");
  const double drop = getd("transformer_dropout");
  if (drop < 0.0 || drop >= 1.0) fail(ErrorKind::config, "transformer_dropout must lie in [0,1)");
  if (hidden % geti("attention_header_num") != 0)
    fail(ErrorKind::config, "hidden_dim must be divisible by attention_header_num");
  if (gets("diffusion_type") != "gaussian")
    fail(ErrorKind::config, "diffusion_type must be gaussian");
  for (const auto& p : get_text_list("problems")) problem_from_name(p);
  for (int m : get_int_list("dims"))
    if (m < 1) fail(ErrorKind::config, "dims entries must be >= 1");
}

}  // namespace pad
