#include "pad/dataset.hpp"

#include <exception>
#include <fstream>
#include <mutex>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "pad/binio.hpp"
#include "pad/common.hpp"
#include "pad/oracle.hpp"
#include "pad/rng.hpp"

namespace pad {
namespace {

constexpr char kMagic[4] = {'P', 'A', 'D', 'D'};
constexpr std::uint16_t kVersion = 1;

}  // namespace

Dataset generate_dataset(ProblemId id, int M, int n, std::uint64_t seed, int workers) {
  if (n < 1) fail(ErrorKind::config, "dataset size must be positive");
  const ProblemSpec spec = make_spec(id, M);
  Dataset ds;
  ds.id = id;
  ds.M = M;
  ds.seed = seed;
  ds.X.resize(n, spec.x_len());
  ds.Y.resize(n, spec.y_len());
  ds.f.resize(n);

  auto solve_row = [&](int i) {
    const ProblemInstance inst = sample_instance(spec, derive_seed(seed, "row", i));
    const OracleResult res = solve(spec, inst);
    ds.X.row(i) = inst.x.transpose();
    ds.Y.row(i) = res.y.transpose();
    ds.f[i] = res.objective;
  };

  workers = std::max(1, workers);
  if (workers == 1) {
    for (int i = 0; i < n; ++i) solve_row(i);
    return ds;
  }
  std::mutex err_mu;
  std::exception_ptr first_err;
  std::vector<std::thread> pool;
  const int chunk = (n + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const int lo = w * chunk, hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&, lo, hi] {
      try {
        for (int i = lo; i < hi; ++i) solve_row(i);
      } catch (...) {
        std::lock_guard<std::mutex> lk(err_mu);
        if (!first_err) first_err = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_err) std::rethrow_exception(first_err);
  return ds;
}

std::filesystem::path dataset_filename(ProblemId id, int M, const std::string& split) {
  return std::string(name(id)) + "_M" + std::to_string(M) + "_" + split + ".padd";
}

void write_dataset(const Dataset& ds, const std::filesystem::path& path) {
  const ProblemSpec spec = make_spec(ds.id, ds.M);
  if (ds.X.cols() != spec.x_len() || ds.Y.cols() != spec.y_len() || ds.X.rows() != ds.Y.rows() ||
      ds.f.size() != ds.X.rows())
    fail(ErrorKind::schema, "dataset shape does not match the problem schema");
  ByteWriter w;
  w.raw(kMagic, 4);
  w.u16(kVersion);
  w.u8(static_cast<std::uint8_t>(static_cast<int>(ds.id) + 1));
  w.u16(static_cast<std::uint16_t>(ds.M));
  w.u32(static_cast<std::uint32_t>(ds.n()));
  w.u16(static_cast<std::uint16_t>(spec.x_len()));
  w.u16(static_cast<std::uint16_t>(spec.y_len()));
  for (int i = 0; i < ds.n(); ++i) {
    for (int j = 0; j < ds.X.cols(); ++j) w.f64(ds.X(i, j));
    for (int j = 0; j < ds.Y.cols(); ++j) w.f64(ds.Y(i, j));
    w.f64(ds.f[i]);
  }
  w.commit(path);

  nlohmann::ordered_json meta;
  meta["file"] = path.filename().string();
  meta["problem"] = name(ds.id);
  meta["m"] = ds.M;
  meta["n"] = ds.n();
  meta["seed"] = ds.seed;
  meta["oracle_version"] = kOracleVersion;
  write_text_atomic(path.string() + ".jsonl", meta.dump() + "\n");
}

Dataset read_dataset(const std::filesystem::path& path) {
  ByteReader r = ByteReader::from_file(path);
  char magic[4];
  r.raw(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0)
    fail(ErrorKind::data, path.string() + ": not a dataset file (bad magic)");
  const std::uint16_t version = r.u16();
  if (version != kVersion)
    fail(ErrorKind::data, path.string() + ": unsupported dataset version " + std::to_string(version));
  const int pid = r.u8();
  if (pid < 1 || pid > 10) fail(ErrorKind::data, path.string() + ": bad problem id");
  Dataset ds;
  ds.id = static_cast<ProblemId>(pid - 1);
  ds.M = r.u16();
  const std::uint32_t n = r.u32();
  const int x_len = r.u16();
  const int y_len = r.u16();
  const ProblemSpec spec = make_spec(ds.id, ds.M);
  if (x_len != spec.x_len() || y_len != spec.y_len())
    fail(ErrorKind::data, path.string() + ": record shape does not match the problem schema");
  if (r.remaining() != static_cast<std::size_t>(n) * (x_len + y_len + 1) * sizeof(double))
    fail(ErrorKind::data, path.string() + ": truncated or oversized record section");
  ds.X.resize(n, x_len);
  ds.Y.resize(n, y_len);
  ds.f.resize(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    for (int j = 0; j < x_len; ++j) ds.X(i, j) = r.f64();
    for (int j = 0; j < y_len; ++j) ds.Y(i, j) = r.f64();
    ds.f[i] = r.f64();
  }
  const std::filesystem::path side = path.string() + ".jsonl";
  if (std::filesystem::exists(side)) {
    std::ifstream in(side);
    std::string line;
    std::getline(in, line);
    auto meta = nlohmann::json::parse(line, nullptr, false);
    if (!meta.is_discarded() && meta.contains("seed")) ds.seed = meta["seed"].get<std::uint64_t>();
  }
  return ds;
}

}  // namespace pad
