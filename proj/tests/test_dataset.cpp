#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "pad/dataset.hpp"
#include "support.hpp"

using namespace pad;
using padtest::file_bytes;
namespace fs = std::filesystem;

TEST_CASE("generated datasets are reproducible and worker-count independent") {
  const Dataset a = generate_dataset(ProblemId::P2, 2, 8, 77, 1);
  const Dataset b = generate_dataset(ProblemId::P2, 2, 8, 77, 4);
  CHECK((a.X.array() == b.X.array()).all());
  CHECK((a.Y.array() == b.Y.array()).all());
  CHECK((a.f.array() == b.f.array()).all());
  CHECK(a.seed == b.seed);

  const Dataset c = generate_dataset(ProblemId::P2, 2, 8, 78, 1);
  CHECK(!(a.X.array() == c.X.array()).all());
  CHECK_THROWS_AS(generate_dataset(ProblemId::P2, 2, 0, 77), Error);
}

TEST_CASE("every dataset row holds a feasible solution at its oracle objective") {
  for (const ProblemId id : {ProblemId::P1, ProblemId::P8}) {
    const Dataset ds = generate_dataset(id, 3, 10, 91);
    const ProblemSpec spec = make_spec(id, 3);
    for (int i = 0; i < ds.n(); ++i) {
      const ProblemInstance inst{id, 3, ds.X.row(i).transpose(), 0};
      const Eigen::VectorXd y = ds.Y.row(i).transpose();
      CHECK(check_feasible(spec, inst, y).first);
      const double f = objective(spec, inst, y);
      CHECK(std::abs(ds.f[i] - f) <= 1e-9 * std::max(1.0, std::abs(f)));
    }
  }
}

TEST_CASE("dataset files round-trip byte-identically with a provenance sidecar") {
  CHECK(dataset_filename(ProblemId::P3, 5, "train") == fs::path("P3_M5_train.padd"));
  CHECK(dataset_filename(ProblemId::P10, 2, "test") == fs::path("P10_M2_test.padd"));

  const fs::path dir = fs::temp_directory_path() / "pad_dataset_test";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const Dataset ds = generate_dataset(ProblemId::P1, 2, 6, 77);
  const fs::path path = dir / dataset_filename(ProblemId::P1, 2, "train");
  write_dataset(ds, path);
  REQUIRE(fs::exists(path));
  REQUIRE(fs::exists(dir / "P1_M2_train.padd.jsonl"));

  const auto bin = file_bytes(path);
  const auto side = file_bytes(dir / "P1_M2_train.padd.jsonl");
  write_dataset(ds, path);
  CHECK(file_bytes(path) == bin);
  CHECK(file_bytes(dir / "P1_M2_train.padd.jsonl") == side);
  const std::string side_text(side.begin(), side.end());
  CHECK(side_text.find("\"problem\":\"P1\"") != std::string::npos);
  CHECK(side_text.find("\"seed\":77") != std::string::npos);

  const Dataset back = read_dataset(path);
  CHECK(back.id == ds.id);
  CHECK(back.M == ds.M);
  CHECK(back.seed == 77);
  CHECK((back.X.array() == ds.X.array()).all());
  CHECK((back.Y.array() == ds.Y.array()).all());
  CHECK((back.f.array() == ds.f.array()).all());

  // without the sidecar the records still load; only provenance is lost
  fs::remove(dir / "P1_M2_train.padd.jsonl");
  const Dataset bare = read_dataset(path);
  CHECK(bare.seed == 0);
  CHECK((bare.X.array() == ds.X.array()).all());
  fs::remove_all(dir);
}

TEST_CASE("malformed dataset files are rejected") {
  const fs::path dir = fs::temp_directory_path() / "pad_dataset_bad_test";
  fs::remove_all(dir);
  fs::create_directories(dir);
  CHECK_THROWS_AS(read_dataset(dir / "absent.padd"), Error);

  const Dataset ds = generate_dataset(ProblemId::P8, 2, 4, 5);
  const fs::path path = dir / "ok.padd";
  write_dataset(ds, path);

  auto bytes = file_bytes(path);
  bytes[0] ^= 0x20;
  {
    std::ofstream f(dir / "magic.padd", std::ios::binary);
    f.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  }
  CHECK_THROWS_AS(read_dataset(dir / "magic.padd"), Error);

  auto cut = file_bytes(path);
  cut.resize(cut.size() - 8);
  {
    std::ofstream f(dir / "cut.padd", std::ios::binary);
    f.write(reinterpret_cast<const char*>(cut.data()), static_cast<std::streamsize>(cut.size()));
  }
  CHECK_THROWS_AS(read_dataset(dir / "cut.padd"), Error);

  Dataset wrong = ds;
  wrong.Y.resize(wrong.Y.rows(), wrong.Y.cols() + 1);
  CHECK_THROWS_AS(write_dataset(wrong, dir / "wrong.padd"), Error);
  fs::remove_all(dir);
}
