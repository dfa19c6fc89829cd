#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "pad/checkpoint.hpp"
#include "pad/rng.hpp"
#include "support.hpp"

using namespace pad;
using padtest::file_bytes;
namespace fs = std::filesystem;

namespace {

void write_bytes(const fs::path& p, const std::vector<unsigned char>& bytes) {
  std::ofstream f(p, std::ios::binary | std::ios::trunc);
  f.write(reinterpret_cast<const char*>(bytes.data()),
          static_cast<std::streamsize>(bytes.size()));
}

int entry_count(const fs::path& dir) {
  int n = 0;
  for (auto it = fs::directory_iterator(dir); it != fs::directory_iterator(); ++it) ++n;
  return n;
}

nn::ParamStore<float> demo_store() {
  nn::ParamStore<float> ps;
  nn::Parameter<float>& a = ps.add("a", 2, 3);
  nn::Parameter<float>& b = ps.add("b", 1, 4);
  Rng rng(5);
  nn::xavier_uniform(a, rng);
  nn::xavier_uniform(b, rng);
  return ps;
}

}  // namespace

TEST_CASE("byte writer and reader round-trip every scalar and string shape") {
  ByteWriter w;
  w.u8(0xab);
  w.u16(0xbeef);
  w.u32(0xdeadbeefu);
  w.u64(0x0123456789abcdefull);
  w.f32(1.5f);
  w.f64(-2.25);
  w.str("");
  w.str(std::string("nul\0byte", 8));
  w.str("plain");

  ByteReader r{w.bytes()};
  CHECK(r.u8() == 0xab);
  CHECK(r.u16() == 0xbeef);
  CHECK(r.u32() == 0xdeadbeefu);
  CHECK(r.u64() == 0x0123456789abcdefull);
  CHECK(r.f32() == 1.5f);
  CHECK(r.f64() == -2.25);
  CHECK(r.str().empty());
  CHECK(r.str() == std::string("nul\0byte", 8));
  CHECK(r.remaining() == 4 + 5);
  CHECK(r.str() == "plain");
  CHECK(r.at_end());
}

TEST_CASE("reads past the buffer are io errors, not garbage") {
  ByteReader r{{0x01, 0x02}};
  CHECK(r.u16() == 0x0201);  // little endian
  CHECK_THROWS_AS(r.u8(), Error);

  ByteWriter w;
  w.str("hello");
  auto bytes = w.bytes();
  bytes.resize(bytes.size() - 2);  // cut into the payload
  ByteReader t{std::move(bytes)};
  CHECK_THROWS_AS(t.str(), Error);

  ByteReader lying{{0xff, 0xff, 0xff, 0x7f}};  // length prefix with no payload
  CHECK_THROWS_AS(lying.str(), Error);
}

TEST_CASE("commits are atomic renames that leave no temporaries") {
  const fs::path dir = fs::temp_directory_path() / "pad_binio_test";
  fs::remove_all(dir);
  fs::create_directories(dir);

  ByteWriter w;
  w.u32(41);
  w.commit(dir / "x.bin");
  CHECK(file_bytes(dir / "x.bin") == w.bytes());
  CHECK(entry_count(dir) == 1);

  ByteWriter w2;
  w2.u32(42);
  w2.commit(dir / "x.bin");  // overwrite in place
  CHECK(file_bytes(dir / "x.bin") == w2.bytes());
  CHECK(entry_count(dir) == 1);

  write_text_atomic(dir / "t.txt", "line\n");
  write_text_atomic(dir / "t.txt", "line\n");
  const auto t = file_bytes(dir / "t.txt");
  CHECK(std::string(t.begin(), t.end()) == "line\n");
  CHECK(entry_count(dir) == 2);

  CHECK_THROWS_AS(ByteReader::from_file(dir / "absent.bin"), Error);
  fs::remove_all(dir);
}

TEST_CASE("checkpoints round-trip tensors, kind, and config echo") {
  const fs::path dir = fs::temp_directory_path() / "pad_ckpt_test";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const fs::path path = dir / "demo.padc";

  nn::ParamStore<float> ps = demo_store();
  const std::string echo = "k = v\nlist = [1,2]\n";
  save_checkpoint(path, "demo", echo, ps);
  save_checkpoint(dir / "demo2.padc", "demo", echo, ps);
  CHECK(file_bytes(path) == file_bytes(dir / "demo2.padc"));

  const CheckpointMeta meta = peek_checkpoint(path);
  CHECK(meta.kind == "demo");
  CHECK(meta.config == echo);

  nn::ParamStore<float> fresh;
  fresh.add("a", 2, 3);
  fresh.add("b", 1, 4);
  load_checkpoint(path, "demo", fresh);
  CHECK((fresh.at("a").value.array() == ps.at("a").value.array()).all());
  CHECK((fresh.at("b").value.array() == ps.at("b").value.array()).all());

  // every mismatch is rejected with a data error
  CHECK_THROWS_AS(load_checkpoint(path, "other", fresh), Error);
  nn::ParamStore<double> wide;
  wide.add("a", 2, 3);
  wide.add("b", 1, 4);
  CHECK_THROWS_AS(load_checkpoint(path, "demo", wide), Error);
  nn::ParamStore<float> extra;
  extra.add("a", 2, 3);
  extra.add("b", 1, 4);
  extra.add("c", 1, 1);
  CHECK_THROWS_AS(load_checkpoint(path, "demo", extra), Error);
  nn::ParamStore<float> renamed;
  renamed.add("a", 2, 3);
  renamed.add("z", 1, 4);
  CHECK_THROWS_AS(load_checkpoint(path, "demo", renamed), Error);
  nn::ParamStore<float> reshaped;
  reshaped.add("a", 3, 2);
  reshaped.add("b", 1, 4);
  CHECK_THROWS_AS(load_checkpoint(path, "demo", reshaped), Error);

  auto corrupted = file_bytes(path);
  corrupted[0] ^= 0x40;
  write_bytes(dir / "bad_magic.padc", corrupted);
  CHECK_THROWS_AS(peek_checkpoint(dir / "bad_magic.padc"), Error);

  auto trailing = file_bytes(path);
  trailing.push_back(0);
  write_bytes(dir / "trailing.padc", trailing);
  nn::ParamStore<float> again;
  again.add("a", 2, 3);
  again.add("b", 1, 4);
  CHECK_THROWS_AS(load_checkpoint(dir / "trailing.padc", "demo", again), Error);

  auto cut = file_bytes(path);
  cut.resize(cut.size() / 2);
  write_bytes(dir / "cut.padc", cut);
  CHECK_THROWS_AS(load_checkpoint(dir / "cut.padc", "demo", again), Error);
  fs::remove_all(dir);
}

TEST_CASE("config echoes parse line-wise with later keys winning") {
  const auto kv = detail::parse_echo_kv("x = 1\ny = two words\nnot a pair\nx = 3\n");
  CHECK(kv.size() == 2);
  CHECK(kv.at("x") == "3");
  CHECK(kv.at("y") == "two words");
  CHECK(detail::parse_echo_list("[1,2,3]") == std::vector<int>{1, 2, 3});
  CHECK(detail::parse_echo_list("4") == std::vector<int>{4});
}
