#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "pad/runconfig.hpp"
#include "pad/common.hpp"
#include "support.hpp"

using namespace pad;
namespace fs = std::filesystem;

namespace {

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream f(p);
  f << text;
}

}  // namespace

TEST_CASE("defaults carry the published hyperparameter settings") {
  const RunConfig rc = RunConfig::defaults();
  CHECK(rc.get_int_list("encode_dims") == std::vector<int>{4, 32, 128});
  CHECK(rc.geti("hidden_dim") == 128);
  CHECK(rc.get_int_list("decode_dims") == std::vector<int>{128, 32});
  CHECK(rc.geti("type_num") == 19);
  CHECK(rc.geti("encoder_decoder_train_epochs") == 20);
  CHECK(rc.getd("encoder_decoder_init_lr") == 0.00015);
  CHECK(rc.geti("transformer_encoder_num") == 6);
  CHECK(rc.geti("transformer_decoder_num") == 6);
  CHECK(rc.geti("attention_header_num") == 8);
  CHECK(rc.getd("transformer_dropout") == 0.1);
  CHECK(rc.geti("constraint_module_train_epochs") == 30);
  CHECK(rc.getd("constraint_module_init_lr") == 0.00015);
  CHECK(rc.gets("pool_type") == "rank");
  CHECK(rc.geti("pool_length") == 20);
  CHECK(rc.gets("diffusion_type") == "gaussian");
  CHECK(rc.geti("diffusion_steps") == 50);
  CHECK(rc.geti("inference_diffusion_steps") == 5);
  CHECK(rc.geti("parallel_sampling_num") == 2);
  CHECK(rc.getd("constrain_loss_start_ratio") == 0.5);
  CHECK(rc.getb("use_gated_constraint_loss"));
  CHECK(rc.geti("diffusion_training_epochs") == 70);
  CHECK(rc.getd("diffusion_init_lr") == 0.0002);
  CHECK(rc.geti("encoder_decoder_batch") == 256);
  CHECK(rc.geti("constraint_module_batch") == 128);
  CHECK(rc.geti("diffusion_batch") == 352);
  CHECK(rc.get_text_list("problems") == std::vector<std::string>{"P1", "P2", "P3", "P4"});
  CHECK(rc.get_int_list("dims") == std::vector<int>{5, 6, 7});
  CHECK(rc.geti("train_samples") == 60000);
  CHECK(rc.geti("test_samples") == 500);
  CHECK(rc.geti("cons_samples_per_problem") == 2000);
  CHECK(rc.geti("embedding_dim") == 768);
  CHECK(rc.geti("eq_variant_num") == 4);
  CHECK(rc.geti("miss_variant_num") == 4);
  CHECK(rc.getb("synthetic_embeddings"));
  CHECK(rc.seed("seed") == 7);
  CHECK(rc.seed("data_seed_train") == 11);
  CHECK(rc.seed("data_seed_test") == 13);
  CHECK_NOTHROW(rc.validate());
}

TEST_CASE("unknown keys and malformed values are rejected") {
  RunConfig rc = RunConfig::defaults();
  CHECK_THROWS_AS(rc.set("no_such_knob", "1"), Error);
  CHECK_THROWS_AS(rc.geti("no_such_knob"), Error);
  CHECK_THROWS_AS(rc.set("hidden_dim", "abc"), Error);
  CHECK_THROWS_AS(rc.set("hidden_dim", "12x"), Error);
  CHECK_THROWS_AS(rc.set("transformer_dropout", "much"), Error);
  CHECK_THROWS_AS(rc.set("use_gated_constraint_loss", "maybe"), Error);
  CHECK_THROWS_AS(rc.set("encode_dims", "[4,32"), Error);
  CHECK_THROWS_AS(RunConfig::from_string("bogus_key = 3\n"), Error);
  CHECK_THROWS_AS(RunConfig::from_string("hidden_dim 128\n"), Error);
  // typed getters refuse the wrong kind
  CHECK_THROWS_AS(rc.geti("transformer_dropout"), Error);
  CHECK_THROWS_AS(rc.getd("hidden_dim"), Error);
  CHECK_THROWS_AS(rc.getb("hidden_dim"), Error);
}

TEST_CASE("values are canonicalized so load, dump, load is an identity") {
  RunConfig rc = RunConfig::preset("desk");
  rc.set("dims", " [ 3 , 5 ] ");
  rc.set("encoder_decoder_init_lr", "1.5e-4");
  rc.set("use_gated_constraint_loss", "TRUE");
  const std::string d1 = rc.dump();
  CHECK(d1.find("dims = [3,5]\n") != std::string::npos);
  CHECK(d1.find("encoder_decoder_init_lr = 0.00015\n") != std::string::npos);
  CHECK(d1.find("use_gated_constraint_loss = true\n") != std::string::npos);
  const RunConfig back = RunConfig::from_string(d1);
  CHECK(back.dump() == d1);
  CHECK(RunConfig::from_string(back.dump()).dump() == d1);

  // comments and blank lines are ignored
  const RunConfig sparse = RunConfig::from_string("# comment\n\nhidden_dim = 32\n"
                                                  "encode_dims = [4,32]\ndecode_dims = [32,16]\n");
  CHECK(sparse.geti("hidden_dim") == 32);
  CHECK(sparse.geti("pool_length") == 20);
  CHECK_NOTHROW(sparse.validate());
}

TEST_CASE("presets: paper is the defaults, desk is the reduced scale") {
  CHECK(RunConfig::preset("paper").dump() == RunConfig::defaults().dump());
  const RunConfig desk = RunConfig::preset("desk");
  CHECK(desk.get_text_list("problems") == std::vector<std::string>{"P1", "P8"});
  CHECK(desk.get_int_list("dims") == std::vector<int>{3});
  CHECK(desk.geti("train_samples") == 5000);
  CHECK(desk.geti("test_samples") == 200);
  CHECK(desk.geti("transformer_encoder_num") == 2);
  CHECK(desk.geti("transformer_decoder_num") == 2);
  CHECK(desk.geti("pool_length") == 12);
  CHECK(desk.geti("encoder_decoder_batch") == 64);
  CHECK(desk.geti("diffusion_training_epochs") == 30);
  CHECK(desk.geti("parallel_sampling_num") == 4);
  // everything not named by the preset keeps its default
  CHECK(desk.geti("hidden_dim") == 128);
  CHECK(desk.geti("diffusion_steps") == 50);
  CHECK_NOTHROW(desk.validate());
  CHECK_THROWS_AS(RunConfig::preset("vax"), Error);
}

TEST_CASE("files overlay sparsely and may include other files") {
  const fs::path dir = fs::temp_directory_path() / "pad_runconfig_test";
  fs::remove_all(dir);
  fs::create_directories(dir);

  write_file(dir / "over.cfg", "train_samples = 123\npool_length = 9\n");
  RunConfig rc = RunConfig::preset("desk");
  rc.apply_file(dir / "over.cfg");
  CHECK(rc.geti("train_samples") == 123);
  CHECK(rc.geti("pool_length") == 9);
  CHECK(rc.get_text_list("problems") == std::vector<std::string>{"P1", "P8"});

  write_file(dir / "base.cfg", "hidden_dim = 64\nencode_dims = [4,64]\ndecode_dims = [64,16]\n");
  write_file(dir / "main.cfg", "include base.cfg\npool_length = 11\n");
  const RunConfig inc = RunConfig::from_file(dir / "main.cfg");
  CHECK(inc.geti("hidden_dim") == 64);
  CHECK(inc.geti("pool_length") == 11);
  CHECK_NOTHROW(inc.validate());

  write_file(dir / "a.cfg", "include b.cfg\n");
  write_file(dir / "b.cfg", "include a.cfg\n");
  CHECK_THROWS_AS(RunConfig::from_file(dir / "a.cfg"), Error);
  write_file(dir / "broken.cfg", "include missing.cfg\n");
  CHECK_THROWS_AS(RunConfig::from_file(dir / "broken.cfg"), Error);
  CHECK_THROWS_AS(RunConfig::from_file(dir / "nope.cfg"), Error);

  rc.save(dir / "saved.cfg");
  CHECK(RunConfig::from_file(dir / "saved.cfg").dump() == rc.dump());
  rc.save(dir / "saved2.cfg");
  CHECK(padtest::file_bytes(dir / "saved.cfg") == padtest::file_bytes(dir / "saved2.cfg"));
  fs::remove_all(dir);
}

TEST_CASE("cross-field validation catches inconsistent settings") {
  RunConfig rc = RunConfig::defaults();
  rc.set("hidden_dim", "64");  // encode_dims still ends at 128
  CHECK_THROWS_AS(rc.validate(), Error);

  rc = RunConfig::defaults();
  rc.set("transformer_dropout", "1.0");
  CHECK_THROWS_AS(rc.validate(), Error);

  rc = RunConfig::defaults();
  rc.set("constrain_loss_start_ratio", "1.5");
  CHECK_THROWS_AS(rc.validate(), Error);

  rc = RunConfig::defaults();
  rc.set("problems", "P1,P11");
  CHECK_THROWS_AS(rc.validate(), Error);

  rc = RunConfig::defaults();
  rc.set("diffusion_type", "cool");
  CHECK_THROWS_AS(rc.validate(), Error);

  rc = RunConfig::defaults();
  rc.set("attention_header_num", "5");  // 128 % 5 != 0
  CHECK_THROWS_AS(rc.validate(), Error);

  rc = RunConfig::defaults();
  rc.set("seed", "-4");
  CHECK(rc.geti("seed") == -4);
  CHECK_THROWS_AS(rc.seed("seed"), Error);
}
