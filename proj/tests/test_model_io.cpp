#include "dga/model_io.hpp"

#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "doctest.h"
#include "dga/eval.hpp"

using namespace dga;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
  static int counter = 0;
  fs::path dir = fs::temp_directory_path() /
                 ("dga_io_test_" + std::to_string(::getpid()) + "_" +
                  std::to_string(counter++));
  fs::create_directories(dir);
  return dir;
}

DeepDga trained_tiny(std::uint64_t seed) {
  Rng data_rng(seed);
  const BinaryDataset data = synth_manifold(120, 10, 3, data_rng);
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.seed = seed;
  cfg.beta.ramp_epochs = 2;
  StageSchedule sched;
  sched.stages = {{0.5, 1, 3}, {1.0, 1, 3}};
  return greedy_pretrain(data, {ModelShape{10, 7, {}, {}}, ModelShape{7, 5, {}, {}}},
                         sched, cfg);
}

std::string read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

void write_bytes(const fs::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace

TEST_CASE("save, load, save is byte-identical") {
  const fs::path dir = temp_dir();
  const DeepDga m = trained_tiny(1);

  const nlohmann::json run{{"seed", 1}, {"config_hash", "deadbeefdeadbeef"}};
  save_model(m, (dir / "a.dga").string(), run);
  const DeepDga loaded = load_model((dir / "a.dga").string());
  save_model(loaded, (dir / "b.dga").string(), run);

  CHECK(read_bytes(dir / "a.dga") == read_bytes(dir / "b.dga"));
  CHECK(read_model_run_meta((dir / "a.dga").string()).at("seed") == 1);
}

TEST_CASE("loaded model reproduces log P* on probes") {
  const fs::path dir = temp_dir();
  const DeepDga m = trained_tiny(2);
  save_model(m, (dir / "m.dga").string());
  const DeepDga loaded = load_model((dir / "m.dga").string());

  Rng rng(3);
  for (int probe = 0; probe < 100; ++probe) {
    Vector x(10);
    for (Index i = 0; i < 10; ++i) {
      x[i] = rng.bernoulli(0.5) ? 1.0 : 0.0;
    }
    CHECK(log_p_star(loaded, x) == doctest::Approx(log_p_star(m, x)).epsilon(1e-12));
  }
}

TEST_CASE("truncated files are rejected without a partial model") {
  const fs::path dir = temp_dir();
  const DeepDga m = trained_tiny(4);
  save_model(m, (dir / "full.dga").string());
  const std::string bytes = read_bytes(dir / "full.dga");

  for (std::size_t cut : {std::size_t(4), bytes.size() / 2, bytes.size() - 3}) {
    write_bytes(dir / "cut.dga", bytes.substr(0, cut));
    CHECK_THROWS_AS(load_model((dir / "cut.dga").string()), FormatError);
  }
}

TEST_CASE("corrupted parameter blocks fail their checksum") {
  const fs::path dir = temp_dir();
  const DeepDga m = trained_tiny(5);
  save_model(m, (dir / "ok.dga").string());
  std::string bytes = read_bytes(dir / "ok.dga");

  // flip one byte deep inside the parameter area
  bytes[bytes.size() - 40] = static_cast<char>(bytes[bytes.size() - 40] ^ 0x5A);
  write_bytes(dir / "bad.dga", bytes);
  CHECK_THROWS_WITH_AS(load_model((dir / "bad.dga").string()),
                       doctest::Contains("checksum"), FormatError);
}

TEST_CASE("wrong magic and version are rejected") {
  const fs::path dir = temp_dir();
  const DeepDga m = trained_tiny(6);
  save_model(m, (dir / "ok.dga").string());
  std::string bytes = read_bytes(dir / "ok.dga");

  std::string wrong_magic = bytes;
  wrong_magic[0] = 'X';
  write_bytes(dir / "magic.dga", wrong_magic);
  CHECK_THROWS_WITH_AS(load_model((dir / "magic.dga").string()),
                       doctest::Contains("magic"), FormatError);

  std::string wrong_version = bytes;
  wrong_version[8] = 9;
  write_bytes(dir / "version.dga", wrong_version);
  CHECK_THROWS_WITH_AS(load_model((dir / "version.dga").string()),
                       doctest::Contains("version"), FormatError);
}

TEST_CASE("crc32 matches the standard test vector") {
  // IEEE CRC-32 of "123456789"
  CHECK(crc32("123456789", 9) == 0xCBF43926u);
}
