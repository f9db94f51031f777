#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "nashae/checkpoint.hpp"
#include "nashae/errors.hpp"
#include "oracles.hpp"

using namespace nashae;

TEST_CASE("checkpoint round-trips parameters, moments and step count") {
  MlpNetwork net{{4, 3, Activation::Selu}, {3, 2, Activation::Sigmoid}};
  kaiming_init(net, 3);
  (void)mlp_forward(net, oracle::random_matrix(5, 4, 1));
  (void)mlp_backward(net, oracle::random_matrix(5, 2, 2));
  adam_step(net, AdamConfig{});

  std::stringstream ss;
  write_checkpoint(ss, net);
  const MlpNetwork back = read_checkpoint(ss);
  CHECK(back.same_parameters(net));
  CHECK(back.step_count() == 1);
  for (std::size_t i = 0; i < net.layers().size(); ++i) {
    CHECK(back.layers()[i].activation == net.layers()[i].activation);
    CHECK(back.layers()[i].adam_m_weights == net.layers()[i].adam_m_weights);
    CHECK(back.layers()[i].adam_v_bias == net.layers()[i].adam_v_bias);
  }
}

TEST_CASE("checkpoint header layout") {
  MlpNetwork net{{2, 1, Activation::Relu}};
  std::stringstream ss;
  write_checkpoint(ss, net);
  const std::string bytes = ss.str();
  CHECK(bytes.substr(0, 8) == "NASHAENN");
  // magic + version + L + step + one layer header + (2+1) params + 2*(2+1) moments
  CHECK(bytes.size() == 8 + 4 + 4 + 8 + 12 + 3 * 8 + 6 * 8);
  CHECK(static_cast<unsigned char>(bytes[8]) == 1);  // little-endian version
}

TEST_CASE("corrupt checkpoints are rejected") {
  std::stringstream bad("NOTACKPT");
  CHECK_THROWS_AS(read_checkpoint(bad), DataError);
  MlpNetwork net{{2, 2, Activation::Identity}};
  std::stringstream ss;
  write_checkpoint(ss, net);
  std::string truncated = ss.str().substr(0, 40);
  std::stringstream tr(truncated);
  CHECK_THROWS_AS(read_checkpoint(tr), DataError);
  CHECK_THROWS_AS(load_checkpoint("/nonexistent/path/x.bin"), DataError);

  // Second layer claims 3 inputs after a 2-wide first layer.
  MlpNetwork two{{2, 2, Activation::Identity}, {2, 1, Activation::Identity}};
  std::stringstream two_ss;
  write_checkpoint(two_ss, two);
  std::string broken = two_ss.str();
  broken[24 + 12] = 3;
  std::stringstream br(broken);
  CHECK_THROWS_AS(read_checkpoint(br), DataError);

  const auto path = std::filesystem::temp_directory_path() / "nashae_ckpt_trailing.bin";
  std::ofstream(path, std::ios::binary) << ss.str() << "x";
  CHECK_THROWS_AS(load_checkpoint(path), DataError);
  std::filesystem::remove(path);
}

TEST_CASE("checkpoint files are byte-identical for identical nets") {
  const auto dir = std::filesystem::temp_directory_path() / "nashae_ckpt_test";
  std::filesystem::create_directories(dir);
  MlpNetwork a{{3, 3, Activation::Selu}};
  kaiming_init(a, 9);
  save_checkpoint(dir / "a.bin", a);
  save_checkpoint(dir / "b.bin", a);
  std::ifstream fa(dir / "a.bin", std::ios::binary), fb(dir / "b.bin", std::ios::binary);
  const std::string sa((std::istreambuf_iterator<char>(fa)), {});
  const std::string sb((std::istreambuf_iterator<char>(fb)), {});
  CHECK(sa == sb);
  CHECK(load_checkpoint(dir / "a.bin").same_parameters(a));
  std::filesystem::remove_all(dir);
}
