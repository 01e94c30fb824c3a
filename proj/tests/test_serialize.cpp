#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <unistd.h>

#include "prunelab/csv.hpp"
#include "prunelab/serialize.hpp"

using namespace prunelab;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("prunelab_ser_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_SUITE("serialize") {
  TEST_CASE("weights round-trip bit-exactly") {
    TempDir tmp;
    const Network net = build_network(minicnn_a(4), 17);
    const std::string path = (tmp.path / "w.plab").string();
    save_weights(net, path);
    const Network back = load_weights(net.spec, path);
    REQUIRE(back.weights.size() == net.weights.size());
    for (std::size_t i = 0; i < net.weights.size(); ++i) {
      CHECK(std::memcmp(back.weights[i].data(), net.weights[i].data(),
                        sizeof(double) * static_cast<std::size_t>(net.weights[i].size())) == 0);
      CHECK(std::memcmp(back.biases[i].data(), net.biases[i].data(),
                        sizeof(double) * static_cast<std::size_t>(net.biases[i].size())) == 0);
    }
    // saving the loaded network reproduces the same bytes
    const std::string path2 = (tmp.path / "w2.plab").string();
    save_weights(back, path2);
    CHECK(read_text_file(path) == read_text_file(path2));
  }

  TEST_CASE("corrupted files are rejected with a reason") {
    TempDir tmp;
    const Network net = build_network(minicnn_a(4), 18);
    const std::string path = (tmp.path / "w.plab").string();
    save_weights(net, path);

    std::string bytes = read_text_file(path);
    bytes[0] = 'X';
    write_text_file(path, bytes);
    CHECK_THROWS_WITH_AS(load_weights(net.spec, path), doctest::Contains("magic"),
                         InvalidArgument);

    save_weights(net, path);
    bytes = read_text_file(path);
    write_text_file(path, bytes.substr(0, bytes.size() - 9));
    CHECK_THROWS_WITH_AS(load_weights(net.spec, path), doctest::Contains("truncated"),
                         InvalidArgument);

    // shape mismatch vs a different spec
    save_weights(net, path);
    CHECK_THROWS_AS(load_weights(minicnn_a(2), path), InvalidArgument);
  }

  TEST_CASE("netspec files round-trip") {
    TempDir tmp;
    const NetworkSpec spec = minicnn_v(2);
    const std::string path = (tmp.path / "net.netspec").string();
    save_netspec(spec, path);
    CHECK(load_netspec(path) == spec);
  }

  TEST_CASE("content hash tracks the weight bytes") {
    Network net = build_network(minicnn_a(4), 19);
    const std::uint64_t h1 = weights_content_hash(net);
    CHECK(weights_content_hash(net) == h1);
    net.weights[0][0] += 1e-9;
    CHECK(weights_content_hash(net) != h1);
  }
}
