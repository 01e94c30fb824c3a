#include "prunelab/serialize.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

static_assert(std::endian::native == std::endian::little,
              "PLAB weight files are little-endian; big-endian hosts are unsupported");

namespace prunelab {

namespace {

constexpr char kMagic[4] = {'P', 'L', 'A', 'B'};
constexpr std::uint16_t kVersion = 1;

void append_bytes(std::string& out, const void* p, std::size_t n) {
  out.append(static_cast<const char*>(p), n);
}

template <typename T>
void append_pod(std::string& out, T v) {
  append_bytes(out, &v, sizeof(T));
}

void append_tensor(std::string& out, const Tensor& t) {
  append_pod<std::uint32_t>(out, static_cast<std::uint32_t>(t.rank()));
  for (Index e : t.shape()) append_pod<std::uint64_t>(out, static_cast<std::uint64_t>(e));
  append_bytes(out, t.data(), static_cast<std::size_t>(t.size()) * sizeof(double));
}

class Reader {
 public:
  Reader(const std::string& bytes, const std::string& path) : bytes_(bytes), path_(path) {}

  template <typename T>
  T pod() {
    T v;
    take(&v, sizeof(T));
    return v;
  }
  void take(void* dst, std::size_t n) {
    if (pos_ + n > bytes_.size()) {
      std::ostringstream os;
      os << path_ << ": truncated weight file at offset " << pos_;
      throw InvalidArgument(os.str());
    }
    std::memcpy(dst, bytes_.data() + pos_, n);
    pos_ += n;
  }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  const std::string& bytes_;
  std::string path_;
  std::size_t pos_ = 0;
};

std::string serialize_weights(const Network& net) {
  std::string out;
  append_bytes(out, kMagic, 4);
  append_pod<std::uint16_t>(out, kVersion);
  append_pod<std::uint32_t>(out, static_cast<std::uint32_t>(net.weights.size()));
  for (std::size_t i = 0; i < net.weights.size(); ++i) {
    append_tensor(out, net.weights[i]);
    append_tensor(out, net.biases[i]);
  }
  return out;
}

Tensor read_tensor(Reader& r) {
  const auto rank = r.pod<std::uint32_t>();
  require(rank <= 8, "implausible tensor rank in weight file");
  std::vector<Index> shape(rank);
  for (auto& e : shape) e = static_cast<Index>(r.pod<std::uint64_t>());
  Tensor t(shape);
  r.take(t.data(), static_cast<std::size_t>(t.size()) * sizeof(double));
  return t;
}

}  // namespace

void save_weights(const Network& net, const std::string& path) {
  const std::string bytes = serialize_weights(net);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw InvalidArgument("cannot open '" + path + "' for writing");
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw InvalidArgument("short write to '" + path + "'");
}

Network load_weights(const NetworkSpec& spec, const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw InvalidArgument("cannot open weight file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  const std::string bytes = ss.str();

  Reader r(bytes, path);
  char magic[4];
  r.take(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0)
    throw InvalidArgument(path + ": bad magic, not a PLAB weight file");
  const auto version = r.pod<std::uint16_t>();
  if (version != kVersion) {
    std::ostringstream os;
    os << path << ": unsupported PLAB version " << version;
    throw InvalidArgument(os.str());
  }

  Network net = build_network(spec, 0);
  const auto count = r.pod<std::uint32_t>();
  if (count != net.weights.size()) {
    std::ostringstream os;
    os << path << ": file has " << count << " parameter layers, spec has " << net.weights.size();
    throw InvalidArgument(os.str());
  }
  for (std::size_t i = 0; i < net.weights.size(); ++i) {
    Tensor w = read_tensor(r);
    Tensor b = read_tensor(r);
    require(w.shape() == net.weights[i].shape(), path + ": weight shape mismatch vs spec");
    require(b.shape() == net.biases[i].shape(), path + ": bias shape mismatch vs spec");
    net.weights[i] = std::move(w);
    net.biases[i] = std::move(b);
  }
  require(r.remaining() == 0, path + ": trailing bytes after weights");
  for (const auto& w : net.weights)
    require(w.all_finite(), path + ": non-finite values in weight file");
  return net;
}

void save_netspec(const NetworkSpec& spec, const std::string& path) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw InvalidArgument("cannot open '" + path + "' for writing");
  f << spec.serialize();
}

NetworkSpec load_netspec(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw InvalidArgument("cannot open netspec file '" + path + "'");
  return NetworkSpec::parse(f);
}

std::uint64_t fnv1a64(const void* data, std::size_t size, std::uint64_t seed) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = seed;
  for (std::size_t i = 0; i < size; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t weights_content_hash(const Network& net) {
  const std::string bytes = serialize_weights(net);
  return fnv1a64(bytes.data(), bytes.size());
}

}  // namespace prunelab
