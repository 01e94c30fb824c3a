#include "prunelab/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "prunelab/rng.hpp"
#include "prunelab/tape.hpp"

namespace prunelab {

namespace {

constexpr Index kRecordBytes = 3073;

void read_records_file(const std::string& path, Index class_count,
                       std::vector<RawRecord>* records) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw InvalidArgument("cannot open dataset file '" + path + "'");
  f.seekg(0, std::ios::end);
  const Index size = static_cast<Index>(f.tellg());
  f.seekg(0);
  if (size % kRecordBytes != 0) {
    std::ostringstream os;
    os << path << ": truncated record at offset " << (size / kRecordBytes) * kRecordBytes
       << " (file size " << size << " is not a multiple of " << kRecordBytes << ")";
    throw InvalidArgument(os.str());
  }
  const Index count = size / kRecordBytes;
  for (Index i = 0; i < count; ++i) {
    RawRecord r;
    f.read(reinterpret_cast<char*>(&r.label), 1);
    f.read(reinterpret_cast<char*>(r.pixels.data()), 3072);
    if (!f) throw InvalidArgument(path + ": read failure");
    if (r.label >= class_count) {
      std::ostringstream os;
      os << path << ": record " << i << " has label byte " << int(r.label) << " > "
         << (class_count - 1);
      throw InvalidArgument(os.str());
    }
    records->push_back(r);
  }
}

std::vector<RawRecord> read_records(const std::string& path, Index class_count) {
  namespace fs = std::filesystem;
  std::vector<RawRecord> records;
  if (fs::is_directory(path)) {
    std::vector<std::string> files;
    for (const auto& e : fs::directory_iterator(path)) {
      if (e.path().extension() == ".bin") files.push_back(e.path().string());
    }
    std::sort(files.begin(), files.end());
    require(!files.empty(), "no .bin files under '" + path + "'");
    for (const auto& f : files) read_records_file(f, class_count, &records);
  } else {
    read_records_file(path, class_count, &records);
  }
  return records;
}

Split make_split(const std::vector<RawRecord>& pool, const std::vector<Index>& ids,
                 const LayerShape& shape) {
  const Index n = static_cast<Index>(ids.size());
  Split s;
  s.images = Tensor({n, shape[0], shape[1], shape[2]});
  s.labels.resize(static_cast<std::size_t>(n));
  double* out = s.images.data();
  for (Index i = 0; i < n; ++i) {
    const RawRecord& r = pool[static_cast<std::size_t>(ids[static_cast<std::size_t>(i)])];
    s.labels[static_cast<std::size_t>(i)] = r.label;
    for (int p = 0; p < 3072; ++p) out[i * 3072 + p] = r.pixels[static_cast<std::size_t>(p)] / 255.0;
  }
  return s;
}

void normalize_split(Split* s, const std::array<double, 3>& mean, const std::array<double, 3>& std) {
  const Index n = s->size();
  const Index plane = s->images.extent(2) * s->images.extent(3);
  const Index chans = s->images.extent(1);
  double* d = s->images.data();
  for (Index i = 0; i < n; ++i)
    for (Index c = 0; c < chans; ++c) {
      const double m = mean[static_cast<std::size_t>(c)];
      const double sd = std[static_cast<std::size_t>(c)];
      double* p = d + (i * chans + c) * plane;
      for (Index j = 0; j < plane; ++j) p[j] = (p[j] - m) / sd;
    }
}

Dataset assemble(const std::vector<RawRecord>& pool, const DatasetSpec& spec) {
  const Index total = spec.train_size + spec.score_size + spec.test_size;
  require(spec.train_size >= 1 && spec.score_size >= 1 && spec.test_size >= 1,
          "every split needs at least one record");
  if (static_cast<Index>(pool.size()) < total) {
    std::ostringstream os;
    os << "dataset pool has " << pool.size() << " records, need " << total;
    throw InvalidArgument(os.str());
  }

  std::vector<Index> ids(pool.size());
  std::iota(ids.begin(), ids.end(), Index{0});
  Rng rng = make_rng(substream_seed(spec.subsample_seed, 0x5917ULL));
  std::shuffle(ids.begin(), ids.end(), rng);

  Dataset d;
  d.class_count = spec.class_count;
  d.image_shape = spec.image_shape;
  const auto at = [&](Index off, Index len) {
    return std::vector<Index>(ids.begin() + off, ids.begin() + off + len);
  };
  d.train = make_split(pool, at(0, spec.train_size), spec.image_shape);
  d.score = make_split(pool, at(spec.train_size, spec.score_size), spec.image_shape);
  d.test = make_split(pool, at(spec.train_size + spec.score_size, spec.test_size), spec.image_shape);

  // channel statistics from the train split only
  const Index plane = spec.image_shape[1] * spec.image_shape[2];
  for (Index c = 0; c < 3; ++c) {
    double sum = 0, sumsq = 0;
    const double* p = d.train.images.data();
    for (Index i = 0; i < d.train.size(); ++i)
      for (Index j = 0; j < plane; ++j) {
        const double v = p[(i * 3 + c) * plane + j];
        sum += v;
        sumsq += v * v;
      }
    const double count = static_cast<double>(d.train.size() * plane);
    const double mean = sum / count;
    const double var = std::max(0.0, sumsq / count - mean * mean);
    d.channel_mean[static_cast<std::size_t>(c)] = mean;
    d.channel_std[static_cast<std::size_t>(c)] = std::max(std::sqrt(var), 1e-8);
  }
  normalize_split(&d.train, d.channel_mean, d.channel_std);
  normalize_split(&d.score, d.channel_mean, d.channel_std);
  normalize_split(&d.test, d.channel_mean, d.channel_std);
  return d;
}

}  // namespace

Dataset load_cifar10(const std::string& path, const DatasetSpec& spec) {
  require(spec.image_shape == LayerShape{3, 32, 32}, "CIFAR-10 records are 3x32x32");
  const auto pool = read_records(path, spec.class_count);
  return assemble(pool, spec);
}

std::vector<RawRecord> synthetic_records(const DatasetSpec& spec) {
  require(spec.class_count >= 2, "synthetic data needs class_count >= 2");
  require(spec.separability >= 0.0 && spec.separability <= 1.0, "separability must lie in [0,1]");
  const Index total = spec.train_size + spec.score_size + spec.test_size;
  const Index pixels = spec.image_shape[0] * spec.image_shape[1] * spec.image_shape[2];
  require(pixels == 3072, "synthetic records use the 3x32x32 record layout");

  // fixed per-class patterns
  std::vector<std::vector<double>> patterns(static_cast<std::size_t>(spec.class_count));
  for (Index c = 0; c < spec.class_count; ++c) {
    Rng rng = make_rng(substream_seed(spec.subsample_seed, 0xC1A55ULL + static_cast<std::uint64_t>(c)));
    std::normal_distribution<double> g(0.0, 1.0);
    auto& pat = patterns[static_cast<std::size_t>(c)];
    pat.resize(static_cast<std::size_t>(pixels));
    for (auto& v : pat) v = g(rng);
  }

  const double s = spec.separability;
  std::vector<RawRecord> records(static_cast<std::size_t>(total));
  for (Index i = 0; i < total; ++i) {
    RawRecord& r = records[static_cast<std::size_t>(i)];
    const Index cls = i % spec.class_count;
    r.label = static_cast<std::uint8_t>(cls);
    Rng rng = make_rng(substream_seed(spec.subsample_seed, 0x1ABE1ULL + static_cast<std::uint64_t>(i)));
    std::normal_distribution<double> g(0.0, 1.0);
    const auto& pat = patterns[static_cast<std::size_t>(cls)];
    for (Index j = 0; j < pixels; ++j) {
      const double v = 128.0 + 50.0 * (s * pat[static_cast<std::size_t>(j)] + (1.0 - s) * g(rng));
      r.pixels[static_cast<std::size_t>(j)] =
          static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
    }
  }
  return records;
}

Dataset gen_synthetic(const DatasetSpec& spec) { return assemble(synthetic_records(spec), spec); }

Dataset load_dataset(const DatasetSpec& spec) {
  if (spec.source == DataSource::Cifar10Binary) return load_cifar10(spec.path, spec);
  return gen_synthetic(spec);
}

void write_cifar10_format(const std::vector<RawRecord>& records, const std::string& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw InvalidArgument("cannot open '" + path + "' for writing");
  for (const auto& r : records) {
    f.write(reinterpret_cast<const char*>(&r.label), 1);
    f.write(reinterpret_cast<const char*>(r.pixels.data()), 3072);
  }
  if (!f) throw InvalidArgument("short write to '" + path + "'");
}

BatchFeed::BatchFeed(const Split& split, Index batch_size, std::uint64_t seed, bool shuffle)
    : split_(&split), batch_size_(batch_size), shuffle_(shuffle), seed_(seed) {
  require(batch_size_ >= 1, "batch size must be >= 1");
  require(split.size() >= batch_size_, "split smaller than one batch");
  order_.resize(static_cast<std::size_t>(split.size()));
  std::iota(order_.begin(), order_.end(), Index{0});
  if (shuffle_) reshuffle();
}

void BatchFeed::reshuffle() {
  Rng rng = make_rng(substream_seed(seed_, epoch_));
  std::shuffle(order_.begin(), order_.end(), rng);
  ++epoch_;
}

Batch BatchFeed::next() {
  const Index n = split_->size();
  if (cursor_ + batch_size_ > n) {
    cursor_ = 0;
    if (shuffle_) reshuffle();
  }
  Batch batch;
  const Index chw = split_->images.size() / n;
  batch.images = Tensor({batch_size_, split_->images.extent(1), split_->images.extent(2),
                         split_->images.extent(3)});
  batch.labels.resize(static_cast<std::size_t>(batch_size_));
  for (Index i = 0; i < batch_size_; ++i) {
    const Index src = order_[static_cast<std::size_t>(cursor_ + i)];
    std::copy(split_->images.data() + src * chw, split_->images.data() + (src + 1) * chw,
              batch.images.data() + i * chw);
    batch.labels[static_cast<std::size_t>(i)] = split_->labels[static_cast<std::size_t>(src)];
  }
  cursor_ += batch_size_;
  return batch;
}

double evaluate_accuracy(const Network& net, const Split& split, Index batch_size) {
  const Index n = split.size();
  Index correct = 0;
  const Index chw = split.images.size() / n;
  for (Index off = 0; off < n; off += batch_size) {
    const Index len = std::min(batch_size, n - off);
    Tensor chunk({len, split.images.extent(1), split.images.extent(2), split.images.extent(3)});
    std::copy(split.images.data() + off * chw, split.images.data() + (off + len) * chw,
              chunk.data());
    std::vector<int> labels(split.labels.begin() + off, split.labels.begin() + off + len);
    Tape tape = forward(net, chunk, labels);
    const Tensor& logits = tape.nodes().back().output;
    const Index classes = logits.extent(1);
    for (Index b = 0; b < len; ++b) {
      const double* row = logits.data() + b * classes;
      Index best = 0;
      for (Index c = 1; c < classes; ++c)
        if (row[c] > row[best]) best = c;
      if (best == labels[static_cast<std::size_t>(b)]) ++correct;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(n);
}

}  // namespace prunelab
