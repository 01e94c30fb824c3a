#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "prunelab/network.hpp"
#include "prunelab/tensor.hpp"

namespace prunelab {

/// Raw dataset record in the CIFAR-10 binary layout: one label byte followed
/// by 3*32*32 pixel bytes, channel-planar (R, G, B), row-major.
struct RawRecord {
  std::uint8_t label = 0;
  std::array<std::uint8_t, 3072> pixels{};
};

enum class DataSource { Cifar10Binary, Synthetic };

struct DatasetSpec {
  DataSource source = DataSource::Synthetic;
  std::string path;  // file or directory of *.bin for Cifar10Binary
  Index class_count = 10;
  LayerShape image_shape{3, 32, 32};
  Index train_size = 2000;
  Index score_size = 500;
  Index test_size = 500;
  std::uint64_t subsample_seed = 1;
  double separability = 0.15;  // synthetic only; 0 = classes indistinguishable
};

struct Split {
  Tensor images;  // [N, C, H, W], normalized
  std::vector<int> labels;
  Index size() const { return static_cast<Index>(labels.size()); }
};

/// Train/score/test splits are disjoint subsamples of the record pool.
/// Pixel values are scaled to [0,1] then normalized per channel with
/// statistics computed on the train split only.
struct Dataset {
  Split train, score, test;
  std::array<double, 3> channel_mean{};
  std::array<double, 3> channel_std{};
  Index class_count = 10;
  LayerShape image_shape{3, 32, 32};
};

Dataset load_cifar10(const std::string& path, const DatasetSpec& spec);
Dataset gen_synthetic(const DatasetSpec& spec);
/// Dispatches on spec.source.
Dataset load_dataset(const DatasetSpec& spec);

/// Synthetic raw records (exact bytes the generator feeds the pipeline);
/// count = train+score+test from the spec. Useful for writing stand-in files
/// in the CIFAR-10 binary format.
std::vector<RawRecord> synthetic_records(const DatasetSpec& spec);
void write_cifar10_format(const std::vector<RawRecord>& records, const std::string& path);

struct Batch {
  Tensor images;
  std::vector<int> labels;
};

/// Cycling batch source over one split. With shuffle=true the order is
/// reshuffled every epoch from the feed's own rng; otherwise batches walk the
/// split in stored order. Deterministic per seed either way.
class BatchFeed {
 public:
  BatchFeed(const Split& split, Index batch_size, std::uint64_t seed, bool shuffle);
  Batch next();
  Index batch_size() const { return batch_size_; }

 private:
  void reshuffle();
  const Split* split_;
  Index batch_size_;
  bool shuffle_;
  std::uint64_t seed_;
  std::uint64_t epoch_ = 0;
  std::vector<Index> order_;
  Index cursor_ = 0;
};

double evaluate_accuracy(const Network& net, const Split& split, Index batch_size = 64);

}  // namespace prunelab
