#pragma once

#include <cstdint>
#include <string>

#include "prunelab/network.hpp"

namespace prunelab {

/// Binary weight file: magic "PLAB", u16 version, u32 parameter-layer count,
/// then per layer the weight and bias tensors, each as u32 rank, u64 extents,
/// raw little-endian float64 data. Round-trips bit-exactly.
void save_weights(const Network& net, const std::string& path);

/// Loads weights saved by save_weights into a network built from `spec`.
/// Shapes must match the spec exactly.
Network load_weights(const NetworkSpec& spec, const std::string& path);

void save_netspec(const NetworkSpec& spec, const std::string& path);
NetworkSpec load_netspec(const std::string& path);

/// FNV-1a 64 over the serialized weight bytes; stable content id for
/// manifests.
std::uint64_t weights_content_hash(const Network& net);

std::uint64_t fnv1a64(const void* data, std::size_t size, std::uint64_t seed = 0xcbf29ce484222325ULL);

}  // namespace prunelab
