#pragma once

// Binary batch files: a 32-byte header followed by column-major float64
// paths, plus a JSON sidecar carrying the model and geometry.

#include <cstddef>
#include <cstdint>
#include <filesystem>

#include "superconc/sampler.hpp"

namespace superconc {

inline constexpr char kBatchMagic[8] = {'S', 'U', 'P', 'C', 'B', 'A', 'T', '1'};
inline constexpr std::uint32_t kBatchVersion = 1;

struct BatchHeader {
    std::uint32_t version = kBatchVersion;
    std::uint64_t n = 0;
    std::uint64_t batch = 0;
    std::uint32_t float64 = 1;
};

/// Writes `path` and `path` + ".json".
void write_batch(const SampleBatch& batch, const std::filesystem::path& path);

BatchHeader read_batch_header(const std::filesystem::path& path);

/// Reads the binary file and its sidecar. Throws Error on a malformed file.
SampleBatch read_batch(const std::filesystem::path& path);

}  // namespace superconc
