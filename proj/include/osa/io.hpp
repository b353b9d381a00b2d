#pragma once

#include <filesystem>

#include "osa/dataset.hpp"

namespace osa {

// OSAE v1, little-endian:
//   magic "OSAE" | version u16 = 1 | flags u16 (bit 0: labels present) |
//   n u64 | d u32 | reserved u32 = 0 |
//   X: n*d binary32 row-major | Y: n*d binary32 row-major |
//   labels: n bytes of {0,1} when flagged.
// No compression, no checksum.

void save(const PairDataset& ds, const std::filesystem::path& path);
PairDataset load(const std::filesystem::path& path);

}  // namespace osa
