#pragma once

#include <string>

#include "tnce/synthdata/dataset.h"

namespace tnce {

// Binary dataset file: magic + version, little-endian fixed-width header
// (K, N, per-modality specs, label flag), provenance string, then raw 64-bit
// values. Round trips are bit-exact. A human-readable sidecar `<path>.meta`
// carries the generator config.
void save_dataset(const MultiModalDataset& ds, const std::string& path);

MultiModalDataset load_dataset(const std::string& path);

}  // namespace tnce
