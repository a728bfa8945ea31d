#pragma once

#include <cstdint>
#include <vector>

#include "tnce/contrast/encoder.h"
#include "tnce/numerics/matrix.h"
#include "tnce/synthdata/dataset.h"

namespace tnce {

enum class ProbeKind { linear, knn };

struct ProbeSplit {
  double train_fraction = 0.7;
  std::uint64_t seed = 1;
};

struct ProbeResult {
  double accuracy = 0.0;  // held-out split only
  ProbeKind kind = ProbeKind::linear;
  std::size_t knn_k = 0;
  double train_fraction = 0.7;
  std::uint64_t seed = 0;
  std::size_t train_count = 0;
  std::size_t test_count = 0;
};

// Single affine layer + softmax trained on frozen embeddings (full-batch
// Adam); reports held-out accuracy. Throws DegenerateLabelsError when the
// training split carries fewer than two classes.
ProbeResult linear_probe(const Matrix& embeddings,
                         const std::vector<std::size_t>& labels,
                         const ProbeSplit& split, std::size_t epochs = 200);

// Cosine k-nearest-neighbour majority vote on frozen embeddings.
ProbeResult knn_probe(const Matrix& embeddings,
                      const std::vector<std::size_t>& labels,
                      const ProbeSplit& split, std::size_t k = 5);

// Every sample embedded under one shared mask (empty = all present).
Matrix embed_dataset(const FusionEncoder& enc, const MultiModalDataset& ds,
                     const ModalityMask& mask = {});

// Raw view vectors of one modality as a matrix (probing single modalities).
Matrix modality_matrix(const MultiModalDataset& ds, std::size_t modality);

}  // namespace tnce
