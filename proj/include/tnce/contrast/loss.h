#pragma once

#include <span>
#include <vector>

#include "tnce/numerics/matrix.h"

namespace tnce {

enum class CriticScore { dot, cosine };

struct CriticConfig {
  CriticScore score = CriticScore::cosine;
  double temperature = 0.1;

  void validate() const;  // ConfigError if temperature <= 0
};

struct NceLossResult {
  double loss = 0.0;
  std::vector<double> anchor_grad;
  std::vector<double> pos_grad;
  std::vector<std::vector<double>> neg_grads;
};

// Softmax cross-entropy over [score(anchor,pos), score(anchor,neg_1), ...]
// divided by temperature, target 0. N in the ln N - L bound is
// 1 + negatives.size().
NceLossResult tuple_info_nce_loss(const CriticConfig& critic,
                                  std::span<const double> anchor,
                                  std::span<const double> positive,
                                  const std::vector<std::span<const double>>& negatives);

struct BatchLossResult {
  double loss = 0.0;       // mean over anchors
  Matrix anchor_grads;     // B x d
  Matrix pos_grads;        // B x d
  Matrix neg_grads;        // (B*m) x d, anchor-major
};

// Batch form over embedding matrices; negatives are anchor-major rows of
// neg_embs (m rows per anchor). Gradients carry the 1/B mean factor.
BatchLossResult batch_tnce_loss(const CriticConfig& critic,
                                const Matrix& anchor_embs, const Matrix& pos_embs,
                                const Matrix& neg_embs, std::size_t negs_per_anchor,
                                bool want_grads = true);

}  // namespace tnce
