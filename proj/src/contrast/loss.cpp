#include "tnce/contrast/loss.h"

#include <cmath>

#include "tnce/error.h"
#include "tnce/numerics/mlp.h"

namespace tnce {

void CriticConfig::validate() const {
  if (temperature <= 0.0)
    throw ConfigError("critic: temperature must be > 0");
}

namespace {

struct ScoreGrad {
  double value = 0.0;
  std::vector<double> d_a;  // d score / d a
  std::vector<double> d_b;  // d score / d b
};

ScoreGrad score_pair(CriticScore kind, std::span<const double> a,
                     std::span<const double> b, bool want_grads) {
  ScoreGrad s;
  const double ab = dot(a, b);
  if (kind == CriticScore::dot) {
    s.value = ab;
    if (want_grads) {
      s.d_a.assign(b.begin(), b.end());
      s.d_b.assign(a.begin(), a.end());
    }
    return s;
  }
  double na = l2_norm(a), nb = l2_norm(b);
  if (na < 1e-12) na = 1e-12;
  if (nb < 1e-12) nb = 1e-12;
  const double cosine = ab / (na * nb);
  s.value = cosine;
  if (want_grads) {
    s.d_a.resize(a.size());
    s.d_b.resize(b.size());
    for (std::size_t i = 0; i < a.size(); ++i)
      s.d_a[i] = b[i] / (na * nb) - cosine * a[i] / (na * na);
    for (std::size_t i = 0; i < b.size(); ++i)
      s.d_b[i] = a[i] / (na * nb) - cosine * b[i] / (nb * nb);
  }
  return s;
}

}  // namespace

NceLossResult tuple_info_nce_loss(
    const CriticConfig& critic, std::span<const double> anchor,
    std::span<const double> positive,
    const std::vector<std::span<const double>>& negatives) {
  critic.validate();
  if (negatives.empty())
    throw ConfigError("tuple_info_nce_loss: need at least one negative");

  const std::size_t d = anchor.size();
  const std::size_t n = 1 + negatives.size();
  std::vector<ScoreGrad> scores;
  scores.reserve(n);
  scores.push_back(score_pair(critic.score, anchor, positive, true));
  for (const auto& neg : negatives)
    scores.push_back(score_pair(critic.score, anchor, neg, true));

  std::vector<double> logits(n);
  for (std::size_t i = 0; i < n; ++i) logits[i] = scores[i].value / critic.temperature;
  SceResult sce = softmax_cross_entropy(logits, 0);

  NceLossResult r;
  r.loss = sce.loss;
  r.anchor_grad.assign(d, 0.0);
  r.pos_grad.assign(d, 0.0);
  r.neg_grads.assign(negatives.size(), std::vector<double>(d, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    const double d_score = sce.grad[i] / critic.temperature;
    for (std::size_t j = 0; j < d; ++j)
      r.anchor_grad[j] += d_score * scores[i].d_a[j];
    auto& target = (i == 0) ? r.pos_grad : r.neg_grads[i - 1];
    for (std::size_t j = 0; j < d; ++j) target[j] += d_score * scores[i].d_b[j];
  }
  return r;
}

BatchLossResult batch_tnce_loss(const CriticConfig& critic,
                                const Matrix& anchor_embs, const Matrix& pos_embs,
                                const Matrix& neg_embs, std::size_t negs_per_anchor,
                                bool want_grads) {
  critic.validate();
  const std::size_t b = anchor_embs.rows;
  const std::size_t d = anchor_embs.cols;
  if (pos_embs.rows != b || pos_embs.cols != d)
    throw ShapeError("batch_tnce_loss: positives " + shape_string(pos_embs) +
                     " vs anchors " + shape_string(anchor_embs));
  if (negs_per_anchor == 0 || neg_embs.rows != b * negs_per_anchor ||
      neg_embs.cols != d)
    throw ShapeError("batch_tnce_loss: negatives " + shape_string(neg_embs) +
                     " do not match " + std::to_string(b) + " anchors x " +
                     std::to_string(negs_per_anchor));

  BatchLossResult result;
  if (want_grads) {
    result.anchor_grads = Matrix(b, d);
    result.pos_grads = Matrix(b, d);
    result.neg_grads = Matrix(b * negs_per_anchor, d);
  }
  const double inv_b = 1.0 / static_cast<double>(b);
  for (std::size_t i = 0; i < b; ++i) {
    std::vector<std::span<const double>> negs;
    negs.reserve(negs_per_anchor);
    for (std::size_t j = 0; j < negs_per_anchor; ++j)
      negs.push_back(neg_embs.row(i * negs_per_anchor + j));
    NceLossResult r =
        tuple_info_nce_loss(critic, anchor_embs.row(i), pos_embs.row(i), negs);
    result.loss += r.loss * inv_b;
    if (!want_grads) continue;
    for (std::size_t c = 0; c < d; ++c) {
      result.anchor_grads.at(i, c) = r.anchor_grad[c] * inv_b;
      result.pos_grads.at(i, c) = r.pos_grad[c] * inv_b;
    }
    for (std::size_t j = 0; j < negs_per_anchor; ++j)
      for (std::size_t c = 0; c < d; ++c)
        result.neg_grads.at(i * negs_per_anchor + j, c) = r.neg_grads[j][c] * inv_b;
  }
  return result;
}

}  // namespace tnce
