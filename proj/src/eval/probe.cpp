#include "tnce/eval/probe.h"

#include <algorithm>
#include <cmath>
#include <set>

#include "tnce/error.h"
#include "tnce/numerics/mlp.h"
#include "tnce/numerics/optimizer.h"

namespace tnce {

namespace {

struct Split {
  std::vector<std::size_t> train, test;
};

Split make_split(std::size_t n, const ProbeSplit& split) {
  if (n < 4) throw ConfigError("probe: need at least 4 samples");
  if (split.train_fraction <= 0.0 || split.train_fraction >= 1.0)
    throw ConfigError("probe: train_fraction must lie in (0,1)");
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  RngState rng(split.seed);
  rng.shuffle(idx);
  const std::size_t train_n = std::max<std::size_t>(
      1, static_cast<std::size_t>(split.train_fraction * static_cast<double>(n)));
  Split s;
  s.train.assign(idx.begin(), idx.begin() + train_n);
  s.test.assign(idx.begin() + train_n, idx.end());
  if (s.test.empty()) throw ConfigError("probe: empty test split");
  return s;
}

void check_labels(const Matrix& embeddings, const std::vector<std::size_t>& labels,
                  const std::vector<std::size_t>& train_idx) {
  if (labels.size() != embeddings.rows)
    throw ShapeError("probe: labels do not match embeddings");
  std::set<std::size_t> classes;
  for (std::size_t i : train_idx) classes.insert(labels[i]);
  if (classes.size() < 2)
    throw DegenerateLabelsError("probe: training split has a single class");
}

}  // namespace

ProbeResult linear_probe(const Matrix& embeddings,
                         const std::vector<std::size_t>& labels,
                         const ProbeSplit& split, std::size_t epochs) {
  Split s = make_split(embeddings.rows, split);
  check_labels(embeddings, labels, s.train);
  const std::size_t classes =
      1 + *std::max_element(labels.begin(), labels.end());
  const std::size_t d = embeddings.cols;

  RngState rng(split.seed ^ 0x9e3779b97f4a7c15ULL);
  MlpParams head = MlpParams::random_init({d, classes}, Activation::identity, rng);

  OptimizerConfig opt_cfg;
  opt_cfg.kind = OptKind::adam;
  opt_cfg.learning_rate = 0.05;
  opt_cfg.weight_decay = 1e-4;
  opt_cfg.schedule = LrSchedule::constant;
  OptimizerState optimizer(opt_cfg);

  Matrix train_embs(s.train.size(), d);
  for (std::size_t r = 0; r < s.train.size(); ++r)
    std::copy(embeddings.row(s.train[r]).begin(), embeddings.row(s.train[r]).end(),
              train_embs.row(r).begin());

  for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
    MlpCache cache;
    Matrix logits = mlp_forward(head, train_embs, &cache);
    Matrix upstream(logits.rows, logits.cols);
    const double inv = 1.0 / static_cast<double>(logits.rows);
    for (std::size_t r = 0; r < logits.rows; ++r) {
      SceResult sce = softmax_cross_entropy(logits.row(r), labels[s.train[r]]);
      for (std::size_t c = 0; c < logits.cols; ++c)
        upstream.at(r, c) = sce.grad[c] * inv;
    }
    MlpGrads grads = mlp_backward(head, cache, upstream);
    optimizer.step(param_views(head), grad_views(grads));
  }

  std::size_t correct = 0;
  for (std::size_t i : s.test) {
    Matrix one(1, d);
    std::copy(embeddings.row(i).begin(), embeddings.row(i).end(), one.row(0).begin());
    Matrix logits = mlp_forward(head, one);
    std::size_t arg = 0;
    for (std::size_t c = 1; c < logits.cols; ++c)
      if (logits.at(0, c) > logits.at(0, arg)) arg = c;
    if (arg == labels[i]) ++correct;
  }

  ProbeResult r;
  r.accuracy = static_cast<double>(correct) / static_cast<double>(s.test.size());
  r.kind = ProbeKind::linear;
  r.train_fraction = split.train_fraction;
  r.seed = split.seed;
  r.train_count = s.train.size();
  r.test_count = s.test.size();
  return r;
}

ProbeResult knn_probe(const Matrix& embeddings,
                      const std::vector<std::size_t>& labels,
                      const ProbeSplit& split, std::size_t k) {
  if (k < 1) throw ConfigError("knn_probe: k must be >= 1");
  Split s = make_split(embeddings.rows, split);
  check_labels(embeddings, labels, s.train);
  const std::size_t classes =
      1 + *std::max_element(labels.begin(), labels.end());

  std::size_t correct = 0;
  std::vector<std::pair<double, std::size_t>> scored(s.train.size());
  for (std::size_t i : s.test) {
    for (std::size_t t = 0; t < s.train.size(); ++t) {
      const std::size_t j = s.train[t];
      double na = l2_norm(embeddings.row(i)), nb = l2_norm(embeddings.row(j));
      double cosine = dot(embeddings.row(i), embeddings.row(j)) /
                      std::max(1e-12, na * nb);
      scored[t] = {cosine, labels[j]};
    }
    const std::size_t kk = std::min(k, scored.size());
    std::partial_sort(scored.begin(), scored.begin() + kk, scored.end(),
                      [](const auto& a, const auto& b) { return a.first > b.first; });
    std::vector<std::size_t> votes(classes, 0);
    for (std::size_t t = 0; t < kk; ++t) ++votes[scored[t].second];
    std::size_t arg = 0;
    for (std::size_t c = 1; c < classes; ++c)
      if (votes[c] > votes[arg]) arg = c;
    if (arg == labels[i]) ++correct;
  }

  ProbeResult r;
  r.accuracy = static_cast<double>(correct) / static_cast<double>(s.test.size());
  r.kind = ProbeKind::knn;
  r.knn_k = k;
  r.train_fraction = split.train_fraction;
  r.seed = split.seed;
  r.train_count = s.train.size();
  r.test_count = s.test.size();
  return r;
}

Matrix embed_dataset(const FusionEncoder& enc, const MultiModalDataset& ds,
                     const ModalityMask& mask) {
  const std::size_t chunk = 512;
  Matrix out(ds.size(), enc.embedding_dim());
  std::vector<ModalityMask> masks;
  for (std::size_t start = 0; start < ds.size(); start += chunk) {
    const std::size_t b = std::min(chunk, ds.size() - start);
    std::vector<const Tuple*> ptrs(b);
    for (std::size_t i = 0; i < b; ++i) ptrs[i] = &ds.samples[start + i];
    masks.assign(mask.empty() ? 0 : b, mask);
    Matrix embs = encode_batch(enc, ptrs, masks);
    for (std::size_t i = 0; i < b; ++i)
      std::copy(embs.row(i).begin(), embs.row(i).end(), out.row(start + i).begin());
  }
  return out;
}

Matrix modality_matrix(const MultiModalDataset& ds, std::size_t modality) {
  if (modality >= ds.num_modalities())
    throw ConfigError("modality_matrix: index out of range");
  Matrix out(ds.size(), ds.specs[modality].dim);
  for (std::size_t i = 0; i < ds.size(); ++i)
    std::copy(ds.samples[i][modality].begin(), ds.samples[i][modality].end(),
              out.row(i).begin());
  return out;
}

}  // namespace tnce
