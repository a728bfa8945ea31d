#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tnce/contrast/batch.h"
#include "tnce/contrast/encoder.h"
#include "tnce/contrast/loss.h"
#include "tnce/numerics/optimizer.h"

namespace tnce {

enum class NegStrategy {
  proposal,       // q_alpha mixture: regular + per-modality disturbed
  naive_product,  // all modalities scrambled at once
};

struct TrainSettings {
  NegativeProposal proposal;  // used when strategy == proposal
  AugmentationPolicy policy;  // defaults to identity when empty
  NegStrategy strategy = NegStrategy::proposal;
  CriticConfig critic;
  OptimizerConfig optimizer;

  std::size_t modality_hidden = 64;
  std::size_t modality_out = 32;
  std::size_t fusion_hidden = 64;
  std::size_t embedding_dim = 32;
  Activation activation = Activation::relu;

  std::size_t batch_size = 32;
  std::size_t negatives_per_anchor = 15;  // N = this + 1
  std::size_t steps = 500;
  double dropout_prob = 0.0;
  std::uint64_t seed = 1;

  // Plateau stop: after min_steps, stop once the mean loss over consecutive
  // windows changes by less than plateau_rel_tol relatively. window = 0
  // disables and the run uses exactly `steps`.
  std::size_t plateau_window = 0;
  double plateau_rel_tol = 1e-4;
  std::size_t min_steps = 0;

  // Fixed masks for every batch (bound harness); empty = use dropout_prob.
  ModalityMask anchor_mask_override;
  ModalityMask candidate_mask_override;

  EncoderArch arch_for(const MultiModalDataset& ds) const;
};

struct LossPoint {
  std::size_t step = 0;
  double loss = 0.0;
  double bound = 0.0;  // ln N - loss
};

struct TrainResult {
  FusionEncoder encoder;
  std::vector<LossPoint> curve;
  std::string manifest;  // key = value text of every hyperparameter + seed
  std::size_t steps_run = 0;
  bool plateau_converged = false;
};

// Assembles anchors, augmented positives and per-anchor negatives, then
// applies dropout (or the fixed mask overrides).
ContrastiveBatch build_contrastive_batch(const MultiModalDataset& ds,
                                         const TrainSettings& cfg,
                                         std::size_t batch_size, RngState& rng);

// Forward-only loss of the encoder on an assembled batch.
double batch_forward_loss(const FusionEncoder& enc, const ContrastiveBatch& batch,
                          const CriticConfig& critic);

// Forward + backward; returns mean loss and accumulates parameter grads.
double batch_backward_loss(const FusionEncoder& enc, const ContrastiveBatch& batch,
                           const CriticConfig& critic, EncoderGrads& grads);

// Full training loop. Loss curve recorded every step; NaN loss raises
// TrainingError naming the step.
TrainResult train_contrastive(const MultiModalDataset& ds, const TrainSettings& cfg);

// Mean loss over freshly sampled evaluation batches (no updates); used for
// bound estimates on held-out data.
double evaluate_mean_loss(const FusionEncoder& enc, const MultiModalDataset& ds,
                          const TrainSettings& cfg, std::size_t num_anchors,
                          RngState& rng);

// CSV rendering of a loss curve: step,loss,bound columns.
std::string loss_curve_csv(const std::vector<LossPoint>& curve);

}  // namespace tnce
