#include "tnce/contrast/train.h"

#include <cmath>
#include <sstream>

#include "tnce/error.h"
#include "tnce/util/kv.h"

namespace tnce {

EncoderArch TrainSettings::arch_for(const MultiModalDataset& ds) const {
  EncoderArch arch;
  for (const auto& s : ds.specs) arch.modality_dims.push_back(s.dim);
  arch.modality_hidden = modality_hidden;
  arch.modality_out = modality_out;
  arch.fusion_hidden = fusion_hidden;
  arch.embedding_dim = embedding_dim;
  arch.activation = activation;
  return arch;
}

ContrastiveBatch build_contrastive_batch(const MultiModalDataset& ds,
                                         const TrainSettings& cfg,
                                         std::size_t batch_size, RngState& rng) {
  const std::size_t k = ds.num_modalities();
  ContrastiveBatch batch;
  batch.num_modalities = k;

  AugmentationPolicy policy = cfg.policy.per_modality.empty()
                                  ? AugmentationPolicy::identity(k)
                                  : cfg.policy;

  for (std::size_t i = 0; i < batch_size; ++i) {
    const std::size_t idx = rng.uniform_index(ds.size());
    batch.anchor_indices.push_back(idx);
    batch.anchors.push_back(ds.samples[idx]);
    batch.positives.push_back(apply_policy(policy, ds.specs, ds.samples[idx], rng));
    if (cfg.strategy == NegStrategy::proposal) {
      batch.negatives.push_back(
          sample_negatives(ds, cfg.proposal, cfg.negatives_per_anchor, rng));
    } else {
      auto tuples = naive_disturb_negatives(ds, cfg.negatives_per_anchor, rng);
      std::vector<NegativeSample> negs;
      negs.reserve(tuples.size());
      for (auto& t : tuples) negs.push_back(NegativeSample{std::move(t), -1});
      batch.negatives.push_back(std::move(negs));
    }
  }

  const bool fixed_masks = !cfg.anchor_mask_override.empty() ||
                           !cfg.candidate_mask_override.empty();
  if (fixed_masks) {
    auto check = [&](const ModalityMask& m, const char* which) {
      if (!m.empty() && m.size() != k)
        throw ConfigError(std::string("mask override for ") + which +
                          " has wrong length");
      if (!m.empty() && mask_all(m))
        throw MaskError(std::string("mask override for ") + which +
                        " drops every modality");
    };
    check(cfg.anchor_mask_override, "anchors");
    check(cfg.candidate_mask_override, "candidates");
    batch.shared_mask = cfg.candidate_mask_override.empty()
                            ? empty_mask(k)
                            : cfg.candidate_mask_override;
    batch.anchor_masks.assign(batch_size, cfg.anchor_mask_override.empty()
                                              ? empty_mask(k)
                                              : cfg.anchor_mask_override);
  } else {
    apply_dropout(batch, cfg.dropout_prob, rng);
  }
  return batch;
}

namespace {

struct BatchForward {
  Matrix anchor_embs, pos_embs, neg_embs;
  EncodeCache anchor_cache, pos_cache, neg_cache;
};

BatchForward encode_all(const FusionEncoder& enc, const ContrastiveBatch& batch,
                        bool want_cache) {
  const std::size_t b = batch.size();
  const std::size_t m = batch.negs_per_anchor();
  std::vector<const Tuple*> anchor_ptrs, pos_ptrs, neg_ptrs;
  anchor_ptrs.reserve(b);
  pos_ptrs.reserve(b);
  neg_ptrs.reserve(b * m);
  for (std::size_t i = 0; i < b; ++i) {
    anchor_ptrs.push_back(&batch.anchors[i]);
    pos_ptrs.push_back(&batch.positives[i]);
    for (const auto& n : batch.negatives[i]) neg_ptrs.push_back(&n.tuple);
  }
  std::vector<ModalityMask> shared(b, batch.shared_mask);
  std::vector<ModalityMask> neg_masks(b * m, batch.shared_mask);

  BatchForward f;
  f.anchor_embs = encode_batch(enc, anchor_ptrs, batch.anchor_masks,
                               want_cache ? &f.anchor_cache : nullptr);
  f.pos_embs =
      encode_batch(enc, pos_ptrs, shared, want_cache ? &f.pos_cache : nullptr);
  f.neg_embs =
      encode_batch(enc, neg_ptrs, neg_masks, want_cache ? &f.neg_cache : nullptr);
  return f;
}

}  // namespace

double batch_forward_loss(const FusionEncoder& enc, const ContrastiveBatch& batch,
                          const CriticConfig& critic) {
  BatchForward f = encode_all(enc, batch, false);
  return batch_tnce_loss(critic, f.anchor_embs, f.pos_embs, f.neg_embs,
                         batch.negs_per_anchor(), false)
      .loss;
}

double batch_backward_loss(const FusionEncoder& enc, const ContrastiveBatch& batch,
                           const CriticConfig& critic, EncoderGrads& grads) {
  BatchForward f = encode_all(enc, batch, true);
  BatchLossResult r = batch_tnce_loss(critic, f.anchor_embs, f.pos_embs,
                                      f.neg_embs, batch.negs_per_anchor(), true);
  encode_backward(enc, f.anchor_cache, r.anchor_grads, grads);
  encode_backward(enc, f.pos_cache, r.pos_grads, grads);
  encode_backward(enc, f.neg_cache, r.neg_grads, grads);
  return r.loss;
}

namespace {

std::string train_manifest(const MultiModalDataset& ds, const TrainSettings& cfg) {
  KeyValueWriter w;
  w.set("train.seed", cfg.seed);
  w.set("train.steps", cfg.steps);
  w.set("train.batch_size", cfg.batch_size);
  w.set("train.negatives_per_anchor", cfg.negatives_per_anchor);
  w.set("train.dropout_prob", cfg.dropout_prob);
  w.set("train.strategy", cfg.strategy == NegStrategy::proposal
                              ? "proposal"
                              : "naive_product");
  w.set("proposal.alpha", cfg.proposal.alpha.empty()
                              ? std::string("-")
                              : cfg.proposal.describe());
  w.set("policy", cfg.policy.per_modality.empty()
                      ? std::string("identity")
                      : cfg.policy.describe());
  w.set("critic.score", cfg.critic.score == CriticScore::cosine ? "cosine" : "dot");
  w.set("critic.temperature", cfg.critic.temperature);
  w.set("optimizer.kind",
        cfg.optimizer.kind == OptKind::sgd_momentum ? "sgd_momentum" : "adam");
  w.set("optimizer.learning_rate", cfg.optimizer.learning_rate);
  w.set("optimizer.momentum", cfg.optimizer.momentum);
  w.set("optimizer.weight_decay", cfg.optimizer.weight_decay);
  w.set("optimizer.schedule",
        cfg.optimizer.schedule == LrSchedule::onecycle ? "onecycle" : "constant");
  w.set("arch.modality_hidden", cfg.modality_hidden);
  w.set("arch.modality_out", cfg.modality_out);
  w.set("arch.fusion_hidden", cfg.fusion_hidden);
  w.set("arch.embedding_dim", cfg.embedding_dim);
  w.set("arch.activation", cfg.activation == Activation::relu ? "relu" : "tanh");
  w.set("data.n", ds.size());
  w.set("data.modalities", ds.num_modalities());
  w.comment("dataset provenance:");
  std::stringstream prov(ds.provenance);
  std::string line;
  while (std::getline(prov, line))
    if (!line.empty()) w.comment("  " + line);
  return w.str();
}

}  // namespace

TrainResult train_contrastive(const MultiModalDataset& ds, const TrainSettings& cfg) {
  ds.validate();
  if (ds.size() < 2) throw ConfigError("train_contrastive: dataset too small");
  if (cfg.batch_size < 1) throw ConfigError("train_contrastive: batch_size >= 1");
  if (cfg.negatives_per_anchor < 1)
    throw ConfigError("train_contrastive: need at least one negative per anchor");
  if (cfg.dropout_prob > 0.0 && ds.num_modalities() == 1 &&
      cfg.anchor_mask_override.empty() && cfg.candidate_mask_override.empty())
    throw ConfigError("train_contrastive: dropout needs K >= 2");
  if (cfg.strategy == NegStrategy::proposal) cfg.proposal.validate();
  cfg.critic.validate();

  RngState root(cfg.seed);
  RngState init_rng = root.fork(101);
  RngState batch_rng = root.fork(102);

  TrainResult result;
  result.encoder = FusionEncoder::random_init(cfg.arch_for(ds), init_rng);

  OptimizerConfig opt_cfg = cfg.optimizer;
  if (opt_cfg.schedule == LrSchedule::onecycle && opt_cfg.total_steps == 0)
    opt_cfg.total_steps = cfg.steps;
  OptimizerState optimizer(opt_cfg);

  const double ln_n = std::log(static_cast<double>(cfg.negatives_per_anchor + 1));
  double window_sum = 0.0;
  double prev_window_mean = -1.0;
  std::size_t window_count = 0;

  for (std::size_t step = 0; step < cfg.steps; ++step) {
    ContrastiveBatch batch =
        build_contrastive_batch(ds, cfg, cfg.batch_size, batch_rng);
    EncoderGrads grads = EncoderGrads::zeros_like(result.encoder);
    double loss = 0.0;
    try {
      loss = batch_backward_loss(result.encoder, batch, cfg.critic, grads);
    } catch (const NumericError& e) {
      throw TrainingError("train_contrastive: numeric blow-up at step " +
                          std::to_string(step) + " (" + e.what() + ")");
    }
    if (!std::isfinite(loss))
      throw TrainingError("train_contrastive: loss diverged (non-finite) at step " +
                          std::to_string(step));
    optimizer.step(result.encoder.param_tensors(), grads.tensors());
    result.curve.push_back({step, loss, ln_n - loss});
    result.steps_run = step + 1;

    if (cfg.plateau_window > 0) {
      window_sum += loss;
      if (++window_count == cfg.plateau_window) {
        const double mean = window_sum / static_cast<double>(cfg.plateau_window);
        window_sum = 0.0;
        window_count = 0;
        if (prev_window_mean >= 0.0 && step + 1 >= cfg.min_steps) {
          const double rel = std::abs(mean - prev_window_mean) /
                             std::max(1e-12, std::abs(prev_window_mean));
          if (rel < cfg.plateau_rel_tol) {
            result.plateau_converged = true;
            break;
          }
        }
        prev_window_mean = mean;
      }
    }
  }

  KeyValueWriter w;
  w.raw_block(train_manifest(ds, cfg));
  w.set("result.steps_run", result.steps_run);
  w.set("result.plateau_converged", result.plateau_converged);
  result.manifest = w.str();
  return result;
}

double evaluate_mean_loss(const FusionEncoder& enc, const MultiModalDataset& ds,
                          const TrainSettings& cfg, std::size_t num_anchors,
                          RngState& rng) {
  if (num_anchors == 0) throw ConfigError("evaluate_mean_loss: num_anchors >= 1");
  // Chunked so the embedding matrices stay small.
  const std::size_t chunk = 256;
  double total = 0.0;
  std::size_t done = 0;
  while (done < num_anchors) {
    const std::size_t b = std::min(chunk, num_anchors - done);
    ContrastiveBatch batch = build_contrastive_batch(ds, cfg, b, rng);
    total += batch_forward_loss(enc, batch, cfg.critic) * static_cast<double>(b);
    done += b;
  }
  return total / static_cast<double>(num_anchors);
}

std::string loss_curve_csv(const std::vector<LossPoint>& curve) {
  std::string out = "step,loss,bound\n";
  for (const auto& p : curve)
    out += std::to_string(p.step) + "," + format_double(p.loss) + "," +
           format_double(p.bound) + "\n";
  return out;
}

}  // namespace tnce
