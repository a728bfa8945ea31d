#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tnce/augment/policy.h"
#include "tnce/numerics/mlp.h"
#include "tnce/synthdata/dataset.h"

namespace tnce {

struct EncoderArch {
  std::vector<std::size_t> modality_dims;  // input dim per modality
  std::size_t modality_hidden = 64;
  std::size_t modality_out = 32;
  std::size_t fusion_hidden = 64;
  std::size_t embedding_dim = 32;
  Activation activation = Activation::relu;
};

// Per-modality MLPs feeding a fusion MLP; the output is L2-normalized.
// Missing views are replaced by the placeholder value before their modality
// encoder, so any missing-mask pattern short of "everything missing" works.
struct FusionEncoder {
  std::vector<MlpParams> modality_encoders;
  MlpParams fusion;
  double placeholder = 0.0;

  std::size_t num_modalities() const { return modality_encoders.size(); }
  std::size_t embedding_dim() const { return fusion.output_dim(); }
  std::size_t param_count() const;
  void check_consistent() const;

  std::vector<std::span<double>> param_tensors();
  std::vector<double> flatten() const;
  void unflatten(std::span<const double> flat);
  // FNV-1a over the raw parameter bytes; frozen-representation checks.
  std::uint64_t param_checksum() const;

  static FusionEncoder random_init(const EncoderArch& arch, RngState& rng);
};

struct EncoderGrads {
  std::vector<MlpGrads> modality;
  MlpGrads fusion;

  static EncoderGrads zeros_like(const FusionEncoder& enc);
  void add(const EncoderGrads& other);
  void scale(double s);
  std::vector<std::span<const double>> tensors() const;
  std::vector<double> flatten() const;
};

struct EncodeCache {
  std::vector<MlpCache> modality_caches;
  MlpCache fusion_cache;
  Matrix prenorm;              // fusion output before normalization
  std::vector<double> norms;   // per-row L2 norms of prenorm
};

// Embeds a batch of tuples under per-row missing masks. Returns B x d with
// unit-norm rows. masks may be empty (nothing missing); otherwise one mask
// per tuple. Throws MaskError if a mask drops every modality.
Matrix encode_batch(const FusionEncoder& enc,
                    const std::vector<const Tuple*>& tuples,
                    const std::vector<ModalityMask>& masks,
                    EncodeCache* cache = nullptr);

// Convenience single-tuple embed.
std::vector<double> encode_tuple(const FusionEncoder& enc, const Tuple& tuple,
                                 const ModalityMask& mask);

// Backpropagates d(loss)/d(embedding) through normalization, fusion and the
// modality encoders; accumulates parameter gradients into `grads`.
void encode_backward(const FusionEncoder& enc, const EncodeCache& cache,
                     const Matrix& upstream, EncoderGrads& grads);

// Checkpoint round trip (arch + flat parameters, little-endian).
void save_encoder(const FusionEncoder& enc, const std::string& path);
FusionEncoder load_encoder(const std::string& path);

}  // namespace tnce
