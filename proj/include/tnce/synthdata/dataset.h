#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tnce/numerics/rng.h"

namespace tnce {

// One multi-modal sample: K views, one real vector per modality.
using Tuple = std::vector<std::vector<double>>;

enum class ViewKind { gaussian_view, discrete_view, coords2d_view };

std::string view_kind_name(ViewKind k);
ViewKind view_kind_from_name(const std::string& name);

struct ModalitySpec {
  std::string name;
  std::size_t dim = 1;
  ViewKind kind = ViewKind::gaussian_view;
  double snr = 1.0;               // signal-to-noise of the latent factor
  std::size_t alphabet_size = 0;  // discrete views only

  void validate() const;
};

struct MultiModalDataset {
  std::vector<ModalitySpec> specs;
  std::vector<Tuple> samples;
  std::vector<std::size_t> labels;  // empty, or one class index per sample
  std::string provenance;           // generator config + seed, key = value text

  std::size_t num_modalities() const { return specs.size(); }
  std::size_t size() const { return samples.size(); }
  bool has_labels() const { return !labels.empty(); }
  std::size_t num_classes() const;

  void validate() const;

  // Dataset restricted to the given modalities (order preserved as given).
  MultiModalDataset restrict_modalities(const std::vector<std::size_t>& subset) const;
};

// Full joint distribution over a small product alphabet.
struct DiscreteJoint {
  std::vector<std::size_t> alphabet_sizes;  // per modality
  std::vector<double> probs;                // row-major over the product alphabet

  std::size_t num_modalities() const { return alphabet_sizes.size(); }
  std::size_t cells() const;
  void validate() const;

  std::size_t flat_index(const std::vector<std::size_t>& symbols) const;
  std::vector<std::size_t> symbols_at(std::size_t flat) const;

  // Dirichlet(concentration, ..., concentration) draw over all cells.
  static DiscreteJoint random(const std::vector<std::size_t>& alphabets,
                              double concentration, RngState& rng);
  static DiscreteJoint independent_uniform_bits(std::size_t k);
  // v1, v2 uniform bits; v3 = v1 xor v2.
  static DiscreteJoint xor_triple();
};

struct LatentFactorConfig {
  std::size_t latent_dim = 4;
  std::size_t n_classes = 4;
  std::size_t label_latent_coord = 0;  // labels = quantile bucket of this coord
};

// Shared latent z ~ N(0, I); view_k = snr_k * (A_k z) + unit gaussian noise,
// with A_k a fixed random matrix whose rows are unit-norm and sign-canonical
// (first nonzero entry positive). Labels come from the latent, not the views,
// so per-modality informativeness is controlled purely by snr.
MultiModalDataset gen_latent_factor(const std::vector<ModalitySpec>& specs,
                                    std::size_t n, std::uint64_t seed,
                                    const LatentFactorConfig& cfg = {});

// For 1-D views of a 1-D latent: correlation between two modalities with the
// given snrs (closed form used by tests and the gaussian bound harness).
double latent_pair_correlation(double snr_a, double snr_b);
// snr giving the requested cross-modality correlation for equal-snr 1-D pairs.
double snr_for_pair_correlation(double rho);

// I.i.d. tuples from the joint table. Each discrete view is a dim-1 vector
// holding the symbol index.
MultiModalDataset gen_discrete_tuples(const DiscreteJoint& joint, std::size_t n,
                                      std::uint64_t seed);

}  // namespace tnce
