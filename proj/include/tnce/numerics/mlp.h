#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tnce/numerics/matrix.h"
#include "tnce/numerics/rng.h"

namespace tnce {

// Hidden-layer nonlinearity; the last layer is always an identity (linear)
// map so downstream losses see unsquashed outputs.
enum class Activation { relu, tanh_act, identity };

struct MlpParams {
  std::vector<std::size_t> layer_dims;          // [in, h1, ..., out]
  std::vector<Matrix> weights;                  // weights[i]: dims[i+1] x dims[i]
  std::vector<std::vector<double>> biases;      // biases[i]: dims[i+1]
  Activation hidden_activation = Activation::relu;

  std::size_t num_layers() const { return weights.size(); }
  std::size_t input_dim() const { return layer_dims.front(); }
  std::size_t output_dim() const { return layer_dims.back(); }
  std::size_t param_count() const;

  void check_consistent() const;  // throws ShapeError on any mismatch

  // He-scaled gaussian weights, zero biases.
  static MlpParams random_init(const std::vector<std::size_t>& dims,
                               Activation hidden_activation, RngState& rng);
};

// Everything backward needs from the matching forward call.
struct MlpCache {
  std::vector<Matrix> act;  // act[0] = input, act[l+1] = output of layer l
  std::vector<std::size_t> layer_dims;  // copied from params; stale-use check
};

struct MlpGrads {
  std::vector<Matrix> weights;
  std::vector<std::vector<double>> biases;

  static MlpGrads zeros_like(const MlpParams& p);
  void add(const MlpGrads& other);
  void scale(double s);
};

// input: batch x in_dim. Returns batch x out_dim. Fills `cache` if non-null.
Matrix mlp_forward(const MlpParams& params, const Matrix& input,
                   MlpCache* cache = nullptr);

// upstream: batch x out_dim gradient. Returns parameter gradients with the
// exact shapes of `params`; writes d(loss)/d(input) to `input_grad` if given.
MlpGrads mlp_backward(const MlpParams& params, const MlpCache& cache,
                      const Matrix& upstream, Matrix* input_grad = nullptr);

struct SceResult {
  double loss = 0.0;
  std::vector<double> grad;  // d loss / d logits
};

// Numerically stable softmax cross-entropy against a single target index.
SceResult softmax_cross_entropy(std::span<const double> logits,
                                std::size_t target_index);

// Flat views over parameters, used by the optimizer and by gradcheck.
std::vector<std::span<double>> param_views(MlpParams& p);
std::vector<std::span<const double>> grad_views(const MlpGrads& g);

std::vector<double> flatten_params(const MlpParams& p);
void unflatten_params(MlpParams& p, std::span<const double> flat);

}  // namespace tnce
