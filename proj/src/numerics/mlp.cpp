#include "tnce/numerics/mlp.h"

#include <cmath>

#include "tnce/error.h"

namespace tnce {

std::size_t MlpParams::param_count() const {
  std::size_t n = 0;
  for (const auto& w : weights) n += w.size();
  for (const auto& b : biases) n += b.size();
  return n;
}

void MlpParams::check_consistent() const {
  if (layer_dims.size() < 2) throw ShapeError("mlp: need at least 2 layer dims");
  if (weights.size() != layer_dims.size() - 1 || biases.size() != weights.size())
    throw ShapeError("mlp: layer count mismatch");
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i].rows != layer_dims[i + 1] || weights[i].cols != layer_dims[i])
      throw ShapeError("mlp: weights[" + std::to_string(i) + "] is " +
                       shape_string(weights[i]) + ", expected " +
                       std::to_string(layer_dims[i + 1]) + "x" +
                       std::to_string(layer_dims[i]));
    if (biases[i].size() != layer_dims[i + 1])
      throw ShapeError("mlp: biases[" + std::to_string(i) + "] length mismatch");
  }
}

MlpParams MlpParams::random_init(const std::vector<std::size_t>& dims,
                                 Activation hidden_activation, RngState& rng) {
  MlpParams p;
  p.layer_dims = dims;
  p.hidden_activation = hidden_activation;
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    Matrix w(dims[i + 1], dims[i]);
    const double scale = std::sqrt(2.0 / static_cast<double>(dims[i]));
    for (double& v : w.data) v = rng.normal(0.0, scale);
    p.weights.push_back(std::move(w));
    p.biases.emplace_back(dims[i + 1], 0.0);
  }
  p.check_consistent();
  return p;
}

MlpGrads MlpGrads::zeros_like(const MlpParams& p) {
  MlpGrads g;
  for (const auto& w : p.weights) g.weights.emplace_back(w.rows, w.cols);
  for (const auto& b : p.biases) g.biases.emplace_back(b.size(), 0.0);
  return g;
}

void MlpGrads::add(const MlpGrads& other) {
  if (weights.size() != other.weights.size())
    throw ShapeError("MlpGrads::add: layer count mismatch");
  for (std::size_t i = 0; i < weights.size(); ++i) {
    add_inplace(weights[i], other.weights[i]);
    for (std::size_t j = 0; j < biases[i].size(); ++j)
      biases[i][j] += other.biases[i][j];
  }
}

void MlpGrads::scale(double s) {
  for (auto& w : weights)
    for (double& v : w.data) v *= s;
  for (auto& b : biases)
    for (double& v : b) v *= s;
}

namespace {

void apply_activation(Matrix& m, Activation act) {
  switch (act) {
    case Activation::relu:
      for (double& v : m.data) v = v > 0.0 ? v : 0.0;
      break;
    case Activation::tanh_act:
      for (double& v : m.data) v = std::tanh(v);
      break;
    case Activation::identity:
      break;
  }
}

// dL/dpre from dL/dpost, given post-activation values.
void activation_backward(Matrix& grad, const Matrix& post, Activation act) {
  switch (act) {
    case Activation::relu:
      for (std::size_t i = 0; i < grad.data.size(); ++i)
        if (post.data[i] <= 0.0) grad.data[i] = 0.0;
      break;
    case Activation::tanh_act:
      for (std::size_t i = 0; i < grad.data.size(); ++i)
        grad.data[i] *= 1.0 - post.data[i] * post.data[i];
      break;
    case Activation::identity:
      break;
  }
}

}  // namespace

Matrix mlp_forward(const MlpParams& params, const Matrix& input, MlpCache* cache) {
  params.check_consistent();
  if (input.cols != params.input_dim())
    throw ShapeError("mlp_forward: input is " + shape_string(input) +
                     ", expected cols = " + std::to_string(params.input_dim()));
  if (cache) {
    cache->act.clear();
    cache->act.push_back(input);
    cache->layer_dims = params.layer_dims;
  }
  Matrix cur = input;
  for (std::size_t l = 0; l < params.num_layers(); ++l) {
    Matrix next = matmul_nt(cur, params.weights[l]);
    for (std::size_t r = 0; r < next.rows; ++r) {
      double* row = next.data.data() + r * next.cols;
      for (std::size_t c = 0; c < next.cols; ++c) row[c] += params.biases[l][c];
    }
    const bool last = (l + 1 == params.num_layers());
    apply_activation(next, last ? Activation::identity : params.hidden_activation);
    if (cache) cache->act.push_back(next);
    cur = std::move(next);
  }
  return cur;
}

MlpGrads mlp_backward(const MlpParams& params, const MlpCache& cache,
                      const Matrix& upstream, Matrix* input_grad) {
  params.check_consistent();
  if (cache.layer_dims != params.layer_dims)
    throw CacheError("mlp_backward: cache was produced by a different network");
  if (cache.act.size() != params.num_layers() + 1)
    throw CacheError("mlp_backward: cache layer count mismatch");
  if (upstream.rows != cache.act.back().rows ||
      upstream.cols != params.output_dim())
    throw ShapeError("mlp_backward: upstream is " + shape_string(upstream) +
                     ", expected " + shape_string(cache.act.back()));

  MlpGrads grads = MlpGrads::zeros_like(params);
  Matrix delta = upstream;
  for (std::size_t l = params.num_layers(); l-- > 0;) {
    const bool last = (l + 1 == params.num_layers());
    if (!last) activation_backward(delta, cache.act[l + 1], params.hidden_activation);
    grads.weights[l] = matmul_tn(delta, cache.act[l]);
    grads.biases[l] = column_sums(delta);
    if (l > 0 || input_grad) {
      Matrix prev = matmul(delta, params.weights[l]);
      if (l == 0 && input_grad) {
        *input_grad = std::move(prev);
      } else {
        delta = std::move(prev);
      }
    }
  }
  return grads;
}

SceResult softmax_cross_entropy(std::span<const double> logits,
                                std::size_t target_index) {
  if (logits.empty()) throw ShapeError("softmax_cross_entropy: empty logits");
  if (target_index >= logits.size())
    throw DomainError("softmax_cross_entropy: target index out of range");
  double max_logit = logits[0];
  for (double v : logits) {
    if (!std::isfinite(v))
      throw NumericError("softmax_cross_entropy: non-finite logit");
    if (v > max_logit) max_logit = v;
  }
  double sum_exp = 0.0;
  for (double v : logits) sum_exp += std::exp(v - max_logit);
  const double lse = max_logit + std::log(sum_exp);

  SceResult r;
  r.loss = lse - logits[target_index];
  r.grad.resize(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i)
    r.grad[i] = std::exp(logits[i] - lse);
  r.grad[target_index] -= 1.0;
  return r;
}

std::vector<std::span<double>> param_views(MlpParams& p) {
  std::vector<std::span<double>> v;
  for (auto& w : p.weights) v.emplace_back(w.data);
  for (auto& b : p.biases) v.emplace_back(b);
  return v;
}

std::vector<std::span<const double>> grad_views(const MlpGrads& g) {
  std::vector<std::span<const double>> v;
  for (const auto& w : g.weights) v.emplace_back(w.data);
  for (const auto& b : g.biases) v.emplace_back(b);
  return v;
}

std::vector<double> flatten_params(const MlpParams& p) {
  std::vector<double> flat;
  flat.reserve(p.param_count());
  for (const auto& w : p.weights) flat.insert(flat.end(), w.data.begin(), w.data.end());
  for (const auto& b : p.biases) flat.insert(flat.end(), b.begin(), b.end());
  return flat;
}

void unflatten_params(MlpParams& p, std::span<const double> flat) {
  if (flat.size() != p.param_count())
    throw ShapeError("unflatten_params: flat length " + std::to_string(flat.size()) +
                     " != param count " + std::to_string(p.param_count()));
  std::size_t off = 0;
  for (auto& w : p.weights) {
    std::copy(flat.begin() + off, flat.begin() + off + w.data.size(), w.data.begin());
    off += w.data.size();
  }
  for (auto& b : p.biases) {
    std::copy(flat.begin() + off, flat.begin() + off + b.size(), b.begin());
    off += b.size();
  }
}

}  // namespace tnce
