#include "tnce/contrast/encoder.h"

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "tnce/error.h"
#include "tnce/util/binio.h"
#include "tnce/util/kv.h"

namespace tnce {

std::size_t FusionEncoder::param_count() const {
  std::size_t n = fusion.param_count();
  for (const auto& m : modality_encoders) n += m.param_count();
  return n;
}

void FusionEncoder::check_consistent() const {
  if (modality_encoders.empty())
    throw ShapeError("FusionEncoder: no modality encoders");
  std::size_t fused_in = 0;
  for (const auto& m : modality_encoders) {
    m.check_consistent();
    fused_in += m.output_dim();
  }
  fusion.check_consistent();
  if (fusion.input_dim() != fused_in)
    throw ShapeError("FusionEncoder: fusion expects input dim " +
                     std::to_string(fusion.input_dim()) +
                     ", modality embeddings concatenate to " +
                     std::to_string(fused_in));
}

std::vector<std::span<double>> FusionEncoder::param_tensors() {
  std::vector<std::span<double>> out;
  for (auto& m : modality_encoders)
    for (auto& v : param_views(m)) out.push_back(v);
  for (auto& v : param_views(fusion)) out.push_back(v);
  return out;
}

std::vector<double> FusionEncoder::flatten() const {
  std::vector<double> flat;
  flat.reserve(param_count());
  for (const auto& m : modality_encoders) {
    auto f = flatten_params(m);
    flat.insert(flat.end(), f.begin(), f.end());
  }
  auto f = flatten_params(fusion);
  flat.insert(flat.end(), f.begin(), f.end());
  return flat;
}

void FusionEncoder::unflatten(std::span<const double> flat) {
  if (flat.size() != param_count())
    throw ShapeError("FusionEncoder::unflatten: length mismatch");
  std::size_t off = 0;
  for (auto& m : modality_encoders) {
    unflatten_params(m, flat.subspan(off, m.param_count()));
    off += m.param_count();
  }
  unflatten_params(fusion, flat.subspan(off, fusion.param_count()));
}

std::uint64_t FusionEncoder::param_checksum() const {
  std::uint64_t h = 1469598103934665603ULL;
  auto feed = [&h](const std::vector<double>& values) {
    for (double v : values) {
      std::uint64_t bits;
      std::memcpy(&bits, &v, sizeof(bits));
      for (int i = 0; i < 8; ++i) {
        h ^= (bits >> (8 * i)) & 0xff;
        h *= 1099511628211ULL;
      }
    }
  };
  feed(flatten());
  return h;
}

FusionEncoder FusionEncoder::random_init(const EncoderArch& arch, RngState& rng) {
  if (arch.modality_dims.empty())
    throw ConfigError("EncoderArch: need at least one modality");
  FusionEncoder enc;
  for (std::size_t dim : arch.modality_dims) {
    enc.modality_encoders.push_back(MlpParams::random_init(
        {dim, arch.modality_hidden, arch.modality_out}, arch.activation, rng));
  }
  enc.fusion = MlpParams::random_init(
      {arch.modality_out * arch.modality_dims.size(), arch.fusion_hidden,
       arch.embedding_dim},
      arch.activation, rng);
  enc.check_consistent();
  return enc;
}

EncoderGrads EncoderGrads::zeros_like(const FusionEncoder& enc) {
  EncoderGrads g;
  for (const auto& m : enc.modality_encoders)
    g.modality.push_back(MlpGrads::zeros_like(m));
  g.fusion = MlpGrads::zeros_like(enc.fusion);
  return g;
}

void EncoderGrads::add(const EncoderGrads& other) {
  if (modality.size() != other.modality.size())
    throw ShapeError("EncoderGrads::add: modality count mismatch");
  for (std::size_t k = 0; k < modality.size(); ++k)
    modality[k].add(other.modality[k]);
  fusion.add(other.fusion);
}

void EncoderGrads::scale(double s) {
  for (auto& m : modality) m.scale(s);
  fusion.scale(s);
}

std::vector<std::span<const double>> EncoderGrads::tensors() const {
  std::vector<std::span<const double>> out;
  for (const auto& m : modality)
    for (auto& v : grad_views(m)) out.push_back(v);
  for (auto& v : grad_views(fusion)) out.push_back(v);
  return out;
}

std::vector<double> EncoderGrads::flatten() const {
  std::vector<double> flat;
  for (const auto& span : tensors()) flat.insert(flat.end(), span.begin(), span.end());
  return flat;
}

Matrix encode_batch(const FusionEncoder& enc,
                    const std::vector<const Tuple*>& tuples,
                    const std::vector<ModalityMask>& masks,
                    EncodeCache* cache) {
  enc.check_consistent();
  const std::size_t b = tuples.size();
  const std::size_t k = enc.num_modalities();
  if (!masks.empty() && masks.size() != b)
    throw ShapeError("encode_batch: " + std::to_string(masks.size()) +
                     " masks for " + std::to_string(b) + " tuples");
  for (std::size_t i = 0; i < b; ++i) {
    if (tuples[i]->size() != k)
      throw ShapeError("encode_batch: tuple has " +
                       std::to_string(tuples[i]->size()) + " views, encoder has " +
                       std::to_string(k));
    if (!masks.empty()) {
      if (masks[i].size() != k)
        throw ShapeError("encode_batch: mask length != modality count");
      if (mask_all(masks[i]))
        throw MaskError("encode_batch: all modalities missing for a tuple");
    }
  }

  if (cache) {
    cache->modality_caches.assign(k, MlpCache{});
  }

  // Per-modality inputs with placeholder-filled missing rows, then the
  // concatenated fusion input.
  Matrix fused_in(b, enc.fusion.input_dim());
  std::size_t col_off = 0;
  for (std::size_t mod = 0; mod < k; ++mod) {
    const auto& net = enc.modality_encoders[mod];
    Matrix input(b, net.input_dim(), enc.placeholder);
    for (std::size_t i = 0; i < b; ++i) {
      const bool missing = !masks.empty() && masks[i][mod];
      if (missing) continue;
      const auto& view = (*tuples[i])[mod];
      if (view.size() != net.input_dim())
        throw ShapeError("encode_batch: view dim " + std::to_string(view.size()) +
                         " != encoder input dim " + std::to_string(net.input_dim()));
      std::copy(view.begin(), view.end(), input.row(i).begin());
    }
    Matrix out = mlp_forward(net, input, cache ? &cache->modality_caches[mod] : nullptr);
    for (std::size_t i = 0; i < b; ++i)
      std::copy(out.row(i).begin(), out.row(i).end(),
                fused_in.row(i).begin() + col_off);
    col_off += net.output_dim();
  }

  Matrix prenorm = mlp_forward(enc.fusion, fused_in, cache ? &cache->fusion_cache : nullptr);
  Matrix embeddings(b, prenorm.cols);
  std::vector<double> norms(b, 0.0);
  for (std::size_t i = 0; i < b; ++i) {
    double n = l2_norm(prenorm.row(i));
    if (n < 1e-12) n = 1e-12;
    norms[i] = n;
    for (std::size_t j = 0; j < prenorm.cols; ++j)
      embeddings.at(i, j) = prenorm.at(i, j) / n;
  }
  if (cache) {
    cache->prenorm = std::move(prenorm);
    cache->norms = std::move(norms);
  }
  return embeddings;
}

std::vector<double> encode_tuple(const FusionEncoder& enc, const Tuple& tuple,
                                 const ModalityMask& mask) {
  std::vector<const Tuple*> one{&tuple};
  std::vector<ModalityMask> masks;
  if (!mask.empty()) masks.push_back(mask);
  Matrix e = encode_batch(enc, one, masks);
  return {e.data.begin(), e.data.end()};
}

void encode_backward(const FusionEncoder& enc, const EncodeCache& cache,
                     const Matrix& upstream, EncoderGrads& grads) {
  const std::size_t b = upstream.rows;
  if (cache.prenorm.rows != b || cache.prenorm.cols != upstream.cols)
    throw CacheError("encode_backward: cache does not match upstream shape");

  // Through e = u / ||u||:  du = (de - e (e . de)) / ||u||.
  Matrix d_prenorm(b, upstream.cols);
  for (std::size_t i = 0; i < b; ++i) {
    const double n = cache.norms[i];
    double e_dot_de = 0.0;
    for (std::size_t j = 0; j < upstream.cols; ++j)
      e_dot_de += (cache.prenorm.at(i, j) / n) * upstream.at(i, j);
    for (std::size_t j = 0; j < upstream.cols; ++j) {
      const double e_j = cache.prenorm.at(i, j) / n;
      d_prenorm.at(i, j) = (upstream.at(i, j) - e_j * e_dot_de) / n;
    }
  }

  Matrix d_fused_in;
  MlpGrads fusion_grads =
      mlp_backward(enc.fusion, cache.fusion_cache, d_prenorm, &d_fused_in);
  grads.fusion.add(fusion_grads);

  std::size_t col_off = 0;
  for (std::size_t mod = 0; mod < enc.num_modalities(); ++mod) {
    const auto& net = enc.modality_encoders[mod];
    Matrix d_mod(b, net.output_dim());
    for (std::size_t i = 0; i < b; ++i)
      for (std::size_t j = 0; j < net.output_dim(); ++j)
        d_mod.at(i, j) = d_fused_in.at(i, col_off + j);
    MlpGrads mg = mlp_backward(net, cache.modality_caches[mod], d_mod);
    grads.modality[mod].add(mg);
    col_off += net.output_dim();
  }
}

namespace {
constexpr char kEncMagic[8] = {'T', 'N', 'C', 'E', 'E', 'N', 'C', '1'};

void write_mlp(std::ostream& out, const MlpParams& p) {
  write_u32(out, static_cast<std::uint32_t>(p.layer_dims.size()));
  for (std::size_t d : p.layer_dims) write_u32(out, static_cast<std::uint32_t>(d));
  write_u8(out, static_cast<std::uint8_t>(p.hidden_activation));
}

MlpParams read_mlp(std::istream& in) {
  MlpParams p;
  std::uint32_t n = read_u32(in, "layer dim count");
  if (n < 2 || n > 64) throw CorruptionError("checkpoint: implausible layer count");
  for (std::uint32_t i = 0; i < n; ++i)
    p.layer_dims.push_back(read_u32(in, "layer dim"));
  p.hidden_activation = static_cast<Activation>(read_u8(in, "activation"));
  for (std::size_t i = 0; i + 1 < p.layer_dims.size(); ++i) {
    p.weights.emplace_back(p.layer_dims[i + 1], p.layer_dims[i]);
    p.biases.emplace_back(p.layer_dims[i + 1], 0.0);
  }
  return p;
}
}  // namespace

void save_encoder(const FusionEncoder& enc, const std::string& path) {
  enc.check_consistent();
  std::ostringstream out(std::ios::binary);
  out.write(kEncMagic, sizeof(kEncMagic));
  write_u32(out, static_cast<std::uint32_t>(enc.num_modalities()));
  for (const auto& m : enc.modality_encoders) write_mlp(out, m);
  write_mlp(out, enc.fusion);
  write_f64(out, enc.placeholder);
  for (double v : enc.flatten()) write_f64(out, v);
  write_file_atomic(path, out.str());
}

FusionEncoder load_encoder(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open checkpoint: " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (in.gcount() != sizeof(magic) ||
      std::memcmp(magic, kEncMagic, sizeof(kEncMagic)) != 0)
    throw FormatError("not an encoder checkpoint (bad magic): " + path);
  FusionEncoder enc;
  std::uint32_t k = read_u32(in, "modality count");
  if (k == 0 || k > 4096) throw CorruptionError("checkpoint: implausible modality count");
  for (std::uint32_t i = 0; i < k; ++i) enc.modality_encoders.push_back(read_mlp(in));
  enc.fusion = read_mlp(in);
  enc.placeholder = read_f64(in, "placeholder");
  std::vector<double> flat(enc.param_count());
  for (double& v : flat) v = read_f64(in, "parameter");
  if (in.peek() != EOF) throw CorruptionError("checkpoint has trailing bytes");
  enc.unflatten(flat);
  enc.check_consistent();
  return enc;
}

}  // namespace tnce
