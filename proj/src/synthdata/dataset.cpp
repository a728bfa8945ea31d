#include "tnce/synthdata/dataset.h"

#include <algorithm>
#include <cmath>
#include <set>

#include "tnce/error.h"
#include "tnce/numerics/matrix.h"
#include "tnce/util/kv.h"

namespace tnce {

std::string view_kind_name(ViewKind k) {
  switch (k) {
    case ViewKind::gaussian_view: return "gaussian";
    case ViewKind::discrete_view: return "discrete";
    case ViewKind::coords2d_view: return "coords2d";
  }
  return "?";
}

ViewKind view_kind_from_name(const std::string& name) {
  if (name == "gaussian") return ViewKind::gaussian_view;
  if (name == "discrete") return ViewKind::discrete_view;
  if (name == "coords2d") return ViewKind::coords2d_view;
  throw ConfigError("unknown view kind: " + name);
}

void ModalitySpec::validate() const {
  if (dim < 1) throw ConfigError("modality '" + name + "': dim must be >= 1");
  if (snr < 0.0) throw ConfigError("modality '" + name + "': snr must be >= 0");
  if (kind == ViewKind::discrete_view) {
    if (alphabet_size < 2)
      throw ConfigError("modality '" + name + "': discrete views need alphabet_size >= 2");
    if (dim != 1)
      throw ConfigError("modality '" + name + "': discrete views must have dim = 1");
  }
  if (kind == ViewKind::coords2d_view && dim % 2 != 0)
    throw ConfigError("modality '" + name + "': coords2d views need even dim");
}

std::size_t MultiModalDataset::num_classes() const {
  if (labels.empty()) return 0;
  return 1 + *std::max_element(labels.begin(), labels.end());
}

void MultiModalDataset::validate() const {
  for (const auto& s : specs) s.validate();
  if (!labels.empty() && labels.size() != samples.size())
    throw ConfigError("dataset: labels.size() must be 0 or N");
  for (const auto& t : samples) {
    if (t.size() != specs.size())
      throw ShapeError("dataset: tuple has " + std::to_string(t.size()) +
                       " views, expected " + std::to_string(specs.size()));
    for (std::size_t k = 0; k < specs.size(); ++k)
      if (t[k].size() != specs[k].dim)
        throw ShapeError("dataset: view '" + specs[k].name + "' has dim " +
                         std::to_string(t[k].size()) + ", expected " +
                         std::to_string(specs[k].dim));
  }
}

MultiModalDataset MultiModalDataset::restrict_modalities(
    const std::vector<std::size_t>& subset) const {
  if (subset.empty()) throw ConfigError("restrict_modalities: empty subset");
  std::set<std::size_t> seen;
  for (std::size_t k : subset) {
    if (k >= specs.size())
      throw ConfigError("restrict_modalities: modality index out of range");
    if (!seen.insert(k).second)
      throw ConfigError("restrict_modalities: duplicate modality index");
  }
  MultiModalDataset out;
  for (std::size_t k : subset) out.specs.push_back(specs[k]);
  out.samples.reserve(samples.size());
  for (const auto& t : samples) {
    Tuple r;
    r.reserve(subset.size());
    for (std::size_t k : subset) r.push_back(t[k]);
    out.samples.push_back(std::move(r));
  }
  out.labels = labels;
  KeyValueWriter w;
  w.raw_block(provenance);
  std::vector<std::size_t> sub(subset.begin(), subset.end());
  w.set_list("restricted_to", sub);
  out.provenance = w.str();
  return out;
}

std::size_t DiscreteJoint::cells() const {
  std::size_t c = 1;
  for (std::size_t a : alphabet_sizes) c *= a;
  return c;
}

void DiscreteJoint::validate() const {
  if (alphabet_sizes.empty()) throw ConfigError("DiscreteJoint: no modalities");
  std::size_t c = 1;
  for (std::size_t a : alphabet_sizes) {
    if (a < 2) throw ConfigError("DiscreteJoint: alphabet sizes must be >= 2");
    c *= a;
    if (c > 1000000) throw BudgetError("DiscreteJoint: product alphabet exceeds 1e6 cells");
  }
  if (probs.size() != c)
    throw ConfigError("DiscreteJoint: table has " + std::to_string(probs.size()) +
                      " cells, expected " + std::to_string(c));
  double sum = 0.0;
  for (double p : probs) {
    if (p < 0.0) throw ConfigError("DiscreteJoint: negative probability");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-12)
    throw ConfigError("DiscreteJoint: probabilities sum to " + format_double(sum));
}

std::size_t DiscreteJoint::flat_index(const std::vector<std::size_t>& symbols) const {
  std::size_t idx = 0;
  for (std::size_t k = 0; k < alphabet_sizes.size(); ++k)
    idx = idx * alphabet_sizes[k] + symbols[k];
  return idx;
}

std::vector<std::size_t> DiscreteJoint::symbols_at(std::size_t flat) const {
  std::vector<std::size_t> symbols(alphabet_sizes.size(), 0);
  for (std::size_t k = alphabet_sizes.size(); k-- > 0;) {
    symbols[k] = flat % alphabet_sizes[k];
    flat /= alphabet_sizes[k];
  }
  return symbols;
}

DiscreteJoint DiscreteJoint::random(const std::vector<std::size_t>& alphabets,
                                    double concentration, RngState& rng) {
  if (concentration <= 0.0)
    throw ConfigError("DiscreteJoint::random: concentration must be > 0");
  DiscreteJoint j;
  j.alphabet_sizes = alphabets;
  std::size_t c = 1;
  for (std::size_t a : alphabets) c *= a;
  j.probs.resize(c);
  // Dirichlet via normalized Gamma(concentration) draws; Gamma sampled with
  // the Marsaglia-Tsang method (boosted below shape 1).
  auto gamma_draw = [&rng](double shape) {
    double boost = 1.0;
    double a = shape;
    if (a < 1.0) {
      boost = std::pow(rng.uniform() + 1e-300, 1.0 / a);
      a += 1.0;
    }
    const double d = a - 1.0 / 3.0;
    const double cc = 1.0 / std::sqrt(9.0 * d);
    while (true) {
      double x = rng.normal();
      double v = 1.0 + cc * x;
      if (v <= 0.0) continue;
      v = v * v * v;
      double u = rng.uniform();
      if (u < 1.0 - 0.0331 * x * x * x * x) return boost * d * v;
      if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v)))
        return boost * d * v;
    }
  };
  double sum = 0.0;
  for (double& p : j.probs) {
    p = gamma_draw(concentration);
    sum += p;
  }
  if (sum <= 0.0) throw NumericError("DiscreteJoint::random: degenerate draw");
  for (double& p : j.probs) p /= sum;
  // Exact renormalization so validate()'s 1e-12 budget holds.
  double s2 = 0.0;
  for (double p : j.probs) s2 += p;
  for (double& p : j.probs) p /= s2;
  j.validate();
  return j;
}

DiscreteJoint DiscreteJoint::independent_uniform_bits(std::size_t k) {
  DiscreteJoint j;
  j.alphabet_sizes.assign(k, 2);
  j.probs.assign(std::size_t(1) << k, 1.0 / static_cast<double>(std::size_t(1) << k));
  j.validate();
  return j;
}

DiscreteJoint DiscreteJoint::xor_triple() {
  DiscreteJoint j;
  j.alphabet_sizes = {2, 2, 2};
  j.probs.assign(8, 0.0);
  for (std::size_t v1 = 0; v1 < 2; ++v1)
    for (std::size_t v2 = 0; v2 < 2; ++v2) {
      std::size_t v3 = v1 ^ v2;
      j.probs[j.flat_index({v1, v2, v3})] = 0.25;
    }
  j.validate();
  return j;
}

namespace {

// Inverse standard normal CDF (Acklam's rational approximation, ~1e-9 abs).
double normal_quantile(double p) {
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  if (p <= 0.0 || p >= 1.0) throw DomainError("normal_quantile: p in (0,1) required");
  if (p < plow) {
    double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p > 1.0 - plow) return -normal_quantile(1.0 - p);
  double q = p - 0.5, r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

std::size_t quantile_bucket(double z, std::size_t n_buckets) {
  // Standard-normal quantile thresholds give balanced classes in expectation.
  for (std::size_t b = 1; b < n_buckets; ++b) {
    double threshold = normal_quantile(static_cast<double>(b) /
                                       static_cast<double>(n_buckets));
    if (z < threshold) return b - 1;
  }
  return n_buckets - 1;
}

}  // namespace

MultiModalDataset gen_latent_factor(const std::vector<ModalitySpec>& specs,
                                    std::size_t n, std::uint64_t seed,
                                    const LatentFactorConfig& cfg) {
  if (n < 1) throw ConfigError("gen_latent_factor: n must be >= 1");
  if (specs.empty()) throw ConfigError("gen_latent_factor: need at least 1 modality");
  if (cfg.latent_dim == 0) throw ConfigError("gen_latent_factor: latent_dim must be >= 1");
  if (cfg.n_classes < 2) throw ConfigError("gen_latent_factor: n_classes must be >= 2");
  if (cfg.label_latent_coord >= cfg.latent_dim)
    throw ConfigError("gen_latent_factor: label_latent_coord out of range");
  for (const auto& s : specs) s.validate();

  RngState rng(seed);
  RngState map_rng = rng.fork(1);
  RngState z_rng = rng.fork(2);
  RngState noise_rng = rng.fork(3);

  // Fixed random maps, unit-norm rows, sign canonical.
  std::vector<Matrix> maps;
  for (const auto& s : specs) {
    std::size_t out_dim = s.kind == ViewKind::discrete_view ? 1 : s.dim;
    Matrix a(out_dim, cfg.latent_dim);
    for (std::size_t r = 0; r < out_dim; ++r) {
      double norm2 = 0.0;
      for (std::size_t c = 0; c < cfg.latent_dim; ++c) {
        double v = map_rng.normal();
        a.at(r, c) = v;
        norm2 += v * v;
      }
      double norm = std::sqrt(norm2);
      if (norm < 1e-12) { a.at(r, 0) = 1.0; norm = 1.0; }
      double sign = 1.0;
      for (std::size_t c = 0; c < cfg.latent_dim; ++c) {
        if (a.at(r, c) != 0.0) { sign = a.at(r, c) > 0.0 ? 1.0 : -1.0; break; }
      }
      for (std::size_t c = 0; c < cfg.latent_dim; ++c) a.at(r, c) *= sign / norm;
    }
    maps.push_back(std::move(a));
  }

  MultiModalDataset ds;
  ds.specs = specs;
  ds.samples.reserve(n);
  ds.labels.reserve(n);
  std::vector<double> z(cfg.latent_dim);
  for (std::size_t i = 0; i < n; ++i) {
    for (double& v : z) v = z_rng.normal();
    Tuple t;
    t.reserve(specs.size());
    for (std::size_t k = 0; k < specs.size(); ++k) {
      const auto& s = specs[k];
      const Matrix& a = maps[k];
      std::size_t proj_dim = a.rows;
      std::vector<double> proj(proj_dim, 0.0);
      for (std::size_t r = 0; r < proj_dim; ++r)
        proj[r] = s.snr * dot(a.row(r), z) + noise_rng.normal();
      if (s.kind == ViewKind::discrete_view) {
        // Quantize the noisy 1-D projection into alphabet buckets. The
        // projection has variance snr^2 + 1; standardize before bucketing.
        double std_z = proj[0] / std::sqrt(s.snr * s.snr + 1.0);
        t.push_back({static_cast<double>(quantile_bucket(std_z, s.alphabet_size))});
      } else {
        t.push_back(std::move(proj));
      }
    }
    ds.samples.push_back(std::move(t));
    ds.labels.push_back(quantile_bucket(z[cfg.label_latent_coord], cfg.n_classes));
  }

  KeyValueWriter w;
  w.set("generator", "latent_factor");
  w.set("seed", seed);
  w.set("n", n);
  w.set("latent_dim", cfg.latent_dim);
  w.set("n_classes", cfg.n_classes);
  w.set("label_latent_coord", cfg.label_latent_coord);
  for (std::size_t k = 0; k < specs.size(); ++k) {
    std::string p = "modality." + std::to_string(k) + ".";
    w.set(p + "name", specs[k].name);
    w.set(p + "kind", view_kind_name(specs[k].kind));
    w.set(p + "dim", specs[k].dim);
    w.set(p + "snr", specs[k].snr);
    if (specs[k].kind == ViewKind::discrete_view)
      w.set(p + "alphabet_size", specs[k].alphabet_size);
  }
  ds.provenance = w.str();
  ds.validate();
  return ds;
}

double latent_pair_correlation(double snr_a, double snr_b) {
  return snr_a * snr_b /
         std::sqrt((snr_a * snr_a + 1.0) * (snr_b * snr_b + 1.0));
}

double snr_for_pair_correlation(double rho) {
  if (rho <= 0.0 || rho >= 1.0)
    throw DomainError("snr_for_pair_correlation: rho in (0,1) required");
  return std::sqrt(rho / (1.0 - rho));
}

MultiModalDataset gen_discrete_tuples(const DiscreteJoint& joint, std::size_t n,
                                      std::uint64_t seed) {
  joint.validate();
  std::vector<double> cdf(joint.probs.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < joint.probs.size(); ++i) {
    acc += joint.probs[i];
    cdf[i] = acc;
  }
  cdf.back() = 1.0;

  RngState rng(seed);
  MultiModalDataset ds;
  for (std::size_t k = 0; k < joint.num_modalities(); ++k) {
    ModalitySpec s;
    s.name = "m" + std::to_string(k);
    s.dim = 1;
    s.kind = ViewKind::discrete_view;
    s.snr = 0.0;
    s.alphabet_size = joint.alphabet_sizes[k];
    ds.specs.push_back(std::move(s));
  }
  ds.samples.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    double u = rng.uniform();
    std::size_t cell = static_cast<std::size_t>(
        std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
    if (cell >= cdf.size()) cell = cdf.size() - 1;
    auto symbols = joint.symbols_at(cell);
    Tuple t;
    t.reserve(symbols.size());
    for (std::size_t sym : symbols) t.push_back({static_cast<double>(sym)});
    ds.samples.push_back(std::move(t));
  }

  KeyValueWriter w;
  w.set("generator", "discrete_tuples");
  w.set("seed", seed);
  w.set("n", n);
  std::vector<std::size_t> alpha(joint.alphabet_sizes.begin(), joint.alphabet_sizes.end());
  w.set_list("alphabet_sizes", alpha);
  ds.provenance = w.str();
  ds.validate();
  return ds;
}

}  // namespace tnce
