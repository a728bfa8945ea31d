#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <set>

#include "tnce/contrast/batch.h"
#include "tnce/contrast/encoder.h"
#include "tnce/contrast/loss.h"
#include "tnce/contrast/proposal.h"
#include "tnce/contrast/train.h"
#include "tnce/error.h"
#include "tnce/mi/oracles.h"
#include "tnce/numerics/gradcheck.h"
#include "tnce/synthdata/dataset.h"

using namespace tnce;

namespace {

MultiModalDataset small_gaussian_pool(std::size_t n, std::uint64_t seed,
                                      std::size_t k = 3, std::size_t dim = 2) {
  std::vector<ModalitySpec> specs;
  for (std::size_t i = 0; i < k; ++i)
    specs.push_back({"m" + std::to_string(i), dim, ViewKind::gaussian_view, 1.0, 0});
  LatentFactorConfig cfg;
  cfg.latent_dim = 2;
  cfg.n_classes = 2;
  return gen_latent_factor(specs, n, seed, cfg);
}

// Index of the pool tuple equal to `t` in every view except `k`; requires the
// match to be unique on continuous data.
std::size_t find_source(const MultiModalDataset& pool, const Tuple& t,
                        std::size_t k) {
  for (std::size_t i = 0; i < pool.size(); ++i) {
    bool match = true;
    for (std::size_t m = 0; m < pool.num_modalities() && match; ++m) {
      if (m == k) continue;
      if (pool.samples[i][m] != t[m]) match = false;
    }
    if (match) return i;
  }
  return pool.size();
}

EncoderArch tiny_arch(const MultiModalDataset& ds) {
  EncoderArch arch;
  for (const auto& s : ds.specs) arch.modality_dims.push_back(s.dim);
  arch.modality_hidden = 8;
  arch.modality_out = 4;
  arch.fusion_hidden = 8;
  arch.embedding_dim = 5;
  return arch;
}

}  // namespace

TEST_CASE("NegativeProposal: simplex validation") {
  NegativeProposal p;
  p.alpha = {0.5, 0.3, 0.3};  // sums to 1.1
  CHECK_THROWS_AS(p.validate(), ProposalError);
  p.alpha = {0.5, -0.1, 0.6};
  CHECK_THROWS_AS(p.validate(), ProposalError);
  p.alpha = {0.5, 0.25, 0.25};
  CHECK_NOTHROW(p.validate());
  CHECK(NegativeProposal::uniform(3).alpha.size() == 4);
  CHECK_NOTHROW(NegativeProposal::uniform(3).validate());
}

TEST_CASE("sample_negatives: degenerate alpha_0 = 1 gives only regular draws") {
  auto pool = small_gaussian_pool(32, 1);
  RngState rng(2);
  auto negs = sample_negatives(pool, NegativeProposal::infonce(3), 8, rng);
  REQUIRE(negs.size() == 8);
  for (const auto& n : negs) {
    CHECK(n.disturbed_modality == -1);
    CHECK(find_source(pool, n.tuple, pool.num_modalities()) < pool.size());
  }
}

TEST_CASE("sample_negatives: all mass on one modality disturbs exactly it") {
  auto pool = small_gaussian_pool(32, 3);
  NegativeProposal p;
  p.alpha = {0.0, 0.0, 0.0, 1.0};  // disturb modality 2 only
  RngState rng(4);
  auto negs = sample_negatives(pool, p, 8, rng);
  for (const auto& n : negs) {
    CHECK(n.disturbed_modality == 2);
    const std::size_t src = find_source(pool, n.tuple, 2);
    REQUIRE(src < pool.size());
    // Differs from its source tuple in exactly modality 2, and the swapped
    // view belongs to some other pool tuple.
    CHECK(n.tuple[2] != pool.samples[src][2]);
    bool donor_found = false;
    for (std::size_t i = 0; i < pool.size() && !donor_found; ++i)
      if (i != src && pool.samples[i][2] == n.tuple[2]) donor_found = true;
    CHECK(donor_found);
  }
}

TEST_CASE("sample_negatives: category frequencies converge to alpha") {
  auto pool = small_gaussian_pool(64, 5, 2);
  NegativeProposal p;
  p.alpha = {0.5, 0.25, 0.25};
  RngState rng(6);
  auto negs = sample_negatives(pool, p, 100000, rng);
  std::vector<double> freq(3, 0.0);
  for (const auto& n : negs) freq[static_cast<std::size_t>(n.disturbed_modality + 1)] += 1e-5;
  CHECK(std::abs(freq[0] - 0.5) < 0.01);
  CHECK(std::abs(freq[1] - 0.25) < 0.01);
  CHECK(std::abs(freq[2] - 0.25) < 0.01);
}

TEST_CASE("sample_negatives: error paths") {
  auto pool = small_gaussian_pool(32, 7);
  RngState rng(8);
  NegativeProposal bad;
  bad.alpha = {0.9, 0.0, 0.0, 0.0};
  CHECK_THROWS_AS(sample_negatives(pool, bad, 4, rng), ProposalError);
  auto tiny = small_gaussian_pool(1, 9);
  CHECK_THROWS_AS(
      sample_negatives(tiny, NegativeProposal::infonce(3), 4, rng), PoolError);
}

TEST_CASE("naive_disturb_negatives: single modality reduces to regular draws") {
  auto pool = small_gaussian_pool(16, 10, 1);
  RngState rng(11);
  auto negs = naive_disturb_negatives(pool, 20, rng);
  for (const auto& t : negs) {
    bool found = false;
    for (const auto& s : pool.samples)
      if (s[0] == t[0]) found = true;
    CHECK(found);
  }
}

TEST_CASE("naive_disturb_negatives: pool of two, K = 2, covers all 4 assemblies") {
  auto pool = small_gaussian_pool(2, 12, 2);
  RngState rng(13);
  auto negs = naive_disturb_negatives(pool, 200, rng);
  REQUIRE(negs.size() == 200);
  std::set<std::pair<int, int>> assemblies;
  for (const auto& t : negs) {
    int src0 = t[0] == pool.samples[0][0] ? 0 : (t[0] == pool.samples[1][0] ? 1 : -1);
    int src1 = t[1] == pool.samples[0][1] ? 0 : (t[1] == pool.samples[1][1] ? 1 : -1);
    REQUIRE(src0 >= 0);  // every view comes from the pool
    REQUIRE(src1 >= 0);
    assemblies.insert({src0, src1});
  }
  // The product of marginals: all four (source-of-view-0, source-of-view-1)
  // combinations appear in 200 seeded draws.
  CHECK(assemblies.size() == 4);
}

TEST_CASE("naive_disturb_negatives: m = 0 and small pools") {
  auto pool = small_gaussian_pool(8, 14, 3);
  RngState rng(15);
  CHECK(naive_disturb_negatives(pool, 0, rng).empty());
  auto tiny = small_gaussian_pool(3, 16, 3);  // needs K + 1 = 4
  CHECK_THROWS_AS(naive_disturb_negatives(tiny, 4, rng), PoolError);
}

TEST_CASE("apply_dropout: zero probability leaves all masks empty") {
  auto pool = small_gaussian_pool(16, 17);
  TrainSettings cfg;
  cfg.proposal = NegativeProposal::uniform(3);
  cfg.negatives_per_anchor = 3;
  RngState rng(18);
  auto batch = build_contrastive_batch(pool, cfg, 8, rng);
  CHECK(!mask_any(batch.shared_mask));
  for (const auto& m : batch.anchor_masks) CHECK(!mask_any(m));
}

TEST_CASE("apply_dropout: probability one masks every batch consistently") {
  auto pool = small_gaussian_pool(16, 19);
  TrainSettings cfg;
  cfg.proposal = NegativeProposal::uniform(3);
  cfg.negatives_per_anchor = 3;
  cfg.dropout_prob = 1.0;
  RngState rng(20);
  bool anchors_ever_differ = false;
  for (int trial = 0; trial < 50; ++trial) {
    auto batch = build_contrastive_batch(pool, cfg, 8, rng);
    CHECK(mask_any(batch.shared_mask));       // non-empty
    CHECK(!mask_all(batch.shared_mask));      // proper subset
    for (const auto& m : batch.anchor_masks) {
      CHECK(!mask_all(m));
      if (m != batch.shared_mask) anchors_ever_differ = true;
    }
  }
  CHECK(anchors_ever_differ);
}

TEST_CASE("apply_dropout: masked-batch fraction concentrates at p = 0.6") {
  ContrastiveBatch batch;
  batch.num_modalities = 3;
  batch.anchors.resize(4);
  batch.anchor_masks.resize(4);
  RngState rng(21);
  std::size_t masked = 0;
  const std::size_t trials = 10000;
  for (std::size_t i = 0; i < trials; ++i) {
    apply_dropout(batch, 0.6, rng);
    if (mask_any(batch.shared_mask)) ++masked;
  }
  CHECK(std::abs(static_cast<double>(masked) / trials - 0.6) < 0.02);
}

TEST_CASE("apply_dropout: K = 1 with dropout active is a config error") {
  ContrastiveBatch batch;
  batch.num_modalities = 1;
  batch.anchors.resize(2);
  RngState rng(22);
  CHECK_THROWS_AS(apply_dropout(batch, 0.5, rng), ConfigError);
  CHECK_NOTHROW(apply_dropout(batch, 0.0, rng));
}

TEST_CASE("encode: embeddings are unit-norm and deterministic") {
  auto pool = small_gaussian_pool(8, 23);
  RngState rng(24);
  auto enc = FusionEncoder::random_init(tiny_arch(pool), rng);
  auto e1 = encode_tuple(enc, pool.samples[0], {});
  auto e2 = encode_tuple(enc, pool.samples[0], {});
  CHECK(l2_norm(e1) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(e1 == e2);
}

TEST_CASE("encode: zero placeholder with zero biases contributes the zero-input embedding") {
  auto pool = small_gaussian_pool(4, 25);
  RngState rng(26);
  auto enc = FusionEncoder::random_init(tiny_arch(pool), rng);
  for (auto& m : enc.modality_encoders)
    for (auto& b : m.biases) std::fill(b.begin(), b.end(), 0.0);

  // Masking view 1 must equal feeding a zeroed view 1.
  ModalityMask mask = {0, 1, 0};
  auto masked = encode_tuple(enc, pool.samples[0], mask);
  Tuple zeroed = pool.samples[0];
  std::fill(zeroed[1].begin(), zeroed[1].end(), 0.0);
  auto explicit_zero = encode_tuple(enc, zeroed, {});
  for (std::size_t i = 0; i < masked.size(); ++i)
    CHECK(masked[i] == doctest::Approx(explicit_zero[i]).epsilon(1e-12));
}

TEST_CASE("encode: different non-overlapping masks give different embeddings") {
  auto pool = small_gaussian_pool(4, 27);
  RngState rng(28);
  auto enc = FusionEncoder::random_init(tiny_arch(pool), rng);
  auto a = encode_tuple(enc, pool.samples[0], {1, 0, 0});
  auto b = encode_tuple(enc, pool.samples[0], {0, 1, 1});
  double dist = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) dist += (a[i] - b[i]) * (a[i] - b[i]);
  CHECK(dist > 1e-8);
}

TEST_CASE("encode: all modalities missing is a mask error") {
  auto pool = small_gaussian_pool(4, 29);
  RngState rng(30);
  auto enc = FusionEncoder::random_init(tiny_arch(pool), rng);
  CHECK_THROWS_AS(encode_tuple(enc, pool.samples[0], {1, 1, 1}), MaskError);
}

TEST_CASE("encoder: checkpoint round trip preserves parameters bit-exactly") {
  auto pool = small_gaussian_pool(4, 31);
  RngState rng(32);
  auto enc = FusionEncoder::random_init(tiny_arch(pool), rng);
  auto path = std::filesystem::temp_directory_path() / "tnce_test_enc.ckpt";
  save_encoder(enc, path.string());
  auto loaded = load_encoder(path.string());
  CHECK(loaded.flatten() == enc.flatten());
  CHECK(loaded.param_checksum() == enc.param_checksum());
  std::filesystem::remove(path);
}

TEST_CASE("tuple_info_nce_loss: uniform scores give exactly ln N") {
  CriticConfig critic;
  critic.score = CriticScore::dot;
  critic.temperature = 1.0;
  std::vector<double> anchor = {1.0, 0.0};
  std::vector<double> same = {0.5, 0.5};
  std::vector<std::span<const double>> negatives = {same, same, same};
  auto r = tuple_info_nce_loss(critic, anchor, same, negatives);
  CHECK(r.loss == doctest::Approx(std::log(4.0)).epsilon(1e-12));
}

TEST_CASE("tuple_info_nce_loss: saturated positive approaches zero loss") {
  CriticConfig critic;
  critic.score = CriticScore::dot;
  critic.temperature = 0.1;
  // Positive score 30*tau above the negatives: logit gap 30.
  std::vector<double> anchor = {1.0};
  std::vector<double> pos = {3.0};   // logit 30
  std::vector<double> neg = {0.0};   // logit 0
  std::vector<std::span<const double>> negatives = {neg, neg};
  auto r = tuple_info_nce_loss(critic, anchor, pos, negatives);
  CHECK(r.loss < 1e-10);
}

TEST_CASE("tuple_info_nce_loss: direct evaluation of a 3-candidate softmax") {
  CriticConfig critic;
  critic.score = CriticScore::dot;
  critic.temperature = 1.0;
  std::vector<double> anchor = {1.0, 0.0};
  std::vector<double> pos = {1.0, 0.0};    // score 1.0
  std::vector<double> n1 = {0.5, 0.0};     // score 0.5
  std::vector<double> n2 = {0.2, 0.0};     // score 0.2
  std::vector<std::span<const double>> negatives = {n1, n2};
  auto r = tuple_info_nce_loss(critic, anchor, pos, negatives);
  const double expected =
      std::log(std::exp(1.0) + std::exp(0.5) + std::exp(0.2)) - 1.0;
  CHECK(r.loss == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("tuple_info_nce_loss: config errors") {
  CriticConfig critic;
  critic.temperature = 0.0;
  std::vector<double> v = {1.0};
  std::vector<std::span<const double>> negatives = {v};
  CHECK_THROWS_AS(tuple_info_nce_loss(critic, v, v, negatives), ConfigError);
  critic.temperature = 0.1;
  CHECK_THROWS_AS(tuple_info_nce_loss(critic, v, v, {}), ConfigError);
}

TEST_CASE("cosine critic: loss is invariant to positive rescaling") {
  CriticConfig critic;
  critic.score = CriticScore::cosine;
  critic.temperature = 0.2;
  RngState rng(33);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> anchor(4), pos(4), n1(4), n2(4);
    for (auto* v : {&anchor, &pos, &n1, &n2})
      for (double& x : *v) x = rng.normal();
    std::vector<std::span<const double>> negatives = {n1, n2};
    const double base = tuple_info_nce_loss(critic, anchor, pos, negatives).loss;

    const double scale = rng.uniform(0.1, 10.0);
    std::vector<double> anchor_s = anchor, pos_s = pos, n1_s = n1, n2_s = n2;
    for (auto* v : {&anchor_s, &pos_s, &n1_s, &n2_s})
      for (double& x : *v) x *= scale;
    std::vector<std::span<const double>> negatives_s = {n1_s, n2_s};
    const double scaled = tuple_info_nce_loss(critic, anchor_s, pos_s, negatives_s).loss;
    CHECK(scaled == doctest::Approx(base).epsilon(1e-10));
  }
}

TEST_CASE("tuple_info_nce_loss: embedding gradients match finite differences") {
  RngState rng(34);
  for (CriticScore score : {CriticScore::dot, CriticScore::cosine}) {
    CriticConfig critic;
    critic.score = score;
    critic.temperature = 0.3;
    const std::size_t d = 3;
    std::vector<double> flat(4 * d);
    for (double& v : flat) v = rng.normal();

    auto loss_of = [&](std::span<const double> x) {
      std::vector<double> anchor(x.begin(), x.begin() + d);
      std::vector<double> pos(x.begin() + d, x.begin() + 2 * d);
      std::vector<double> n1(x.begin() + 2 * d, x.begin() + 3 * d);
      std::vector<double> n2(x.begin() + 3 * d, x.begin() + 4 * d);
      std::vector<std::span<const double>> negatives = {n1, n2};
      return tuple_info_nce_loss(critic, anchor, pos, negatives).loss;
    };

    std::vector<double> anchor(flat.begin(), flat.begin() + d);
    std::vector<double> pos(flat.begin() + d, flat.begin() + 2 * d);
    std::vector<double> n1(flat.begin() + 2 * d, flat.begin() + 3 * d);
    std::vector<double> n2(flat.begin() + 3 * d, flat.begin() + 4 * d);
    std::vector<std::span<const double>> negatives = {n1, n2};
    auto r = tuple_info_nce_loss(critic, anchor, pos, negatives);
    std::vector<double> analytic;
    analytic.insert(analytic.end(), r.anchor_grad.begin(), r.anchor_grad.end());
    analytic.insert(analytic.end(), r.pos_grad.begin(), r.pos_grad.end());
    analytic.insert(analytic.end(), r.neg_grads[0].begin(), r.neg_grads[0].end());
    analytic.insert(analytic.end(), r.neg_grads[1].begin(), r.neg_grads[1].end());

    auto report = gradcheck(loss_of, flat, analytic, 1e-6, rng);
    CHECK(report.pass);
  }
}

TEST_CASE("full TupleInfoNCE loss through the encoder passes gradcheck") {
  RngState rng(35);
  for (int trial = 0; trial < 4; ++trial) {
    const std::size_t k = 2 + rng.uniform_index(2);
    auto pool = small_gaussian_pool(16, 100 + trial, k, 1 + rng.uniform_index(3));
    TrainSettings cfg;
    cfg.proposal = NegativeProposal::uniform(k);
    cfg.negatives_per_anchor = 3;
    cfg.dropout_prob = 0.6;
    cfg.critic.score = trial % 2 == 0 ? CriticScore::cosine : CriticScore::dot;
    RngState batch_rng(200 + trial);
    auto batch = build_contrastive_batch(pool, cfg, 3, batch_rng);

    EncoderArch arch = tiny_arch(pool);
    RngState init_rng(300 + trial);
    auto enc = FusionEncoder::random_init(arch, init_rng);

    EncoderGrads grads = EncoderGrads::zeros_like(enc);
    batch_backward_loss(enc, batch, cfg.critic, grads);
    std::vector<double> analytic = grads.flatten();

    auto loss_of = [&](std::span<const double> flat) {
      FusionEncoder probe = enc;
      probe.unflatten(flat);
      return batch_forward_loss(probe, batch, cfg.critic);
    };
    auto report = gradcheck(loss_of, enc.flatten(), analytic, 1e-4, rng, 48);
    CHECK(report.pass);
    CHECK(report.max_rel_err < 1e-4);
  }
}

TEST_CASE("train_contrastive: zero steps leaves the encoder at initialization") {
  auto pool = small_gaussian_pool(32, 36);
  TrainSettings cfg;
  cfg.proposal = NegativeProposal::uniform(3);
  cfg.steps = 0;
  cfg.seed = 77;
  auto r1 = train_contrastive(pool, cfg);
  auto r2 = train_contrastive(pool, cfg);
  CHECK(r1.curve.empty());
  CHECK(r1.encoder.flatten() == r2.encoder.flatten());
}

TEST_CASE("train_contrastive: identical seeds give identical loss curves") {
  auto pool = small_gaussian_pool(64, 37);
  TrainSettings cfg;
  cfg.proposal = NegativeProposal::uniform(3);
  cfg.modality_hidden = 8;
  cfg.modality_out = 4;
  cfg.fusion_hidden = 8;
  cfg.embedding_dim = 4;
  cfg.batch_size = 8;
  cfg.negatives_per_anchor = 7;
  cfg.steps = 25;
  cfg.dropout_prob = 0.6;
  cfg.seed = 99;
  auto r1 = train_contrastive(pool, cfg);
  auto r2 = train_contrastive(pool, cfg);
  REQUIRE(r1.curve.size() == r2.curve.size());
  for (std::size_t i = 0; i < r1.curve.size(); ++i)
    CHECK(r1.curve[i].loss == r2.curve[i].loss);  // bit-identical
}

TEST_CASE("train_contrastive: correlated gaussian pair clears half the MI oracle") {
  // Two 1-D views with rho = 0.8; identity positives let the critic match
  // exactly, so ln N - L must clear 0.5 * min(I, ln N) easily.
  std::vector<ModalitySpec> specs = {
      {"x", 1, ViewKind::gaussian_view, 2.0, 0},
      {"y", 1, ViewKind::gaussian_view, 2.0, 0}};
  LatentFactorConfig lf;
  lf.latent_dim = 1;
  lf.n_classes = 2;
  auto pool = gen_latent_factor(specs, 512, 38, lf);

  TrainSettings cfg;
  cfg.proposal = NegativeProposal::infonce(2);
  cfg.modality_hidden = 16;
  cfg.modality_out = 8;
  cfg.fusion_hidden = 16;
  cfg.embedding_dim = 8;
  cfg.optimizer.kind = OptKind::adam;
  cfg.optimizer.learning_rate = 3e-3;
  cfg.optimizer.weight_decay = 0.0;
  cfg.batch_size = 16;
  cfg.negatives_per_anchor = 63;  // N = 64
  cfg.steps = 500;
  cfg.seed = 5;
  auto result = train_contrastive(pool, cfg);

  const double ln_n = std::log(64.0);
  const double mi = gaussian_mi(0.8);
  double tail = 0.0;
  for (std::size_t i = result.curve.size() - 20; i < result.curve.size(); ++i)
    tail += result.curve[i].bound;
  tail /= 20.0;
  CHECK(tail > 0.5 * std::min(mi, ln_n));
  CHECK(result.curve.back().loss < result.curve.front().loss);
}

TEST_CASE("train_contrastive: divergence raises a training error naming the step") {
  auto pool = small_gaussian_pool(32, 39);
  TrainSettings cfg;
  cfg.proposal = NegativeProposal::uniform(3);
  cfg.optimizer.kind = OptKind::sgd_momentum;
  cfg.optimizer.learning_rate = 1e14;  // guaranteed blow-up
  cfg.optimizer.weight_decay = 0.0;
  cfg.steps = 50;
  cfg.batch_size = 4;
  cfg.negatives_per_anchor = 3;
  try {
    train_contrastive(pool, cfg);
    FAIL("expected TrainingError");
  } catch (const TrainingError& e) {
    CHECK(std::string(e.what()).find("step") != std::string::npos);
  }
}

TEST_CASE("batch invariants: positive derives from the anchor sample") {
  auto pool = small_gaussian_pool(32, 40);
  TrainSettings cfg;
  cfg.proposal = NegativeProposal::uniform(3);
  cfg.negatives_per_anchor = 4;
  // Identity policy: the positive equals the anchor tuple exactly.
  RngState rng(41);
  auto batch = build_contrastive_batch(pool, cfg, 8, rng);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    CHECK(batch.positives[i] == pool.samples[batch.anchor_indices[i]]);
    CHECK(batch.anchors[i] == pool.samples[batch.anchor_indices[i]]);
  }
}

TEST_CASE("mask equality fuzz: positive mask equals every negative mask") {
  // The shared mask applies to positives and negatives by construction; the
  // fuzz asserts the structural invariant survives dropout across batches.
  auto pool = small_gaussian_pool(16, 42);
  TrainSettings cfg;
  cfg.proposal = NegativeProposal::uniform(3);
  cfg.negatives_per_anchor = 2;
  cfg.dropout_prob = 0.6;
  RngState rng(43);
  for (int i = 0; i < 1000; ++i) {
    auto batch = build_contrastive_batch(pool, cfg, 4, rng);
    CHECK(batch.shared_mask.size() == 3);
    CHECK(!mask_all(batch.shared_mask));
  }
}
