#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "tnce/error.h"
#include "tnce/numerics/gradcheck.h"
#include "tnce/numerics/matrix.h"
#include "tnce/numerics/mlp.h"
#include "tnce/numerics/optimizer.h"
#include "tnce/numerics/rng.h"

using namespace tnce;

namespace {

Matrix identity_matrix(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1.0;
  return m;
}

// Independent finite-difference gradient of a scalar function of flat params.
std::vector<double> central_fd(const std::function<double(std::span<const double>)>& f,
                               std::vector<double> x, double h = 1e-5) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = x[i];
    x[i] = saved + h;
    const double fp = f(x);
    x[i] = saved - h;
    const double fm = f(x);
    x[i] = saved;
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

}  // namespace

TEST_CASE("rng: determinism and fork independence") {
  RngState a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  CHECK(a.calls() == 100);

  RngState c(42);
  RngState f1 = c.fork(7);
  RngState f2 = c.fork(7);
  CHECK(f1.next_u64() == f2.next_u64());
  CHECK(c.calls() == 0);  // fork does not advance the parent

  // Uniform range and normal sanity.
  RngState r(1);
  double mean = 0.0;
  for (int i = 0; i < 10000; ++i) {
    double u = r.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    mean += r.normal();
  }
  CHECK(std::abs(mean / 10000.0) < 0.05);
}

TEST_CASE("rng: sample_without_replacement produces distinct indices") {
  RngState rng(3);
  auto idx = rng.sample_without_replacement(10, 10);
  std::vector<bool> seen(10, false);
  for (std::size_t i : idx) {
    CHECK(!seen[i]);
    seen[i] = true;
  }
  CHECK_THROWS_AS(rng.sample_without_replacement(3, 4), DomainError);
}

TEST_CASE("matrix: matmul against hand-computed values") {
  Matrix a(2, 3);
  a.data = {1, 2, 3, 4, 5, 6};
  Matrix b(3, 2);
  b.data = {7, 8, 9, 10, 11, 12};
  Matrix c = matmul(a, b);
  CHECK(c.at(0, 0) == doctest::Approx(58));
  CHECK(c.at(0, 1) == doctest::Approx(64));
  CHECK(c.at(1, 0) == doctest::Approx(139));
  CHECK(c.at(1, 1) == doctest::Approx(154));

  // Transposed variants agree with explicit transposition.
  Matrix nt = matmul_nt(a, transpose(b));
  Matrix tn = matmul_tn(transpose(a), b);
  for (std::size_t i = 0; i < c.data.size(); ++i) {
    CHECK(nt.data[i] == doctest::Approx(c.data[i]));
    CHECK(tn.data[i] == doctest::Approx(c.data[i]));
  }
}

TEST_CASE("matrix: shape errors name both shapes") {
  Matrix a(2, 3), b(2, 2);
  try {
    matmul(a, b);
    FAIL("expected ShapeError");
  } catch (const ShapeError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("2x3") != std::string::npos);
    CHECK(msg.find("2x2") != std::string::npos);
  }
}

TEST_CASE("mlp_forward: identity single layer returns its input") {
  MlpParams p;
  p.layer_dims = {3, 3};
  p.weights = {identity_matrix(3)};
  p.biases = {std::vector<double>(3, 0.0)};
  p.hidden_activation = Activation::identity;

  Matrix x(2, 3);
  x.data = {0.5, -1.0, 2.0, 3.0, 0.0, -0.25};
  Matrix y = mlp_forward(p, x);
  for (std::size_t i = 0; i < x.data.size(); ++i)
    CHECK(y.data[i] == doctest::Approx(x.data[i]));
}

TEST_CASE("mlp_forward: zero weights and biases give zero output") {
  RngState rng(5);
  MlpParams p = MlpParams::random_init({4, 5, 2}, Activation::relu, rng);
  for (auto& w : p.weights)
    for (double& v : w.data) v = 0.0;
  Matrix x(3, 4);
  for (double& v : x.data) v = rng.normal();
  Matrix y = mlp_forward(p, x);
  for (double v : y.data) CHECK(v == 0.0);
}

TEST_CASE("mlp_forward: 2-layer relu net matches per-element hand evaluation") {
  // W0 = [[1, -1], [0, 2]], b0 = (0.5, -1), relu, W1 = [[1, 1]], b1 = (0.25).
  MlpParams p;
  p.layer_dims = {2, 2, 1};
  Matrix w0(2, 2);
  w0.data = {1, -1, 0, 2};
  Matrix w1(1, 2);
  w1.data = {1, 1};
  p.weights = {w0, w1};
  p.biases = {{0.5, -1.0}, {0.25}};
  p.hidden_activation = Activation::relu;

  const double x0 = 0.3, x1 = -0.7;
  // Independent evaluation of the two affine+relu maps.
  const double h0 = std::max(0.0, 1.0 * x0 + (-1.0) * x1 + 0.5);
  const double h1 = std::max(0.0, 0.0 * x0 + 2.0 * x1 - 1.0);
  const double expected = h0 + h1 + 0.25;

  Matrix x(1, 2);
  x.data = {x0, x1};
  Matrix y = mlp_forward(p, x);
  CHECK(y.at(0, 0) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("mlp_forward: dimension mismatch names both shapes") {
  RngState rng(5);
  MlpParams p = MlpParams::random_init({4, 5, 2}, Activation::relu, rng);
  Matrix x(3, 3);
  try {
    mlp_forward(p, x);
    FAIL("expected ShapeError");
  } catch (const ShapeError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("3x3") != std::string::npos);
    CHECK(msg.find("4") != std::string::npos);
  }
}

TEST_CASE("mlp_backward: zero upstream gives zero gradients") {
  RngState rng(6);
  MlpParams p = MlpParams::random_init({3, 4, 2}, Activation::tanh_act, rng);
  Matrix x(2, 3);
  for (double& v : x.data) v = rng.normal();
  MlpCache cache;
  mlp_forward(p, x, &cache);
  Matrix upstream(2, 2);
  MlpGrads g = mlp_backward(p, cache, upstream);
  for (const auto& w : g.weights)
    for (double v : w.data) CHECK(v == 0.0);
  for (const auto& b : g.biases)
    for (double v : b) CHECK(v == 0.0);
}

TEST_CASE("mlp_backward: linear layer weight gradient is the outer product") {
  MlpParams p;
  p.layer_dims = {3, 2};
  Matrix w(2, 3);
  w.data = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6};
  p.weights = {w};
  p.biases = {{0.0, 0.0}};
  p.hidden_activation = Activation::identity;

  Matrix x(1, 3);
  x.data = {1.0, -2.0, 3.0};
  MlpCache cache;
  mlp_forward(p, x, &cache);
  Matrix upstream(1, 2);
  upstream.data = {0.7, -0.4};
  MlpGrads g = mlp_backward(p, cache, upstream);
  for (std::size_t r = 0; r < 2; ++r)
    for (std::size_t c = 0; c < 3; ++c)
      CHECK(g.weights[0].at(r, c) ==
            doctest::Approx(upstream.data[r] * x.data[c]));
  CHECK(g.biases[0][0] == doctest::Approx(0.7));
  CHECK(g.biases[0][1] == doctest::Approx(-0.4));
}

TEST_CASE("mlp_backward: stale cache is rejected") {
  RngState rng(7);
  MlpParams p = MlpParams::random_init({3, 4, 2}, Activation::relu, rng);
  MlpParams other = MlpParams::random_init({3, 5, 2}, Activation::relu, rng);
  Matrix x(2, 3);
  for (double& v : x.data) v = rng.normal();
  MlpCache cache;
  mlp_forward(other, x, &cache);
  Matrix upstream(2, 2, 1.0);
  CHECK_THROWS_AS(mlp_backward(p, cache, upstream), CacheError);
}

TEST_CASE("mlp_backward: random 3-layer nets match central finite differences") {
  RngState rng(2024);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t in = 1 + rng.uniform_index(4);
    const std::size_t h1 = 1 + rng.uniform_index(5);
    const std::size_t h2 = 1 + rng.uniform_index(5);
    const std::size_t out = 1 + rng.uniform_index(3);
    const Activation act =
        rng.uniform() < 0.5 ? Activation::relu : Activation::tanh_act;
    MlpParams p = MlpParams::random_init({in, h1, h2, out}, act, rng);
    const std::size_t batch = 1 + rng.uniform_index(3);
    Matrix x(batch, in);
    for (double& v : x.data) v = rng.normal();
    // Loss = sum of squared outputs / 2; upstream = outputs.
    MlpCache cache;
    Matrix y = mlp_forward(p, x, &cache);
    MlpGrads analytic = mlp_backward(p, cache, y);

    auto loss_of = [&](std::span<const double> flat) {
      MlpParams q = p;
      unflatten_params(q, flat);
      Matrix out_m = mlp_forward(q, x);
      double acc = 0.0;
      for (double v : out_m.data) acc += 0.5 * v * v;
      return acc;
    };
    std::vector<double> flat = flatten_params(p);
    std::vector<double> fd = central_fd(loss_of, flat);

    MlpParams grads_as_params = p;  // reuse the layout for flattening
    grads_as_params.weights = analytic.weights;
    grads_as_params.biases = analytic.biases;
    std::vector<double> flat_analytic = flatten_params(grads_as_params);

    double max_rel = 0.0;
    for (std::size_t i = 0; i < fd.size(); ++i) {
      const double rel =
          std::abs(fd[i] - flat_analytic[i]) /
          std::max(1e-5, std::abs(fd[i]) + std::abs(flat_analytic[i]));
      max_rel = std::max(max_rel, rel);
    }
    CHECK(max_rel < 1e-4);
  }
}

TEST_CASE("softmax_cross_entropy: uniform, saturated and direct-evaluation cases") {
  auto uniform = softmax_cross_entropy(std::vector<double>{0, 0, 0}, 0);
  CHECK(uniform.loss == doctest::Approx(std::log(3.0)).epsilon(1e-12));

  auto saturated = softmax_cross_entropy(std::vector<double>{30, -30}, 0);
  CHECK(saturated.loss == doctest::Approx(0.0).epsilon(1e-12));

  // Direct evaluation: loss = ln(e^1 + e^2 + e^3) - 3.
  auto direct = softmax_cross_entropy(std::vector<double>{1, 2, 3}, 2);
  const double expected =
      std::log(std::exp(1.0) + std::exp(2.0) + std::exp(3.0)) - 3.0;
  CHECK(direct.loss == doctest::Approx(expected).epsilon(1e-12));
  CHECK(direct.loss == doctest::Approx(0.40760596444438104).epsilon(1e-10));
}

TEST_CASE("softmax_cross_entropy: gradient sums to zero and handles extremes") {
  RngState rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    std::size_t n = 2 + rng.uniform_index(6);
    std::vector<double> logits(n);
    for (double& v : logits) v = rng.uniform(-40.0, 40.0);
    auto r = softmax_cross_entropy(logits, rng.uniform_index(n));
    double sum = 0.0;
    for (double g : r.grad) sum += g;
    CHECK(std::abs(sum) < 1e-10);
    CHECK(r.loss >= 0.0);
  }
  CHECK_THROWS_AS(
      softmax_cross_entropy(
          std::vector<double>{std::numeric_limits<double>::quiet_NaN(), 0.0}, 0),
      NumericError);
  CHECK_THROWS_AS(softmax_cross_entropy(std::vector<double>{1.0, 2.0}, 5),
                  DomainError);
}

TEST_CASE("optimizer: plain sgd step and zero-grad fixpoint") {
  OptimizerConfig cfg;
  cfg.kind = OptKind::sgd_momentum;
  cfg.learning_rate = 0.1;
  cfg.momentum = 0.0;
  cfg.weight_decay = 0.0;
  OptimizerState opt(cfg);

  std::vector<double> p = {1.0, -2.0};
  std::vector<double> g = {0.5, 0.25};
  opt.step({std::span<double>(p)}, {std::span<const double>(g)});
  CHECK(p[0] == doctest::Approx(1.0 - 0.1 * 0.5));
  CHECK(p[1] == doctest::Approx(-2.0 - 0.1 * 0.25));

  OptimizerState opt2(cfg);
  std::vector<double> q = {3.0, 4.0};
  std::vector<double> zero = {0.0, 0.0};
  opt2.step({std::span<double>(q)}, {std::span<const double>(zero)});
  CHECK(q[0] == 3.0);
  CHECK(q[1] == 4.0);
  CHECK(opt2.step_count() == 1);
}

TEST_CASE("optimizer: two momentum steps follow the hand-unrolled recurrence") {
  OptimizerConfig cfg;
  cfg.kind = OptKind::sgd_momentum;
  cfg.learning_rate = 0.1;
  cfg.momentum = 0.9;
  cfg.weight_decay = 0.0;
  OptimizerState opt(cfg);

  const double g = 2.0;
  std::vector<double> p = {1.0};
  std::vector<double> grad = {g};
  // v1 = 0.9 * 0 + g = 2; p1 = 1 - 0.1 * 2 = 0.8
  // v2 = 0.9 * 2 + 2 = 3.8; p2 = 0.8 - 0.1 * 3.8 = 0.42
  opt.step({std::span<double>(p)}, {std::span<const double>(grad)});
  CHECK(p[0] == doctest::Approx(0.8).epsilon(1e-12));
  opt.step({std::span<double>(p)}, {std::span<const double>(grad)});
  CHECK(p[0] == doctest::Approx(0.42).epsilon(1e-12));
}

TEST_CASE("optimizer: shape mismatch raises") {
  OptimizerConfig cfg;
  OptimizerState opt(cfg);
  std::vector<double> p = {1.0, 2.0};
  std::vector<double> g = {1.0};
  CHECK_THROWS_AS(
      opt.step({std::span<double>(p)}, {std::span<const double>(g)}), ShapeError);
}

TEST_CASE("optimizer: adam leaves params unchanged on zero grads") {
  OptimizerConfig cfg;
  cfg.kind = OptKind::adam;
  cfg.learning_rate = 1e-3;
  cfg.weight_decay = 0.0;
  OptimizerState opt(cfg);
  std::vector<double> p = {1.0, -1.0};
  std::vector<double> zero = {0.0, 0.0};
  opt.step({std::span<double>(p)}, {std::span<const double>(zero)});
  CHECK(p[0] == 1.0);
  CHECK(p[1] == -1.0);
}

TEST_CASE("onecycle: peak lands at the configured fraction, final lr below 1%") {
  OptimizerConfig cfg;
  cfg.schedule = LrSchedule::onecycle;
  cfg.learning_rate = 0.25;
  cfg.total_steps = 200;
  cfg.onecycle_peak_fraction = 0.3;

  double max_lr = 0.0;
  std::size_t argmax = 0;
  for (std::size_t t = 0; t < cfg.total_steps; ++t) {
    const double lr = schedule_lr(cfg, t);
    CHECK(lr > 0.0);
    if (lr > max_lr) {
      max_lr = lr;
      argmax = t;
    }
  }
  CHECK(max_lr == doctest::Approx(0.25));
  CHECK(argmax == static_cast<std::size_t>(std::llround(0.3 * 199)));
  CHECK(schedule_lr(cfg, cfg.total_steps - 1) < 0.01 * 0.25);
}

TEST_CASE("gradcheck: quadratic passes, corrupted gradient fails") {
  RngState rng(9);
  std::vector<double> p(6);
  for (double& v : p) v = rng.normal();

  auto loss = [](std::span<const double> x) {
    double acc = 0.0;
    for (double v : x) acc += 0.5 * v * v;
    return acc;
  };
  std::vector<double> grad(p.begin(), p.end());
  auto report = gradcheck(loss, p, grad, 1e-8, rng);
  CHECK(report.pass);
  CHECK(report.max_rel_err < 1e-8);

  std::vector<double> corrupted = grad;
  for (double& v : corrupted) v *= 2.0;
  auto bad = gradcheck(loss, p, corrupted, 1e-8, rng);
  CHECK(!bad.pass);
}

TEST_CASE("gradcheck: non-deterministic loss is detected") {
  RngState rng(10);
  std::vector<double> p = {1.0, 2.0};
  std::vector<double> g = {1.0, 2.0};
  int calls = 0;
  auto loss = [&calls](std::span<const double> x) {
    return 0.5 * (x[0] * x[0] + x[1] * x[1]) + 1e-9 * (calls++);
  };
  CHECK_THROWS_AS(gradcheck(loss, p, g, 1e-4, rng), DeterminismError);
}
