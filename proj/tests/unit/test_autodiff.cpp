#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "ptmaml/autodiff/checkpoint.hpp"
#include "ptmaml/autodiff/graph.hpp"
#include "ptmaml/autodiff/optim.hpp"
#include "random_graphs.hpp"

using namespace ptmaml::ad;

namespace {

ParamSet one(const std::string& name, Tensor t) {
  ParamSet p;
  p.add(name, std::move(t));
  return p;
}

} // namespace

TEST_CASE("tensor shape and element count agree") {
  Tensor t(Shape{2, 3}, 1.5);
  CHECK(t.size() == 6);
  CHECK(t.rows() == 2);
  CHECK(t.cols() == 3);
  CHECK_THROWS_AS(Tensor(Shape{2, 2}, std::vector<double>{1, 2, 3}), ShapeError);
}

TEST_CASE("softmax of equal logits is uniform") {
  Graph g;
  auto y = g.softmax(g.constant(Tensor::vector({0.0, 0.0})));
  CHECK(g.value(y)[0] == 0.5);
  CHECK(g.value(y)[1] == 0.5);
}

TEST_CASE("tanh of zero") {
  Graph g;
  CHECK(g.scalar(g.tanh(g.constant(Tensor::scalar(0.0)))) == 0.0);
}

TEST_CASE("matrix times vector") {
  Graph g;
  auto y = g.matmul(g.constant(Tensor::matrix(2, 2, {1, 2, 3, 4})), g.input("x", Tensor::vector({1, 1})));
  CHECK(g.value(y) == Tensor::vector({3, 7}));
  // Rebinding the input replays the tape.
  CHECK(eval_graph(g, y, {{"x", Tensor::vector({1, 0})}}) == Tensor::vector({1, 3}));
}

TEST_CASE("transposed and matrix-matrix products") {
  Graph g;
  auto a = g.constant(Tensor::matrix(2, 3, {1, 2, 3, 4, 5, 6}));
  auto v = g.constant(Tensor::vector({1, -1}));
  CHECK(g.value(g.matmul(a, v, true)) == Tensor::vector({-3, -3, -3}));
  auto b = g.constant(Tensor::matrix(3, 1, {1, 0, 2}));
  CHECK(g.value(g.matmul(a, b)) == Tensor::matrix(2, 1, {7, 16}));
}

TEST_CASE("shape mismatch names the node") {
  Graph g;
  auto a = g.constant(Tensor::vector({1, 2}));
  auto b = g.constant(Tensor::vector({1, 2, 3}));
  try {
    g.add(a, b);
    FAIL("expected a shape error");
  } catch (const ShapeError& e) {
    CHECK(std::string(e.what()).find("node 2 (add)") != std::string::npos);
  }
}

TEST_CASE("non-finite intermediates are rejected") {
  Graph g;
  CHECK_THROWS_AS(g.log(g.constant(Tensor::vector({0.0}))), NonFiniteError);
}

TEST_CASE("square has gradient 2 theta") {
  auto p = one("t", Tensor::scalar(3.0));
  Graph g(&p);
  auto t = g.parameter("t");
  auto loss = g.mul(t, t);
  CHECK(backward(g, loss)[0][0] == 6.0);
}

TEST_CASE("log-softmax gradient is onehot minus softmax") {
  auto p = one("z", Tensor::vector({1, 2, 3}));
  Graph g(&p);
  auto sm = g.softmax(g.parameter("z"));
  auto loss = g.log(g.sum(g.gather(sm, {1})));
  auto grad = backward(g, loss);
  double z = std::exp(1.0) + std::exp(2.0) + std::exp(3.0);
  double expect[3] = {-std::exp(1.0) / z, 1.0 - std::exp(2.0) / z, -std::exp(3.0) / z};
  for (int i = 0; i < 3; ++i) CHECK(grad[0][i] == doctest::Approx(expect[i]).epsilon(1e-12));
  CHECK(grad_check(g, loss, p, 1e-5) < 1e-8);
}

TEST_CASE("constant loss has zero gradient") {
  auto p = one("t", Tensor::vector({1, 2}));
  Graph g(&p);
  g.parameter("t");
  auto loss = g.sum(g.constant(Tensor::vector({4, 5})));
  auto grad = backward(g, loss);
  CHECK(grad[0] == Tensor::vector({0, 0}));
}

TEST_CASE("backward rejects a non-scalar loss") {
  auto p = one("t", Tensor::vector({1, 2}));
  Graph g(&p);
  auto y = g.tanh(g.parameter("t"));
  CHECK_THROWS_AS(backward(g, y), ShapeError);
}

TEST_CASE("grad_check on a quadratic is exact to roundoff") {
  auto p = one("t", Tensor::vector({0.3, -1.2, 2.0}));
  Graph g(&p);
  auto t = g.parameter("t");
  auto d = g.sub(t, g.constant(Tensor::vector({1, 1, 1})));
  auto loss = g.sum(g.mul(d, d));
  CHECK(grad_check(g, loss, p, 1e-5) < 1e-8);
  CHECK_THROWS_AS(grad_check(g, loss, p, 1e-2), std::invalid_argument);
}

TEST_CASE("two-layer tanh network with 30 parameters") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1, 1);
  auto rnd = [&](std::size_t n) {
    std::vector<double> v(n);
    for (auto& x : v) x = u(rng);
    return v;
  };
  ParamSet p;
  p.add("W1", Tensor::matrix(4, 3, rnd(12)));
  p.add("b1", Tensor::vector(rnd(4)));
  p.add("W2", Tensor::matrix(3, 4, rnd(12)));
  p.add("b2", Tensor::vector(rnd(2)));
  CHECK(p.element_count() == 30);
  Graph g(&p);
  auto x = g.input("x", Tensor::vector(rnd(3)));
  auto h = g.tanh(g.add(g.matmul(g.parameter("W1"), x), g.parameter("b1")));
  auto o = g.matmul(g.parameter("W2"), h);
  auto loss = g.sum(g.mul(g.tanh(g.add(g.slice(o, 0, 2), g.parameter("b2"))), g.slice(o, 1, 2)));
  CHECK(grad_check(g, loss, p, 1e-5) < 1e-4);
}

TEST_CASE("softmax cross-entropy head") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0, 1);
  std::vector<double> w(15), x(3);
  for (auto& v : w) v = n(rng);
  for (auto& v : x) v = n(rng);
  auto p = one("W", Tensor::matrix(5, 3, w));
  Graph g(&p);
  auto sm = g.softmax(g.matmul(g.parameter("W"), g.constant(Tensor::vector(x))));
  auto loss = g.scale(g.log(g.sum(g.gather(sm, {2}))), -1.0);
  CHECK(grad_check(g, loss, p, 1e-5) < 1e-4);
}

TEST_CASE("every op passes grad_check inside random graphs") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto rg = ptmaml::testing::random_graph(seed);
    CHECK(rg.params.element_count() <= 100);
    Graph g(&rg.params);
    auto loss = rg.build(g);
    CHECK(grad_check(g, loss, rg.params, 1e-5) < 1e-4);
  }
}

TEST_CASE("max, stack and embedding gradients") {
  ParamSet p;
  p.add("E", Tensor::matrix(3, 2, {0.1, 0.7, -0.4, 0.3, 0.9, -0.2}));
  Graph g(&p);
  auto e = g.parameter("E");
  NodeId rows[2] = {g.embedding(e, 2), g.embedding(e, 0)};
  auto m = g.stack(rows);
  auto s = g.matmul(m, g.constant(Tensor::vector({1.0, 2.0})));
  auto loss = g.max(g.tanh(s));
  auto grad = backward(g, loss);
  CHECK(grad[0][2] == 0.0);  // row 1 is never used
  CHECK(grad_check(g, loss, p, 1e-5) < 1e-8);
}

TEST_CASE("softmax rows sum to one") {
  Graph g;
  auto y = g.softmax(g.constant(Tensor::matrix(2, 3, {1, 2, 3, -40, 0, 40})));
  for (std::size_t r = 0; r < 2; ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < 3; ++c) s += g.value(y)[r * 3 + c];
    CHECK(std::abs(s - 1.0) < 1e-12);
  }
}

TEST_CASE("clipping") {
  auto g = one("g", Tensor::vector({3, 4}));
  CHECK(clip_gradients(g, 5.0)[0] == Tensor::vector({3, 4}));
  auto big = one("g", Tensor::vector({6, 8}));
  auto c = clip_gradients(big, 5.0);
  CHECK(c[0][0] == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(c[0][1] == doctest::Approx(4.0).epsilon(1e-15));
  CHECK(global_norm(c) <= 5.0 + 1e-12);
  CHECK(clip_gradients(c, 5.0) == c);
  auto zero = one("g", Tensor::vector({0, 0}));
  CHECK(clip_gradients(zero, 5.0) == zero);
}

TEST_CASE("clipping never increases the norm and is idempotent") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n(0, 4);
  for (int trial = 0; trial < 50; ++trial) {
    ParamSet g;
    g.add("a", Tensor::vector({n(rng), n(rng), n(rng)}));
    g.add("b", Tensor::matrix(2, 2, {n(rng), n(rng), n(rng), n(rng)}));
    auto once = clip_gradients(g, 5.0);
    CHECK(global_norm(once) <= global_norm(g) + 1e-12);
    CHECK(global_norm(once) <= 5.0 + 1e-12);
    auto twice = clip_gradients(once, 5.0);
    for (std::size_t i = 0; i < once.size(); ++i) {
      for (std::size_t k = 0; k < once[i].size(); ++k) CHECK(std::abs(twice[i][k] - once[i][k]) <= 1e-12);
    }
  }
}

TEST_CASE("gradient noise schedule") {
  OptimConfig cfg;
  CHECK(noise_variance(0, cfg) == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(noise_variance(3, cfg) == doctest::Approx(0.3 / std::pow(4.0, 0.55)).epsilon(1e-15));

  std::mt19937_64 rng(5);
  OptimConfig off = cfg;
  off.noise_eta = 0.0;
  auto g = one("g", Tensor::vector({1, 2}));
  CHECK(add_gradient_noise(g, 0, off, rng) == g);

  auto zeros = one("g", Tensor(Shape{100000}, 0.0));
  auto noisy = add_gradient_noise(zeros, 3, cfg, rng);
  double mean = 0.0, var = 0.0;
  for (double v : noisy[0].values()) mean += v;
  mean /= 1e5;
  for (double v : noisy[0].values()) var += (v - mean) * (v - mean);
  var /= (1e5 - 1);
  double expect = 0.3 / std::pow(4.0, 0.55);
  CHECK(std::abs(var - expect) / expect < 0.05);

  std::mt19937_64 r1(9), r2(9);
  CHECK(add_gradient_noise(g, 2, cfg, r1) == add_gradient_noise(g, 2, cfg, r2));
}

TEST_CASE("adagrad steps") {
  OptimConfig cfg;
  auto p = one("p", Tensor::vector({0.0}));
  auto state = AdagradState::fresh(p);
  auto g = one("p", Tensor::vector({1.0}));
  adagrad_step(p, g, state, cfg);
  CHECK(p[0][0] == doctest::Approx(-0.1).epsilon(1e-7));
  CHECK(state.step_count == 1);
  double before = p[0][0];
  adagrad_step(p, g, state, cfg);
  CHECK(before - p[0][0] == doctest::Approx(0.1 / std::sqrt(2.0)).epsilon(1e-7));
  CHECK(state.accumulators[0][0] == 2.0);

  auto zero = one("p", Tensor::vector({0.0}));
  auto acc = state.accumulators;
  double held = p[0][0];
  adagrad_step(p, zero, state, cfg);
  CHECK(p[0][0] == held);
  CHECK(state.accumulators == acc);
}

TEST_CASE("optimizer config validation") {
  OptimConfig cfg;
  cfg.clip_norm = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.learning_rate = std::nan("");
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("checkpoint round trip") {
  ParamSet p;
  p.add("w", Tensor::matrix(2, 2, {0.1, 1.0 / 3.0, -2e-300, 7}));
  p.add("b", Tensor::vector({std::nextafter(1.0, 2.0)}));
  auto path = std::filesystem::temp_directory_path() / "ptmaml_ckpt_test.json";
  save_params(path, p);
  CHECK(load_params(path) == p);
  std::filesystem::remove(path);
  auto doc = params_to_json(p);
  doc.erase("version");
  CHECK_THROWS(params_from_json(doc));
}
