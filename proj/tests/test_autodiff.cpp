#include <doctest.h>

#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "bhs/ad/layers.hpp"
#include "bhs/ad/ops.hpp"
#include "bhs/error.hpp"
#include "gradcheck.hpp"
#include "gradsuite.hpp"

using namespace bhs;
using namespace bhs::ad;

namespace {

using bhs::testing::random_tensor;

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return Errc::kIo;
}

void zero_all(ParameterStore& store) {
  for (std::size_t i = 0; i < store.size(); ++i) {
    store[i].value.fill(0.0);
  }
}

}  // namespace

TEST_CASE("tensor basics") {
  const Tensor m = Tensor::matrix(2, 3, {1, 2, 3, 4, 5, 6});
  CHECK(m.rank() == 2);
  CHECK(m.at({1, 2}) == 6);
  CHECK(shape_string(m.shape()) == "[2x3]");
  CHECK(code_of([] { Tensor({2, 2}, std::vector<double>{1, 2, 3}); }) == Errc::kShapeMismatch);
  CHECK(m.reshaped({3, 2}).at({2, 0}) == 5);
  Tensor bad({2});
  bad[1] = std::numeric_limits<double>::quiet_NaN();
  CHECK(!bad.all_finite());
}

TEST_CASE("conv1d hand examples") {
  Graph g;
  const Var x = g.constant(Tensor({4, 1}, {1, 2, 3, 4}));
  const Var ones = g.constant(Tensor({3, 1, 1}, {1, 1, 1}));
  const Var zero_bias = g.constant(Tensor({1}));
  CHECK(conv1d(x, ones, zero_bias).value().values() == std::vector<double>{6, 9});

  const Var x2 = g.constant(Tensor({3, 2}, {1, 2, 3, 4, 5, 6}));
  const Var identity = g.constant(Tensor({1, 2, 2}, {1, 0, 0, 1}));
  CHECK(conv1d(x2, identity, g.constant(Tensor({2}))).value().values() ==
        x2.value().values());

  const Var zero_k = g.constant(Tensor({2, 2, 3}));
  const Var bias = g.constant(Tensor({3}, {0.5, -1, 2}));
  const Tensor out = conv1d(x2, zero_k, bias).value();
  CHECK(out.shape() == Shape{2, 3});
  for (std::size_t t = 0; t < 2; ++t) {
    CHECK(out.at({t, 0}) == 0.5);
    CHECK(out.at({t, 1}) == -1);
    CHECK(out.at({t, 2}) == 2);
  }
  CHECK(code_of([&] { conv1d(g.constant(Tensor({2, 1})), ones, zero_bias); }) ==
        Errc::kShapeMismatch);
}

TEST_CASE("lstm cell hand examples") {
  ParameterStore store;
  std::mt19937_64 rng(1);
  const Lstm cell = Lstm::create(store, "lstm", 1, 1, rng);
  CHECK(store.find("lstm.b")->value[1] == 1.0);  // forget-gate bias
  zero_all(store);
  Graph g;
  const Var x = g.constant(Tensor({1, 1}, {0.7}));
  const Lstm::State s0 = cell.cell(g, x, {g.constant(Tensor({1, 1})), g.constant(Tensor({1, 1}))});
  CHECK(s0.h.value()[0] == 0.0);
  CHECK(s0.c.value()[0] == 0.0);
  const Lstm::State s1 =
      cell.cell(g, x, {g.constant(Tensor({1, 1})), g.constant(Tensor({1, 1}, {1.0}))});
  CHECK(s1.c.value()[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(s1.h.value()[0] == doctest::Approx(0.5 * std::tanh(0.5)).epsilon(1e-15));
  CHECK(s1.h.value()[0] == doctest::Approx(0.23105).epsilon(1e-4));
  CHECK(code_of([&] { cell.cell(g, g.constant(Tensor({1, 2})), s0); }) == Errc::kShapeMismatch);
}

TEST_CASE("gru cell hand examples") {
  ParameterStore store;
  std::mt19937_64 rng(1);
  const Gru cell = Gru::create(store, "gru", 1, 1, rng);
  zero_all(store);
  Graph g;
  const Var x = g.constant(Tensor({1, 1}, {0.3}));
  CHECK(cell.cell(g, x, g.constant(Tensor({1, 1}, {0.4}))).value()[0] ==
        doctest::Approx(0.2).epsilon(1e-15));
  CHECK(cell.cell(g, x, g.constant(Tensor({1, 1}))).value()[0] == 0.0);
}

TEST_CASE("bidirectional encoder shape and symmetry") {
  ParameterStore store;
  std::mt19937_64 rng(2);
  const Lstm fwd = Lstm::create(store, "fwd", 3, 2, rng);
  const Lstm bwd = Lstm::create(store, "bwd", 3, 2, rng);
  for (const char* p : {"w", "u", "b"}) {
    store.find(std::string("bwd.") + p)->value = store.find(std::string("fwd.") + p)->value;
  }
  for (std::size_t n = 1; n <= 6; ++n) {
    Tensor x({1, n, 3});
    for (std::size_t t = 0; t < n; ++t) {
      for (std::size_t i = 0; i < 3; ++i) {
        // Palindromic sequence: position t equals position n−1−t.
        const std::size_t m = std::min(t, n - 1 - t);
        x.at({0, t, i}) = std::sin(static_cast<double>(m * 3 + i + 1));
      }
    }
    Graph g;
    const Tensor h = bidirectional_encode(g, fwd, bwd, g.constant(x), 0.0).value();
    CHECK(h.shape() == Shape{1, n, 4});
    for (std::size_t t = 0; t < n; ++t) {
      for (std::size_t j = 0; j < 2; ++j) {
        CHECK(h.at({0, t, j}) == doctest::Approx(h.at({0, n - 1 - t, 2 + j})).epsilon(1e-14));
      }
    }
  }
}

TEST_CASE("bidirectional n = 1 sees one step each way") {
  ParameterStore store;
  std::mt19937_64 rng(3);
  const Lstm fwd = Lstm::create(store, "fwd", 2, 3, rng);
  const Lstm bwd = Lstm::create(store, "bwd", 2, 3, rng);
  Graph g;
  const Var x = g.constant(Tensor({1, 1, 2}, {0.5, -0.25}));
  const Tensor h = bidirectional_encode(g, fwd, bwd, x, 0.0).value();
  const Var x0 = time_step(x, 0);
  const Tensor f = fwd.cell(g, x0, fwd.zero_state(g, 1)).h.value();
  const Tensor b = bwd.cell(g, x0, bwd.zero_state(g, 1)).h.value();
  for (std::size_t j = 0; j < 3; ++j) {
    CHECK(h[j] == doctest::Approx(f[j]).epsilon(1e-15));
    CHECK(h[3 + j] == doctest::Approx(b[j]).epsilon(1e-15));
  }
}

TEST_CASE("additive attention hand example") {
  ParameterStore store;
  std::mt19937_64 rng(4);
  const AdditiveAttention att = AdditiveAttention::create(store, "att", 1, 1, 2, rng);
  att.w_a->value = Tensor::matrix(2, 2, {1, 0, 0, 1});
  att.v_a->value = Tensor::vector({1, 1});
  Graph g;
  const auto r = att.forward(g, g.constant(Tensor({1, 1})), g.constant(Tensor({1, 2, 1}, {1, -1})));
  // Independent evaluation: scores ±tanh(1), two-way softmax.
  const double a0 = 1.0 / (1.0 + std::exp(-2.0 * std::tanh(1.0)));
  CHECK(r.alpha.value()[0] == doctest::Approx(a0).epsilon(1e-12));
  CHECK(r.alpha.value()[1] == doctest::Approx(1 - a0).epsilon(1e-12));
  CHECK(r.context.value()[0] == doctest::Approx(2 * a0 - 1).epsilon(1e-12));
  // Rounded reference values.
  CHECK(std::abs(r.alpha.value()[0] - 0.82087) < 5e-4);
  CHECK(std::abs(r.context.value()[0] - 0.64174) < 5e-4);
}

TEST_CASE("additive attention singleton and duplicates") {
  ParameterStore store;
  std::mt19937_64 rng(5);
  const AdditiveAttention att = AdditiveAttention::create(store, "att", 3, 2, 4, rng);
  Graph g;
  const Var s = g.constant(Tensor({1, 3}, {0.3, -1, 2}));
  const auto one = att.forward(g, s, g.constant(Tensor({1, 1, 2}, {0.7, -0.2})));
  CHECK(one.alpha.value()[0] == 1.0);
  CHECK(one.context.value().values() == std::vector<double>{0.7, -0.2});
  const auto two = att.forward(g, s, g.constant(Tensor({1, 2, 2}, {0.7, -0.2, 0.7, -0.2})));
  CHECK(two.alpha.value()[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(two.alpha.value()[1] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(two.context.value()[0] == doctest::Approx(0.7).epsilon(1e-15));
  CHECK(code_of([&] { att.forward(g, s, g.constant(Tensor({1, 2, 3}))); }) ==
        Errc::kShapeMismatch);
}

TEST_CASE("property: attention invariants") {
  const auto inv = bhs::testing::check_attention_invariants(300, 17);
  CHECK(inv.min_alpha >= 0.0);
  CHECK(inv.max_alpha <= 1.0);
  CHECK(inv.max_sum_error <= 1e-12);
  CHECK(inv.max_reconstruction_error < 1e-9);
  CHECK(inv.max_singleton_error <= 1e-12);
  CHECK(inv.max_duplicate_error <= 1e-12);
}

TEST_CASE("softmax") {
  CHECK(softmax(std::vector<double>{0, 0}) == std::vector<double>{0.5, 0.5});
  for (double c : {-1e6, -3.0, 0.0, 7.5, 1e6}) {
    for (double p : softmax(std::vector<double>{c, c, c})) {
      CHECK(p == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    }
  }
  const auto big = softmax(std::vector<double>{1000, 0});
  CHECK(big[0] == 1.0);
  CHECK(big[1] == doctest::Approx(std::exp(-1000.0)).epsilon(1e-12));
  CHECK(std::isfinite(big[1]));

  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-20, 20);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> z(1 + rng() % 7);
    for (double& v : z) {
      v = u(rng);
    }
    std::vector<double> shifted = z;
    const double c = u(rng);
    for (double& v : shifted) {
      v += c;
    }
    const auto a = softmax(z);
    const auto b = softmax(shifted);
    double sum = 0;
    for (std::size_t i = 0; i < z.size(); ++i) {
      CHECK(a[i] > 0.0);
      CHECK(std::abs(a[i] - b[i]) <= 1e-12);
      sum += a[i];
    }
    CHECK(std::abs(sum - 1.0) <= 1e-12);
  }
}

TEST_CASE("cross entropy") {
  const std::vector<double> hot = {0, 0, 1, 0, 0, 0, 0};
  CHECK(cross_entropy(hot, 2) == 0.0);
  CHECK(cross_entropy(hot, 0) == doctest::Approx(-std::log(1e-12)));
  const std::vector<double> uniform(7, 1.0 / 7.0);
  for (std::size_t t = 0; t < 7; ++t) {
    CHECK(cross_entropy(uniform, t) == doctest::Approx(std::log(7.0)).epsilon(1e-14));
  }
  CHECK(std::log(7.0) == doctest::Approx(1.94591).epsilon(1e-5));
  CHECK(code_of([&] { cross_entropy(uniform, 7); }) == Errc::kIndexOutOfRange);
}

TEST_CASE("softmax cross-entropy gradient is probs minus one-hot") {
  Graph g;
  const Var logits = g.variable(Tensor({1, 4}, {0.2, -1, 3, 0.5}));
  const std::vector<std::size_t> target = {1};
  g.backward(softmax_cross_entropy(logits, target));
  const auto p = softmax(logits.value().values());
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(logits.grad()[i] == doctest::Approx(p[i] - (i == 1 ? 1.0 : 0.0)).epsilon(1e-14));
  }
  CHECK(code_of([&] {
          const std::vector<std::size_t> bad = {4};
          softmax_cross_entropy(logits, bad);
        }) == Errc::kIndexOutOfRange);
}

TEST_CASE("dropout") {
  const Tensor x = Tensor({3, 4}, 2.5);
  CHECK(dropout(x, 0.0, Mode::kTrain, 1).values() == x.values());
  CHECK(dropout(x, 0.0, Mode::kEval, 1).values() == x.values());
  CHECK(dropout(x, 0.4, Mode::kEval, 1).values() == x.values());
  CHECK(dropout(x, 0.4, Mode::kTrain, 7).values() == dropout(x, 0.4, Mode::kTrain, 7).values());

  const Tensor ones({1000000}, 1.0);
  const Tensor y = dropout(ones, 0.4, Mode::kTrain, 42);
  double mean = 0;
  std::size_t zeros = 0;
  for (double v : y.values()) {
    mean += v;
    zeros += v == 0.0 ? 1 : 0;
    CHECK((v == 0.0 || std::abs(v - 1.0 / 0.6) < 1e-15));
  }
  mean /= 1e6;
  CHECK(std::abs(mean - 1.0) <= 0.01);
  CHECK(std::abs(static_cast<double>(zeros) / 1e6 - 0.4) < 0.005);

  Graph train(Mode::kTrain, 3);
  const Var v = train.variable(Tensor({2, 2}, 1.0));
  CHECK(code_of([&] { ad::dropout(v, 1.0); }) == Errc::kInvalidArgument);
  CHECK(code_of([&] { ad::dropout(v, -0.1); }) == Errc::kInvalidArgument);
  Graph eval;
  const Var e = eval.variable(Tensor({2, 2}, 1.0));
  CHECK(ad::dropout(e, 0.4).value().values() == e.value().values());
}

TEST_CASE("recurrent dropout reuses one mask per sequence") {
  // With zero input weights and identity-like recurrence the mask shows up
  // in every step; two graphs with the same seed agree exactly.
  ParameterStore store;
  std::mt19937_64 rng(6);
  const Lstm cell = Lstm::create(store, "lstm", 2, 4, rng);
  Tensor x({2, 5, 2});
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = std::cos(static_cast<double>(i));
  }
  auto run = [&](std::uint64_t seed) {
    Graph g(Mode::kTrain, seed);
    std::vector<double> out;
    for (const Var& h : cell.run(g, g.constant(x), false, 0.3)) {
      out.insert(out.end(), h.value().values().begin(), h.value().values().end());
    }
    return out;
  };
  CHECK(run(5) == run(5));
  CHECK(run(5) != run(6));
}

TEST_CASE("backward on simple losses") {
  Graph g;
  const Var x = g.variable(Tensor({2, 3}, {1, -2, 3, 0.5, 0, -1}));
  g.backward(sum(x));
  for (double d : x.grad().values()) {
    CHECK(d == 1.0);
  }
  Graph g2;
  const Var y = g2.variable(Tensor({4}, {1, -2, 3, 0.25}));
  g2.backward(scale(sum(mul(y, y)), 0.5));
  CHECK(y.grad().values() == y.value().values());
}

TEST_CASE("graph errors") {
  Graph g;
  const Var x = g.variable(Tensor({2}, {1, 2}));
  CHECK(code_of([&] { g.backward(x); }) == Errc::kShapeMismatch);
  const Var loss = sum(x);
  g.clear();
  CHECK(!loss.valid());
  CHECK(code_of([&] { g.backward(loss); }) == Errc::kGraphNotRecorded);
  CHECK(code_of([&] { (void)loss.value(); }) == Errc::kGraphNotRecorded);
  CHECK(code_of([&] { Var().value(); }) == Errc::kGraphNotRecorded);
  Graph other;
  const Var foreign = sum(other.variable(Tensor({1}, {1.0})));
  CHECK(code_of([&] { g.backward(foreign); }) == Errc::kGraphNotRecorded);
  CHECK(code_of([&] { add(g.variable(Tensor({2})), g.variable(Tensor({3}))); }) ==
        Errc::kShapeMismatch);
  CHECK(code_of([&] {
          const std::vector<std::int32_t> ids = {0, 5};
          embedding(g.variable(Tensor({3, 2})), ids, {2});
        }) == Errc::kIndexOutOfRange);
}

TEST_CASE("checked mode names the op that produced a non-finite value") {
  Graph g;
  const Var big = g.variable(Tensor({1}, {1e308}));
  try {
    scale(big, 10.0);
    FAIL("expected NonFinite");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::kNonFinite);
    CHECK(std::string(e.what()).find("scale") != std::string::npos);
  }
  g.set_checked(false);
  CHECK(std::isinf(scale(big, 10.0).value()[0]));
}

TEST_CASE("parameter gradients accumulate until zero_grad") {
  ParameterStore store;
  Parameter& p = store.add("p", Tensor({2}, {1, 2}));
  for (int i = 0; i < 2; ++i) {
    Graph g;
    g.backward(sum(g.param(p)));
  }
  CHECK(p.grad.values() == std::vector<double>{2, 2});
  store.zero_grad();
  CHECK(p.grad.values() == std::vector<double>{0, 0});
  CHECK(code_of([&] { store.add("p", Tensor({1})); }) == Errc::kInvalidArgument);
  CHECK(store.scalar_count() == 2);
}

TEST_CASE("glorot init range") {
  std::mt19937_64 rng(7);
  const Tensor t = glorot_uniform({20, 30}, 20, 30, rng);
  const double r = std::sqrt(6.0 / 50.0);
  double lo = 1, hi = -1;
  for (double v : t.values()) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  CHECK(lo >= -r);
  CHECK(hi <= r);
  CHECK(hi - lo > r);
}

TEST_CASE("gradient checks per layer") {
  for (const std::string& layer : bhs::testing::gradient_suite_layers()) {
    const auto r = bhs::testing::check_layer(layer, 15, 1234);
    CAPTURE(layer);
    CAPTURE(r.worst);
    CHECK(r.entries > 0);
    CHECK(r.max_rel_error < 1e-4);
  }
}
