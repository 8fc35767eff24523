#include <cmath>
#include <sstream>

#include "doctest.h"
#include "udrl/errors.hpp"
#include "udrl/nn/checkpoint.hpp"
#include "udrl/nn/grad_check.hpp"
#include "udrl/nn/loss.hpp"
#include "udrl/nn/mlp.hpp"
#include "udrl/nn/optimizer.hpp"
#include "udrl/nn/recurrent.hpp"
#include "udrl/nn/train.hpp"

using namespace udrl;
using namespace udrl::nn;

namespace {

std::vector<double> random_vec(CounterRng& r, std::size_t n) {
  std::vector<double> v(n);
  for (auto& x : v) x = r.uniform(-1.0, 1.0);
  return v;
}

std::vector<double> target_for(HeadKind head, std::size_t dim, CounterRng& r) {
  if (head == HeadKind::gaussian) return random_vec(r, dim);
  if (head == HeadKind::sigmoid) {
    std::vector<double> t(dim);
    for (auto& x : t) x = r.bernoulli(0.5) ? 1.0 : 0.0;
    return t;
  }
  std::vector<double> t(dim, 0.0);
  t[r.uniform_index(dim)] = 1.0;
  return t;
}

}  // namespace

TEST_CASE("mse and cross-entropy values") {
  const auto m = mse_loss(std::vector<double>{1.0, 2.0}, std::vector<double>{0.0, 0.0});
  CHECK(m.value == doctest::Approx(2.5));
  CHECK(m.grad == std::vector<double>{1.0, 2.0});
  const auto ce = crossentropy_loss(std::vector<double>{0.25, 0.75}, std::vector<double>{0.0, 1.0});
  CHECK(ce.value == doctest::Approx(-std::log(0.75)));
  // 0.5 * (log 2pi + 0 + 1) for a unit-variance miss of 1.
  const auto g = gaussian_nll(std::vector<double>{0.0, 0.0}, std::vector<double>{1.0});
  CHECK(g.value == doctest::Approx(0.5 * (std::log(2.0 * M_PI) + 1.0)));
}

TEST_CASE("output head transforms") {
  const OutputHead soft(HeadKind::softmax, 3);
  const auto p = soft.transform(std::vector<double>{0.0, 0.0, 0.0});
  for (double v : p) CHECK(v == doctest::Approx(1.0 / 3.0));
  const OutputHead sig(HeadKind::sigmoid, 2);
  const auto q = sig.probabilities(std::vector<double>{0.0, 0.0});
  CHECK(q[0] == doctest::Approx(0.5));
  CHECK(q[1] == doctest::Approx(0.5));
  const OutputHead gauss(HeadKind::gaussian, 1);
  CHECK(gauss.raw_dim() == 2);
  const auto mv = gauss.transform(std::vector<double>{0.3, 0.0});
  CHECK(mv[0] == doctest::Approx(0.3));
  CHECK(mv[1] == doctest::Approx(1.0));
  CHECK_THROWS_AS(gauss.probabilities(std::vector<double>{0.0, 0.0}), std::invalid_argument);
}

TEST_CASE("mlp gradients match central differences for every activation and head") {
  const std::pair<HeadKind, LossKind> combos[] = {
      {HeadKind::softmax, LossKind::crossentropy}, {HeadKind::softmax, LossKind::mse},
      {HeadKind::sigmoid, LossKind::crossentropy}, {HeadKind::sigmoid, LossKind::mse},
      {HeadKind::gaussian, LossKind::gaussian_nll}, {HeadKind::gaussian, LossKind::mse}};
  for (Activation act : {Activation::tanh, Activation::sigmoid, Activation::relu, Activation::identity}) {
    for (const auto& [head_kind, loss] : combos) {
      for (std::uint64_t seed = 0; seed < 5; ++seed) {
        CounterRng r(seed, 11);
        const OutputHead head(head_kind, 3);
        Mlp net(4, {5, 4}, head.raw_dim(), act);
        net.initialize(r);
        const Example ex{random_vec(r, 4), target_for(head_kind, 3, r)};
        CAPTURE(seed);
        CHECK(grad_check(net, head, ex, loss) < 1e-4);
      }
    }
  }
}

TEST_CASE("linear network under mse is exact to 1e-7") {
  CounterRng r(3);
  Mlp net(3, {}, 2, Activation::identity);
  net.initialize(r);
  const OutputHead head(HeadKind::gaussian, 1);
  const Example ex{random_vec(r, 3), {0.4}};
  CHECK(grad_check(net, head, ex, LossKind::mse) < 1e-7);
}

TEST_CASE("recurrent gradients match central differences with masks") {
  for (CellKind cell : {CellKind::elman, CellKind::lstm}) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      CounterRng r(seed, 12);
      const OutputHead head(HeadKind::softmax, 2);
      RecurrentNet net(3, 4, head.raw_dim(), cell);
      net.initialize(r);
      SequenceExample ex;
      for (int t = 0; t < 5; ++t) {
        ex.inputs.push_back(random_vec(r, 3));
        ex.targets.push_back(target_for(HeadKind::softmax, 2, r));
        ex.mask.push_back(t == 1 || t == 4 ? 1.0 : 0.0);
      }
      ex.initial = net.initial_state();
      CAPTURE(seed);
      CHECK(grad_check(net, head, ex, LossKind::crossentropy) < 1e-4);
    }
  }
}

TEST_CASE("grad check rejects step sizes outside its range") {
  std::vector<double> p = {1.0};
  const LossFunction f = [&](std::span<double> g) {
    if (!g.empty()) g[0] += 2.0 * p[0];
    return p[0] * p[0];
  };
  CHECK(max_relative_error(p, f, 1e-5) < 1e-8);
  CHECK_THROWS_AS(max_relative_error(p, f, 1e-2), std::invalid_argument);
  CHECK_THROWS_AS(max_relative_error(p, f, 1e-9), std::invalid_argument);
}

TEST_CASE("fully masked sequences contribute nothing") {
  CounterRng r(5);
  const OutputHead head(HeadKind::softmax, 2);
  RecurrentNet net(2, 3, 2, CellKind::lstm);
  net.initialize(r);
  SequenceExample ex{{{0.1, 0.2}, {0.3, 0.4}}, {{1, 0}, {0, 1}}, {0.0, 0.0}, net.initial_state()};
  std::vector<double> grad(net.num_params(), 0.0);
  CHECK(sequence_gradient(net, head, std::span(&ex, 1), LossKind::crossentropy, grad) == 0.0);
  for (double g : grad) CHECK(g == 0.0);
  Optimizer opt;
  const auto before = std::vector<double>(net.params().begin(), net.params().end());
  bptt_step(net, head, std::span(&ex, 1), LossKind::crossentropy, opt);
  CHECK(std::vector<double>(net.params().begin(), net.params().end()) == before);
}

TEST_CASE("steps before the window still condition the hidden state but get no gradient") {
  CounterRng r(8);
  const OutputHead head(HeadKind::softmax, 2);
  RecurrentNet net(1, 3, 2, CellKind::elman);
  net.initialize(r);
  SequenceExample a{{{1.0}, {0.0}, {0.0}}, {{1, 0}, {1, 0}, {1, 0}}, {0, 0, 1}, net.initial_state()};
  SequenceExample b = a;
  b.inputs[0] = {-1.0};
  std::vector<double> ga(net.num_params(), 0.0), gb(net.num_params(), 0.0);
  const double la = sequence_gradient(net, head, std::span(&a, 1), LossKind::crossentropy, ga, 1);
  const double lb = sequence_gradient(net, head, std::span(&b, 1), LossKind::crossentropy, gb, 1);
  CHECK(la != lb);  // the untaped first step changed the state
}

TEST_CASE("training reduces the loss on a fixed batch") {
  CounterRng r(9);
  const OutputHead head(HeadKind::softmax, 2);
  Mlp net(2, {8}, 2, Activation::tanh);
  net.initialize(r);
  const std::vector<Example> batch = {{{0.0, 1.0}, {1.0, 0.0}}, {{1.0, 0.0}, {0.0, 1.0}}};
  Optimizer opt(OptimizerConfig{OptimizerKind::adam, 0.05});
  const double first = train_step(net, head, batch, LossKind::crossentropy, opt);
  double last = first;
  for (int i = 0; i < 200; ++i) last = train_step(net, head, batch, LossKind::crossentropy, opt);
  CHECK(last < 0.1 * first);
}

TEST_CASE("sgd step and global-norm clipping") {
  std::vector<double> p = {1.0, 1.0};
  Optimizer sgd(OptimizerConfig{OptimizerKind::sgd, 0.1, 0.0, 0.9, 0.999, 1e-8, 5.0});
  sgd.step(p, std::vector<double>{1.0, -2.0});
  CHECK(p[0] == doctest::Approx(0.9));
  CHECK(p[1] == doctest::Approx(1.2));
  // Norm 50 clipped to 5: update is 0.1 * 5 * unit vector.
  std::vector<double> q = {0.0, 0.0};
  Optimizer clip(OptimizerConfig{OptimizerKind::sgd, 0.1, 0.0, 0.9, 0.999, 1e-8, 5.0});
  clip.step(q, std::vector<double>{30.0, 40.0});
  CHECK(q[0] == doctest::Approx(-0.3));
  CHECK(q[1] == doctest::Approx(-0.4));
  CHECK(global_norm(std::vector<double>{3.0, 4.0}) == doctest::Approx(5.0));
}

TEST_CASE("adam first step moves each parameter by about lr") {
  std::vector<double> p = {0.0, 0.0};
  Optimizer adam(OptimizerConfig{OptimizerKind::adam, 0.01});
  adam.step(p, std::vector<double>{0.5, -3.0});
  CHECK(p[0] == doctest::Approx(-0.01).epsilon(1e-4));
  CHECK(p[1] == doctest::Approx(0.01).epsilon(1e-4));
  CHECK(adam.steps() == 1);
}

TEST_CASE("non-finite loss signals divergence and leaves parameters untouched") {
  CounterRng r(2);
  const OutputHead head(HeadKind::gaussian, 1);
  Mlp net(1, {}, 2, Activation::identity);
  net.initialize(r);
  const auto before = std::vector<double>(net.params().begin(), net.params().end());
  const std::vector<Example> batch = {{{std::nan("")}, {0.0}}};
  Optimizer opt;
  CHECK_THROWS_AS(train_step(net, head, batch, LossKind::gaussian_nll, opt), DivergenceError);
  CHECK(std::vector<double>(net.params().begin(), net.params().end()) == before);
}

TEST_CASE("checkpoints round-trip bit-exactly and reject corruption") {
  CounterRng r(4);
  RecurrentNet net(3, 4, 2, CellKind::lstm);
  net.initialize(r);
  Checkpoint ck{kFlagCommandFree, "{\"k\":1}", net.tensors()};
  std::stringstream ss;
  write_checkpoint(ss, ck);
  const std::string bytes = ss.str();
  CHECK(bytes.substr(0, 8) == "UDRLCKPT");
  std::stringstream in(bytes);
  const Checkpoint back = read_checkpoint(in);
  CHECK(back == ck);
  RecurrentNet copy(3, 4, 2, CellKind::lstm);
  copy.load_tensors(back.tensors);
  CHECK(copy == net);

  std::string bad = bytes;
  bad[0] = 'X';
  std::stringstream bin(bad);
  CHECK_THROWS_AS(read_checkpoint(bin), IoError);
  std::stringstream trunc(bytes.substr(0, bytes.size() - 3));
  CHECK_THROWS_AS(read_checkpoint(trunc), IoError);
}

TEST_CASE("mlp forward matches a hand-unrolled matrix multiply") {
  CounterRng r(21);
  Mlp net(3, {4}, 2, Activation::tanh);
  net.initialize(r);
  const std::vector<double> x = {0.3, -0.7, 1.1};
  const auto p = net.params();
  // Layer 1: W1 (4x3) then b1 (4); layer 2: W2 (2x4) then b2 (2).
  std::vector<double> h(4);
  for (std::size_t i = 0; i < 4; ++i) {
    double z = p[12 + i];
    for (std::size_t j = 0; j < 3; ++j) z += p[i * 3 + j] * x[j];
    h[i] = std::tanh(z);
  }
  const std::size_t o2 = 16;
  for (std::size_t i = 0; i < 2; ++i) {
    double z = p[o2 + 8 + i];
    for (std::size_t j = 0; j < 4; ++j) z += p[o2 + i * 4 + j] * h[j];
    CHECK(net.forward(x)[i] == doctest::Approx(z).epsilon(1e-14));
  }
}

TEST_CASE("worked loss and optimizer examples") {
  CHECK(mse_loss(std::vector<double>{0.0, 0.0}, std::vector<double>{1.0, 0.0}).value == doctest::Approx(0.5));
  // Mean on target, unit variance (log-variance 0): 0.5 ln 2pi per dimension.
  const auto g = gaussian_nll(std::vector<double>{0.4, -0.2, 0.0, 0.0}, std::vector<double>{0.4, -0.2});
  CHECK(g.value == doctest::Approx(2 * 0.5 * std::log(2.0 * M_PI)));
  // f(w) = w^2 at w = 1, lr 0.1.
  std::vector<double> w = {1.0};
  Optimizer sgd(OptimizerConfig{OptimizerKind::sgd, 0.1});
  sgd.step(w, std::vector<double>{2.0 * w[0]});
  CHECK(w[0] == doctest::Approx(0.8));
}

TEST_CASE("separable two-point set is fit to below 1e-3") {
  CounterRng r(4);
  const OutputHead head(HeadKind::softmax, 2);
  Mlp net(1, {}, 2, Activation::identity);
  net.initialize(r);
  const std::vector<Example> batch = {{{-1.0}, {1.0, 0.0}}, {{1.0}, {0.0, 1.0}}};
  Optimizer opt(OptimizerConfig{OptimizerKind::sgd, 1.0});
  double loss = 1.0;
  for (int i = 0; i < 5000 && loss >= 1e-3; ++i) loss = train_step(net, head, batch, LossKind::crossentropy, opt);
  CHECK(loss < 1e-3);
}

TEST_CASE("recurrent net learns step parity") {
  // Constant input; the target alternates, so only the state can count.
  CounterRng r(8);
  const OutputHead head(HeadKind::softmax, 2);
  RecurrentNet net(1, 8, head.raw_dim(), CellKind::lstm);
  net.initialize(r);
  SequenceExample ex;
  for (int t = 0; t < 12; ++t) {
    ex.inputs.push_back({1.0});
    ex.targets.push_back(t % 2 == 0 ? std::vector<double>{1.0, 0.0} : std::vector<double>{0.0, 1.0});
    ex.mask.push_back(1.0);
  }
  ex.initial = net.initial_state();
  Optimizer opt(OptimizerConfig{OptimizerKind::adam, 1e-2});
  double loss = 1.0;
  int steps = 0;
  for (; steps < 2000 && loss >= 0.05; ++steps) loss = bptt_step(net, head, std::span(&ex, 1), LossKind::crossentropy, opt);
  CAPTURE(steps);
  CHECK(loss < 0.05);
}
