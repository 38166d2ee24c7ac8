#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <functional>

#include "oracles.hpp"
#include "rcpinn/dual.hpp"
#include "rcpinn/mlp.hpp"
#include "rcpinn/rng.hpp"
#include "rcpinn/tape.hpp"

using namespace rcpinn;

TEST_CASE("reverse mode differentiates x^2") {
  Tape tape;
  Var x = tape.var(3.0);
  Var y = x * x;
  CHECK(tape.derivative(y, x) == 6.0);
  Var y2 = powi(x, 2);
  CHECK(tape.derivative(y2, x) == 6.0);
}

TEST_CASE("tanh partial matches finite differences") {
  Tape tape;
  Var x = tape.var(0.5);
  Var y = tanh(x);
  const double g = tape.derivative(y, x);
  const double expected = 1.0 - std::tanh(0.5) * std::tanh(0.5);
  CHECK(g == doctest::Approx(expected).epsilon(1e-14));
  CHECK(g == doctest::Approx(0.7864477329659274).epsilon(1e-12));
  const double fd = oracle::central_diff([](double v) { return std::tanh(v); }, 0.5);
  CHECK(std::abs(g - fd) < 1e-9);
}

TEST_CASE("multi-input gradient of x*y + exp(x)") {
  Tape tape;
  Var x = tape.var(1.0);
  Var y = tape.var(2.0);
  Var f = x * y + exp(x);
  const Var inputs[2] = {x, y};
  const auto g = tape.grad(f, inputs);
  CHECK(g[0] == doctest::Approx(2.0 + std::exp(1.0)).epsilon(1e-14));
  CHECK(g[1] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("mixing tapes is an error; unused inputs get zero gradient") {
  Tape a, b;
  Var x = a.var(1.0);
  Var y = b.var(2.0);
  CHECK_THROWS_AS(x + y, std::logic_error);

  Var z = a.var(5.0);
  Var f = x * x;
  const Var inputs[2] = {x, z};
  const auto g = a.grad(f, inputs);
  CHECK(g[1] == 0.0);
}

TEST_CASE("every primitive's reverse partial matches central differences") {
  Xoshiro256 rng(17);
  struct Prim {
    const char* name;
    std::function<Var(Var, Var)> build;
    std::function<double(double, double)> eval;
  };
  const Prim prims[] = {
      {"add", [](Var a, Var b) { return a + b; }, [](double a, double b) { return a + b; }},
      {"sub", [](Var a, Var b) { return a - b; }, [](double a, double b) { return a - b; }},
      {"mul", [](Var a, Var b) { return a * b; }, [](double a, double b) { return a * b; }},
      {"div", [](Var a, Var b) { return a / b; }, [](double a, double b) { return a / b; }},
      {"neg", [](Var a, Var) { return -a; }, [](double a, double) { return -a; }},
      {"exp", [](Var a, Var) { return exp(a); }, [](double a, double) { return std::exp(a); }},
      {"tanh", [](Var a, Var) { return tanh(a); }, [](double a, double) { return std::tanh(a); }},
      {"powi3", [](Var a, Var) { return powi(a, 3); },
       [](double a, double) { return a * a * a; }},
  };
  for (const auto& prim : prims) {
    for (int k = 0; k < 100; ++k) {
      const double av = rng.uniform(-2.0, 2.0);
      const double bv = rng.uniform(0.5, 2.5);  // keeps div well away from 0
      Tape tape;
      Var a = tape.var(av);
      Var b = tape.var(bv);
      Var f = prim.build(a, b);
      const Var inputs[2] = {a, b};
      const auto g = tape.grad(f, inputs);
      const double fa =
          oracle::central_diff([&](double v) { return prim.eval(v, bv); }, av);
      const double fb =
          oracle::central_diff([&](double v) { return prim.eval(av, v); }, bv);
      CHECK(std::abs(g[0] - fa) <= 1e-6 * std::max(1.0, std::abs(fa)));
      CHECK(std::abs(g[1] - fb) <= 1e-6 * std::max(1.0, std::abs(fb)));
    }
  }
}

TEST_CASE("input derivative of a linear and a constant map") {
  {
    Tape tape;
    Var t = tape.var(0.7);
    Var y = tape.constant(1.75) * t + 0.25;
    CHECK(tape.derivative(y, t) == 1.75);
  }
  {
    Tape tape;
    Var t = tape.var(0.7);
    Var y = tape.constant(3.0) + 0.0 * t;
    CHECK(tape.derivative(y, t) == 0.0);
  }
}

TEST_CASE("network input derivative matches finite differences") {
  MlpSpec spec;
  spec.input_dim = 1;
  spec.output_dim = 1;
  spec.hidden = {7};
  Xoshiro256 rng(23);
  const MlpParams p = MlpParams::init(spec, rng);

  auto eval_at = [&](double t) {
    const double x[1] = {t};
    return mlp_eval(p, x)[0];
  };
  Tape tape;
  auto leaves = make_leaves(tape, p.flat);
  Var t = tape.var(0.3);
  const auto out = mlp_forward<Var>(spec, leaves, std::span<const Var>(&t, 1));
  const double g = tape.derivative(out[0], t);
  const double fd = oracle::central_diff(eval_at, 0.3);
  CHECK(std::abs(g - fd) <= 1e-7 * std::max(1.0, std::abs(fd)));

  // same value through the forward-mode dual path
  const Dual<Var> td{tape.var(0.3), tape.constant(1.0)};
  const auto outd = mlp_forward<Dual<Var>>(spec, leaves, std::span<const Dual<Var>>(&td, 1));
  CHECK(tape.value(outd[0].dot) == doctest::Approx(g).epsilon(1e-13));
}

TEST_CASE("gradient flows through input-derivative terms (second-order contract)") {
  // loss = (dy/dt)^2 for y = w*tanh(t): d(loss)/dw = 2w(1-tanh^2 t)^2
  const double wv = 1.0, tv = 0.5;
  Tape tape;
  Var w = tape.var(wv);
  const Dual<Var> t{tape.constant(tv), tape.constant(1.0)};
  const Dual<Var> y = w * tanh(t);
  Var loss = y.dot * y.dot;
  const Var inputs[1] = {w};
  const auto g = tape.grad(loss, inputs);
  const double s = 1.0 - std::tanh(tv) * std::tanh(tv);
  CHECK(g[0] == doctest::Approx(2.0 * wv * s * s).epsilon(1e-12));

  // against finite differences of the analytically expanded loss
  const double fd = oracle::central_diff(
      [&](double wx) {
        const double sx = 1.0 - std::tanh(tv) * std::tanh(tv);
        return wx * sx * wx * sx;
      },
      wv);
  CHECK(std::abs(g[0] - fd) <= 1e-6 * std::abs(fd));
}

TEST_CASE("loss terms are linear in their weights; unused weights get zero") {
  Tape tape;
  Var w1 = tape.var(0.8);
  Var w2 = tape.var(-0.4);  // never used
  const Dual<Var> t{tape.constant(0.3), tape.constant(1.0)};
  const Dual<Var> y = w1 * tanh(t);
  Var res = y.dot * y.dot;
  Var loss1 = 1.0 * res;
  Var loss2 = 2.0 * res;
  const Var inputs[2] = {w1, w2};
  const auto g1 = tape.grad(loss1, inputs);
  const auto g2 = tape.grad(loss2, inputs);
  CHECK(g2[0] == doctest::Approx(2.0 * g1[0]).epsilon(1e-14));
  CHECK(g1[1] == 0.0);
}

TEST_CASE("replaying the tape reproduces identical primal values") {
  Tape tape;
  Var x = tape.var(0.37);
  Var y = tape.var(-1.2);
  Var f = tanh(x * y + exp(x / (y + 3.0))) - powi(y, 2);
  (void)f;
  const auto replayed = tape.replay();
  REQUIRE(replayed.size() == tape.size());
  for (std::size_t i = 0; i < replayed.size(); ++i) CHECK(replayed[i] == tape.value_at(i));
}
