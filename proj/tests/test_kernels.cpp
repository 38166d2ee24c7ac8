#include <doctest.h>

#include <cmath>

#include "../src/kernels/vecmath.hpp"
#include "oracles.hpp"
#include "rcpinn/kernels.hpp"
#include "rcpinn/loss.hpp"
#include "rcpinn/train.hpp"

using namespace rcpinn;

TEST_CASE("polynomial exp/tanh track libm to a few ulp") {
  using kern::ScalarVec;
  double max_exp_rel = 0.0, max_tanh_rel = 0.0;
  Xoshiro256 rng(2);
  for (int k = 0; k < 20000; ++k) {
    const double x = rng.uniform(-30.0, 30.0);
    const double e = kern::vexp(ScalarVec::splat(x)).v;
    const double t = kern::vtanh(ScalarVec::splat(x)).v;
    max_exp_rel = std::max(max_exp_rel, std::abs(e - std::exp(x)) / std::exp(x));
    if (std::tanh(x) != 0.0)
      max_tanh_rel = std::max(max_tanh_rel, std::abs(t - std::tanh(x)) / std::abs(std::tanh(x)));
  }
  CHECK(max_exp_rel < 5e-15);
  CHECK(max_tanh_rel < 5e-15);
  // dense sweep across the tanh small/large branch split
  for (int k = 0; k <= 1000; ++k) {
    const double x = -1.5 + 3.0 * k / 1000.0;
    const double t = kern::vtanh(ScalarVec::splat(x)).v;
    CHECK(std::abs(t - std::tanh(x)) <= 5e-15 * std::max(1e-3, std::abs(std::tanh(x))));
  }
  // saturation
  CHECK(kern::vtanh(ScalarVec::splat(25.0)).v == 1.0);
  CHECK(kern::vtanh(ScalarVec::splat(-25.0)).v == -1.0);
  CHECK(kern::vtanh(ScalarVec::splat(0.0)).v == 0.0);
  CHECK(kern::vexp(ScalarVec::splat(0.0)).v == 1.0);
}

namespace {

// random static model over a unit-normalized dataset
PinnStaticModel random_static_model(int n_branches, std::vector<int> hidden, std::uint64_t seed) {
  NormalizationInfo norm;
  norm.t_scale = 4.0;
  norm.current_scale = 0.5;
  auto m = PinnStaticModel::make(n_branches, hidden, norm, 1.0, seed);
  Xoshiro256 rng(seed + 1000);
  for (auto& r : m.raw_r) r = rng.uniform(-1.0, 1.5);
  for (auto& c : m.raw_c) c = rng.uniform(-2.0, 0.5);
  return m;
}

TrainingData random_static_data(const PinnStaticModel& m, int n_points, std::uint64_t seed) {
  TrainingData td;
  td.norm = m.norm;
  td.temperature = false;
  td.t_by_group.resize(1);
  td.y_by_group.resize(1);
  Xoshiro256 rng(seed);
  for (int i = 0; i < n_points; ++i) {
    td.t_by_group[0].push_back(static_cast<double>(i) / (n_points - 1));
    td.y_by_group[0].push_back(rng.uniform(0.0, 1.0));
  }
  td.total = static_cast<std::size_t>(n_points);
  return td;
}

PinnTempModel random_temp_model(int n_branches, std::uint64_t seed) {
  NormalizationInfo norm;
  norm.t_scale = 2.0;
  norm.temp_offset = 300.0;
  norm.temp_scale = 12.0;
  norm.current_scale = 3.0;
  auto m = PinnTempModel::make(n_branches, {6}, {5}, norm, 1.0, seed);
  Xoshiro256 rng(seed + 2000);
  for (auto& s : m.raw_scale) s = rng.uniform(-1.0, 0.5);
  for (auto& c : m.raw_c) c = rng.uniform(-1.5, 0.5);
  m.feature_scale = 1.7;
  return m;
}

TrainingData random_temp_data(const PinnTempModel& m, int n_temps, int per, std::uint64_t seed) {
  TrainingData td;
  td.norm = m.norm;
  td.temperature = true;
  Xoshiro256 rng(seed);
  for (int q = 0; q < n_temps; ++q) {
    td.temps_norm.push_back(-1.0 + 2.0 * q / std::max(1, n_temps - 1));
    td.temps_phys.push_back(td.norm.denorm_temp(td.temps_norm.back()));
    td.t_by_group.emplace_back();
    td.y_by_group.emplace_back();
    for (int i = 0; i < per; ++i) {
      td.t_by_group.back().push_back(static_cast<double>(i) / (per - 1));
      td.y_by_group.back().push_back(rng.uniform(0.0, 1.0));
    }
  }
  td.total = static_cast<std::size_t>(n_temps * per);
  return td;
}

void check_close(double a, double b, double rel, double abs_floor) {
  CHECK(std::abs(a - b) <= rel * std::max({std::abs(a), std::abs(b), abs_floor}));
}

}  // namespace

TEST_CASE("every kernel variant reproduces the tape losses and gradients (static)") {
  for (int n_branches : {0, 1, 2}) {
    for (std::vector<int> hidden : {std::vector<int>{5}, std::vector<int>{6, 4}}) {
      const auto model =
          random_static_model(n_branches, hidden, 17 + static_cast<std::uint64_t>(n_branches));
      const auto td = random_static_data(model, 9, 5);
      const auto coll = collocation_static(13);
      const LossWeights w{1.3, 0.7, 2.1};

      std::vector<double> g_tape;
      const LossValue Lt = eval_loss_tape(model, td, coll, w, &g_tape);

      for (const auto* K : kern::available_kernels()) {
        INFO("kernel variant: " << K->name << " branches: " << n_branches);
        std::vector<double> g;
        const LossValue L = eval_loss(model, td, coll, w, *K, &g);
        check_close(L.data, Lt.data, 1e-12, 1e-14);
        check_close(L.phys, Lt.phys, 1e-12, 1e-14);
        check_close(L.ic, Lt.ic, 1e-12, 1e-14);
        REQUIRE(g.size() == g_tape.size());
        for (std::size_t i = 0; i < g.size(); ++i) check_close(g[i], g_tape[i], 1e-9, 1e-11);
      }
    }
  }
}

TEST_CASE("every kernel variant reproduces the tape losses and gradients (temperature)") {
  for (int n_branches : {1, 2}) {
    const auto model = random_temp_model(n_branches, 31 + static_cast<std::uint64_t>(n_branches));
    const auto td = random_temp_data(model, 3, 6, 9);
    const auto coll = collocation_temperature(17, 3, 4);
    const LossWeights w{0.9, 1.4, 1.1};

    std::vector<double> g_tape;
    const LossValue Lt = eval_loss_tape(model, td, coll, w, &g_tape);

    for (const auto* K : kern::available_kernels()) {
      INFO("kernel variant: " << K->name << " branches: " << n_branches);
      std::vector<double> g;
      const LossValue L = eval_loss(model, td, coll, w, *K, &g);
      check_close(L.data, Lt.data, 1e-12, 1e-14);
      check_close(L.phys, Lt.phys, 1e-12, 1e-14);
      check_close(L.ic, Lt.ic, 1e-12, 1e-14);
      REQUIRE(g.size() == g_tape.size());
      for (std::size_t i = 0; i < g.size(); ++i) check_close(g[i], g_tape[i], 1e-9, 1e-11);
    }
  }
}

TEST_CASE("scalar and SIMD variants agree with each other to near machine precision") {
  const auto kernels = kern::available_kernels();
  if (kernels.size() < 2) return;  // no SIMD variant on this host
  const auto model = random_static_model(2, {15, 15}, 77);
  const auto td = random_static_data(model, 50, 7);
  const auto coll = collocation_static(999);  // odd count exercises tail lanes
  const LossWeights w{};

  std::vector<double> ga, gb;
  const LossValue L0 = eval_loss(model, td, coll, w, *kernels[0], &ga);
  const LossValue L1 = eval_loss(model, td, coll, w, *kernels[1], &gb);
  check_close(L0.data, L1.data, 1e-13, 1e-15);
  check_close(L0.phys, L1.phys, 1e-13, 1e-15);
  check_close(L0.ic, L1.ic, 1e-13, 1e-15);
  REQUIRE(ga.size() == gb.size());
  for (std::size_t i = 0; i < ga.size(); ++i) check_close(ga[i], gb[i], 1e-11, 1e-13);
}

TEST_CASE("forward_eval produces identical per-point outputs in all variants") {
  const auto model = random_static_model(2, {15, 15}, 3);
  const kern::NetDims nd = kern::NetDims::from(model.net.spec);
  std::vector<double> xs;
  for (int i = 0; i < 37; ++i) xs.push_back(0.031 * i);
  const auto kernels = kern::available_kernels();
  std::vector<std::vector<double>> outs;
  for (const auto* K : kernels) {
    std::vector<double> u(xs.size() * 2);
    K->forward_eval(nd, model.net.flat.data(), xs.data(), 0.0, false, xs.size(), u.data());
    outs.push_back(std::move(u));
  }
  // per-point math is the same fma sequence in every lane width
  for (std::size_t k = 1; k < outs.size(); ++k)
    for (std::size_t i = 0; i < outs[0].size(); ++i) CHECK(outs[k][i] == outs[0][i]);
  // and tracks the libm-based reference forward within a few ulp per layer
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const auto ref = mlp_eval(model.net, std::span<const double>(&xs[i], 1));
    check_close(outs[0][i * 2 + 0], ref[0], 1e-13, 1e-15);
    check_close(outs[0][i * 2 + 1], ref[1], 1e-13, 1e-15);
  }
}

TEST_CASE("fused gradient matches central finite differences on a miniature problem") {
  // one branch, 5-neuron net: the gradient-check setup used by the
  // acceptance gate
  auto model = random_static_model(1, {5}, 99);
  const auto td = random_static_data(model, 8, 3);
  const auto coll = collocation_static(16);
  const LossWeights w{};
  const kern::KernelTable& K = kern::select_kernels(kern::Backend::Auto);

  std::vector<double> g;
  eval_loss(model, td, coll, w, K, &g);
  auto slots = trainable_slots(model);
  REQUIRE(slots.size() == g.size());

  Xoshiro256 pick(5);
  for (int rep = 0; rep < 25; ++rep) {
    const std::size_t j = pick.next() % slots.size();
    const double h = 1e-6;
    const double orig = *slots[j];
    *slots[j] = orig + h;
    const double lp = eval_loss(model, td, coll, w, K, nullptr).total(w);
    *slots[j] = orig - h;
    const double lm = eval_loss(model, td, coll, w, K, nullptr).total(w);
    *slots[j] = orig;
    const double fd = (lp - lm) / (2.0 * h);
    CHECK(std::abs(g[j] - fd) <= 1e-5 * std::max({std::abs(fd), std::abs(g[j]), 1e-8}));
  }
}
