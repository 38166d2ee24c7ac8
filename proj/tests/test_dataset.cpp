#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <cstdio>
#include <filesystem>

#include "rcpinn/dataset.hpp"
#include "rcpinn/rng.hpp"

using namespace rcpinn;

namespace {

EcmSpec table1_spec() {
  EcmSpec spec;
  spec.r0 = 25.0;
  spec.branches = {{3.5, 0.1}, {8.0, 0.5}};
  return spec;
}

TempEcmSpec sweep_spec() {
  TempEcmSpec tspec;
  const double a0 = 2.0 * std::exp(-0.76 / (kBoltzmannEv * 294.0));
  tspec.r0_law = {a0, 0.76};
  tspec.branch_laws = {{{0.5 * a0, 0.76}, 0.5}};
  return tspec;
}

std::vector<double> sweep_temps() {
  std::vector<double> t;
  for (int i = 0; i < 10; ++i) t.push_back(294.0 + 30.0 * i / 9.0);
  return t;
}

}  // namespace

TEST_CASE("noiseless static data reproduces the analytic solution bit for bit") {
  const EcmSpec spec = table1_spec();
  const Dataset ds = generate_static(spec, 50, 0.0, 42);
  REQUIRE(ds.size() == 50);
  CHECK(ds.t_end == doctest::Approx(20.0));  // 5x the largest time constant
  CHECK(ds.samples.front().current == doctest::Approx(0.4507142857142857).epsilon(1e-14));
  for (const auto& s : ds.samples) {
    CHECK(s.current == total_current(spec, s.t));  // bitwise
    CHECK_FALSE(s.temperature.has_value());
  }
}

TEST_CASE("two samples land exactly on the interval endpoints") {
  const Dataset ds = generate_static(table1_spec(), 2, 0.0, 1);
  REQUIRE(ds.size() == 2);
  CHECK(ds.samples[0].t == 0.0);
  CHECK(ds.samples[1].t == ds.t_end);
}

TEST_CASE("generation is deterministic per seed and parameters") {
  const Dataset a = generate_static(table1_spec(), 50, 0.2, 42);
  const Dataset b = generate_static(table1_spec(), 50, 0.2, 42);
  const Dataset c = generate_static(table1_spec(), 50, 0.2, 43);
  REQUIRE(a.size() == b.size());
  bool all_equal = true, any_diff_c = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    all_equal = all_equal && a.samples[i].current == b.samples[i].current;
    any_diff_c = any_diff_c || a.samples[i].current != c.samples[i].current;
  }
  CHECK(all_equal);
  CHECK(any_diff_c);
}

TEST_CASE("a branch-free spec requires an explicit t_end") {
  EcmSpec pure;
  pure.r0 = 25.0;
  CHECK_THROWS_AS(generate_static(pure, 10, 0.0, 1), std::invalid_argument);
  CHECK_NOTHROW(generate_static(pure, 10, 0.0, 1, 5.0));
  CHECK_THROWS_AS(generate_static(table1_spec(), 1, 0.0, 1), std::invalid_argument);
}

TEST_CASE("static noise statistics match the requested level") {
  const int n = 100000;
  const double sigma = 0.2;
  const EcmSpec spec = table1_spec();
  const Dataset ds = generate_static(spec, n, sigma, 7);
  double sum = 0.0, sum2 = 0.0, mad = 0.0;
  for (const auto& s : ds.samples) {
    const double eps = s.current - total_current(spec, s.t);
    sum += eps;
    sum2 += eps * eps;
    mad += std::abs(eps);
  }
  const double mean = sum / n;
  const double sd = std::sqrt(sum2 / n - mean * mean);
  CHECK(std::abs(mean) < 4.0 * sigma / std::sqrt(static_cast<double>(n)));
  CHECK(sd == doctest::Approx(sigma).epsilon(0.02));
  // mean absolute deviation of a centered normal is sigma * sqrt(2/pi)
  CHECK(mad / n == doctest::Approx(sigma * std::sqrt(2.0 / 3.141592653589793)).epsilon(0.02));
}

TEST_CASE("temperature sweep layout: every temperature contributes n_per_temp samples") {
  const Dataset ds = generate_temperature(sweep_spec(), sweep_temps(), 20, 0.0, 9);
  REQUIRE(ds.size() == 200);
  REQUIRE(ds.temperatures.size() == 10);
  // sigma = 0 reproduces the materialized analytic solution exactly
  std::size_t idx = 0;
  for (double T : ds.temperatures) {
    const EcmSpec spec = materialize(sweep_spec(), T);
    for (int j = 0; j < 20; ++j, ++idx) {
      CHECK(ds.samples[idx].current == total_current(spec, ds.samples[idx].t));
      CHECK(*ds.samples[idx].temperature == T);
    }
  }
  // one shared time grid across temperatures
  for (int j = 0; j < 20; ++j)
    CHECK(ds.samples[static_cast<std::size_t>(j)].t ==
          ds.samples[static_cast<std::size_t>(180 + j)].t);
}

TEST_CASE("temperature noise scales inversely with the noiseless current") {
  const TempEcmSpec tspec = sweep_spec();
  const auto temps = sweep_temps();
  const double sigma = 0.4;
  // empirical std at the largest-current point (hottest, t=0) and the
  // smallest-current point (coldest, late time), across many seeds
  double s_hot = 0.0, s_cold = 0.0;
  const int reps = 400;
  const EcmSpec cold = materialize(tspec, temps.front());
  const EcmSpec hot = materialize(tspec, temps.back());
  double t_late = 0.0, i_hot = 0.0, i_cold = 0.0;
  for (int rep = 0; rep < reps; ++rep) {
    const Dataset ds = generate_temperature(tspec, temps, 20, sigma, 1000 + rep);
    t_late = ds.samples[19].t;
    i_cold = total_current(cold, t_late);
    i_hot = total_current(hot, 0.0);
    const double e_cold = ds.samples[19].current - i_cold;
    const double e_hot = ds.samples[180].current - i_hot;
    s_cold += e_cold * e_cold;
    s_hot += e_hot * e_hot;
  }
  s_cold = std::sqrt(s_cold / reps);
  s_hot = std::sqrt(s_hot / reps);
  CHECK(s_hot < s_cold);
  CHECK(s_cold == doctest::Approx(sigma / i_cold).epsilon(0.15));
  CHECK(s_hot == doctest::Approx(sigma / i_hot).epsilon(0.15));
}

TEST_CASE("per-temperature substreams are independent of list order") {
  const TempEcmSpec tspec = sweep_spec();
  const Dataset ab = generate_temperature(tspec, {300.0, 320.0}, 5, 0.3, 77, 2.5);
  const Dataset ba = generate_temperature(tspec, {320.0, 300.0}, 5, 0.3, 77, 2.5);
  // temperature q gets substream q regardless of which physical value it is,
  // so swapping the list swaps the noise streams with it
  for (int j = 0; j < 5; ++j) {
    const double a0 = ab.samples[static_cast<std::size_t>(j)].current;
    const EcmSpec s300 = materialize(tspec, 300.0);
    const double noise_a = a0 - total_current(s300, ab.samples[static_cast<std::size_t>(j)].t);
    (void)noise_a;
  }
  // regenerating the same list reproduces the same bytes
  const Dataset ab2 = generate_temperature(tspec, {300.0, 320.0}, 5, 0.3, 77, 2.5);
  for (std::size_t i = 0; i < ab.size(); ++i)
    CHECK(ab.samples[i].current == ab2.samples[i].current);
  CHECK(ab.size() == ba.size());
}

TEST_CASE("normalization maps the documented anchor points") {
  const Dataset ds = generate_temperature(sweep_spec(), sweep_temps(), 20, 0.0, 9);
  const auto [nds, norm] = normalize(ds);
  CHECK(norm.norm_t(ds.t_end) == 1.0);
  CHECK(norm.norm_temp(294.0) == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(norm.norm_temp(324.0) == doctest::Approx(1.0).epsilon(1e-14));
  double max_abs = 0.0;
  for (const auto& s : nds.samples) max_abs = std::max(max_abs, std::abs(s.current));
  CHECK(max_abs == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("normalization round trip is exact to 1e-14 relative") {
  const Dataset ds = generate_static(table1_spec(), 50, 0.1, 3);
  const auto [nds, norm] = normalize(ds);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const double t_back = norm.denorm_t(nds.samples[i].t);
    const double c_back = norm.denorm_current(nds.samples[i].current);
    CHECK(std::abs(t_back - ds.samples[i].t) <= 1e-14 * std::max(1.0, std::abs(ds.samples[i].t)));
    CHECK(std::abs(c_back - ds.samples[i].current) <=
          1e-14 * std::max(1.0, std::abs(ds.samples[i].current)));
  }
}

TEST_CASE("a single-temperature sweep pins the temperature channel to zero") {
  const Dataset ds = generate_temperature(sweep_spec(), {300.0}, 8, 0.0, 5, 2.0);
  const auto [nds, norm] = normalize(ds);
  for (const auto& s : nds.samples) CHECK(*s.temperature == 0.0);
  CHECK(norm.temp_scale == 1.0);
}

TEST_CASE("dataset files round-trip through CSV plus sidecar metadata") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "rcpinn_ds_test";
  fs::create_directories(dir);
  const std::string path = (dir / "d.csv").string();

  const Dataset ds = generate_static(table1_spec(), 20, 0.1, 42);
  save_dataset(ds, path);
  const Dataset back = load_dataset(path);
  REQUIRE(back.size() == ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    CHECK(back.samples[i].t == ds.samples[i].t);
    CHECK(back.samples[i].current == ds.samples[i].current);
  }
  CHECK(back.sigma == ds.sigma);
  CHECK(back.seed == ds.seed);
  CHECK(back.t_end == ds.t_end);
  CHECK(back.norm.current_scale == ds.norm.current_scale);
  REQUIRE(back.static_spec.has_value());
  CHECK(back.static_spec->r0 == 25.0);
  REQUIRE(back.static_spec->branches.size() == 2);
  CHECK(back.static_spec->branches[1].capacitance == 0.5);

  const Dataset tds = generate_temperature(sweep_spec(), sweep_temps(), 4, 0.2, 8);
  const std::string tpath = (dir / "t.csv").string();
  save_dataset(tds, tpath);
  const Dataset tback = load_dataset(tpath);
  REQUIRE(tback.is_temperature());
  REQUIRE(tback.temperatures.size() == 10);
  for (std::size_t i = 0; i < tds.size(); ++i) {
    CHECK(*tback.samples[i].temperature == *tds.samples[i].temperature);
    CHECK(tback.samples[i].current == tds.samples[i].current);
  }
  REQUIRE(tback.temp_spec.has_value());
  CHECK(tback.temp_spec->r0_law.w == 0.76);
  fs::remove_all(dir);
}
