#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "oracles.hpp"
#include "rcpinn/ecm.hpp"

using namespace rcpinn;

namespace {

EcmSpec table1_spec() {
  EcmSpec spec;
  spec.r0 = 25.0;
  spec.branches = {{3.5, 0.1}, {8.0, 0.5}};
  spec.u_dc = 1.0;
  return spec;
}

}  // namespace

TEST_CASE("total_current: pure resistor is the steady value at any time") {
  EcmSpec spec;
  spec.r0 = 25.0;
  spec.u_dc = 1.0;
  CHECK(total_current(spec, 0.0) == 0.04);
  CHECK(total_current(spec, 17.3) == 0.04);
}

TEST_CASE("total_current at t=0 equals the conductance sum") {
  const EcmSpec spec = table1_spec();
  const double expected = 0.04 + 1.0 / 3.5 + 1.0 / 8.0;
  CHECK(total_current(spec, 0.0) == doctest::Approx(expected).epsilon(1e-15));
  CHECK(expected == doctest::Approx(0.450714285714).epsilon(1e-10));
}

TEST_CASE("total_current matches an independent term-by-term evaluation") {
  const EcmSpec spec = table1_spec();
  const double t = 2.0;
  // direct evaluation of the closed form, written out independently
  const double expected = 1.0 / 25.0 + (1.0 / 3.5) * std::exp(-2.0 / (3.5 * 0.1)) +
                          (1.0 / 8.0) * std::exp(-2.0 / (8.0 * 0.5));
  CHECK(total_current(spec, t) == doctest::Approx(expected).epsilon(1e-15));
}

TEST_CASE("total_current converges to the steady current") {
  const EcmSpec spec = table1_spec();
  CHECK(total_current(spec, 200.0) == doctest::Approx(0.04).epsilon(1e-12));
}

TEST_CASE("initial_current matches the stated examples and total_current(0) exactly") {
  EcmSpec pure;
  pure.r0 = 25.0;
  CHECK(initial_current(pure) == 0.04);

  const EcmSpec t1 = table1_spec();
  CHECK(initial_current(t1) == doctest::Approx(0.4507142857142857).epsilon(1e-14));
  CHECK(initial_current(t1) == total_current(t1, 0.0));  // bitwise

  EcmSpec unit;
  unit.r0 = 1.0;
  unit.branches = {{1.0, 1.0}};
  CHECK(initial_current(unit) == 2.0);
}

TEST_CASE("branch_currents: combined steady+first-branch element, bare others") {
  const EcmSpec spec = table1_spec();
  const auto at0 = branch_currents(spec, 0.0);
  REQUIRE(at0.size() == 2);
  CHECK(at0[0] == doctest::Approx(0.04 + 1.0 / 3.5).epsilon(1e-15));
  CHECK(at0[1] == doctest::Approx(0.125).epsilon(1e-15));

  // exponential decay leaves only the steady path
  const auto late = branch_currents(spec, 20.0 * spec.max_tau());
  CHECK(late[0] == doctest::Approx(0.04).epsilon(1e-8));
  CHECK(std::abs(late[1]) < 1e-8);

  EcmSpec unit;
  unit.r0 = 1.0;
  unit.branches = {{1.0, 1.0}};
  const auto u1 = branch_currents(unit, 1.0);
  REQUIRE(u1.size() == 1);
  CHECK(u1[0] == doctest::Approx(1.0 + std::exp(-1.0)).epsilon(1e-15));

  EcmSpec pure;
  pure.r0 = 4.0;
  const auto p = branch_currents(pure, 3.0);
  REQUIRE(p.size() == 1);
  CHECK(p[0] == 0.25);
}

TEST_CASE("branch currents always sum to the total current") {
  Xoshiro256 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const EcmSpec spec = oracle::random_well_conditioned_spec(rng, 1 + static_cast<int>(rng.next() % 3));
    for (int k = 0; k < 20; ++k) {
      const double t = rng.uniform(0.0, 6.0 * spec.max_tau());
      const auto parts = branch_currents(spec, t);
      double sum = 0.0;
      for (double p : parts) sum += p;
      CHECK(sum == doctest::Approx(total_current(spec, t)).epsilon(1e-12));
    }
  }
}

TEST_CASE("ode_residuals vanish on the analytical solution") {
  const EcmSpec spec = table1_spec();
  double max_r = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const double t = 25.0 * k / 999.0;
    const auto I = branch_currents(spec, t);
    // analytical derivatives of each element
    std::vector<double> dI(I.size());
    dI[0] = -(1.0 / 3.5) * std::exp(-t / 0.35) / 0.35;
    dI[1] = -(1.0 / 8.0) * std::exp(-t / 4.0) / 4.0;
    for (double r : ode_residuals(spec, t, I, dI)) max_r = std::max(max_r, std::abs(r));
  }
  CHECK(max_r < 1e-10);
}

TEST_CASE("ode_residuals: zero state and derivative") {
  const EcmSpec spec = table1_spec();
  const auto r = ode_residuals(spec, 1.0, {0.0, 0.0}, {0.0, 0.0});
  REQUIRE(r.size() == 2);
  // -(1/(R1 C1)) * u/r0
  CHECK(r[0] == doctest::Approx(-(1.0 / 0.35) * 0.04).epsilon(1e-12));
  CHECK(r[0] == doctest::Approx(-0.11428571428571428).epsilon(1e-12));
  CHECK(r[1] == 0.0);
}

TEST_CASE("ode_residuals are linear in a perturbation of the combined element") {
  const EcmSpec spec = table1_spec();
  const double t = 0.7;
  const auto I = branch_currents(spec, t);
  std::vector<double> dI = {-(1.0 / 3.5) * std::exp(-t / 0.35) / 0.35,
                            -(1.0 / 8.0) * std::exp(-t / 4.0) / 4.0};
  const double delta = 0.01;
  auto Ip = I;
  Ip[0] += delta;
  const auto r0 = ode_residuals(spec, t, I, dI);
  const auto r1 = ode_residuals(spec, t, Ip, dI);
  CHECK(r1[0] - r0[0] == doctest::Approx(delta / 0.35).epsilon(1e-10));
  CHECK(r1[1] == r0[1]);
}

TEST_CASE("ode_residuals reject mismatched lengths") {
  const EcmSpec spec = table1_spec();
  CHECK_THROWS_AS(ode_residuals(spec, 0.0, {0.0}, {0.0, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(ode_residuals(spec, 0.0, {0.0, 0.0, 0.0}, {0.0, 0.0, 0.0}),
                  std::invalid_argument);
}

TEST_CASE("ode_residuals for a pure resistor reduce to the derivative") {
  EcmSpec pure;
  pure.r0 = 25.0;
  const auto r = ode_residuals(pure, 1.0, {0.04}, {0.002});
  REQUIRE(r.size() == 1);
  CHECK(r[0] == 0.002);
}

TEST_CASE("analytical solution matches RK4 integration of the governing system") {
  Xoshiro256 rng(5);
  for (int trial = 0; trial < 5; ++trial) {
    const EcmSpec spec = oracle::random_well_conditioned_spec(rng, 2);
    const double t_end = 5.0 * spec.max_tau();
    const auto rk = oracle::integrate_branches(spec, t_end, 200, spec.min_tau() / 100.0);
    for (std::size_t g = 0; g < rk.t.size(); ++g) {
      const auto exact = branch_currents(spec, rk.t[g]);
      for (std::size_t i = 0; i < exact.size(); ++i) {
        const double scale = std::max(std::abs(exact[i]), 1e-3);
        CHECK(std::abs(rk.state[g][i] - exact[i]) / scale < 1e-8);
      }
    }
  }
}

TEST_CASE("Arrhenius law: resistance ratio over the sweep and degenerate cases") {
  ArrheniusLaw law{1.0, 0.76};
  const double expected_ratio = std::exp((0.76 / kBoltzmannEv) * (1.0 / 294.0 - 1.0 / 324.0));
  CHECK(law.evaluate(294.0) / law.evaluate(324.0) ==
        doctest::Approx(expected_ratio).epsilon(1e-12));

  ArrheniusLaw flat{3.25, 0.0};
  CHECK(flat.evaluate(200.0) == 3.25);
  CHECK(flat.evaluate(400.0) == 3.25);

  // scaled laws stay in fixed ratio at every temperature
  ArrheniusLaw a{2.0, 0.76}, b{1.0, 0.76};
  for (double T : {250.0, 300.0, 350.0})
    CHECK(a.evaluate(T) / b.evaluate(T) == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("Arrhenius law decreases strictly with temperature for positive w") {
  Xoshiro256 rng(3);
  for (int k = 0; k < 100; ++k) {
    ArrheniusLaw law{rng.uniform(1e-12, 10.0), rng.uniform(0.05, 1.5)};
    const double t1 = rng.uniform(100.0, 500.0);
    const double t2 = t1 + rng.uniform(1e-3, 200.0);
    CHECK(law.evaluate(t1) > law.evaluate(t2));
  }
}

TEST_CASE("materialize evaluates every law and copies capacitances") {
  TempEcmSpec tspec;
  tspec.r0_law = {1e-12, 0.76};
  tspec.branch_laws = {{{5e-13, 0.76}, 0.5}};
  tspec.u_dc = 1.0;
  const EcmSpec spec = materialize(tspec, 300.0);
  CHECK(spec.r0 == doctest::Approx(tspec.r0_law.evaluate(300.0)).epsilon(1e-15));
  REQUIRE(spec.branches.size() == 1);
  CHECK(spec.branches[0].resistance ==
        doctest::Approx(tspec.branch_laws[0].law.evaluate(300.0)).epsilon(1e-15));
  CHECK(spec.branches[0].capacitance == 0.5);
  CHECK_THROWS_AS(materialize(tspec, -1.0), std::invalid_argument);
}

TEST_CASE("check_conditioning flags close time constants and weak branches") {
  const EcmSpec good = table1_spec();
  const auto rep = check_conditioning(good);
  CHECK(rep.well_conditioned());
  REQUIRE(rep.tau_ratios.size() == 1);
  CHECK(rep.tau_ratios[0].ratio == doctest::Approx(4.0 / 0.35).epsilon(1e-12));

  EcmSpec twin = good;
  twin.branches[1] = twin.branches[0];
  CHECK_FALSE(check_conditioning(twin).well_conditioned());

  EcmSpec weak = good;
  weak.branches.push_back({10000.0, 0.001});
  const auto wrep = check_conditioning(weak);
  CHECK_FALSE(wrep.well_conditioned());
  CHECK(wrep.amplitude_fractions[2] < 0.02);
}

TEST_CASE("spec validation rejects non-positive values") {
  EcmSpec bad;
  bad.r0 = -1.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = table1_spec();
  bad.branches[0].capacitance = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = table1_spec();
  bad.u_dc = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  CHECK_NOTHROW(table1_spec().validate());
}
