#pragma once

// Test-only oracles, independent of the library's implementation paths:
//  - classic RK4 integration of the branch ODE system from the analytic
//    initial state, for checking the closed-form solution;
//  - central finite differences for checking every derivative path.

#include <cmath>
#include <functional>
#include <vector>

#include "rcpinn/ecm.hpp"
#include "rcpinn/rng.hpp"

namespace rcpinn::oracle {

// dI01/dt = -(I01 - u/r0)/tau1, dIi/dt = -Ii/taui, from the analytic t=0 state
struct Rk4Result {
  std::vector<double> t;
  std::vector<std::vector<double>> state;  // per grid point, max(n,1) currents
};

inline Rk4Result integrate_branches(const EcmSpec& spec, double t_end, int grid_points,
                                    double dt_max) {
  const std::size_t m = std::max<std::size_t>(spec.n(), 1);
  std::vector<double> state(m);
  if (spec.branches.empty()) {
    state[0] = spec.u_dc / spec.r0;
  } else {
    state[0] = spec.u_dc / spec.r0 + spec.u_dc / spec.branches[0].resistance;
    for (std::size_t i = 1; i < spec.n(); ++i) state[i] = spec.u_dc / spec.branches[i].resistance;
  }

  auto deriv = [&](const std::vector<double>& s) {
    std::vector<double> d(m, 0.0);
    if (!spec.branches.empty()) {
      d[0] = -(s[0] - spec.u_dc / spec.r0) / spec.branches[0].tau();
      for (std::size_t i = 1; i < spec.n(); ++i) d[i] = -s[i] / spec.branches[i].tau();
    }
    return d;
  };

  Rk4Result out;
  out.t.push_back(0.0);
  out.state.push_back(state);
  for (int g = 1; g < grid_points; ++g) {
    const double target = t_end * g / (grid_points - 1);
    double t = out.t.back();
    while (t < target - 1e-15 * t_end) {
      const double h = std::min(dt_max, target - t);
      const auto k1 = deriv(state);
      std::vector<double> tmp(m);
      for (std::size_t i = 0; i < m; ++i) tmp[i] = state[i] + 0.5 * h * k1[i];
      const auto k2 = deriv(tmp);
      for (std::size_t i = 0; i < m; ++i) tmp[i] = state[i] + 0.5 * h * k2[i];
      const auto k3 = deriv(tmp);
      for (std::size_t i = 0; i < m; ++i) tmp[i] = state[i] + h * k3[i];
      const auto k4 = deriv(tmp);
      for (std::size_t i = 0; i < m; ++i)
        state[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
      t += h;
    }
    out.t.push_back(target);
    out.state.push_back(state);
  }
  return out;
}

inline double central_diff(const std::function<double(double)>& f, double x, double h = 1e-6) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

// random circuit with well-separated time constants and non-negligible
// branch amplitudes (the regime the inverse problem is specified for)
inline EcmSpec random_well_conditioned_spec(Xoshiro256& rng, int n_branches) {
  EcmSpec spec;
  spec.u_dc = 1.0;
  spec.r0 = rng.uniform(5.0, 50.0);
  double tau = rng.uniform(0.2, 0.6);
  for (int i = 0; i < n_branches; ++i) {
    const double r = rng.uniform(1.0, 10.0);
    spec.branches.push_back({r, tau / r});
    tau *= rng.uniform(5.0, 12.0);  // next branch at least 5x slower
  }
  return spec;
}

}  // namespace rcpinn::oracle
