#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "rcpinn/dataset.hpp"
#include "rcpinn/ecm.hpp"

namespace rcpinn {

// Classical nonlinear least-squares baseline: fits the analytical circuit
// response directly to a dataset. Serves as an independent cross-check of
// the PINN recoveries.
struct LmConfig {
  int max_iters = 200;
  double lambda0 = 1e-3;
  double tol = 1e-10;  // relative cost decrease
  int multistart = 16;
  std::uint64_t seed = 7;
  // log-uniform initial-guess box, in normalized parameter units
  double box_lo = 1e-2;
  double box_hi = 1e2;
};

struct LmResult {
  EcmSpec spec;          // best fit, branches in ascending time-constant order
  double cost = 0.0;     // sum of squared residuals, normalized units
  bool ill_conditioned = false;
  int iterations = 0;    // of the winning restart
};

// Levenberg-Marquardt over (log R0, log Ri, log Ci) with the analytical
// Jacobian, run from `multistart` seeded initial guesses; the lowest cost
// wins, ties broken by the smaller parameter-vector norm.
LmResult fit_static(const Dataset& ds, int n_branches, const LmConfig& cfg = {});

// Linear least squares of log R against 1/T.
ArrheniusLaw fit_arrhenius(std::span<const std::pair<double, double>> temp_resistance);

}  // namespace rcpinn
