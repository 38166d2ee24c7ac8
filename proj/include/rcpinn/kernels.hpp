#pragma once

#include <cstddef>
#include <vector>

#include "rcpinn/mlp.hpp"

namespace rcpinn::kern {

inline constexpr int kMaxWidth = 32;  // widest supported layer
inline constexpr int kMaxOut = 8;     // most branch outputs
inline constexpr int kMaxHidden = 2;

// Network shape in the form the kernels consume. Inputs are (t) or (t, xi)
// where xi is the temperature-path feature; hidden widths are capped at
// kMaxWidth and hidden depth at kMaxHidden.
struct NetDims {
  int in = 1;
  int out = 1;
  int n_hidden = 1;
  int h0 = 15;
  int h1 = 0;

  static NetDims from(const MlpSpec& spec);
  int hidden_width(int l) const { return l == 0 ? h0 : h1; }
  int last_width() const { return n_hidden == 2 ? h1 : h0; }
  int param_count() const;
};

// Normalized surrogate-circuit coefficients for the physics residual:
//   g0       steady current 1/R~0 (for one temperature group, 1/r0(T))
//   g[i]     branch amplitude 1/R~_{i+1}
//   kappa[i] branch decay rate 1/(R~_{i+1} C~_{i+1})
// n = 0 describes the pure-resistor case whose residual is just du/dt.
struct StaticCoeffs {
  int n = 0;
  double g0 = 1.0;
  double g[kMaxOut] = {};
  double kappa[kMaxOut] = {};
};

// One fused pass = batched forward (+ optional time tangent) + loss seeds +
// reverse accumulation. Batches are processed in lane-width blocks with a
// fixed reduction order, so each variant is bit-deterministic.
//
// Conventions shared by all entry points:
//  - `params` / `d_params` use the MlpParams flat layout; d_* accumulate.
//  - x0 is the per-point normalized time; x1v is a per-batch constant second
//    input (the temperature feature), enabled by has_x1.
//  - data/phys return the *sum* of squared errors/residuals (caller divides
//    by the count); gradient seeds are premultiplied by `seed_scale`
//    (= loss_weight * 2 / denominator), so d_* arrive fully weighted.
//  - d_x1_sum, when non-null, accumulates d(loss)/d(x1v) over the batch.
struct KernelTable {
  const char* name;

  // u[point*out + k] = network outputs; no gradients
  void (*forward_eval)(const NetDims&, const double* params, const double* x0, double x1v,
                       bool has_x1, std::size_t n, double* u);

  // reverse pass from caller-supplied output adjoints gu[point*out + k]
  void (*seeded_reverse)(const NetDims&, const double* params, const double* x0, double x1v,
                         bool has_x1, const double* gu, std::size_t n, double* d_params,
                         double* d_x1_sum);

  // sum_j (sum_k u_k(t_j) - y_j)^2 and its gradient
  double (*data_batch)(const NetDims&, const double* params, const double* x0, double x1v,
                       bool has_x1, const double* y, std::size_t n, double seed_scale,
                       double* d_params, double* d_x1_sum);

  // sum over points and branches of squared governing-equation residuals,
  // with gradients w.r.t. params, g0 and each kappa (amplitudes g[i>=1]
  // only enter through the initial condition, handled by the caller)
  double (*phys_batch)(const NetDims&, const double* params, const double* x0, double x1v,
                       bool has_x1, std::size_t n, const StaticCoeffs&, double seed_scale,
                       double* d_params, double* d_g0, double* d_kappa, double* d_x1_sum);
};

enum class Backend { Auto, Scalar, Simd };

// Scalar reference kernels; always available.
const KernelTable& scalar_kernels();

// Best SIMD variant the running CPU supports, or nullptr.
const KernelTable* simd_kernels();

// Auto resolves to SIMD when available, scalar otherwise.
const KernelTable& select_kernels(Backend b);

// every variant compiled into this binary and usable on this CPU
std::vector<const KernelTable*> available_kernels();

}  // namespace rcpinn::kern
