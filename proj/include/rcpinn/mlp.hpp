#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rcpinn/dataset.hpp"
#include "rcpinn/dual.hpp"
#include "rcpinn/rng.hpp"
#include "rcpinn/tape.hpp"

namespace rcpinn {

// Fully connected network: tanh on hidden layers, affine output.
struct MlpSpec {
  int input_dim = 1;
  int output_dim = 1;
  std::vector<int> hidden = {15};

  // the configurations the method is specified for: 1-2 hidden layers,
  // each under 30 neurons; anything else is allowed but nonstandard
  bool paper_standard() const {
    if (hidden.size() < 1 || hidden.size() > 2) return false;
    for (int h : hidden)
      if (h < 1 || h >= 30) return false;
    return true;
  }
  int layer_count() const { return static_cast<int>(hidden.size()) + 1; }
  // (fan_out, fan_in) of layer l; hidden layers first, output layer last
  std::pair<int, int> layer_shape(int l) const;
  int param_count() const;
};

// Flat parameter store. Layout, which is also the checkpoint key order:
// for each layer l in order, W[l] row-major (fan_out x fan_in), then b[l].
struct MlpParams {
  MlpSpec spec;
  std::vector<double> flat;

  int layer_offset(int l) const;
  double& w(int l, int r, int c);
  double w(int l, int r, int c) const;
  double& b(int l, int r);
  double b(int l, int r) const;

  // Glorot-uniform weights (bound sqrt(6/(fan_in+fan_out))), zero biases.
  // Layers fill in order, rows before columns, so a seed pins every value.
  static MlpParams init(const MlpSpec& spec, Xoshiro256& rng);
};

// plain double forward pass
std::vector<double> mlp_eval(const MlpParams& p, std::span<const double> x);

// Tape forward pass generic over the input scalar: Var for plain outputs,
// Dual<Var> when a directional derivative rides along. `leaves` are the
// parameters registered on the tape in flat order.
std::vector<Var> make_leaves(Tape& tape, std::span<const double> values);

template <class S>
std::vector<S> mlp_forward(const MlpSpec& spec, std::span<const Var> leaves,
                           std::span<const S> x) {
  std::vector<S> act(x.begin(), x.end());
  int off = 0;
  for (int l = 0; l < spec.layer_count(); ++l) {
    const auto [fo, fi] = spec.layer_shape(l);
    std::vector<S> next;
    next.reserve(fo);
    for (int r = 0; r < fo; ++r) {
      S z = leaves[off + r * fi + 0] * act[0];
      for (int c = 1; c < fi; ++c) z = z + leaves[off + r * fi + c] * act[c];
      z = z + leaves[off + fo * fi + r];  // bias
      next.push_back(l + 1 < spec.layer_count() ? tanh(z) : z);
    }
    act = std::move(next);
    off += fo * (fi + 1);
  }
  return act;
}

// Trainable scalar kept positive through exponential reparameterization;
// raw = 0 materializes to 1.
struct PositiveScalar {
  double raw = 0.0;
  double value() const { return std::exp(raw); }
};

// --- PINN models -----------------------------------------------------------
//
// Surrogate circuit parameters live in normalized units: resistances as
// multiples of r_ref = u_dc / current_scale (so 1/R~ is a normalized steady
// current) and capacitances as multiples of c_ref = current_scale * t_scale
// / u_dc (so R~ * C~ is a time constant in normalized time). raw values are
// logs of the normalized quantities; raw = 0 is the default initial guess.

struct ParamValue {
  std::string name;
  double value = 0.0;
};

// Static variant: one network maps normalized time to the branch currents
// (normalized units); output 0 bundles the steady path with branch 1.
struct PinnStaticModel {
  MlpParams net;
  int n_branches = 0;
  std::vector<double> raw_r;  // n+1, index 0 is the steady path
  std::vector<double> raw_c;  // n
  NormalizationInfo norm;
  double u_dc = 1.0;

  int output_count() const { return std::max(n_branches, 1); }
  double r_ref() const { return u_dc / norm.current_scale; }
  double c_ref() const { return norm.current_scale * norm.t_scale / u_dc; }
  double resistance(int i) const { return r_ref() * std::exp(raw_r[i]); }  // i=0..n
  double capacitance(int i) const { return c_ref() * std::exp(raw_c[i - 1]); }  // i=1..n

  // physical parameters named R0, C1, R1, C2, R2, ...; branch pairs are
  // reported in ascending time-constant order so comparisons against a
  // ground truth in the same canonical order are label-stable
  std::vector<ParamValue> materialize_params() const;

  // predicted physical total current at physical time
  double predict_total(double t) const;

  std::vector<std::pair<std::string, double>> checkpoint() const;

  static PinnStaticModel make(int n_branches, const std::vector<int>& hidden,
                              const NormalizationInfo& norm, double u_dc, std::uint64_t seed);
};

// Temperature variant: a subnetwork maps normalized temperature to a
// representative resistance r0 (positive via exp); remaining resistances are
// learned constant multiples of it. The main network consumes (normalized
// time, r0 / feature_scale) where feature_scale is a running scale treated
// as a constant during differentiation.
struct PinnTempModel {
  MlpParams main;  // input_dim 2
  MlpParams sub;   // input_dim 1, output_dim 1
  int n_branches = 1;
  std::vector<double> raw_scale;  // n: R_i(T) = scale_i * r0(T)
  std::vector<double> raw_c;      // n
  double feature_scale = 1.0;
  NormalizationInfo norm;
  double u_dc = 1.0;

  int output_count() const { return std::max(n_branches, 1); }
  double r_ref() const { return u_dc / norm.current_scale; }
  double c_ref() const { return norm.current_scale * norm.t_scale / u_dc; }
  double scale(int i) const { return std::exp(raw_scale[i - 1]); }       // i=1..n
  double capacitance(int i) const { return c_ref() * std::exp(raw_c[i - 1]); }

  double r0_norm(double temp_norm) const;  // exp(subnet output)
  double r0_phys(double temp_phys) const;
  double predict_total(double t, double temp) const;

  // scalar parameters: scale_1..n, C_1..n
  std::vector<ParamValue> materialize_params() const;
  // learned representative resistance sampled on a physical temperature grid
  std::vector<std::pair<double, double>> r0_curve(std::span<const double> temps) const;

  std::vector<std::pair<std::string, double>> checkpoint() const;

  static PinnTempModel make(int n_branches, const std::vector<int>& main_hidden,
                            const std::vector<int>& sub_hidden, const NormalizationInfo& norm,
                            double u_dc, std::uint64_t seed);
};

// Trainable views in a fixed, documented order (network flat params first,
// then raw scalars); the optimizer walks these slots.
std::vector<double*> trainable_slots(PinnStaticModel& m);
std::vector<double*> trainable_slots(PinnTempModel& m);

}  // namespace rcpinn
