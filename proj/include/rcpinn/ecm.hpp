#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace rcpinn {

// Boltzmann constant in eV/K (CODATA).
inline constexpr double kBoltzmannEv = 8.617333262e-5;

// One polarization branch: a series RC pair whose current decays with time
// constant tau = R*C. Units are arbitrary (a.u.) throughout.
struct RcBranch {
  double resistance = 1.0;
  double capacitance = 1.0;
  double tau() const { return resistance * capacitance; }
};

// Parallel-RC equivalent circuit: steady conduction path r0 in parallel with
// n relaxation branches, stressed by a DC step voltage u_dc. n = 0 is legal
// and describes a pure resistor.
struct EcmSpec {
  double r0 = 1.0;
  std::vector<RcBranch> branches;
  double u_dc = 1.0;

  std::size_t n() const { return branches.size(); }
  double max_tau() const;
  double min_tau() const;
  // throws std::invalid_argument when any value is non-positive or non-finite
  void validate() const;
};

// I(t) = u_dc/r0 + sum_i (u_dc/R_i) * exp(-t / (R_i C_i)), t >= 0.
double total_current(const EcmSpec& spec, double t);

// I(0) = u_dc/r0 + sum_i u_dc/R_i; equals total_current(spec, 0) exactly.
double initial_current(const EcmSpec& spec);

// Branch decomposition. Element 0 combines the steady path with branch 1
// (the pair share one governing equation); element i-1 for i >= 2 is the bare
// branch current. For n = 0 the single element is the steady current.
// The elements sum to total_current(spec, t).
std::vector<double> branch_currents(const EcmSpec& spec, double t);

// Residuals of the governing equations at one point, given candidate branch
// currents and their time derivatives (each of length max(n, 1)):
//   element 0:   dI01/dt + (I01 - u_dc/r0) / (R1 C1)
//   element i-1: dIi/dt  + Ii / (Ri Ci),  i >= 2
// For n = 0 the single residual is just dI/dt. Evaluating on the analytical
// solution yields zeros. Throws std::invalid_argument on length mismatch.
std::vector<double> ode_residuals(const EcmSpec& spec, double t,
                                  const std::vector<double>& currents,
                                  const std::vector<double>& derivatives);

// Thermally activated resistance R(T) = a * exp(w / (kB * T)); w in eV,
// T in kelvin. Strictly decreasing in T for w > 0.
struct ArrheniusLaw {
  double a = 1.0;
  double w = 0.76;
  double evaluate(double temperature) const;
};

// Temperature-parameterized circuit: every resistance follows its own
// Arrhenius law, capacitances are temperature-independent.
struct TempEcmSpec {
  ArrheniusLaw r0_law;
  struct BranchLaw {
    ArrheniusLaw law;
    double capacitance = 1.0;
  };
  std::vector<BranchLaw> branch_laws;
  double u_dc = 1.0;

  std::size_t n() const { return branch_laws.size(); }
};

// Evaluates every law at the given temperature and returns the concrete
// circuit; capacitances are copied unchanged.
EcmSpec materialize(const TempEcmSpec& tspec, double temperature);

// Advisory inverse-problem conditioning report: flags branches whose time
// constants are too close (ratio below ratio_threshold) or whose amplitude
// u_dc/R_i is a negligible fraction of the initial current.
struct ConditioningReport {
  struct TauRatio {
    std::size_t i = 0;  // branch indices (0-based)
    std::size_t j = 0;
    double ratio = 0.0;  // >= 1
  };
  std::vector<double> taus;
  std::vector<TauRatio> tau_ratios;
  std::vector<double> amplitude_fractions;  // (u_dc/R_i) / I(0)
  std::vector<std::string> warnings;
  bool well_conditioned() const { return warnings.empty(); }
};

ConditioningReport check_conditioning(const EcmSpec& spec, double ratio_threshold = 3.0,
                                      double amplitude_threshold = 0.02);

}  // namespace rcpinn
