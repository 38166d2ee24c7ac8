#include "rcpinn/ecm.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rcpinn {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

}  // namespace

double EcmSpec::max_tau() const {
  double m = 0.0;
  for (const auto& b : branches) m = std::max(m, b.tau());
  return m;
}

double EcmSpec::min_tau() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& b : branches) m = std::min(m, b.tau());
  return m;
}

void EcmSpec::validate() const {
  require(std::isfinite(r0) && r0 > 0.0, "EcmSpec: r0 must be positive and finite");
  require(std::isfinite(u_dc) && u_dc > 0.0, "EcmSpec: u_dc must be positive and finite");
  for (const auto& b : branches) {
    require(std::isfinite(b.resistance) && b.resistance > 0.0,
            "EcmSpec: branch resistance must be positive and finite");
    require(std::isfinite(b.capacitance) && b.capacitance > 0.0,
            "EcmSpec: branch capacitance must be positive and finite");
    require(std::isfinite(b.tau()) && b.tau() > 0.0,
            "EcmSpec: branch time constant must be positive and finite");
  }
}

double total_current(const EcmSpec& spec, double t) {
  double i = spec.u_dc / spec.r0;
  for (const auto& b : spec.branches) i += (spec.u_dc / b.resistance) * std::exp(-t / b.tau());
  return i;
}

double initial_current(const EcmSpec& spec) {
  // exp(-0/tau) == 1 exactly, so this matches total_current(spec, 0) bitwise.
  return total_current(spec, 0.0);
}

std::vector<double> branch_currents(const EcmSpec& spec, double t) {
  std::vector<double> out;
  out.reserve(std::max<std::size_t>(spec.n(), 1));
  if (spec.branches.empty()) {
    out.push_back(spec.u_dc / spec.r0);
    return out;
  }
  const auto& b1 = spec.branches[0];
  out.push_back(spec.u_dc / spec.r0 + (spec.u_dc / b1.resistance) * std::exp(-t / b1.tau()));
  for (std::size_t i = 1; i < spec.branches.size(); ++i) {
    const auto& b = spec.branches[i];
    out.push_back((spec.u_dc / b.resistance) * std::exp(-t / b.tau()));
  }
  return out;
}

std::vector<double> ode_residuals(const EcmSpec& spec, double /*t*/,
                                  const std::vector<double>& currents,
                                  const std::vector<double>& derivatives) {
  const std::size_t m = std::max<std::size_t>(spec.n(), 1);
  if (currents.size() != m || derivatives.size() != m)
    throw std::invalid_argument("ode_residuals: currents/derivatives must have length max(n, 1)");

  std::vector<double> res(m);
  if (spec.branches.empty()) {
    res[0] = derivatives[0];  // pure resistor: the current is constant
    return res;
  }
  const double steady = spec.u_dc / spec.r0;
  res[0] = derivatives[0] + (currents[0] - steady) / spec.branches[0].tau();
  for (std::size_t i = 1; i < spec.branches.size(); ++i)
    res[i] = derivatives[i] + currents[i] / spec.branches[i].tau();
  return res;
}

double ArrheniusLaw::evaluate(double temperature) const {
  return a * std::exp(w / (kBoltzmannEv * temperature));
}

EcmSpec materialize(const TempEcmSpec& tspec, double temperature) {
  if (!(temperature > 0.0)) throw std::invalid_argument("materialize: temperature must be > 0");
  EcmSpec spec;
  spec.u_dc = tspec.u_dc;
  spec.r0 = tspec.r0_law.evaluate(temperature);
  spec.branches.reserve(tspec.branch_laws.size());
  for (const auto& bl : tspec.branch_laws)
    spec.branches.push_back({bl.law.evaluate(temperature), bl.capacitance});
  return spec;
}

ConditioningReport check_conditioning(const EcmSpec& spec, double ratio_threshold,
                                      double amplitude_threshold) {
  ConditioningReport rep;
  const double i0 = initial_current(spec);
  for (const auto& b : spec.branches) {
    rep.taus.push_back(b.tau());
    rep.amplitude_fractions.push_back((spec.u_dc / b.resistance) / i0);
  }
  for (std::size_t i = 0; i < rep.taus.size(); ++i) {
    for (std::size_t j = i + 1; j < rep.taus.size(); ++j) {
      const double lo = std::min(rep.taus[i], rep.taus[j]);
      const double hi = std::max(rep.taus[i], rep.taus[j]);
      const double ratio = hi / lo;
      rep.tau_ratios.push_back({i, j, ratio});
      if (ratio < ratio_threshold)
        rep.warnings.push_back("time constants of branches " + std::to_string(i + 1) + " and " +
                               std::to_string(j + 1) + " differ only by factor " +
                               std::to_string(ratio) + " (< " + std::to_string(ratio_threshold) +
                               "); their transients may not be separable");
    }
  }
  for (std::size_t i = 0; i < rep.amplitude_fractions.size(); ++i) {
    if (rep.amplitude_fractions[i] < amplitude_threshold)
      rep.warnings.push_back("branch " + std::to_string(i + 1) + " contributes only " +
                             std::to_string(100.0 * rep.amplitude_fractions[i]) +
                             "% of the initial current; its parameters may be unidentifiable");
  }
  return rep;
}

}  // namespace rcpinn
