#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "rcpinn/ecm.hpp"
#include "rcpinn/mlp.hpp"

namespace rcpinn {

// Result record shared by the PINN trainer and the least-squares baseline.
// Serialized as key = value text; `wallclock_s` is the one volatile field
// and is skipped by the determinism comparison helper below.
struct FitReport {
  std::string method;   // "pinn" or "lm"
  std::string variant;  // "static" or "temperature"
  std::vector<ParamValue> params;  // recovered, canonical order
  std::vector<ParamValue> truth;   // same names, empty when unknown
  double loss_data = 0.0;
  double loss_phys = 0.0;
  double loss_ic = 0.0;
  double residual_norm = 0.0;  // baseline cost
  bool ill_conditioned = false;
  std::uint64_t data_seed = 0;
  std::uint64_t train_seed = 0;
  std::vector<std::pair<std::string, std::string>> config_echo;
  double wallclock_s = 0.0;
  std::vector<std::pair<std::string, double>> checkpoint;

  // relative error per recovered parameter, when truth is present
  std::vector<ParamValue> relative_errors() const;

  std::string serialize() const;
  void save(const std::string& path) const;
  static FitReport load(const std::string& path);
};

// strips volatile lines (wall-clock) before comparing byte-for-byte
bool reports_equal_ignoring_volatile(const std::string& text_a, const std::string& text_b);

struct CompareRow {
  std::string name;
  double a = 0.0;
  double b = 0.0;
  double rel_diff = 0.0;
  bool flagged = false;
};

// Parameter-wise relative differences between two reports of the same
// topology (identical parameter name sets); throws CompareError otherwise.
std::vector<CompareRow> compare_reports(const FitReport& a, const FitReport& b, double threshold);

// Ground-truth parameter lists in the same canonical naming/ordering the
// models report (branches ascending in time constant).
std::vector<ParamValue> canonical_params(const EcmSpec& spec);
// scale_i = a_i / a_0 (constant resistance ratio when activation energies
// match), plus the capacitances.
std::vector<ParamValue> canonical_params(const TempEcmSpec& tspec);

}  // namespace rcpinn
