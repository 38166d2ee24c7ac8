#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rcpinn/ecm.hpp"

namespace rcpinn {

// Affine maps between physical and training units. Times map to [0,1],
// temperatures to [-1,1] over the sweep range, currents are divided by the
// largest observed magnitude.
struct NormalizationInfo {
  double t_scale = 1.0;
  double temp_offset = 0.0;
  double temp_scale = 1.0;
  double current_scale = 1.0;

  double norm_t(double t) const { return t / t_scale; }
  double denorm_t(double tn) const { return tn * t_scale; }
  double norm_temp(double temp) const { return (temp - temp_offset) / temp_scale; }
  double denorm_temp(double tn) const { return tn * temp_scale + temp_offset; }
  double norm_current(double i) const { return i / current_scale; }
  double denorm_current(double in) const { return in * current_scale; }
};

struct Sample {
  double t = 0.0;
  std::optional<double> temperature;  // present iff the dataset is a sweep
  double current = 0.0;
};

struct Dataset {
  std::vector<Sample> samples;
  double sigma = 0.0;
  std::uint64_t seed = 0;
  double t_end = 1.0;
  NormalizationInfo norm;

  // generation provenance, carried into the sidecar metadata file
  std::optional<EcmSpec> static_spec;
  std::optional<TempEcmSpec> temp_spec;
  std::vector<double> temperatures;  // sweep values, empty for static data

  bool is_temperature() const { return !temperatures.empty(); }
  std::size_t size() const { return samples.size(); }
};

// n_samples points on a uniform time grid over [0, t_end] (endpoints
// included), currents from the analytical solution plus i.i.d. N(0, sigma^2)
// noise. Default t_end is 5x the largest branch time constant. Throws when
// the spec has no branches and no t_end is given, or when n_samples < 2.
Dataset generate_static(const EcmSpec& spec, int n_samples, double sigma, std::uint64_t seed,
                        std::optional<double> t_end = std::nullopt);

// One uniform time grid, reused at every temperature in the sweep. At each
// point the noise standard deviation is sigma / I with I the noiseless
// current, so noise grows where the current is small. Each temperature draws
// from its own RNG substream (see rng.hpp). Default t_end covers 5x the
// largest time constant over the sweep (i.e. the coldest temperature).
Dataset generate_temperature(const TempEcmSpec& tspec, const std::vector<double>& temperatures,
                             int n_per_temp, double sigma, std::uint64_t seed,
                             std::optional<double> t_end = std::nullopt);

// Computes normalization constants from the dataset and returns the dataset
// expressed in normalized units alongside them. A single-temperature sweep
// maps its temperature channel to the constant 0.
std::pair<Dataset, NormalizationInfo> normalize(const Dataset& ds);

// CSV persistence: header `t,temperature,current`, 17-significant-digit
// floats, empty temperature column for static data. A sidecar `<path>.meta`
// records the generating spec, sigma, seed, t_end and normalization
// constants so a dataset file round-trips completely.
void save_dataset(const Dataset& ds, const std::string& path);
Dataset load_dataset(const std::string& path);

}  // namespace rcpinn
