#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "rcpinn/dataset.hpp"
#include "rcpinn/kernels.hpp"
#include "rcpinn/mlp.hpp"
#include "rcpinn/tape.hpp"

namespace rcpinn {

struct LossWeights {
  double data_w = 1.0;
  double physics_w = 1.0;
  double ic_w = 1.0;
};

// Collocation points in normalized time, grouped by temperature index. The
// static variant has a single group.
struct Collocation {
  std::vector<std::vector<double>> by_group;
  std::size_t total() const {
    std::size_t n = 0;
    for (const auto& g : by_group) n += g.size();
    return n;
  }
};

// `count` uniformly spaced points on [0, 1], endpoints included.
Collocation collocation_static(long count);

// Cartesian product of a uniform time grid with the training temperatures,
// thinned down to `count` points. The points to drop are chosen by seeded
// shuffle but never empty out a temperature, so every group stays
// represented.
Collocation collocation_temperature(long count, int n_temps, std::uint64_t seed);

// Dataset rearranged into normalized per-group arrays the training loop and
// kernels consume directly.
struct TrainingData {
  std::vector<std::vector<double>> t_by_group;
  std::vector<std::vector<double>> y_by_group;
  std::vector<double> temps_norm;  // one per group; empty for static data
  std::vector<double> temps_phys;
  NormalizationInfo norm;
  std::size_t total = 0;
  bool temperature = false;
};
TrainingData prepare_training_data(const Dataset& raw);

// --- formula-level loss evaluators ------------------------------------------
// Spec-level definitions over an arbitrary surrogate provider; used to test
// the loss formulas against exact analytic branch currents independent of
// any network. provider(tau, u, dudtau) fills m outputs and their
// normalized-time derivatives.

using SurrogateEval = std::function<void(double tau, double* u, double* dudtau)>;

double data_loss_numeric(std::span<const double> predicted_total, std::span<const double> targets);
double physics_loss_numeric(const SurrogateEval& eval, int m, const kern::StaticCoeffs& co,
                            std::span<const double> taus);
double ic_loss_numeric(const SurrogateEval& eval, int m, const kern::StaticCoeffs& co);

// --- tape reference path ------------------------------------------------------
// Builds the full weighted loss on a tape; gradients of `total` w.r.t.
// `trainables` (ordered exactly like trainable_slots) are the reference the
// fused kernels are tested against.

struct TapeLoss {
  Var total, data, phys, ic;
  std::vector<Var> trainables;
};

TapeLoss build_loss(Tape& tape, const PinnStaticModel& model, const TrainingData& td,
                    const Collocation& coll, const LossWeights& w);
TapeLoss build_loss(Tape& tape, const PinnTempModel& model, const TrainingData& td,
                    const Collocation& coll, const LossWeights& w);

}  // namespace rcpinn
