#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "rcpinn/dataset.hpp"
#include "rcpinn/kernels.hpp"
#include "rcpinn/loss.hpp"
#include "rcpinn/mlp.hpp"
#include "rcpinn/report.hpp"

namespace rcpinn {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct TrainConfig {
  long iterations = 50000;
  double lr0 = 1e-2;
  double decay_factor = 0.9;  // exponential schedule: lr0 * factor^(step/every)
  long decay_every = 2000;
  long collocation = 4096;
  AdamConfig adam{};
  std::uint64_t seed = 1;  // network init + collocation subsampling
  long log_every = 100;
  kern::Backend backend = kern::Backend::Auto;
  bool use_tape = false;  // reference engine; slow, meant for small problems
  // keep the surrogate circuit scalars fixed and train only the networks;
  // used to check that the network class can represent the solution
  bool freeze_scalars = false;
  // Temperature variant only: before the main loop, fit the subnetwork to
  // the late-time current level of each training temperature (the observed
  // steady conduction), and set the capacitance scalars to a matching decay
  // rate. Without this the subnetwork's orientation in temperature is left
  // to chance and training can lock into a mirrored, unphysical branch
  // assignment. 0 disables.
  long subnet_warmup_steps = 500;

  double lr_at(long step) const {
    return lr0 * std::pow(decay_factor, static_cast<double>(step) / static_cast<double>(decay_every));
  }
};

struct TraceRow {
  long step = 0;
  double loss_data = 0.0;
  double loss_phys = 0.0;
  double loss_ic = 0.0;
  double lr = 0.0;
  std::vector<double> params;  // materialized physical values, model order
};

// Convergence log. Columns follow the model's internal branch order (the
// final report canonicalizes instead), so one column tracks one trainable
// throughout training.
struct TrainTrace {
  std::vector<std::string> param_names;
  std::vector<TraceRow> rows;
  void save_csv(const std::string& path) const;
};

struct TrainResult {
  TrainTrace trace;
  FitReport report;
};

// Full-batch Adam over all trainables (network weights plus raw parameter
// scalars); deterministic per seed/config. Losses are checked for finiteness
// each step; a non-finite value raises TrainingAborted. `truth`, when given,
// fills the report's ground-truth column.
TrainResult train(PinnStaticModel& model, const Dataset& data, const EcmSpec* truth,
                  const TrainConfig& cfg, const LossWeights& w = {});
TrainResult train(PinnTempModel& model, const Dataset& data, const TempEcmSpec* truth,
                  const TrainConfig& cfg, const LossWeights& w = {});

// One loss+gradient evaluation at the model's current parameters; grad (when
// non-null) is filled in trainable_slots order. Exposed for the
// engine-equivalence and gradient-check tests.
struct LossValue {
  double data = 0.0;
  double phys = 0.0;
  double ic = 0.0;
  double total(const LossWeights& w) const {
    return w.data_w * data + w.physics_w * phys + w.ic_w * ic;
  }
};
LossValue eval_loss(const PinnStaticModel& model, const TrainingData& td, const Collocation& coll,
                    const LossWeights& w, const kern::KernelTable& K, std::vector<double>* grad);
LossValue eval_loss(const PinnTempModel& model, const TrainingData& td, const Collocation& coll,
                    const LossWeights& w, const kern::KernelTable& K, std::vector<double>* grad);
LossValue eval_loss_tape(const PinnStaticModel& model, const TrainingData& td,
                         const Collocation& coll, const LossWeights& w, std::vector<double>* grad);
LossValue eval_loss_tape(const PinnTempModel& model, const TrainingData& td,
                         const Collocation& coll, const LossWeights& w, std::vector<double>* grad);

// Recomputes the temperature model's running feature scale from the current
// subnetwork (mean representative resistance over the training
// temperatures); called once per training step before the loss evaluation.
void update_feature_scale(PinnTempModel& model, const TrainingData& td);

}  // namespace rcpinn
