#pragma once

#include <stdexcept>
#include <string>

namespace rcpinn {

// Exit codes used by the CLI; each failure class maps to its own code so
// scripted sweeps can tell them apart.
enum ExitCode : int {
  kOk = 0,
  kInternalError = 1,
  kConfigError = 2,
  kTrainingAborted = 3,
  kIoError = 4,
  kCompareError = 5,
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CompareError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown when a loss component turns non-finite during training. Training
// never tries to recover; the diagnostic carries the step and component
// losses at the point of failure.
struct TrainingAborted : std::runtime_error {
  TrainingAborted(long step_, double loss_data_, double loss_phys_, double loss_ic_)
      : std::runtime_error("non-finite loss at step " + std::to_string(step_) +
                           " (data=" + std::to_string(loss_data_) +
                           ", phys=" + std::to_string(loss_phys_) +
                           ", ic=" + std::to_string(loss_ic_) + ")"),
        step(step_),
        loss_data(loss_data_),
        loss_phys(loss_phys_),
        loss_ic(loss_ic_) {}
  long step;
  double loss_data;
  double loss_phys;
  double loss_ic;
};

}  // namespace rcpinn
