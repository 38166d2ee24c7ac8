#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rcpinn/ecm.hpp"
#include "rcpinn/lm.hpp"
#include "rcpinn/loss.hpp"
#include "rcpinn/train.hpp"

namespace rcpinn {

enum class RunMode {
  Generate,
  TrainStatic,
  TrainTemperature,
  FitBaseline,
  ReproduceTable1,
  ReproduceTable2,
};

// Parsed experiment description. The config file is sectioned key = value
// text ([experiment], [ecm], [data], [net], [train], [baseline]); unknown
// sections or keys are hard errors, as are malformed values.
struct ExperimentConfig {
  RunMode mode = RunMode::TrainStatic;
  std::string output_dir = "out";

  std::optional<EcmSpec> ecm;
  std::optional<TempEcmSpec> temp_ecm;

  int n_samples = 50;
  int n_per_temp = 20;
  std::vector<double> sigmas;            // empty: the run mode's default applies
  std::uint64_t data_seed = 42;
  std::optional<double> t_end;
  std::vector<double> temperatures;      // explicit sweep values
  std::optional<std::string> data_input; // read dataset instead of generating

  std::optional<std::vector<int>> hidden;      // default depends on the run mode
  std::optional<std::vector<int>> sub_hidden;

  TrainConfig train;
  LossWeights weights;
  LmConfig baseline;

  std::string source_text;  // raw config file contents, for the manifest hash
};

ExperimentConfig parse_config_file(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text);

const char* mode_name(RunMode mode);

}  // namespace rcpinn
