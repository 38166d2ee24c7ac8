#pragma once

#include <string>

#include "rcpinn/config.hpp"

namespace rcpinn {

// Benchmark circuits used by the reproduce modes when the config file does
// not override them. The static one is the five-parameter two-branch case;
// the temperature one pairs a steady path with one polarization branch whose
// resistances follow the same 0.76 eV activation law, the branch at half the
// steady resistance.
EcmSpec benchmark_static_circuit();
TempEcmSpec benchmark_temperature_circuit();
std::vector<double> benchmark_temperature_sweep();

// Executes one experiment described by the config: generates/loads data,
// runs the requested fits, and writes every artifact (datasets, traces,
// reports, plot-data CSVs, manifest) under cfg.output_dir. Throws on error;
// the CLI maps exception types to exit codes.
void run_experiment(const ExperimentConfig& cfg, bool quiet);

}  // namespace rcpinn
