#include "rcpinn/runner.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "rcpinn/csvio.hpp"
#include "rcpinn/errors.hpp"
#include "rcpinn/lm.hpp"
#include "rcpinn/report.hpp"
#include "rcpinn/runner.hpp"
#include "rcpinn/train.hpp"

namespace fs = std::filesystem;

namespace rcpinn {

EcmSpec benchmark_static_circuit() {
  EcmSpec spec;
  spec.r0 = 25.0;
  spec.branches = {{3.5, 0.1}, {8.0, 0.5}};
  spec.u_dc = 1.0;
  return spec;
}

TempEcmSpec benchmark_temperature_circuit() {
  // prefactors chosen so the steady resistance is 2.0 at the cold end of the
  // 294-324 K sweep; the branch tracks it at half that value
  const double w = 0.76;
  const double a0 = 2.0 * std::exp(-w / (kBoltzmannEv * 294.0));
  TempEcmSpec tspec;
  tspec.r0_law = {a0, w};
  tspec.branch_laws = {{{0.5 * a0, w}, 0.5}};
  tspec.u_dc = 1.0;
  return tspec;
}

std::vector<double> benchmark_temperature_sweep() {
  std::vector<double> temps;
  for (int i = 0; i < 10; ++i) temps.push_back(294.0 + 30.0 * i / 9.0);
  return temps;
}

namespace {

std::string sigma_tag(double sigma) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", sigma);
  return std::string("sigma_") + buf;
}

struct ArtifactLog {
  fs::path root;
  std::vector<fs::path> files;

  fs::path add(const fs::path& rel) {
    files.push_back(rel);
    const fs::path full = root / rel;
    fs::create_directories(full.parent_path());
    return full;
  }
};

void write_manifest(const ArtifactLog& log, const ExperimentConfig& cfg) {
  auto os = open_out((log.root / "manifest.txt").string());
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a(cfg.source_text)));
  os << "config_hash = " << buf << "\n";
  os << "mode = " << mode_name(cfg.mode) << "\n";
  os << "data_seed = " << cfg.data_seed << "\n";
  os << "train_seed = " << cfg.train.seed << "\n";
  for (const auto& rel : log.files) {
    std::ifstream is(log.root / rel, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a(ss.str())));
    os << "artifact." << rel.generic_string() << " = " << buf << "\n";
  }
}

std::vector<double> dense_grid(double lo, double hi, int n) {
  std::vector<double> g(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    g[static_cast<std::size_t>(i)] = lo + (hi - lo) * static_cast<double>(i) / (n - 1);
  return g;
}

void write_static_curve(const fs::path& path, const PinnStaticModel& model, const EcmSpec& spec,
                        double t_end) {
  auto os = open_out(path.string());
  os << "t,current_true,current_pred\n";
  for (double t : dense_grid(0.0, t_end, 400))
    os << fmt17(t) << "," << fmt17(total_current(spec, t)) << "," << fmt17(model.predict_total(t))
       << "\n";
}

void write_temp_curves(const fs::path& path, const PinnTempModel& model, const TempEcmSpec& tspec,
                       const std::vector<double>& temps, double t_end) {
  auto os = open_out(path.string());
  os << "t,temperature,current_true,current_pred\n";
  for (double T : temps) {
    const EcmSpec spec = materialize(tspec, T);
    for (double t : dense_grid(0.0, t_end, 200))
      os << fmt17(t) << "," << fmt17(T) << "," << fmt17(total_current(spec, t)) << ","
         << fmt17(model.predict_total(t, T)) << "\n";
  }
}

void write_r0_curve(const fs::path& path, const PinnTempModel& model, const TempEcmSpec& tspec,
                    double t_lo, double t_hi) {
  auto os = open_out(path.string());
  os << "temperature,r0_true,r0_learned,r1_true,r1_learned\n";
  const double scale1 = model.n_branches >= 1 ? model.scale(1) : 0.0;
  for (double T : dense_grid(t_lo, t_hi, 101)) {
    const double r0_true = tspec.r0_law.evaluate(T);
    const double r1_true =
        tspec.branch_laws.empty() ? 0.0 : tspec.branch_laws[0].law.evaluate(T);
    const double r0l = model.r0_phys(T);
    os << fmt17(T) << "," << fmt17(r0_true) << "," << fmt17(r0l) << "," << fmt17(r1_true) << ","
       << fmt17(scale1 * r0l) << "\n";
  }
}

void write_summary(const fs::path& path_csv, const fs::path& path_txt,
                   const std::vector<ParamValue>& truth,
                   const std::vector<std::pair<double, FitReport>>& rows) {
  {
    auto os = open_out(path_csv.string());
    os << "row";
    for (const auto& p : truth) os << "," << p.name;
    os << "\n";
    os << "true";
    for (const auto& p : truth) os << "," << fmt17(p.value);
    os << "\n";
    for (const auto& [sigma, rep] : rows) {
      os << sigma_tag(sigma).substr(6);
      for (const auto& p : rep.params) os << "," << fmt17(p.value);
      os << "\n";
    }
  }
  auto os = open_out(path_txt.string());
  os << "Recovered circuit parameters by noise level\n\n";
  char buf[64];
  os << "  row        ";
  for (const auto& p : truth) {
    std::snprintf(buf, sizeof(buf), "%10s", p.name.c_str());
    os << buf;
  }
  os << "\n";
  os << "  true       ";
  for (const auto& p : truth) {
    std::snprintf(buf, sizeof(buf), "%10.4g", p.value);
    os << buf;
  }
  os << "\n";
  for (const auto& [sigma, rep] : rows) {
    std::snprintf(buf, sizeof(buf), "  sigma=%-5g", sigma);
    os << buf;
    for (const auto& p : rep.params) {
      std::snprintf(buf, sizeof(buf), "%10.4g", p.value);
      os << buf;
    }
    os << "\n";
  }
}

Dataset obtain_static_dataset(const ExperimentConfig& cfg, const EcmSpec& spec, double sigma) {
  if (cfg.data_input) return load_dataset(*cfg.data_input);
  return generate_static(spec, cfg.n_samples, sigma, cfg.data_seed, cfg.t_end);
}

struct StaticRunArtifacts {
  FitReport report;
};

StaticRunArtifacts run_static_case(const ExperimentConfig& cfg, const EcmSpec& spec, double sigma,
                                   const std::vector<int>& hidden, ArtifactLog& log,
                                   bool quiet) {
  const std::string tag = sigma_tag(sigma);
  const Dataset ds = obtain_static_dataset(cfg, spec, sigma);
  save_dataset(ds, log.add(tag + "/dataset.csv").string());
  log.files.push_back(tag + "/dataset.csv.meta");

  const NormalizationInfo norm = normalize(ds).second;
  PinnStaticModel model = PinnStaticModel::make(static_cast<int>(spec.n()), hidden, norm,
                                                spec.u_dc, cfg.train.seed);
  TrainResult result = train(model, ds, &spec, cfg.train, cfg.weights);
  result.trace.save_csv(log.add(tag + "/trace.csv").string());
  result.report.save(log.add(tag + "/report.txt").string());
  write_static_curve(log.add(tag + "/fit_curve.csv"), model, spec, ds.t_end);
  if (!quiet) {
    std::cout << tag << ": recovered";
    for (const auto& p : result.report.params) std::cout << " " << p.name << "=" << p.value;
    std::cout << "\n";
  }
  return {std::move(result.report)};
}

FitReport run_temperature_case(const ExperimentConfig& cfg, const TempEcmSpec& tspec,
                               const std::vector<double>& temps, double sigma,
                               const std::vector<int>& hidden, const std::vector<int>& sub_hidden,
                               ArtifactLog& log, bool quiet) {
  const std::string tag = sigma_tag(sigma);
  Dataset ds;
  if (cfg.data_input) ds = load_dataset(*cfg.data_input);
  else ds = generate_temperature(tspec, temps, cfg.n_per_temp, sigma, cfg.data_seed, cfg.t_end);
  save_dataset(ds, log.add(tag + "/dataset.csv").string());
  log.files.push_back(tag + "/dataset.csv.meta");

  const NormalizationInfo norm = normalize(ds).second;
  PinnTempModel model = PinnTempModel::make(static_cast<int>(tspec.n()), hidden, sub_hidden, norm,
                                            tspec.u_dc, cfg.train.seed);
  TrainResult result = train(model, ds, &tspec, cfg.train, cfg.weights);
  result.trace.save_csv(log.add(tag + "/trace.csv").string());
  result.report.save(log.add(tag + "/report.txt").string());
  write_temp_curves(log.add(tag + "/fit_curve.csv"), model, tspec, ds.temperatures, ds.t_end);
  write_r0_curve(log.add(tag + "/r0_curve.csv"), model, tspec, ds.temperatures.front(),
                 ds.temperatures.back());
  if (!quiet) {
    std::cout << tag << ": recovered";
    for (const auto& p : result.report.params) std::cout << " " << p.name << "=" << p.value;
    std::cout << "\n";
  }
  return std::move(result.report);
}

}  // namespace

void run_experiment(const ExperimentConfig& cfg, bool quiet) {
  ArtifactLog log;
  log.root = cfg.output_dir;
  fs::create_directories(log.root);

  switch (cfg.mode) {
    case RunMode::Generate: {
      const std::vector<double> sigmas = cfg.sigmas.empty() ? std::vector<double>{0.0} : cfg.sigmas;
      if (cfg.temp_ecm) {
        const auto temps =
            cfg.temperatures.empty() ? benchmark_temperature_sweep() : cfg.temperatures;
        for (double s : sigmas) {
          const Dataset ds =
              generate_temperature(*cfg.temp_ecm, temps, cfg.n_per_temp, s, cfg.data_seed, cfg.t_end);
          save_dataset(ds, log.add(sigma_tag(s) + "/dataset.csv").string());
          log.files.push_back(sigma_tag(s) + "/dataset.csv.meta");
        }
      } else if (cfg.ecm) {
        for (double s : sigmas) {
          const Dataset ds = generate_static(*cfg.ecm, cfg.n_samples, s, cfg.data_seed, cfg.t_end);
          save_dataset(ds, log.add(sigma_tag(s) + "/dataset.csv").string());
          log.files.push_back(sigma_tag(s) + "/dataset.csv.meta");
        }
      } else {
        throw ConfigError("generate mode needs an [ecm] section");
      }
      break;
    }

    case RunMode::TrainStatic:
    case RunMode::ReproduceTable1: {
      const EcmSpec spec = cfg.ecm ? *cfg.ecm : benchmark_static_circuit();
      spec.validate();
      std::vector<double> sigmas = cfg.sigmas;
      if (sigmas.empty())
        sigmas = cfg.mode == RunMode::ReproduceTable1 ? std::vector<double>{0.0, 0.1, 0.2}
                                                      : std::vector<double>{0.0};
      const std::vector<int> hidden = cfg.hidden.value_or(std::vector<int>{15, 15});
      std::vector<std::pair<double, FitReport>> rows;
      for (double s : sigmas)
        rows.push_back({s, run_static_case(cfg, spec, s, hidden, log, quiet).report});
      write_summary(log.add("summary.csv"), log.add("summary.txt"), canonical_params(spec), rows);
      break;
    }

    case RunMode::TrainTemperature:
    case RunMode::ReproduceTable2: {
      TempEcmSpec tspec;
      if (cfg.temp_ecm) tspec = *cfg.temp_ecm;
      else if (cfg.mode == RunMode::ReproduceTable2) tspec = benchmark_temperature_circuit();
      else throw ConfigError("train-temperature needs r0_law/branch_laws in [ecm]");
      std::vector<double> temps = cfg.temperatures;
      if (temps.empty()) {
        if (cfg.mode == RunMode::ReproduceTable2) temps = benchmark_temperature_sweep();
        else throw ConfigError("train-temperature needs [data] temperatures");
      }
      std::vector<double> sigmas = cfg.sigmas;
      if (sigmas.empty())
        sigmas = cfg.mode == RunMode::ReproduceTable2 ? std::vector<double>{0.0, 0.2, 0.4}
                                                      : std::vector<double>{0.0};
      const std::vector<int> hidden = cfg.hidden.value_or(std::vector<int>{15});
      const std::vector<int> sub_hidden = cfg.sub_hidden.value_or(std::vector<int>{15});
      std::vector<std::pair<double, FitReport>> rows;
      for (double s : sigmas)
        rows.push_back(
            {s, run_temperature_case(cfg, tspec, temps, s, hidden, sub_hidden, log, quiet)});
      write_summary(log.add("summary.csv"), log.add("summary.txt"), canonical_params(tspec), rows);
      break;
    }

    case RunMode::FitBaseline: {
      Dataset ds;
      EcmSpec truth_spec;
      bool have_truth = false;
      if (cfg.data_input) {
        ds = load_dataset(*cfg.data_input);
        if (ds.static_spec) {
          truth_spec = *ds.static_spec;
          have_truth = true;
        }
      } else if (cfg.ecm) {
        const double s = cfg.sigmas.empty() ? 0.0 : cfg.sigmas[0];
        ds = generate_static(*cfg.ecm, cfg.n_samples, s, cfg.data_seed, cfg.t_end);
        truth_spec = *cfg.ecm;
        have_truth = true;
      } else {
        throw ConfigError("fit-baseline needs [data] input or an [ecm] section");
      }
      save_dataset(ds, log.add("dataset.csv").string());
      log.files.push_back("dataset.csv.meta");
      const int n = have_truth ? static_cast<int>(truth_spec.n())
                               : static_cast<int>(ds.static_spec ? ds.static_spec->n() : 1);
      const LmResult lm = fit_static(ds, n, cfg.baseline);
      FitReport rep;
      rep.method = "lm";
      rep.variant = "static";
      rep.params = canonical_params(lm.spec);
      if (have_truth) rep.truth = canonical_params(truth_spec);
      rep.residual_norm = lm.cost;
      rep.ill_conditioned = lm.ill_conditioned;
      rep.data_seed = ds.seed;
      rep.train_seed = cfg.baseline.seed;
      rep.config_echo = {{"max_iters", std::to_string(cfg.baseline.max_iters)},
                         {"multistart", std::to_string(cfg.baseline.multistart)},
                         {"lm_iterations", std::to_string(lm.iterations)},
                         {"sigma", fmt17(ds.sigma)}};
      rep.save(log.add("report.txt").string());
      if (!quiet) {
        std::cout << "lm fit:";
        for (const auto& p : rep.params) std::cout << " " << p.name << "=" << p.value;
        std::cout << (lm.ill_conditioned ? "  [ill-conditioned]" : "") << "\n";
      }
      break;
    }
  }

  write_manifest(log, cfg);
}

}  // namespace rcpinn
