#include "rcpinn/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "rcpinn/csvio.hpp"
#include "rcpinn/errors.hpp"

namespace rcpinn {

namespace {

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("bad numeric value for " + key + ": '" + v + "'");
  }
}

long to_long(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const long x = std::stol(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("bad integer value for " + key + ": '" + v + "'");
  }
}

std::uint64_t to_seed(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const std::uint64_t x = std::stoull(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("bad seed value for " + key + ": '" + v + "'");
  }
}

std::vector<double> to_double_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const auto& item : split(v, ',')) {
    const std::string s = trim(item);
    if (s.empty()) throw ConfigError("empty list entry for " + key);
    out.push_back(to_double(key, s));
  }
  if (out.empty()) throw ConfigError("empty list for " + key);
  return out;
}

std::vector<int> to_int_list(const std::string& key, const std::string& v) {
  std::vector<int> out;
  for (double d : to_double_list(key, v)) {
    if (d != std::floor(d) || d < 1) throw ConfigError("bad integer list for " + key);
    out.push_back(static_cast<int>(d));
  }
  return out;
}

std::vector<double> parse_temperature_field(const std::string& key, const std::string& v) {
  // either lo:hi:count or an explicit comma list
  if (v.find(':') != std::string::npos) {
    const auto parts = split(v, ':');
    if (parts.size() != 3) throw ConfigError("expected lo:hi:count for " + key);
    const double lo = to_double(key, trim(parts[0]));
    const double hi = to_double(key, trim(parts[1]));
    const long count = to_long(key, trim(parts[2]));
    if (count < 1 || hi < lo) throw ConfigError("bad temperature sweep for " + key);
    std::vector<double> out;
    for (long i = 0; i < count; ++i)
      out.push_back(count == 1 ? lo
                               : lo + (hi - lo) * static_cast<double>(i) /
                                     static_cast<double>(count - 1));
    return out;
  }
  return to_double_list(key, v);
}

}  // namespace

const char* mode_name(RunMode mode) {
  switch (mode) {
    case RunMode::Generate: return "generate";
    case RunMode::TrainStatic: return "train-static";
    case RunMode::TrainTemperature: return "train-temperature";
    case RunMode::FitBaseline: return "fit-baseline";
    case RunMode::ReproduceTable1: return "reproduce-table1";
    case RunMode::ReproduceTable2: return "reproduce-table2";
  }
  return "?";
}

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig cfg;
  cfg.source_text = text;
  EcmSpec ecm;
  bool has_ecm = false;
  TempEcmSpec tecm;
  bool has_tecm = false;
  bool mode_set = false;

  std::istringstream is(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    // strip comments
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("unterminated section at line " + std::to_string(lineno));
      section = trim(line.substr(1, line.size() - 2));
      if (section != "experiment" && section != "ecm" && section != "data" && section != "net" &&
          section != "train" && section != "baseline")
        throw ConfigError("unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("expected key = value at line " + std::to_string(lineno));
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key.empty() || val.empty())
      throw ConfigError("empty key or value at line " + std::to_string(lineno));

    if (section == "experiment") {
      if (key == "mode") {
        mode_set = true;
        if (val == "generate") cfg.mode = RunMode::Generate;
        else if (val == "train-static") cfg.mode = RunMode::TrainStatic;
        else if (val == "train-temperature") cfg.mode = RunMode::TrainTemperature;
        else if (val == "fit-baseline") cfg.mode = RunMode::FitBaseline;
        else if (val == "reproduce-table1") cfg.mode = RunMode::ReproduceTable1;
        else if (val == "reproduce-table2") cfg.mode = RunMode::ReproduceTable2;
        else throw ConfigError("unknown mode '" + val + "'");
      } else if (key == "output_dir") {
        cfg.output_dir = val;
      } else {
        throw ConfigError("unknown key '" + key + "' in [experiment]");
      }
    } else if (section == "ecm") {
      if (key == "r0") { ecm.r0 = to_double(key, val); has_ecm = true; }
      else if (key == "u_dc") { ecm.u_dc = to_double(key, val); tecm.u_dc = ecm.u_dc; }
      else if (key == "branches") {
        has_ecm = true;
        ecm.branches.clear();
        for (const auto& item : split(val, ',')) {
          const auto parts = split(trim(item), ':');
          if (parts.size() != 2) throw ConfigError("branches entries must be R:C");
          ecm.branches.push_back({to_double(key, trim(parts[0])), to_double(key, trim(parts[1]))});
        }
      } else if (key == "r0_law") {
        const auto parts = split(val, ':');
        if (parts.size() != 2) throw ConfigError("r0_law must be a:w");
        tecm.r0_law = {to_double(key, trim(parts[0])), to_double(key, trim(parts[1]))};
        has_tecm = true;
      } else if (key == "branch_laws") {
        has_tecm = true;
        tecm.branch_laws.clear();
        for (const auto& item : split(val, ',')) {
          const auto parts = split(trim(item), ':');
          if (parts.size() != 3) throw ConfigError("branch_laws entries must be a:w:C");
          tecm.branch_laws.push_back({{to_double(key, trim(parts[0])), to_double(key, trim(parts[1]))},
                                      to_double(key, trim(parts[2]))});
        }
      } else {
        throw ConfigError("unknown key '" + key + "' in [ecm]");
      }
    } else if (section == "data") {
      if (key == "n_samples") cfg.n_samples = static_cast<int>(to_long(key, val));
      else if (key == "n_per_temp") cfg.n_per_temp = static_cast<int>(to_long(key, val));
      else if (key == "sigma") cfg.sigmas = to_double_list(key, val);
      else if (key == "seed") cfg.data_seed = to_seed(key, val);
      else if (key == "t_end") cfg.t_end = to_double(key, val);
      else if (key == "temperatures") cfg.temperatures = parse_temperature_field(key, val);
      else if (key == "input") cfg.data_input = val;
      else throw ConfigError("unknown key '" + key + "' in [data]");
    } else if (section == "net") {
      if (key == "hidden") cfg.hidden = to_int_list(key, val);
      else if (key == "sub_hidden") cfg.sub_hidden = to_int_list(key, val);
      else throw ConfigError("unknown key '" + key + "' in [net]");
    } else if (section == "train") {
      if (key == "iterations") cfg.train.iterations = to_long(key, val);
      else if (key == "lr0") cfg.train.lr0 = to_double(key, val);
      else if (key == "decay_factor") cfg.train.decay_factor = to_double(key, val);
      else if (key == "decay_every") cfg.train.decay_every = to_long(key, val);
      else if (key == "collocation") cfg.train.collocation = to_long(key, val);
      else if (key == "log_every") cfg.train.log_every = to_long(key, val);
      else if (key == "seed") cfg.train.seed = to_seed(key, val);
      else if (key == "data_weight") cfg.weights.data_w = to_double(key, val);
      else if (key == "physics_weight") cfg.weights.physics_w = to_double(key, val);
      else if (key == "ic_weight") cfg.weights.ic_w = to_double(key, val);
      else if (key == "backend") {
        if (val == "auto") cfg.train.backend = kern::Backend::Auto;
        else if (val == "scalar") cfg.train.backend = kern::Backend::Scalar;
        else if (val == "simd") cfg.train.backend = kern::Backend::Simd;
        else if (val == "tape") cfg.train.use_tape = true;
        else throw ConfigError("unknown backend '" + val + "'");
      }
      else throw ConfigError("unknown key '" + key + "' in [train]");
    } else if (section == "baseline") {
      if (key == "max_iters") cfg.baseline.max_iters = static_cast<int>(to_long(key, val));
      else if (key == "multistart") cfg.baseline.multistart = static_cast<int>(to_long(key, val));
      else if (key == "lambda0") cfg.baseline.lambda0 = to_double(key, val);
      else if (key == "tol") cfg.baseline.tol = to_double(key, val);
      else if (key == "seed") cfg.baseline.seed = to_seed(key, val);
      else throw ConfigError("unknown key '" + key + "' in [baseline]");
    } else {
      throw ConfigError("key '" + key + "' outside any section");
    }
  }
  if (!mode_set) throw ConfigError("config must set [experiment] mode");
  if (has_ecm) cfg.ecm = ecm;
  if (has_tecm) cfg.temp_ecm = tecm;
  return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse_config_text(ss.str());
}

}  // namespace rcpinn
