#include "rcpinn/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "rcpinn/csvio.hpp"
#include "rcpinn/rng.hpp"

namespace rcpinn {

namespace {

std::vector<double> uniform_grid(int n, double t_end) {
  std::vector<double> t(n);
  for (int i = 0; i < n; ++i) t[i] = t_end * static_cast<double>(i) / (n - 1);
  return t;
}

NormalizationInfo compute_norm(const Dataset& ds) {
  NormalizationInfo norm;
  norm.t_scale = ds.t_end;
  double max_i = 0.0;
  for (const auto& s : ds.samples) max_i = std::max(max_i, std::abs(s.current));
  norm.current_scale = max_i > 0.0 ? max_i : 1.0;
  if (ds.is_temperature()) {
    const auto [lo, hi] = std::minmax_element(ds.temperatures.begin(), ds.temperatures.end());
    if (*hi > *lo) {
      norm.temp_offset = 0.5 * (*hi + *lo);
      norm.temp_scale = 0.5 * (*hi - *lo);
    } else {
      norm.temp_offset = *lo;  // degenerate sweep: channel pinned to 0
      norm.temp_scale = 1.0;
    }
  }
  return norm;
}

}  // namespace

Dataset generate_static(const EcmSpec& spec, int n_samples, double sigma, std::uint64_t seed,
                        std::optional<double> t_end) {
  spec.validate();
  if (n_samples < 2) throw std::invalid_argument("generate_static: n_samples must be >= 2");
  if (!t_end && spec.branches.empty())
    throw std::invalid_argument("generate_static: t_end required for a branch-free spec");
  const double te = t_end ? *t_end : 5.0 * spec.max_tau();
  if (!(te > 0.0)) throw std::invalid_argument("generate_static: t_end must be > 0");

  Dataset ds;
  ds.sigma = sigma;
  ds.seed = seed;
  ds.t_end = te;
  ds.static_spec = spec;

  Xoshiro256 rng(substream_seed(seed, 0));
  for (double t : uniform_grid(n_samples, te)) {
    double i = total_current(spec, t);
    if (sigma > 0.0) i += sigma * rng.normal();
    ds.samples.push_back({t, std::nullopt, i});
  }
  ds.norm = compute_norm(ds);
  return ds;
}

Dataset generate_temperature(const TempEcmSpec& tspec, const std::vector<double>& temperatures,
                             int n_per_temp, double sigma, std::uint64_t seed,
                             std::optional<double> t_end) {
  if (temperatures.empty())
    throw std::invalid_argument("generate_temperature: temperature list is empty");
  if (n_per_temp < 2) throw std::invalid_argument("generate_temperature: n_per_temp must be >= 2");
  for (double T : temperatures)
    if (!(T > 0.0)) throw std::invalid_argument("generate_temperature: temperatures must be > 0");

  double max_tau = 0.0;
  for (double T : temperatures) max_tau = std::max(max_tau, materialize(tspec, T).max_tau());
  const double te = t_end ? *t_end : 5.0 * max_tau;
  if (!(te > 0.0)) throw std::invalid_argument("generate_temperature: t_end must be > 0");

  Dataset ds;
  ds.sigma = sigma;
  ds.seed = seed;
  ds.t_end = te;
  ds.temp_spec = tspec;
  ds.temperatures = temperatures;

  const auto grid = uniform_grid(n_per_temp, te);
  for (std::size_t q = 0; q < temperatures.size(); ++q) {
    const EcmSpec spec = materialize(tspec, temperatures[q]);
    Xoshiro256 rng(substream_seed(seed, q));
    for (double t : grid) {
      double i = total_current(spec, t);
      // noiseless current is >= u_dc/r0 > 0, so sigma/i is always defined
      if (sigma > 0.0) i += (sigma / i) * rng.normal();
      ds.samples.push_back({t, temperatures[q], i});
    }
  }
  ds.norm = compute_norm(ds);
  return ds;
}

std::pair<Dataset, NormalizationInfo> normalize(const Dataset& ds) {
  if (ds.samples.empty()) throw std::invalid_argument("normalize: empty dataset");
  const NormalizationInfo norm = ds.norm.current_scale > 0.0 ? ds.norm : compute_norm(ds);
  // GCC 11 reports a spurious maybe-uninitialized on this copy (optional
  // payload analysis); the source object is fully formed
#pragma GCC diagnostic push
#pragma GCC diagnostic ignored "-Wmaybe-uninitialized"
  Dataset out = ds;
#pragma GCC diagnostic pop
  for (auto& s : out.samples) {
    s.t = norm.norm_t(s.t);
    s.current = norm.norm_current(s.current);
    if (s.temperature) s.temperature = norm.norm_temp(*s.temperature);
  }
  return {std::move(out), norm};
}

namespace {

std::string branches_to_string(const std::vector<RcBranch>& branches) {
  std::string s;
  for (std::size_t i = 0; i < branches.size(); ++i) {
    if (i) s += ", ";
    s += fmt17(branches[i].resistance) + ":" + fmt17(branches[i].capacitance);
  }
  return s;
}

std::string laws_to_string(const std::vector<TempEcmSpec::BranchLaw>& laws) {
  std::string s;
  for (std::size_t i = 0; i < laws.size(); ++i) {
    if (i) s += ", ";
    s += fmt17(laws[i].law.a) + ":" + fmt17(laws[i].law.w) + ":" + fmt17(laws[i].capacitance);
  }
  return s;
}

void write_meta(const Dataset& ds, const std::string& path) {
  auto os = open_out(path);
  os << "kind = " << (ds.is_temperature() ? "temperature" : "static") << "\n";
  os << "sigma = " << fmt17(ds.sigma) << "\n";
  os << "seed = " << ds.seed << "\n";
  os << "t_end = " << fmt17(ds.t_end) << "\n";
  os << "norm.t_scale = " << fmt17(ds.norm.t_scale) << "\n";
  os << "norm.temp_offset = " << fmt17(ds.norm.temp_offset) << "\n";
  os << "norm.temp_scale = " << fmt17(ds.norm.temp_scale) << "\n";
  os << "norm.current_scale = " << fmt17(ds.norm.current_scale) << "\n";
  if (ds.static_spec) {
    os << "ecm.r0 = " << fmt17(ds.static_spec->r0) << "\n";
    os << "ecm.u_dc = " << fmt17(ds.static_spec->u_dc) << "\n";
    os << "ecm.branches = " << branches_to_string(ds.static_spec->branches) << "\n";
  }
  if (ds.temp_spec) {
    os << "ecm.u_dc = " << fmt17(ds.temp_spec->u_dc) << "\n";
    os << "ecm.r0_law = " << fmt17(ds.temp_spec->r0_law.a) << ":" << fmt17(ds.temp_spec->r0_law.w)
       << "\n";
    os << "ecm.branch_laws = " << laws_to_string(ds.temp_spec->branch_laws) << "\n";
  }
  if (!ds.temperatures.empty()) {
    os << "temperatures = ";
    for (std::size_t i = 0; i < ds.temperatures.size(); ++i)
      os << (i ? ", " : "") << fmt17(ds.temperatures[i]);
    os << "\n";
  }
}

std::vector<RcBranch> parse_branches(const std::string& s) {
  std::vector<RcBranch> out;
  if (trim(s).empty()) return out;
  for (const auto& item : split(s, ',')) {
    const auto parts = split(trim(item), ':');
    if (parts.size() != 2) throw IoError("bad branch entry: " + item);
    out.push_back({std::stod(parts[0]), std::stod(parts[1])});
  }
  return out;
}

std::vector<TempEcmSpec::BranchLaw> parse_laws(const std::string& s) {
  std::vector<TempEcmSpec::BranchLaw> out;
  if (trim(s).empty()) return out;
  for (const auto& item : split(s, ',')) {
    const auto parts = split(trim(item), ':');
    if (parts.size() != 3) throw IoError("bad branch law entry: " + item);
    out.push_back({{std::stod(parts[0]), std::stod(parts[1])}, std::stod(parts[2])});
  }
  return out;
}

}  // namespace

void save_dataset(const Dataset& ds, const std::string& path) {
  auto os = open_out(path);
  os << "t,temperature,current\n";
  for (const auto& s : ds.samples) {
    os << fmt17(s.t) << ",";
    if (s.temperature) os << fmt17(*s.temperature);
    os << "," << fmt17(s.current) << "\n";
  }
  write_meta(ds, path + ".meta");
}

Dataset load_dataset(const std::string& path) {
  Dataset ds;
  {
    auto is = open_in(path);
    std::string line;
    if (!std::getline(is, line) || trim(line) != "t,temperature,current")
      throw IoError("bad dataset header in " + path);
    while (std::getline(is, line)) {
      if (trim(line).empty()) continue;
      const auto cols = split(line, ',');
      if (cols.size() != 3) throw IoError("bad dataset row in " + path + ": " + line);
      Sample s;
      s.t = std::stod(cols[0]);
      if (!trim(cols[1]).empty()) s.temperature = std::stod(cols[1]);
      s.current = std::stod(cols[2]);
      ds.samples.push_back(s);
    }
  }
  auto is = open_in(path + ".meta");
  std::string line, kind;
  EcmSpec sspec;
  TempEcmSpec tspec;
  bool has_static = false, has_temp = false;
  while (std::getline(is, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto pos = line.find('=');
    if (pos == std::string::npos) throw IoError("bad metadata line: " + line);
    const std::string key = trim(line.substr(0, pos));
    const std::string val = trim(line.substr(pos + 1));
    if (key == "kind") {
      kind = val;
    } else if (key == "sigma") {
      ds.sigma = std::stod(val);
    } else if (key == "seed") {
      ds.seed = std::stoull(val);
    } else if (key == "t_end") {
      ds.t_end = std::stod(val);
    } else if (key == "norm.t_scale") {
      ds.norm.t_scale = std::stod(val);
    } else if (key == "norm.temp_offset") {
      ds.norm.temp_offset = std::stod(val);
    } else if (key == "norm.temp_scale") {
      ds.norm.temp_scale = std::stod(val);
    } else if (key == "norm.current_scale") {
      ds.norm.current_scale = std::stod(val);
    } else if (key == "ecm.r0") {
      sspec.r0 = std::stod(val);
      has_static = true;
    } else if (key == "ecm.u_dc") {
      sspec.u_dc = std::stod(val);
      tspec.u_dc = std::stod(val);
    } else if (key == "ecm.branches") {
      sspec.branches = parse_branches(val);
    } else if (key == "ecm.r0_law") {
      const auto parts = split(val, ':');
      if (parts.size() != 2) throw IoError("bad r0_law: " + val);
      tspec.r0_law = {std::stod(parts[0]), std::stod(parts[1])};
      has_temp = true;
    } else if (key == "ecm.branch_laws") {
      tspec.branch_laws = parse_laws(val);
    } else if (key == "temperatures") {
      for (const auto& item : split(val, ',')) ds.temperatures.push_back(std::stod(trim(item)));
    } else {
      throw IoError("unknown metadata key: " + key);
    }
  }
  if (has_static) ds.static_spec = sspec;
  if (has_temp) ds.temp_spec = tspec;
  if (kind == "temperature" && ds.temperatures.empty())
    throw IoError("temperature dataset missing temperature list: " + path);
  return ds;
}

}  // namespace rcpinn
