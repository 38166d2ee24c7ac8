#include "rcpinn/report.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "rcpinn/csvio.hpp"
#include "rcpinn/errors.hpp"

namespace rcpinn {

std::vector<ParamValue> FitReport::relative_errors() const {
  std::vector<ParamValue> out;
  for (const auto& p : params) {
    for (const auto& t : truth) {
      if (t.name == p.name) {
        out.push_back({p.name, std::abs(p.value - t.value) / std::abs(t.value)});
        break;
      }
    }
  }
  return out;
}

std::string FitReport::serialize() const {
  std::ostringstream os;
  os << "method = " << method << "\n";
  os << "variant = " << variant << "\n";
  os << "data_seed = " << data_seed << "\n";
  os << "train_seed = " << train_seed << "\n";
  for (const auto& p : params) os << "param." << p.name << " = " << fmt17(p.value) << "\n";
  for (const auto& t : truth) os << "true." << t.name << " = " << fmt17(t.value) << "\n";
  for (const auto& e : relative_errors())
    os << "relerr." << e.name << " = " << fmt17(e.value) << "\n";
  os << "loss.data = " << fmt17(loss_data) << "\n";
  os << "loss.phys = " << fmt17(loss_phys) << "\n";
  os << "loss.ic = " << fmt17(loss_ic) << "\n";
  os << "residual_norm = " << fmt17(residual_norm) << "\n";
  os << "ill_conditioned = " << (ill_conditioned ? 1 : 0) << "\n";
  for (const auto& [k, v] : config_echo) os << "cfg." << k << " = " << v << "\n";
  os << "wallclock_s = " << fmt17(wallclock_s) << "\n";
  for (const auto& [k, v] : checkpoint) os << "checkpoint." << k << " = " << fmt17(v) << "\n";
  return os.str();
}

void FitReport::save(const std::string& path) const {
  auto os = open_out(path);
  os << serialize();
}

FitReport FitReport::load(const std::string& path) {
  auto is = open_in(path);
  FitReport r;
  std::string line;
  while (std::getline(is, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto pos = line.find('=');
    if (pos == std::string::npos) throw IoError("bad report line: " + line);
    const std::string key = trim(line.substr(0, pos));
    const std::string val = trim(line.substr(pos + 1));
    if (key == "method") r.method = val;
    else if (key == "variant") r.variant = val;
    else if (key == "data_seed") r.data_seed = std::stoull(val);
    else if (key == "train_seed") r.train_seed = std::stoull(val);
    else if (key.rfind("param.", 0) == 0) r.params.push_back({key.substr(6), std::stod(val)});
    else if (key.rfind("true.", 0) == 0) r.truth.push_back({key.substr(5), std::stod(val)});
    else if (key.rfind("relerr.", 0) == 0) continue;  // derived on save
    else if (key == "loss.data") r.loss_data = std::stod(val);
    else if (key == "loss.phys") r.loss_phys = std::stod(val);
    else if (key == "loss.ic") r.loss_ic = std::stod(val);
    else if (key == "residual_norm") r.residual_norm = std::stod(val);
    else if (key == "ill_conditioned") r.ill_conditioned = val == "1";
    else if (key.rfind("cfg.", 0) == 0) r.config_echo.push_back({key.substr(4), val});
    else if (key == "wallclock_s") r.wallclock_s = std::stod(val);
    else if (key.rfind("checkpoint.", 0) == 0)
      r.checkpoint.push_back({key.substr(11), std::stod(val)});
    else throw IoError("unknown report key: " + key);
  }
  return r;
}

bool reports_equal_ignoring_volatile(const std::string& text_a, const std::string& text_b) {
  auto filter = [](const std::string& text) {
    std::istringstream is(text);
    std::string line, out;
    while (std::getline(is, line))
      if (line.rfind("wallclock_s", 0) != 0) out += line + "\n";
    return out;
  };
  return filter(text_a) == filter(text_b);
}

std::vector<CompareRow> compare_reports(const FitReport& a, const FitReport& b,
                                        double threshold) {
  std::map<std::string, double> bm;
  for (const auto& p : b.params) bm[p.name] = p.value;
  if (a.params.size() != b.params.size())
    throw CompareError("reports have different parameter counts");
  std::vector<CompareRow> rows;
  for (const auto& p : a.params) {
    const auto it = bm.find(p.name);
    if (it == bm.end()) throw CompareError("parameter " + p.name + " missing from second report");
    CompareRow row;
    row.name = p.name;
    row.a = p.value;
    row.b = it->second;
    const double base = std::max(std::abs(row.a), std::abs(row.b));
    row.rel_diff = base > 0.0 ? std::abs(row.a - row.b) / base : 0.0;
    row.flagged = row.rel_diff > threshold;
    rows.push_back(row);
  }
  return rows;
}

std::vector<ParamValue> canonical_params(const EcmSpec& spec) {
  std::vector<ParamValue> out;
  out.push_back({"R0", spec.r0});
  std::vector<RcBranch> sorted = spec.branches;
  std::sort(sorted.begin(), sorted.end(),
            [](const RcBranch& a, const RcBranch& b) { return a.tau() < b.tau(); });
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    out.push_back({"C" + std::to_string(i + 1), sorted[i].capacitance});
    out.push_back({"R" + std::to_string(i + 1), sorted[i].resistance});
  }
  return out;
}

std::vector<ParamValue> canonical_params(const TempEcmSpec& tspec) {
  std::vector<ParamValue> out;
  for (std::size_t i = 0; i < tspec.branch_laws.size(); ++i)
    out.push_back({"scale_" + std::to_string(i + 1), tspec.branch_laws[i].law.a / tspec.r0_law.a});
  for (std::size_t i = 0; i < tspec.branch_laws.size(); ++i)
    out.push_back({"C" + std::to_string(i + 1), tspec.branch_laws[i].capacitance});
  return out;
}

}  // namespace rcpinn
