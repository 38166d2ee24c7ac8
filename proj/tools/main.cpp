// Command-line front end: config-driven experiment runner plus small report
// comparison and SVG plotting helpers.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rcpinn/config.hpp"
#include "rcpinn/csvio.hpp"
#include "rcpinn/errors.hpp"
#include "rcpinn/report.hpp"
#include "rcpinn/runner.hpp"

namespace {

using namespace rcpinn;

int cmd_run(const std::string& config_path, const std::string& out_override,
            long long seed_override, bool quiet) {
  ExperimentConfig cfg = parse_config_file(config_path);
  if (!out_override.empty()) cfg.output_dir = out_override;
  if (seed_override >= 0) {
    cfg.data_seed = static_cast<std::uint64_t>(seed_override);
    cfg.train.seed = static_cast<std::uint64_t>(seed_override);
  }
  run_experiment(cfg, quiet);
  if (!quiet) std::cout << "artifacts written to " << cfg.output_dir << "\n";
  return kOk;
}

int cmd_compare(const std::string& path_a, const std::string& path_b, double threshold) {
  const FitReport a = FitReport::load(path_a);
  const FitReport b = FitReport::load(path_b);
  const auto rows = compare_reports(a, b, threshold);
  std::printf("%-10s %16s %16s %12s\n", "param", "a", "b", "rel_diff");
  bool any_flagged = false;
  for (const auto& r : rows) {
    std::printf("%-10s %16.8g %16.8g %11.4g%%%s\n", r.name.c_str(), r.a, r.b, 100.0 * r.rel_diff,
                r.flagged ? "  <-- exceeds threshold" : "");
    any_flagged = any_flagged || r.flagged;
  }
  if (any_flagged)
    std::printf("(threshold %.4g%% exceeded on at least one parameter)\n", 100.0 * threshold);
  return kOk;
}

// minimal standalone SVG line chart from CSV columns
int cmd_plot(const std::string& csv_path, const std::string& x_col,
             std::vector<std::string> y_cols, const std::string& out_path) {
  auto is = open_in(csv_path);
  std::string line;
  if (!std::getline(is, line)) throw IoError("empty csv: " + csv_path);
  const auto header = split(trim(line), ',');
  auto col_index = [&](const std::string& name) -> std::size_t {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    throw IoError("column '" + name + "' not in " + csv_path);
  };
  const std::size_t xi = col_index(x_col);
  if (y_cols.empty())
    for (std::size_t i = 0; i < header.size(); ++i)
      if (i != xi) y_cols.push_back(header[i]);
  std::vector<std::size_t> yis;
  for (const auto& y : y_cols) yis.push_back(col_index(y));

  std::vector<double> xs;
  std::vector<std::vector<double>> ys(yis.size());
  while (std::getline(is, line)) {
    if (trim(line).empty()) continue;
    const auto cols = split(line, ',');
    xs.push_back(std::stod(cols[xi]));
    for (std::size_t k = 0; k < yis.size(); ++k) {
      const std::string& cell = cols[yis[k]];
      ys[k].push_back(trim(cell).empty() ? std::nan("") : std::stod(cell));
    }
  }
  if (xs.empty()) throw IoError("no data rows in " + csv_path);

  double xlo = xs[0], xhi = xs[0], ylo = 0, yhi = 0;
  bool y_init = false;
  for (double x : xs) {
    xlo = std::min(xlo, x);
    xhi = std::max(xhi, x);
  }
  for (const auto& col : ys)
    for (double v : col) {
      if (std::isnan(v)) continue;
      if (!y_init) {
        ylo = yhi = v;
        y_init = true;
      }
      ylo = std::min(ylo, v);
      yhi = std::max(yhi, v);
    }
  if (xhi == xlo) xhi = xlo + 1;
  if (yhi == ylo) yhi = ylo + 1;

  const double W = 720, H = 480, M = 50;
  auto sx = [&](double x) { return M + (x - xlo) / (xhi - xlo) * (W - 2 * M); };
  auto sy = [&](double y) { return H - M - (y - ylo) / (yhi - ylo) * (H - 2 * M); };
  const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

  auto os = open_out(out_path);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
     << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<line x1=\"" << M << "\" y1=\"" << H - M << "\" x2=\"" << W - M << "\" y2=\"" << H - M
     << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << M << "\" y1=\"" << M << "\" x2=\"" << M << "\" y2=\"" << H - M
     << "\" stroke=\"black\"/>\n";
  for (std::size_t k = 0; k < ys.size(); ++k) {
    os << "<polyline fill=\"none\" stroke=\"" << colors[k % 6] << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (std::isnan(ys[k][i])) continue;
      os << sx(xs[i]) << "," << sy(ys[k][i]) << " ";
    }
    os << "\"/>\n";
    os << "<text x=\"" << W - M + 4 << "\" y=\"" << M + 16 * static_cast<double>(k)
       << "\" font-size=\"11\" fill=\"" << colors[k % 6] << "\">" << y_cols[k] << "</text>\n";
  }
  os << "<text x=\"" << W / 2 << "\" y=\"" << H - 12 << "\" font-size=\"12\" text-anchor=\"middle\">"
     << x_col << "</text>\n";
  os << "</svg>\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"inverse modeling of time-domain dielectric relaxation with "
               "physics-informed networks"};
  app.require_subcommand(1);

  std::string config_path, out_override, report_a, report_b;
  std::string csv_path, x_col = "t", svg_out = "plot.svg";
  std::vector<std::string> y_cols;
  long long seed_override = -1;
  bool quiet = false;
  double threshold = 0.10;

  auto* run = app.add_subcommand("run", "run the experiment described by a config file");
  run->add_option("--config", config_path, "config file path")->required();
  run->add_option("--seed", seed_override, "override data and training seeds");
  run->add_option("--out", out_override, "override the output directory");
  run->add_flag("--quiet", quiet, "suppress progress output");

  auto* cmp = app.add_subcommand("compare", "parameter-wise comparison of two fit reports");
  cmp->add_option("report_a", report_a)->required();
  cmp->add_option("report_b", report_b)->required();
  cmp->add_option("--threshold", threshold, "flag relative differences above this (default 0.10)");

  auto* plot = app.add_subcommand("plot", "render CSV columns as a standalone SVG line chart");
  plot->add_option("csv", csv_path)->required();
  plot->add_option("--x", x_col, "x column name (default t)");
  plot->add_option("--y", y_cols, "y column names (default: all others)");
  plot->add_option("-o,--out", svg_out, "output SVG path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(config_path, out_override, seed_override, quiet);
    if (cmp->parsed()) return cmd_compare(report_a, report_b, threshold);
    if (plot->parsed()) return cmd_plot(csv_path, x_col, y_cols, svg_out);
  } catch (const rcpinn::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return rcpinn::kConfigError;
  } catch (const rcpinn::TrainingAborted& e) {
    std::cerr << "training aborted: " << e.what() << "\n";
    return rcpinn::kTrainingAborted;
  } catch (const rcpinn::IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return rcpinn::kIoError;
  } catch (const rcpinn::CompareError& e) {
    std::cerr << "compare error: " << e.what() << "\n";
    return rcpinn::kCompareError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return rcpinn::kInternalError;
  }
  return rcpinn::kInternalError;
}
