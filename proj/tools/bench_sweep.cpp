// Benchmark: the dephasing sweep run serially (reference path) versus with
// the OpenMP worker pool, verifying that both produce identical results.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <vector>

#include <CLI11.hpp>

#include "entprobe/expcli.hpp"
#include "entprobe/parallel.hpp"

namespace fs = std::filesystem;
using namespace entprobe;

namespace {

double timed_sweep(const ScenarioConfig& cfg, int jobs, std::vector<RunReport>& out) {
  const auto start = std::chrono::steady_clock::now();
  out = run_sweep(cfg, jobs);
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

bool reports_identical(const std::vector<RunReport>& a, const std::vector<RunReport>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].scalars.size() != b[i].scalars.size()) return false;
    for (const auto& [key, value] : a[i].scalars) {
      const auto it = b[i].scalars.find(key);
      if (it == b[i].scalars.end() || it->second != value) return false;
    }
  }
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bench_sweep: serial vs parallel dephasing-sweep benchmark"};
  int n_values = 8;
  int jobs = hardware_jobs();
  double duration = 5.0;
  app.add_option("--values", n_values, "number of gamma values")->check(CLI::PositiveNumber);
  app.add_option("--jobs", jobs, "parallel worker count")->check(CLI::PositiveNumber);
  app.add_option("--duration", duration, "analysis window per run, us");
  CLI11_PARSE(app, argc, argv);

  ScenarioConfig cfg;
  cfg.scenario = "dephasing_sweep";
  cfg.duration = duration;
  cfg.sweep.axis = "gamma";
  cfg.sweep.values.clear();
  for (int i = 0; i < n_values; ++i) {
    const double frac = n_values == 1 ? 0.0 : static_cast<double>(i) / (n_values - 1);
    cfg.sweep.values.push_back(0.05 * std::pow(8.0 / 0.05, frac));
  }

  const fs::path base = fs::temp_directory_path() / "entprobe_bench";
  fs::remove_all(base);

  std::vector<RunReport> serial, parallel;
  cfg.out_dir = (base / "serial").string();
  const double t_serial = timed_sweep(cfg, 1, serial);
  cfg.out_dir = (base / "parallel").string();
  const double t_parallel = timed_sweep(cfg, jobs, parallel);

  const bool identical = reports_identical(serial, parallel);
  std::printf("runs: %d (%.1f us window each)\n", n_values, duration);
  std::printf("serial:          %8.3f s\n", t_serial);
  std::printf("parallel (%2d):   %8.3f s\n", jobs, t_parallel);
  std::printf("speedup:         %8.2fx\n", t_parallel > 0 ? t_serial / t_parallel : 0.0);
  std::printf("results match:   %s\n", identical ? "yes" : "NO");

  fs::remove_all(base);
  return identical ? 0 : 1;
}
