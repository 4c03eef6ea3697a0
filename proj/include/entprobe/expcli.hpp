#pragma once

// Scenario-driven runner: each scenario wires the device model, schedule,
// propagation, measures and (optionally) the tomography pipeline end-to-end
// and emits plot-ready CSV/JSON files.
//
// Time convention: Bell preparation (when simulated explicitly) occupies
// negative times and the analysis window starts at t = 0; report scalars and
// decay/N fits are computed on the t >= 0 part of the trajectory.

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>

#include "entprobe/dynamics.hpp"
#include "entprobe/measures.hpp"
#include "entprobe/tomography.hpp"

namespace entprobe {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class MeasurementMode { ExactState, Tomography };

struct MeasurementConfig {
  MeasurementMode mode = MeasurementMode::ExactState;
  long shots = 5000;
  std::uint64_t seed = 1;
};

struct SweepConfig {
  std::string axis;  // gamma | a_in | omega | shots
  std::vector<double> values;
};

struct ScenarioConfig {
  std::string scenario;  // chevron | bell_prep | free_decay | revival |
                         // dephasing_sweep | zeno_sweep
  std::uint64_t seed = 1;
  std::string out_dir = ".";
  SystemSpec system = device_spec();

  double duration = 10.0;        // analysis window, us
  double record_every_us = 0.05;
  double gamma = 0.0;            // engineered Environment dephasing, 1/us
  double omega_qa = kOmegaQA;
  double omega_qe = kOmegaQE;
  double gate_time = 0.530;      // Bell-prep half-swap, us
  std::string prep = "explicit"; // explicit | ideal
  bool intrinsic = true;         // intrinsic T1/T2* channels active
  bool dephasing_only = false;   // drop T1 channels (pure-dephasing model)

  double detuning_max_mhz = 1.5;   // chevron grid half-width
  double detuning_step_mhz = 0.05;

  MeasurementConfig measurement;
  SweepConfig sweep;
  IntegratorConfig integrator;

  void validate() const;
};

// Parse + validate a config document; `overrides` are dotted-path key=value
// assignments (e.g. "schedule.gamma=3.0") applied before parsing.
ScenarioConfig config_from_json_text(const std::string& text,
                                     const std::vector<std::string>& overrides = {});
ScenarioConfig load_config(const std::string& path,
                           const std::vector<std::string>& overrides = {});

// Fully-resolved config echo (defaults filled in), serialized as JSON.
std::string resolved_config_json(const ScenarioConfig& cfg);

struct RunReport {
  std::string scenario;
  std::uint64_t seed = 0;
  std::map<std::string, double> scalars;
  std::vector<std::string> files;  // relative to out_dir
  std::string config_echo;         // resolved config JSON
};

// Execute one scenario end-to-end and write its outputs into cfg.out_dir.
// Sweep scenarios delegate to run_sweep and return the aggregate report.
RunReport run_scenario(const ScenarioConfig& cfg, int jobs = 1);

// Independent runs per sweep value (value order preserved regardless of
// jobs); writes per-value outputs plus aggregated sweep.csv/summary.json.
std::vector<RunReport> run_sweep(const ScenarioConfig& cfg, int jobs = 1);

// Default grid for dephasing_sweep: 16 log-spaced gamma in [0.05, 8] 1/us.
std::vector<double> default_gamma_grid();

// Order-independent per-value seed stream (splitmix64).
std::uint64_t derived_seed(std::uint64_t base, std::uint64_t index);

// Concurrence-vs-time restricted to the analysis window (t >= 0).
ConcurrenceSeries analysis_series(const Trajectory& traj);

}  // namespace entprobe
