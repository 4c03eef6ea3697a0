#include "entprobe/expcli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "entprobe/parallel.hpp"

namespace entprobe {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::set<std::string> kScenarios = {"chevron",  "bell_prep",       "free_decay",
                                          "revival", "dephasing_sweep", "zeno_sweep"};
const std::set<std::string> kSweepAxes = {"gamma", "a_in", "omega", "shots"};

[[noreturn]] void fail(const std::string& msg) { throw ConfigError(msg); }

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [key, value] : obj.items())
    if (!allowed.count(key)) fail("unknown key \"" + key + "\" in " + where);
}

double get_number(const json& obj, const std::string& key, double fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number()) fail("\"" + key + "\" must be a number");
  return v.get<double>();
}

bool get_bool(const json& obj, const std::string& key, bool fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_boolean()) fail("\"" + key + "\" must be a boolean");
  return v.get<bool>();
}

std::string get_string(const json& obj, const std::string& key, const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_string()) fail("\"" + key + "\" must be a string");
  return v.get<std::string>();
}

std::uint64_t get_seed(const json& obj, const std::string& key, std::uint64_t fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0)
    fail("\"" + key + "\" must be a non-negative integer");
  return v.get<std::uint64_t>();
}

void format_number(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  out += buf;
}

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << text;
}

bool is_sweep_scenario(const std::string& name) {
  return name == "dephasing_sweep" || name == "zeno_sweep";
}

// Scenarios whose analysis window is the Qubit-Environment exchange stage.
bool is_revival_like(const std::string& name) {
  return name == "revival" || is_sweep_scenario(name);
}

struct SimResult {
  Trajectory traj;
  std::size_t analysis_start = 0;  // index of the t = 0 sample
};

SimResult simulate(const ScenarioConfig& cfg) {
  SystemSpec sys = cfg.system;
  if (cfg.dephasing_only)
    for (auto& q : sys.qubits) q.t1 = INFINITY;

  const int dim = sys.layout.dim();
  StageSchedule sched;
  Mat rho0;
  double shift = 0.0;

  if (cfg.prep == "explicit") {
    Stage prep;
    prep.duration = cfg.gate_time;
    prep.gates = {{"Qubit", 'x', M_PI}};
    prep.couplings = {{"Ancilla", "Qubit", cfg.omega_qa, 0.0}};
    prep.intrinsic_on = cfg.intrinsic;
    sched.stages.push_back(prep);
    shift = cfg.gate_time;
    rho0 = Mat::Zero(dim, dim);
    rho0(0, 0) = 1.0;
  } else {
    Mat ground_e = Mat::Zero(2, 2);
    ground_e(0, 0) = 1.0;
    rho0 = kron(bell_state(M_PI / 2), ground_e);
  }

  if (cfg.scenario == "free_decay") {
    Stage idle;
    idle.duration = cfg.duration;
    idle.intrinsic_on = cfg.intrinsic;
    sched.stages.push_back(idle);
  } else if (is_revival_like(cfg.scenario)) {
    Stage exchange;
    exchange.duration = cfg.duration;
    exchange.couplings = {{"Qubit", "Environment", cfg.omega_qe, 0.0}};
    if (cfg.gamma > 0.0) exchange.engineered = {{"Environment", cfg.gamma}};
    exchange.intrinsic_on = cfg.intrinsic;
    sched.stages.push_back(exchange);
  }
  // bell_prep: the preparation stage is the whole run.

  IntegratorConfig integ = cfg.integrator;
  integ.record_every =
      static_cast<int>(std::lround(cfg.record_every_us / integ.step));

  SimResult result;
  result.traj = evolve_schedule(rho0, sys, sched, integ);
  for (double& t : result.traj.times) t -= shift;
  const auto& times = result.traj.times;
  result.analysis_start = times.size();
  for (std::size_t i = 0; i < times.size(); ++i)
    if (times[i] >= -1e-9) {
      result.analysis_start = i;
      break;
    }
  if (result.analysis_start == times.size())
    throw std::logic_error("trajectory has no analysis sample");
  return result;
}

Mat reduced_aq(const Mat& state, const SubsystemLayout& layout) {
  return partial_trace(state, layout, {0, 1});
}

// Measured columns for the trajectory CSV; identical to the exact state in
// exact mode, reconstructed through the shot pipeline in tomography mode.
struct MeasuredSeries {
  std::vector<double> concurrence;
  std::vector<double> z_a;
  std::vector<double> z_q;
  double epsilon = 0.0;  // tomography mode: 2x bootstrap SE of C(t0)
};

std::vector<MeasurementRecord> sample_records(const Mat& rho_aq, const ReadoutModel& model,
                                              long shots, std::uint64_t row_seed) {
  std::vector<MeasurementRecord> records;
  std::uint64_t k = 0;
  for (const auto& setting : all_settings()) {
    MeasurementRecord rec;
    rec.setting = setting;
    const auto biased = apply_readout_confusion(ideal_probabilities(rho_aq, setting), model);
    const auto counts = sample_counts(biased, shots, derived_seed(row_seed, k++));
    for (int j = 0; j < 4; ++j) rec.counts[j] = static_cast<double>(counts[j]);
    records.push_back(rec);
  }
  return records;
}

double excited_population(const Mat& rho_aq, int which) {
  const Mat z = which == 0 ? pauli_operator(3, 0) : pauli_operator(0, 3);
  return 0.5 * (1.0 - (z * rho_aq).trace().real());
}

MeasuredSeries measure_trajectory(const ScenarioConfig& cfg, const SimResult& sim, int jobs) {
  const auto& traj = sim.traj;
  const std::size_t n = traj.states.size();
  MeasuredSeries out;
  out.concurrence.resize(n);
  out.z_a.resize(n);
  out.z_q.resize(n);

  if (cfg.measurement.mode == MeasurementMode::ExactState) {
    for (std::size_t i = 0; i < n; ++i) {
      const Mat rho_aq = reduced_aq(traj.states[i], cfg.system.layout);
      out.concurrence[i] = concurrence(rho_aq);
      out.z_a[i] = excited_population(rho_aq, 0);
      out.z_q[i] = excited_population(rho_aq, 1);
    }
    return out;
  }

  const ReadoutModel model{cfg.system.qubit("Ancilla").readout_fidelity,
                           cfg.system.qubit("Qubit").readout_fidelity};
  const long shots = cfg.measurement.shots;
  const std::uint64_t base = cfg.measurement.seed;

  parallel_for(static_cast<int>(n), jobs, [&](int i) {
    const Mat rho_aq = reduced_aq(traj.states[i], cfg.system.layout);
    const auto records = sample_records(rho_aq, model, shots, derived_seed(base, i));
    const auto [hat, diag] = mle_reconstruct(records);
    out.concurrence[i] = concurrence(hat);
    out.z_a[i] = excited_population(hat, 0);
    out.z_q[i] = excited_population(hat, 1);
  });

  // Shot-noise scale of the concurrence estimate at the start of the
  // analysis window, from a multinomial bootstrap of that point's counts.
  const std::size_t i0 = sim.analysis_start;
  const Mat rho_aq = reduced_aq(traj.states[i0], cfg.system.layout);
  const auto records = sample_records(rho_aq, model, shots, derived_seed(base, i0));
  const int n_boot = 32;
  std::vector<double> draws(n_boot);
  const std::uint64_t boot_base = derived_seed(base, 1u << 20);
  parallel_for(n_boot, jobs, [&](int b) {
    std::vector<MeasurementRecord> resampled = records;
    std::uint64_t k = 0;
    for (auto& rec : resampled) {
      double total = 0.0;
      for (double c : rec.counts) total += c;
      std::array<double, 4> freq{};
      for (int j = 0; j < 4; ++j) freq[j] = rec.counts[j] / total;
      const auto counts = sample_counts(freq, shots, derived_seed(boot_base, b * 16 + k++));
      for (int j = 0; j < 4; ++j) rec.counts[j] = static_cast<double>(counts[j]);
    }
    const auto [hat, diag] = mle_reconstruct(resampled);
    draws[b] = concurrence(hat);
  });
  double mean = 0.0;
  for (double d : draws) mean += d;
  mean /= n_boot;
  double var = 0.0;
  for (double d : draws) var += (d - mean) * (d - mean);
  out.epsilon = 2.0 * std::sqrt(var / (n_boot - 1));
  return out;
}

std::string trajectory_csv(const Trajectory& traj, const MeasuredSeries& meas,
                           const std::vector<double>& z_e) {
  std::string text = "time_us,concurrence,z_a,z_q,z_e\n";
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    format_number(text, traj.times[i]);
    text += ',';
    format_number(text, meas.concurrence[i]);
    text += ',';
    format_number(text, meas.z_a[i]);
    text += ',';
    format_number(text, meas.z_q[i]);
    text += ',';
    format_number(text, z_e[i]);
    text += '\n';
  }
  return text;
}

std::string state_csv(const Mat& rho) {
  std::string text = "row,col,re,im\n";
  for (int i = 0; i < rho.rows(); ++i)
    for (int j = 0; j < rho.cols(); ++j) {
      text += std::to_string(i);
      text += ',';
      text += std::to_string(j);
      text += ',';
      format_number(text, rho(i, j).real());
      text += ',';
      format_number(text, rho(i, j).imag());
      text += '\n';
    }
  return text;
}

void write_summary(const fs::path& dir, RunReport& rep, const json& extra = json::object()) {
  rep.files.push_back("summary.json");
  json doc;
  doc["scenario"] = rep.scenario;
  doc["seed"] = rep.seed;
  doc["scalars"] = json::object();
  for (const auto& [key, value] : rep.scalars) doc["scalars"][key] = value;
  doc["files"] = rep.files;
  doc["config"] = json::parse(rep.config_echo);
  for (const auto& [key, value] : extra.items()) doc[key] = value;
  write_text_file(dir / "summary.json", doc.dump(2) + "\n");
}

RunReport run_chevron(const ScenarioConfig& cfg, int jobs) {
  RunReport rep{cfg.scenario, cfg.seed, {}, {}, resolved_config_json(cfg)};

  const int half = static_cast<int>(std::lround(cfg.detuning_max_mhz / cfg.detuning_step_mhz));
  std::vector<double> det_mhz, det_rad;
  for (int k = -half; k <= half; ++k) {
    det_mhz.push_back(k * cfg.detuning_step_mhz);
    det_rad.push_back(2.0 * M_PI * k * cfg.detuning_step_mhz);
  }
  std::vector<double> durations;
  const int n_t = static_cast<int>(std::lround(cfg.duration / cfg.record_every_us));
  for (int i = 0; i <= n_t; ++i) durations.push_back(i * cfg.record_every_us);

  SystemSpec sys = cfg.system;
  if (cfg.dephasing_only)
    for (auto& q : sys.qubits) q.t1 = INFINITY;
  const CouplingSpec base{"Ancilla", "Qubit", cfg.omega_qa, 0.0};
  const Eigen::MatrixXd map =
      chevron_scan(sys, base, "Ancilla", det_rad, durations, cfg.intrinsic, cfg.integrator, jobs);

  std::string text = "time_us";
  for (double d : det_mhz) {
    text += ',';
    format_number(text, d);
  }
  text += '\n';
  for (int i = 0; i < map.rows(); ++i) {
    format_number(text, durations[i]);
    for (int j = 0; j < map.cols(); ++j) {
      text += ',';
      format_number(text, map(i, j));
    }
    text += '\n';
  }
  const fs::path dir(cfg.out_dir);
  fs::create_directories(dir);
  write_text_file(dir / "chevron.csv", text);
  rep.files.push_back("chevron.csv");

  int peak_row = 0;
  map.col(half).maxCoeff(&peak_row);
  rep.scalars["peak_transfer"] = map.maxCoeff();
  rep.scalars["peak_time_us"] = durations[peak_row];
  write_summary(dir, rep);
  return rep;
}

RunReport run_single(const ScenarioConfig& cfg, int jobs) {
  if (cfg.scenario == "chevron") return run_chevron(cfg, jobs);

  RunReport rep{cfg.scenario, cfg.seed, {}, {}, resolved_config_json(cfg)};
  const fs::path dir(cfg.out_dir);
  fs::create_directories(dir);

  SimResult sim = simulate(cfg);
  MeasuredSeries meas = measure_trajectory(cfg, sim, jobs);
  sim.traj.concurrence = meas.concurrence;

  write_text_file(dir / "trajectory.csv",
                  trajectory_csv(sim.traj, meas, sim.traj.population("Environment")));
  rep.files.push_back("trajectory.csv");

  rep.scalars["concurrence_t0"] = meas.concurrence[sim.analysis_start];

  if (cfg.scenario == "bell_prep") {
    const Mat delivered = reduced_aq(sim.traj.states.back(), cfg.system.layout);
    write_text_file(dir / "state_t0.csv", state_csv(delivered));
    rep.files.push_back("state_t0.csv");
    rep.scalars["bell_fidelity"] = state_fidelity(delivered, bell_state(M_PI / 2));
  } else {
    ConcurrenceSeries series = analysis_series(sim.traj);
    if (series.times.size() >= 3) {
      rep.scalars["n_measure"] = non_markovianity(series);
      const DecayFit fit = fit_concurrence_decay(series);
      rep.scalars["gamma_c"] = fit.rate;
      rep.scalars["fit_amplitude"] = fit.amplitude;
      rep.scalars["fit_residual"] = fit.residual;
      if (cfg.measurement.mode == MeasurementMode::Tomography) {
        rep.scalars["epsilon"] = meas.epsilon;
        rep.scalars["n_measure_thresholded"] =
            non_markovianity_thresholded(series, meas.epsilon);
      }
    }
  }
  write_summary(dir, rep);
  return rep;
}

void apply_axis_value(ScenarioConfig& cfg, const std::string& axis, double value) {
  if (axis == "gamma")
    cfg.gamma = value;
  else if (axis == "a_in")
    cfg.gamma = dephasing_from_noise_amplitude(value);
  else if (axis == "omega")
    cfg.omega_qe = value;
  else if (axis == "shots")
    cfg.measurement.shots = std::lround(value);
  else
    fail("unknown sweep axis \"" + axis + "\"");
}

void set_json_path(json& doc, const std::string& key, const json& value) {
  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = key.find('.', start);
    const std::string part = key.substr(start, dot - start);
    if (part.empty()) fail("empty path segment in override \"" + key + "\"");
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    node = &(*node)[part];
    if (!node->is_object() && !node->is_null())
      fail("override path \"" + key + "\" descends into a non-object");
    start = dot + 1;
  }
}

json parse_document(const std::string& text, const std::vector<std::string>& overrides) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    fail(std::string("invalid config JSON: ") + e.what());
  }
  if (!doc.is_object()) fail("config must be a JSON object");
  for (const auto& kv : overrides) {
    const std::size_t eq = kv.find('=');
    if (eq == std::string::npos || eq == 0)
      fail("override \"" + kv + "\" is not of the form key=value");
    const std::string key = kv.substr(0, eq);
    const std::string raw = kv.substr(eq + 1);
    json value;
    try {
      value = json::parse(raw);
    } catch (const json::exception&) {
      value = raw;  // unquoted strings
    }
    set_json_path(doc, key, value);
  }
  return doc;
}

ScenarioConfig parse_config(const json& doc) {
  check_keys(doc, {"scenario", "seed", "out_dir", "measurement", "system", "schedule",
                   "integrator", "sweep"},
             "config");
  ScenarioConfig cfg;
  if (!doc.contains("scenario")) fail("config is missing \"scenario\"");
  cfg.scenario = get_string(doc, "scenario", "");
  if (!kScenarios.count(cfg.scenario)) fail("unknown scenario \"" + cfg.scenario + "\"");

  cfg.seed = get_seed(doc, "seed", 1);
  cfg.out_dir = get_string(doc, "out_dir", ".");

  // Scenario-dependent defaults, overridable below.
  if (cfg.scenario == "chevron") cfg.duration = 2.0;
  if (cfg.scenario == "dephasing_sweep") cfg.sweep = {"gamma", default_gamma_grid()};
  if (cfg.scenario == "zeno_sweep") cfg.sweep = {"gamma", {3.0, 4.5, 6.4}};

  if (doc.contains("measurement")) {
    const auto& m = doc.at("measurement");
    if (!m.is_object()) fail("\"measurement\" must be an object");
    check_keys(m, {"mode", "shots", "seed"}, "measurement");
    const std::string mode = get_string(m, "mode", "exact_state");
    if (mode == "exact_state")
      cfg.measurement.mode = MeasurementMode::ExactState;
    else if (mode == "tomography")
      cfg.measurement.mode = MeasurementMode::Tomography;
    else
      fail("measurement mode must be \"exact_state\" or \"tomography\"");
    cfg.measurement.shots = static_cast<long>(get_number(m, "shots", 5000));
    cfg.measurement.seed = get_seed(m, "seed", cfg.seed);
  } else {
    cfg.measurement.seed = cfg.seed;
  }

  if (doc.contains("system")) {
    const auto& s = doc.at("system");
    if (!s.is_object()) fail("\"system\" must be an object");
    check_keys(s, {"Ancilla", "Qubit", "Environment"}, "system");
    for (auto& q : cfg.system.qubits) {
      if (!s.contains(q.name)) continue;
      const auto& entry = s.at(q.name);
      if (!entry.is_object()) fail("system." + q.name + " must be an object");
      check_keys(entry, {"t1", "t2_star", "readout_fidelity"}, "system." + q.name);
      q.t1 = get_number(entry, "t1", q.t1);
      q.t2_star = get_number(entry, "t2_star", q.t2_star);
      q.readout_fidelity = get_number(entry, "readout_fidelity", q.readout_fidelity);
    }
  }

  if (doc.contains("schedule")) {
    const auto& s = doc.at("schedule");
    if (!s.is_object()) fail("\"schedule\" must be an object");
    check_keys(s,
               {"duration_us", "record_every_us", "gamma", "omega_qa", "omega_qe",
                "gate_time_us", "prep", "intrinsic", "dephasing_only", "detuning_max_mhz",
                "detuning_step_mhz"},
               "schedule");
    cfg.duration = get_number(s, "duration_us", cfg.duration);
    cfg.record_every_us = get_number(s, "record_every_us", cfg.record_every_us);
    cfg.gamma = get_number(s, "gamma", cfg.gamma);
    cfg.omega_qa = get_number(s, "omega_qa", cfg.omega_qa);
    cfg.omega_qe = get_number(s, "omega_qe", cfg.omega_qe);
    cfg.gate_time = get_number(s, "gate_time_us", cfg.gate_time);
    cfg.prep = get_string(s, "prep", cfg.prep);
    cfg.intrinsic = get_bool(s, "intrinsic", cfg.intrinsic);
    cfg.dephasing_only = get_bool(s, "dephasing_only", cfg.dephasing_only);
    cfg.detuning_max_mhz = get_number(s, "detuning_max_mhz", cfg.detuning_max_mhz);
    cfg.detuning_step_mhz = get_number(s, "detuning_step_mhz", cfg.detuning_step_mhz);
  }

  if (doc.contains("integrator")) {
    const auto& s = doc.at("integrator");
    if (!s.is_object()) fail("\"integrator\" must be an object");
    check_keys(s, {"step_us"}, "integrator");
    cfg.integrator.step = get_number(s, "step_us", cfg.integrator.step);
  }

  if (doc.contains("sweep")) {
    const auto& s = doc.at("sweep");
    if (!s.is_object()) fail("\"sweep\" must be an object");
    check_keys(s, {"axis", "values"}, "sweep");
    cfg.sweep.axis = get_string(s, "axis", cfg.sweep.axis);
    if (s.contains("values")) {
      const auto& vals = s.at("values");
      if (!vals.is_array()) fail("sweep.values must be an array of numbers");
      cfg.sweep.values.clear();
      for (const auto& v : vals) {
        if (!v.is_number()) fail("sweep.values must be an array of numbers");
        cfg.sweep.values.push_back(v.get<double>());
      }
    }
  }

  cfg.validate();
  return cfg;
}

}  // namespace

void ScenarioConfig::validate() const {
  if (!kScenarios.count(scenario)) fail("unknown scenario \"" + scenario + "\"");
  try {
    system.validate();
  } catch (const std::invalid_argument& e) {
    fail(std::string("invalid system parameters: ") + e.what());
  }
  if (!(integrator.step > 0.0)) fail("integrator step must be positive");
  if (!(duration > 0.0)) fail("duration_us must be positive");
  if (!(record_every_us > 0.0)) fail("record_every_us must be positive");
  const double k = record_every_us / integrator.step;
  if (std::abs(k - std::lround(k)) > 1e-6 || std::lround(k) < 1)
    fail("record_every_us must be a positive multiple of the integrator step");
  if (!(gamma >= 0.0)) fail("gamma must be non-negative");
  if (!(omega_qa > 0.0) || !(omega_qe > 0.0)) fail("exchange rates must be positive");
  if (prep != "explicit" && prep != "ideal")
    fail("prep must be \"explicit\" or \"ideal\"");
  if (prep == "explicit" && !(gate_time > 0.0)) fail("gate_time_us must be positive");
  if (scenario == "bell_prep" && prep != "explicit")
    fail("bell_prep simulates the preparation itself; prep must be \"explicit\"");
  if (dephasing_only && !intrinsic)
    fail("dephasing_only modifies intrinsic channels; enable intrinsic");
  if (scenario == "chevron") {
    if (!(detuning_max_mhz > 0.0) || !(detuning_step_mhz > 0.0))
      fail("chevron detuning grid must be positive");
    const double r = duration / record_every_us;
    if (std::abs(r - std::lround(r)) > 1e-6)
      fail("chevron duration_us must be a multiple of record_every_us");
    if (detuning_step_mhz > detuning_max_mhz + 1e-12)
      fail("detuning_step_mhz exceeds detuning_max_mhz");
    if (measurement.mode != MeasurementMode::ExactState)
      fail("chevron supports exact_state measurement only");
  }
  if (measurement.mode == MeasurementMode::Tomography && measurement.shots < 1)
    fail("tomography shots must be positive");
  if (!sweep.axis.empty() && !kSweepAxes.count(sweep.axis))
    fail("sweep axis must be one of gamma, a_in, omega, shots");
  if (!sweep.values.empty() && sweep.axis.empty())
    fail("sweep.values given without sweep.axis");
  if (is_sweep_scenario(scenario) && sweep.axis.empty())
    fail(scenario + " requires a sweep axis");
  if (sweep.axis == "shots" && measurement.mode != MeasurementMode::Tomography)
    fail("a shots sweep requires tomography measurement mode");
  for (double v : sweep.values) {
    if (!std::isfinite(v)) fail("sweep values must be finite");
    if ((sweep.axis == "gamma" || sweep.axis == "a_in") && v < 0.0)
      fail("sweep values for " + sweep.axis + " must be non-negative");
    if (sweep.axis == "omega" && !(v > 0.0)) fail("omega sweep values must be positive");
    if (sweep.axis == "shots" && !(v >= 1.0)) fail("shots sweep values must be >= 1");
  }
}

ScenarioConfig config_from_json_text(const std::string& text,
                                     const std::vector<std::string>& overrides) {
  return parse_config(parse_document(text, overrides));
}

ScenarioConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot read config file " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return config_from_json_text(buffer.str(), overrides);
}

std::string resolved_config_json(const ScenarioConfig& cfg) {
  json doc;
  doc["scenario"] = cfg.scenario;
  doc["seed"] = cfg.seed;
  doc["out_dir"] = cfg.out_dir;
  doc["measurement"] = {
      {"mode",
       cfg.measurement.mode == MeasurementMode::ExactState ? "exact_state" : "tomography"},
      {"shots", cfg.measurement.shots},
      {"seed", cfg.measurement.seed}};
  json system = json::object();
  for (const auto& q : cfg.system.qubits)
    system[q.name] = {{"t1", q.t1},
                      {"t2_star", q.t2_star},
                      {"readout_fidelity", q.readout_fidelity}};
  doc["system"] = system;
  doc["schedule"] = {{"duration_us", cfg.duration},
                     {"record_every_us", cfg.record_every_us},
                     {"gamma", cfg.gamma},
                     {"omega_qa", cfg.omega_qa},
                     {"omega_qe", cfg.omega_qe},
                     {"gate_time_us", cfg.gate_time},
                     {"prep", cfg.prep},
                     {"intrinsic", cfg.intrinsic},
                     {"dephasing_only", cfg.dephasing_only},
                     {"detuning_max_mhz", cfg.detuning_max_mhz},
                     {"detuning_step_mhz", cfg.detuning_step_mhz}};
  doc["integrator"] = {{"step_us", cfg.integrator.step}};
  if (!cfg.sweep.axis.empty())
    doc["sweep"] = {{"axis", cfg.sweep.axis}, {"values", cfg.sweep.values}};
  return doc.dump(2);
}

std::vector<double> default_gamma_grid() {
  std::vector<double> grid;
  const double lo = 0.05, hi = 8.0;
  for (int i = 0; i < 16; ++i) grid.push_back(lo * std::pow(hi / lo, i / 15.0));
  return grid;
}

std::uint64_t derived_seed(std::uint64_t base, std::uint64_t index) {
  std::uint64_t z = base + 0x9E3779B97F4A7C15ull * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

ConcurrenceSeries analysis_series(const Trajectory& traj) {
  if (traj.concurrence.size() != traj.times.size())
    throw std::invalid_argument("trajectory concurrence series not filled");
  ConcurrenceSeries series;
  for (std::size_t i = 0; i < traj.times.size(); ++i)
    if (traj.times[i] >= -1e-9) {
      series.times.push_back(traj.times[i]);
      series.values.push_back(traj.concurrence[i]);
    }
  return series;
}

RunReport run_scenario(const ScenarioConfig& cfg, int jobs) {
  cfg.validate();
  if (!is_sweep_scenario(cfg.scenario)) return run_single(cfg, jobs);

  const auto reports = run_sweep(cfg, jobs);
  RunReport agg{cfg.scenario, cfg.seed, {}, {}, resolved_config_json(cfg)};
  agg.scalars["n_runs"] = static_cast<double>(reports.size());
  agg.files.push_back("sweep.csv");
  for (std::size_t i = 0; i < reports.size(); ++i) {
    char prefix[32];
    std::snprintf(prefix, sizeof(prefix), "run_%03zu/", i);
    for (const auto& f : reports[i].files) agg.files.push_back(prefix + f);
  }
  agg.files.push_back("summary.json");  // written by run_sweep
  return agg;
}

std::vector<RunReport> run_sweep(const ScenarioConfig& cfg, int jobs) {
  cfg.validate();
  if (cfg.scenario == "chevron" || cfg.scenario == "bell_prep")
    fail("scenario " + cfg.scenario + " is not sweepable");
  if (cfg.sweep.axis.empty()) fail("sweep requires an axis");

  const fs::path dir(cfg.out_dir);
  fs::create_directories(dir);
  const auto& values = cfg.sweep.values;
  std::vector<RunReport> reports(values.size());

  parallel_for(static_cast<int>(values.size()), jobs, [&](int i) {
    ScenarioConfig child = cfg;
    child.sweep = {};
    if (is_sweep_scenario(child.scenario)) child.scenario = "revival";
    apply_axis_value(child, cfg.sweep.axis, values[i]);
    char sub[32];
    std::snprintf(sub, sizeof(sub), "run_%03d", i);
    child.out_dir = (dir / sub).string();
    child.seed = derived_seed(cfg.seed, i);
    child.measurement.seed = derived_seed(cfg.measurement.seed, i);
    reports[i] = run_single(child, 1);
    reports[i].scalars["axis_value"] = values[i];
  });

  std::string csv = "axis_value,n_measure,gamma_c,residual\n";
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto& s = reports[i].scalars;
    format_number(csv, values[i]);
    csv += ',';
    format_number(csv, s.count("n_measure") ? s.at("n_measure") : NAN);
    csv += ',';
    format_number(csv, s.count("gamma_c") ? s.at("gamma_c") : NAN);
    csv += ',';
    format_number(csv, s.count("fit_residual") ? s.at("fit_residual") : NAN);
    csv += '\n';
  }
  write_text_file(dir / "sweep.csv", csv);

  RunReport agg{cfg.scenario, cfg.seed, {{"n_runs", static_cast<double>(values.size())}},
                {"sweep.csv"}, resolved_config_json(cfg)};
  json runs = json::array();
  for (std::size_t i = 0; i < values.size(); ++i) {
    char sub[32];
    std::snprintf(sub, sizeof(sub), "run_%03zu", i);
    json entry;
    entry["axis_value"] = values[i];
    entry["dir"] = sub;
    entry["scalars"] = json::object();
    for (const auto& [key, value] : reports[i].scalars) entry["scalars"][key] = value;
    runs.push_back(entry);
    for (const auto& f : reports[i].files)
      agg.files.push_back(std::string(sub) + "/" + f);
  }
  json extra;
  extra["axis"] = cfg.sweep.axis;
  extra["runs"] = runs;
  write_summary(dir, agg, extra);
  return reports;
}

}  // namespace entprobe
