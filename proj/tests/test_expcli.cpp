#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "entprobe/expcli.hpp"
#include "entprobe/model.hpp"

using namespace entprobe;
namespace fs = std::filesystem;

namespace {

const fs::path kWork = fs::temp_directory_path() / "entprobe_test_expcli";

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = kWork / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

CsvTable read_csv(const fs::path& path) {
  std::istringstream in(slurp(path));
  CsvTable table;
  std::string line;
  REQUIRE(std::getline(in, line));
  std::istringstream head(line);
  std::string cell;
  while (std::getline(head, cell, ',')) table.header.push_back(cell);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::vector<double> values;
    while (std::getline(row, cell, ',')) values.push_back(std::stod(cell));
    REQUIRE(values.size() == table.header.size());
    table.rows.push_back(values);
  }
  return table;
}

ConcurrenceSeries csv_analysis_series(const CsvTable& table) {
  ConcurrenceSeries series;
  for (const auto& row : table.rows)
    if (row[0] >= -1e-9) {
      series.times.push_back(row[0]);
      series.values.push_back(row[1]);
    }
  return series;
}

Mat read_state_csv(const fs::path& path) {
  const CsvTable table = read_csv(path);
  Mat rho = Mat::Zero(4, 4);
  for (const auto& row : table.rows)
    rho(static_cast<int>(row[0]), static_cast<int>(row[1])) = cxd(row[2], row[3]);
  return rho;
}

ScenarioConfig make_config(const std::string& text, const std::vector<std::string>& overrides = {}) {
  return config_from_json_text(text, overrides);
}

}  // namespace

TEST_CASE("config defaults and scenario-dependent grids") {
  const ScenarioConfig cfg = make_config("{\"scenario\": \"revival\"}");
  CHECK(cfg.scenario == "revival");
  CHECK(cfg.seed == 1);
  CHECK(cfg.measurement.mode == MeasurementMode::ExactState);
  CHECK(cfg.measurement.shots == 5000);
  CHECK(cfg.measurement.seed == 1);
  CHECK(cfg.duration == 10.0);
  CHECK(cfg.record_every_us == 0.05);
  CHECK(cfg.gamma == 0.0);
  CHECK(cfg.omega_qa == doctest::Approx(kOmegaQA));
  CHECK(cfg.omega_qe == doctest::Approx(kOmegaQE));
  CHECK(cfg.prep == "explicit");
  CHECK(cfg.intrinsic);
  CHECK(!cfg.dephasing_only);
  CHECK(cfg.system.qubit("Qubit").t2_star == doctest::Approx(39.0));

  CHECK(make_config("{\"scenario\": \"chevron\"}").duration == 2.0);

  const ScenarioConfig zeno = make_config("{\"scenario\": \"zeno_sweep\"}");
  CHECK(zeno.sweep.axis == "gamma");
  CHECK(zeno.sweep.values == std::vector<double>{3.0, 4.5, 6.4});

  const ScenarioConfig deph = make_config("{\"scenario\": \"dephasing_sweep\"}");
  CHECK(deph.sweep.values.size() == 16);
  CHECK(deph.sweep.values.front() == doctest::Approx(0.05));
  CHECK(deph.sweep.values.back() == doctest::Approx(8.0));
  for (std::size_t i = 1; i < deph.sweep.values.size(); ++i) {
    CHECK(deph.sweep.values[i] > deph.sweep.values[i - 1]);
    const double ratio = deph.sweep.values[i] / deph.sweep.values[i - 1];
    CHECK(ratio == doctest::Approx(std::pow(8.0 / 0.05, 1.0 / 15.0)).epsilon(1e-9));
  }
}

TEST_CASE("config overrides") {
  const ScenarioConfig cfg = make_config(
      "{\"scenario\": \"revival\"}",
      {"schedule.gamma=3.5", "measurement.mode=tomography", "measurement.shots=750",
       "seed=9", "out_dir=somewhere", "sweep.axis=gamma", "sweep.values=[1,2.5]"});
  CHECK(cfg.gamma == 3.5);
  CHECK(cfg.measurement.mode == MeasurementMode::Tomography);
  CHECK(cfg.measurement.shots == 750);
  CHECK(cfg.seed == 9);
  CHECK(cfg.measurement.seed == 9);  // follows the run seed unless set
  CHECK(cfg.out_dir == "somewhere");
  CHECK(cfg.sweep.values == std::vector<double>{1.0, 2.5});

  CHECK_THROWS_AS(make_config("{\"scenario\": \"revival\"}", {"no_equals"}), ConfigError);
  CHECK_THROWS_AS(make_config("{\"scenario\": \"revival\"}", {"schedule.bogus=1"}), ConfigError);
  CHECK_THROWS_AS(make_config("{\"scenario\": \"revival\"}", {"scenario.x=1"}), ConfigError);
}

TEST_CASE("config validation rejects malformed documents") {
  CHECK_THROWS_AS(make_config("not json"), ConfigError);
  CHECK_THROWS_AS(make_config("[1,2]"), ConfigError);
  CHECK_THROWS_AS(make_config("{}"), ConfigError);
  CHECK_THROWS_AS(make_config("{\"scenario\": \"warp_drive\"}"), ConfigError);
  CHECK_THROWS_AS(make_config("{\"scenario\": \"revival\", \"bogus\": 1}"), ConfigError);
  CHECK_THROWS_AS(make_config("{\"scenario\": \"revival\", \"seed\": -4}"), ConfigError);
  CHECK_THROWS_AS(
      make_config("{\"scenario\": \"revival\", \"schedule\": {\"duration_us\": \"ten\"}}"),
      ConfigError);
  CHECK_THROWS_AS(
      make_config("{\"scenario\": \"revival\", \"schedule\": {\"duration_us\": -1}}"),
      ConfigError);
  CHECK_THROWS_AS(
      make_config("{\"scenario\": \"revival\", \"schedule\": {\"gamma\": -0.5}}"),
      ConfigError);
  CHECK_THROWS_AS(
      make_config("{\"scenario\": \"revival\", \"schedule\": {\"record_every_us\": 0.0007}}"),
      ConfigError);
  CHECK_THROWS_AS(
      make_config("{\"scenario\": \"revival\", \"schedule\": {\"prep\": \"psychic\"}}"),
      ConfigError);
  CHECK_THROWS_AS(
      make_config("{\"scenario\": \"bell_prep\", \"schedule\": {\"prep\": \"ideal\"}}"),
      ConfigError);
  CHECK_THROWS_AS(
      make_config("{\"scenario\": \"chevron\", \"measurement\": {\"mode\": \"tomography\"}}"),
      ConfigError);
  CHECK_THROWS_AS(
      make_config("{\"scenario\": \"revival\", \"measurement\": {\"mode\": \"psychic\"}}"),
      ConfigError);
  CHECK_THROWS_AS(
      make_config(
          "{\"scenario\": \"revival\", \"sweep\": {\"axis\": \"shots\", \"values\": [10]}}"),
      ConfigError);
  CHECK_THROWS_AS(
      make_config("{\"scenario\": \"revival\", \"sweep\": {\"values\": [1]}}"), ConfigError);
  CHECK_THROWS_AS(
      make_config("{\"scenario\": \"revival\", \"sweep\": {\"axis\": \"dilithium\"}}"),
      ConfigError);
  CHECK_THROWS_AS(
      make_config("{\"scenario\": \"revival\", \"system\": {\"Qubit\": {\"t1\": -3}}}"),
      ConfigError);
  CHECK_THROWS_AS(load_config((kWork / "does_not_exist.json").string()), ConfigError);
}

TEST_CASE("resolved config echo is idempotent") {
  const ScenarioConfig cfg =
      make_config("{\"scenario\": \"zeno_sweep\"}", {"schedule.gamma=2.0", "seed=5"});
  const std::string echo = resolved_config_json(cfg);
  const ScenarioConfig back = make_config(echo);
  CHECK(resolved_config_json(back) == echo);
}

TEST_CASE("derived seed stream is deterministic and collision-free") {
  CHECK(derived_seed(1, 0) == derived_seed(1, 0));
  std::set<std::uint64_t> seen;
  for (std::uint64_t base = 0; base < 10; ++base)
    for (std::uint64_t i = 0; i < 100; ++i) seen.insert(derived_seed(base, i));
  CHECK(seen.size() == 1000);
}

TEST_CASE("free decay recovers the pure-dephasing rate") {
  const fs::path dir = fresh_dir("free_decay");
  ScenarioConfig cfg = make_config("{\"scenario\": \"free_decay\"}",
                                   {"schedule.dephasing_only=true"});
  cfg.out_dir = dir.string();
  const RunReport rep = run_scenario(cfg);

  const double expected = 1.0 / 39.0 + 1.0 / 41.0;
  CHECK(rep.scalars.at("gamma_c") ==
        doctest::Approx(expected).epsilon(0.03));
  CHECK(rep.scalars.at("n_measure") < 1e-9);

  // Full intrinsic model: T1 adds to the decay but stays in the same regime.
  ScenarioConfig full = make_config("{\"scenario\": \"free_decay\"}");
  full.out_dir = (dir / "full").string();
  const RunReport rep_full = run_scenario(full);
  CHECK(rep_full.scalars.at("gamma_c") ==
        doctest::Approx(expected).epsilon(0.25));
  CHECK(rep_full.scalars.at("gamma_c") > rep.scalars.at("gamma_c"));
}

TEST_CASE("bell preparation scenario") {
  const fs::path dir = fresh_dir("bell_prep");
  ScenarioConfig cfg = make_config("{\"scenario\": \"bell_prep\"}");
  cfg.out_dir = dir.string();
  const RunReport rep = run_scenario(cfg);

  CHECK(rep.scalars.at("bell_fidelity") >= 0.97);
  CHECK(rep.scalars.at("bell_fidelity") <= 1.0);
  CHECK(std::count(rep.files.begin(), rep.files.end(), "state_t0.csv") == 1);

  // All emitted files exist and the manifest is complete.
  for (const auto& f : rep.files) CHECK(fs::exists(dir / f));

  // Delivery happens at t = 0; preparation occupies negative times.
  const CsvTable table = read_csv(dir / "trajectory.csv");
  CHECK(table.header ==
        std::vector<std::string>{"time_us", "concurrence", "z_a", "z_q", "z_e"});
  CHECK(table.rows.front()[0] == doctest::Approx(-0.53));
  CHECK(std::abs(table.rows.back()[0]) < 1e-12);

  // The fidelity scalar is recomputable from the emitted state file.
  const Mat delivered = read_state_csv(dir / "state_t0.csv");
  CHECK(state_fidelity(delivered, bell_state(M_PI / 2)) ==
        doctest::Approx(rep.scalars.at("bell_fidelity")).epsilon(1e-9));

  // Decoherence off at the calibrated half-swap time: near-perfect Bell pair.
  ScenarioConfig ideal = make_config(
      "{\"scenario\": \"bell_prep\", \"schedule\": {\"intrinsic\": false, \"gate_time_us\": 0.524}}");
  ideal.out_dir = (dir / "ideal").string();
  const RunReport rep_ideal = run_scenario(ideal);
  CHECK(rep_ideal.scalars.at("concurrence_t0") >= 0.99);
  CHECK(rep_ideal.scalars.at("bell_fidelity") >= 0.99);
}

TEST_CASE("revival scenario: non-Markovian band and report/file consistency") {
  const fs::path dir = fresh_dir("revival");
  ScenarioConfig cfg = make_config("{\"scenario\": \"revival\"}");
  cfg.out_dir = dir.string();
  const RunReport rep = run_scenario(cfg);

  CHECK(rep.scalars.at("n_measure") >= 1.0);
  CHECK(rep.scalars.at("concurrence_t0") > 0.9);

  const CsvTable table = read_csv(dir / "trajectory.csv");
  std::size_t analysis_rows = 0;
  for (const auto& row : table.rows)
    if (row[0] >= -1e-9) ++analysis_rows;
  CHECK(analysis_rows == 201);
  CHECK(table.rows.back()[0] == doctest::Approx(10.0));

  // Scalars are recomputable from the emitted series with measures ops alone.
  const ConcurrenceSeries series = csv_analysis_series(table);
  CHECK(non_markovianity(series) ==
        doctest::Approx(rep.scalars.at("n_measure")).epsilon(1e-8));
  const DecayFit fit = fit_concurrence_decay(series);
  CHECK(fit.rate == doctest::Approx(rep.scalars.at("gamma_c")).epsilon(1e-8));
  CHECK(series.values.front() ==
        doctest::Approx(rep.scalars.at("concurrence_t0")).epsilon(1e-9));
}

TEST_CASE("reruns are byte-identical") {
  const fs::path dir = fresh_dir("rerun");
  ScenarioConfig cfg = make_config(
      "{\"scenario\": \"revival\", \"schedule\": {\"duration_us\": 1.0}, \"seed\": 3}");
  cfg.out_dir = (dir / "a").string();
  run_scenario(cfg);
  cfg.out_dir = (dir / "b").string();
  run_scenario(cfg);
  CHECK(slurp(dir / "a" / "trajectory.csv") == slurp(dir / "b" / "trajectory.csv"));
}

TEST_CASE("sweep mechanics") {
  const fs::path dir = fresh_dir("sweep");

  SUBCASE("value order, files and aggregation") {
    ScenarioConfig cfg = make_config(
        "{\"scenario\": \"revival\", \"schedule\": {\"duration_us\": 2.0},"
        " \"sweep\": {\"axis\": \"gamma\", \"values\": [0.0, 1.5]}}");
    cfg.out_dir = (dir / "gamma").string();
    const auto reports = run_sweep(cfg, 1);
    REQUIRE(reports.size() == 2);
    CHECK(reports[0].scalars.at("axis_value") == 0.0);
    CHECK(reports[1].scalars.at("axis_value") == 1.5);
    CHECK(reports[0].scalars.at("n_measure") > reports[1].scalars.at("n_measure"));
    CHECK(fs::exists(dir / "gamma" / "run_000" / "trajectory.csv"));
    CHECK(fs::exists(dir / "gamma" / "run_001" / "trajectory.csv"));

    const CsvTable sweep_csv = read_csv(dir / "gamma" / "sweep.csv");
    CHECK(sweep_csv.header ==
          std::vector<std::string>{"axis_value", "n_measure", "gamma_c", "residual"});
    REQUIRE(sweep_csv.rows.size() == 2);
    CHECK(sweep_csv.rows[0][1] ==
          doctest::Approx(reports[0].scalars.at("n_measure")).epsilon(1e-9));
    CHECK(sweep_csv.rows[1][2] ==
          doctest::Approx(reports[1].scalars.at("gamma_c")).epsilon(1e-9));
  }

  SUBCASE("empty value list produces an empty report list") {
    ScenarioConfig cfg = make_config(
        "{\"scenario\": \"revival\", \"sweep\": {\"axis\": \"gamma\", \"values\": []}}");
    cfg.out_dir = (dir / "empty").string();
    CHECK(run_sweep(cfg, 1).empty());
    const CsvTable sweep_csv = read_csv(dir / "empty" / "sweep.csv");
    CHECK(sweep_csv.rows.empty());
  }

  SUBCASE("noise amplitude converts to the dephasing rate") {
    ScenarioConfig via_a = make_config(
        "{\"scenario\": \"revival\", \"schedule\": {\"duration_us\": 1.0},"
        " \"sweep\": {\"axis\": \"a_in\", \"values\": [1.0]}}");
    via_a.out_dir = (dir / "a_in").string();
    ScenarioConfig via_g = make_config(
        "{\"scenario\": \"revival\", \"schedule\": {\"duration_us\": 1.0},"
        " \"sweep\": {\"axis\": \"gamma\", \"values\": [1.84]}}");
    via_g.out_dir = (dir / "g184").string();
    const auto ra = run_sweep(via_a, 1);
    const auto rg = run_sweep(via_g, 1);
    REQUIRE(ra.size() == 1);
    REQUIRE(rg.size() == 1);
    CHECK(ra[0].scalars.at("n_measure") == rg[0].scalars.at("n_measure"));
    CHECK(ra[0].scalars.at("gamma_c") == rg[0].scalars.at("gamma_c"));
  }

  SUBCASE("parallel execution matches serial") {
    ScenarioConfig cfg = make_config(
        "{\"scenario\": \"zeno_sweep\", \"schedule\": {\"duration_us\": 1.5},"
        " \"sweep\": {\"axis\": \"gamma\", \"values\": [1.0, 2.0, 4.0]}}");
    cfg.out_dir = (dir / "serial").string();
    const auto serial = run_sweep(cfg, 1);
    cfg.out_dir = (dir / "parallel").string();
    const auto parallel = run_sweep(cfg, 3);
    REQUIRE(serial.size() == parallel.size());
    for (std::size_t i = 0; i < serial.size(); ++i) {
      for (const auto& [key, value] : serial[i].scalars)
        CHECK(parallel[i].scalars.at(key) == value);
    }
    CHECK(slurp(dir / "serial" / "sweep.csv") == slurp(dir / "parallel" / "sweep.csv"));
  }

  SUBCASE("aggregate report for sweep scenarios via run_scenario") {
    ScenarioConfig cfg = make_config(
        "{\"scenario\": \"dephasing_sweep\", \"schedule\": {\"duration_us\": 1.0},"
        " \"sweep\": {\"axis\": \"gamma\", \"values\": [0.5, 2.0]}}");
    cfg.out_dir = (dir / "agg").string();
    const RunReport rep = run_scenario(cfg, 1);
    CHECK(rep.scalars.at("n_runs") == 2.0);
    CHECK(std::count(rep.files.begin(), rep.files.end(), "sweep.csv") == 1);
    for (const auto& f : rep.files) CHECK(fs::exists(dir / "agg" / f));
  }

  SUBCASE("non-sweepable scenarios are rejected") {
    ScenarioConfig cfg = make_config(
        "{\"scenario\": \"bell_prep\", \"sweep\": {\"axis\": \"gamma\", \"values\": [1]}}");
    cfg.out_dir = (dir / "bad").string();
    CHECK_THROWS_AS(run_sweep(cfg, 1), ConfigError);
  }
}

TEST_CASE("tomography measurement mode") {
  const fs::path dir = fresh_dir("tomo");
  const std::string text =
      "{\"scenario\": \"revival\","
      " \"schedule\": {\"duration_us\": 0.5, \"record_every_us\": 0.1},"
      " \"measurement\": {\"mode\": \"tomography\", \"shots\": 500, \"seed\": 11}}";

  ScenarioConfig cfg = make_config(text);
  cfg.out_dir = (dir / "a").string();
  const RunReport rep = run_scenario(cfg);

  CHECK(rep.scalars.at("epsilon") > 0.0);
  CHECK(rep.scalars.at("n_measure_thresholded") <= rep.scalars.at("n_measure") + 1e-12);

  const CsvTable table = read_csv(dir / "a" / "trajectory.csv");
  for (const auto& row : table.rows) {
    CHECK(row[1] >= 0.0);
    CHECK(row[1] <= 1.0 + 1e-9);
    CHECK(row[2] >= -1e-9);  // reconstructed populations are physical
    CHECK(row[3] <= 1.0 + 1e-9);
  }

  SUBCASE("same seed is byte-identical, different seed differs") {
    ScenarioConfig again = make_config(text);
    again.out_dir = (dir / "b").string();
    run_scenario(again);
    CHECK(slurp(dir / "a" / "trajectory.csv") == slurp(dir / "b" / "trajectory.csv"));

    ScenarioConfig other = make_config(text, {"measurement.seed=12"});
    other.out_dir = (dir / "c").string();
    run_scenario(other);
    CHECK(slurp(dir / "a" / "trajectory.csv") != slurp(dir / "c" / "trajectory.csv"));
  }
}

TEST_CASE("chevron scenario") {
  const fs::path dir = fresh_dir("chevron");
  ScenarioConfig cfg = make_config(
      "{\"scenario\": \"chevron\","
      " \"schedule\": {\"duration_us\": 1.2, \"intrinsic\": false,"
      " \"detuning_max_mhz\": 0.5, \"detuning_step_mhz\": 0.25}}");
  cfg.out_dir = dir.string();
  const RunReport rep = run_scenario(cfg, 2);

  CHECK(rep.scalars.at("peak_transfer") >= 0.99);
  CHECK(rep.scalars.at("peak_time_us") == doctest::Approx(1.05).epsilon(0.05));

  const CsvTable table = read_csv(dir / "chevron.csv");
  REQUIRE(table.header.size() == 6);  // time + 5 detunings
  CHECK(table.header.front() == "time_us");
  CHECK(table.rows.size() == 25);
  CHECK(table.rows.front()[0] == 0.0);
  CHECK(table.rows.back()[0] == doctest::Approx(1.2));
  // Far-detuned columns transfer visibly less than the resonant one.
  double best_res = 0.0, best_det = 0.0;
  for (const auto& row : table.rows) {
    best_res = std::max(best_res, row[3]);
    best_det = std::max(best_det, row[1]);
  }
  CHECK(best_res >= 0.99);
  CHECK(best_det < best_res);
}
