#pragma once

// GKSL/Lindblad master-equation propagation over staged schedules.
// Fixed-step RK4; recorded states are re-symmetrized and checked against
// trace/positivity tolerances (violations abort with NumericalError rather
// than being clipped, so integration problems stay visible).

#include "entprobe/model.hpp"

namespace entprobe {

struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IntegratorConfig {
  double step = 1e-3;     // us
  int record_every = 50;  // steps between recorded samples

  void validate(double max_rate) const;
};

struct Trajectory {
  std::vector<double> times;  // us, strictly increasing
  std::vector<Mat> states;
  std::vector<std::string> labels;              // qubit labels, layout order
  std::vector<std::vector<double>> populations; // excited-state population per qubit
  std::vector<double> min_eigenvalue;           // positivity diagnostic per state
  std::vector<double> concurrence;              // filled by the measures layer

  const std::vector<double>& population(const std::string& label) const;
};

// Literal per-term GKSL right-hand side (serial reference implementation):
// drho/dt = -i[H,rho] + sum_j (2 C_j rho C_j^dag - rho C_j^dag C_j - C_j^dag C_j rho)/2
// with C_j = sqrt(rate_j) * op_j.
Mat lindblad_rhs(const Mat& rho, const Mat& h, const std::vector<CollapseOp>& collapse);

// Fast path with the precomputed one-sided generator G = -iH - K/2,
// K = sum_j rate_j op_j^dag op_j:  rhs = G rho + rho G^dag + sum_j rate_j op_j rho op_j^dag.
class Propagator {
 public:
  Propagator(const Mat& h, const std::vector<CollapseOp>& collapse);
  Mat rhs(const Mat& rho) const;
  double max_rate() const { return max_rate_; }

 private:
  Mat g_;
  std::vector<CollapseOp> jumps_;
  double max_rate_;
};

// Propagate rho0 under a fixed generator for `duration`, recording every
// cfg.record_every steps (plus the final time). `t0` offsets the recorded
// time axis; `record_initial` controls whether the t0 sample is emitted
// (stage concatenation drops duplicated boundary samples).
Trajectory evolve(const Mat& rho0, const Mat& h, const std::vector<CollapseOp>& collapse,
                  const SubsystemLayout& layout, double duration,
                  const IntegratorConfig& cfg = {}, double t0 = 0.0,
                  bool record_initial = true);

// Staged propagation: per stage, apply instantaneous gates, then evolve under
// the stage's couplings/dissipators. Stage boundaries are continuous in state.
Trajectory evolve_schedule(const Mat& rho0, const SystemSpec& spec,
                           const StageSchedule& schedule, const IntegratorConfig& cfg = {});

// Transfer-population map over (duration, detuning): qubit `observe` excited
// population, starting from `base` coupling's qubit_b excited. durations must
// be a uniform ascending grid starting at 0 and commensurate with cfg.step.
Eigen::MatrixXd chevron_scan(const SystemSpec& spec, const CouplingSpec& base,
                             const std::string& observe, const std::vector<double>& detunings,
                             const std::vector<double>& durations, bool intrinsic_on,
                             const IntegratorConfig& cfg = {}, int jobs = 1);

}  // namespace entprobe
