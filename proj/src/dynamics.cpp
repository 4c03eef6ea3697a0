#include "entprobe/dynamics.hpp"

#include <cmath>

#include "entprobe/parallel.hpp"

namespace entprobe {

namespace {

constexpr double kTraceTol = 1e-8;
constexpr double kPositivityAbort = -1e-6;

std::vector<int> layout_strides(const SubsystemLayout& layout) {
  const int n = static_cast<int>(layout.dims.size());
  std::vector<int> stride(n, 1);
  for (int s = n - 2; s >= 0; --s) stride[s] = stride[s + 1] * layout.dims[s + 1];
  return stride;
}

}  // namespace

void IntegratorConfig::validate(double max_rate) const {
  if (!(step > 0)) throw std::invalid_argument("IntegratorConfig: step must be positive");
  if (record_every < 1)
    throw std::invalid_argument("IntegratorConfig: record_every must be >= 1");
  if (step * max_rate >= 0.1)
    throw std::invalid_argument("IntegratorConfig: step too large for the fastest rate (step*rate = " +
                                std::to_string(step * max_rate) + " >= 0.1)");
}

const std::vector<double>& Trajectory::population(const std::string& label) const {
  for (size_t i = 0; i < labels.size(); ++i)
    if (labels[i] == label) return populations[i];
  throw std::invalid_argument("Trajectory: no population series for " + label);
}

Mat lindblad_rhs(const Mat& rho, const Mat& h, const std::vector<CollapseOp>& collapse) {
  if (rho.rows() != rho.cols() || h.rows() != rho.rows() || h.cols() != rho.cols())
    throw std::invalid_argument("lindblad_rhs: dimension mismatch");
  const cxd mi(0, -1);
  Mat out = mi * (h * rho - rho * h);
  for (const CollapseOp& c : collapse) {
    const Mat cj = std::sqrt(std::abs(c.rate)) * c.op;  // |.|: sign carried below
    const double sign = c.rate < 0 ? -1.0 : 1.0;
    out += sign * 0.5 *
           (2.0 * cj * rho * cj.adjoint() - rho * cj.adjoint() * cj - cj.adjoint() * cj * rho);
  }
  return out;
}

Propagator::Propagator(const Mat& h, const std::vector<CollapseOp>& collapse)
    : jumps_(collapse) {
  if (h.rows() != h.cols()) throw std::invalid_argument("Propagator: non-square Hamiltonian");
  const cxd mi(0, -1);
  Mat k = Mat::Zero(h.rows(), h.cols());
  max_rate_ = h.size() > 0 ? h.cwiseAbs().maxCoeff() : 0.0;
  for (const CollapseOp& c : jumps_) {
    if (c.op.rows() != h.rows() || c.op.cols() != h.cols())
      throw std::invalid_argument("Propagator: collapse operator dimension mismatch");
    k += c.rate * c.op.adjoint() * c.op;
    max_rate_ = std::max(max_rate_, std::abs(c.rate));
  }
  g_ = mi * h - 0.5 * k;
}

Mat Propagator::rhs(const Mat& rho) const {
  Mat out = g_ * rho + rho * g_.adjoint();
  for (const CollapseOp& c : jumps_) out += c.rate * c.op * rho * c.op.adjoint();
  return out;
}

namespace {

void rk4_step(const Propagator& prop, Mat& rho, double h) {
  const Mat k1 = prop.rhs(rho);
  const Mat k2 = prop.rhs(rho + 0.5 * h * k1);
  const Mat k3 = prop.rhs(rho + 0.5 * h * k2);
  const Mat k4 = prop.rhs(rho + h * k3);
  rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

void record_state(Trajectory& traj, const SubsystemLayout& layout,
                  const std::vector<int>& stride, Mat& rho, double t) {
  rho = 0.5 * (rho + Mat(rho.adjoint()));  // re-symmetrize
  const double tr = rho.trace().real();
  if (std::abs(tr - 1.0) > kTraceTol)
    throw NumericalError("trace drift " + std::to_string(tr - 1.0) + " at t = " +
                         std::to_string(t) + " us");
  const EigResult e = hermitian_eigs(rho);
  if (e.values(0) < kPositivityAbort)
    throw NumericalError("negative eigenvalue " + std::to_string(e.values(0)) + " at t = " +
                         std::to_string(t) + " us");

  traj.times.push_back(t);
  traj.states.push_back(rho);
  traj.min_eigenvalue.push_back(e.values(0));
  for (size_t s = 0; s < layout.dims.size(); ++s) {
    double p = 0.0;
    for (int idx = 0; idx < layout.dim(); ++idx)
      if ((idx / stride[s]) % layout.dims[s] == 1) p += rho(idx, idx).real();
    traj.populations[s].push_back(p);
  }
}

}  // namespace

Trajectory evolve(const Mat& rho0, const Mat& h, const std::vector<CollapseOp>& collapse,
                  const SubsystemLayout& layout, double duration, const IntegratorConfig& cfg,
                  double t0, bool record_initial) {
  if (rho0.rows() != rho0.cols() || rho0.rows() != layout.dim())
    throw std::invalid_argument("evolve: state dimension does not match layout");
  if (!is_hermitian(rho0) || std::abs(rho0.trace().real() - 1.0) > kTraceTol)
    throw std::invalid_argument("evolve: rho0 is not a valid state");
  if (duration < 0) throw std::invalid_argument("evolve: negative duration");

  const Propagator prop(h, collapse);
  cfg.validate(prop.max_rate());

  Trajectory traj;
  traj.labels = layout.labels;
  traj.populations.assign(layout.dims.size(), {});
  const std::vector<int> stride = layout_strides(layout);

  Mat rho = rho0;
  if (record_initial) record_state(traj, layout, stride, rho, t0);

  const long n_full = static_cast<long>(std::floor(duration / cfg.step + 1e-9));
  const double tail = duration - static_cast<double>(n_full) * cfg.step;
  for (long k = 1; k <= n_full; ++k) {
    rk4_step(prop, rho, cfg.step);
    if (k % cfg.record_every == 0 && !(k == n_full && tail > 1e-12))
      record_state(traj, layout, stride, rho, t0 + static_cast<double>(k) * cfg.step);
  }
  if (tail > 1e-12) {
    rk4_step(prop, rho, tail);
    record_state(traj, layout, stride, rho, t0 + duration);
  } else if (n_full % cfg.record_every != 0 || (n_full == 0 && !record_initial)) {
    record_state(traj, layout, stride, rho, t0 + duration);
  }
  return traj;
}

namespace {

void append_trajectory(Trajectory& total, const Trajectory& part) {
  total.times.insert(total.times.end(), part.times.begin(), part.times.end());
  total.states.insert(total.states.end(), part.states.begin(), part.states.end());
  total.min_eigenvalue.insert(total.min_eigenvalue.end(), part.min_eigenvalue.begin(),
                              part.min_eigenvalue.end());
  for (size_t s = 0; s < part.populations.size(); ++s)
    total.populations[s].insert(total.populations[s].end(), part.populations[s].begin(),
                                part.populations[s].end());
}

}  // namespace

Trajectory evolve_schedule(const Mat& rho0, const SystemSpec& spec,
                           const StageSchedule& schedule, const IntegratorConfig& cfg) {
  spec.validate();
  if (schedule.stages.empty())
    throw std::invalid_argument("evolve_schedule: empty schedule");

  Trajectory total;
  total.labels = spec.layout.labels;
  total.populations.assign(spec.layout.dims.size(), {});

  Mat rho = rho0;
  double t = 0.0;
  bool first = true;
  for (const Stage& stage : schedule.stages) {
    if (stage.duration < 0) throw std::invalid_argument("evolve_schedule: negative stage duration");
    for (const GateSpec& g : stage.gates) {
      const Mat u = gate_unitary(g, spec.layout);
      rho = u * rho * u.adjoint();
    }
    Mat h = Mat::Zero(spec.layout.dim(), spec.layout.dim());
    for (const CouplingSpec& c : stage.couplings) h += exchange_hamiltonian(c, spec.layout);
    const std::vector<CollapseOp> ops = collapse_operators(spec, stage);

    if (stage.duration == 0.0 && !first) continue;  // nothing to record mid-sequence
    Trajectory part = evolve(rho, h, ops, spec.layout, stage.duration, cfg, t, first);
    rho = part.states.empty() ? rho : part.states.back();
    append_trajectory(total, part);
    t += stage.duration;
    first = false;
  }
  return total;
}

Eigen::MatrixXd chevron_scan(const SystemSpec& spec, const CouplingSpec& base,
                             const std::string& observe, const std::vector<double>& detunings,
                             const std::vector<double>& durations, bool intrinsic_on,
                             const IntegratorConfig& cfg, int jobs) {
  spec.validate();
  if (durations.size() < 2 || durations.front() != 0.0)
    throw std::invalid_argument("chevron_scan: durations must be a grid starting at 0");
  const double dt = durations[1] - durations[0];
  for (size_t k = 0; k < durations.size(); ++k)
    if (std::abs(durations[k] - static_cast<double>(k) * dt) > 1e-9)
      throw std::invalid_argument("chevron_scan: durations grid is not uniform");
  const long every = std::lround(dt / cfg.step);
  if (every < 1 || std::abs(static_cast<double>(every) * cfg.step - dt) > 1e-12)
    throw std::invalid_argument("chevron_scan: durations grid incommensurate with step");

  IntegratorConfig scan_cfg = cfg;
  scan_cfg.record_every = static_cast<int>(every);

  // initial state: base.qubit_b excited
  const int site_b = spec.layout.site_of(base.qubit_b);
  Vec psi = Vec::Zero(spec.layout.dim());
  psi(layout_strides(spec.layout)[site_b]) = 1.0;
  const Mat rho0 = psi * psi.adjoint();

  Stage stage;
  stage.intrinsic_on = intrinsic_on;
  const std::vector<CollapseOp> ops = collapse_operators(spec, stage);

  Eigen::MatrixXd out(durations.size(), detunings.size());
  parallel_for(static_cast<int>(detunings.size()), jobs, [&](int col) {
    CouplingSpec c = base;
    c.detuning = detunings[col];
    const Mat h = exchange_hamiltonian(c, spec.layout);
    Trajectory traj = evolve(rho0, h, ops, spec.layout, durations.back(), scan_cfg);
    const std::vector<double>& p = traj.population(observe);
    for (size_t r = 0; r < durations.size(); ++r) out(r, col) = p[r];
  });
  return out;
}

}  // namespace entprobe
