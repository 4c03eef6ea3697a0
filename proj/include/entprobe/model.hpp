#pragma once

// Declarative description of the three-qubit device: effective rotating-frame
// exchange Hamiltonians per evolution stage plus intrinsic and engineered
// dissipation channels.
//
// Rate conventions, used consistently everywhere:
//  - omega/detuning are angular rates in rad/us; gamma values are Ramsey
//    coherence decay rates in 1/us (a qubit dephasing at gamma has coherence
//    envelope e^{-gamma t}).
//  - the Lindblad weight of a sigma_z collapse realizing Ramsey rate gamma is
//    gamma/2 (see collapse_operators).

#include <array>
#include <cmath>
#include <vector>

#include "entprobe/qops.hpp"

namespace entprobe {

constexpr double kOmegaQA = 2.0 * M_PI * 0.477;  // rad/us, Qubit-Ancilla exchange
constexpr double kOmegaQE = 2.0 * M_PI * 0.473;  // rad/us, Qubit-Environment exchange

struct QubitParams {
  std::string name;  // Ancilla | Qubit | Environment
  double t1 = INFINITY;
  double t2_star = INFINITY;
  double readout_fidelity = 1.0;

  // 1/T2* - 1/(2 T1); negative values violate the T2* <= 2 T1 invariant.
  double pure_dephasing_rate() const;
  void validate() const;
};

// Resonant exchange between an ordered qubit pair.
struct CouplingSpec {
  std::string qubit_a;
  std::string qubit_b;
  double omega = 0.0;     // rad/us
  double detuning = 0.0;  // rad/us
};

// Engineered Markovian dephasing on one qubit (Ramsey-rate gamma).
struct DephasingSpec {
  std::string qubit;
  double gamma = 0.0;  // 1/us
};

// Instantaneous single-qubit rotation applied at the start of a stage.
struct GateSpec {
  std::string qubit;
  char axis = 'x';  // 'x' | 'y' | 'z'
  double angle = M_PI;
};

struct Stage {
  double duration = 0.0;  // us
  std::vector<GateSpec> gates;
  std::vector<CouplingSpec> couplings;
  std::vector<DephasingSpec> engineered;
  bool intrinsic_on = true;
};

struct StageSchedule {
  std::vector<Stage> stages;
};

struct SystemSpec {
  std::array<QubitParams, 3> qubits;  // same order as layout
  SubsystemLayout layout;

  const QubitParams& qubit(const std::string& name) const;
  void validate() const;
};

SubsystemLayout three_qubit_layout();
SubsystemLayout two_qubit_layout();  // Ancilla (x) Qubit

// Measured device parameters (T1/T2* in us, readout fidelities).
SystemSpec device_spec();

// H = (Omega/2)(sp_a sm_b + sm_a sp_b) + (Delta/4)(sz_a - sz_b), embedded in
// the register; an initially excited qubit transfers population as
// P(t) = Omega^2/(Omega^2+Delta^2) * sin^2(sqrt(Omega^2+Delta^2) t / 2).
Mat exchange_hamiltonian(const CouplingSpec& c, const SubsystemLayout& layout);

struct CollapseOp {
  Mat op;
  double rate;  // 1/us; the collapse operator entering the GKSL form is sqrt(rate)*op
};

// Intrinsic channels (if the stage enables them): sigma_minus at 1/T1 and
// sigma_z at gamma_phi/2 per qubit; engineered dephasing: sigma_z at gamma/2.
std::vector<CollapseOp> collapse_operators(const SystemSpec& spec, const Stage& stage);

// exp(-i angle/2 sigma_axis) embedded in the register.
Mat gate_unitary(const GateSpec& g, const SubsystemLayout& layout);

// (|10> + e^{i phi}|01>)/sqrt(2) over Ancilla (x) Qubit, as a density matrix.
Mat bell_state(double phi);

// Empirical Environment dephasing vs noise-drive amplitude: 1.84 * a_in^1.5.
double dephasing_from_noise_amplitude(double a_in);

}  // namespace entprobe
