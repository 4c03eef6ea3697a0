#include "entprobe/model.hpp"

namespace entprobe {

double QubitParams::pure_dephasing_rate() const {
  const double r1 = std::isinf(t1) ? 0.0 : 1.0 / t1;
  const double r2 = std::isinf(t2_star) ? 0.0 : 1.0 / t2_star;
  return r2 - 0.5 * r1;
}

void QubitParams::validate() const {
  if (name != "Ancilla" && name != "Qubit" && name != "Environment")
    throw std::invalid_argument("QubitParams: unknown qubit name " + name);
  if (!(t1 > 0) || !(t2_star > 0))
    throw std::invalid_argument("QubitParams: T1 and T2* must be positive");
  if (pure_dephasing_rate() < 0)
    throw std::invalid_argument("QubitParams: T2* exceeds 2*T1 for " + name);
  if (!(readout_fidelity > 0.5) || !(readout_fidelity <= 1.0))
    throw std::invalid_argument("QubitParams: readout fidelity outside (0.5, 1]");
}

const QubitParams& SystemSpec::qubit(const std::string& name) const {
  for (const QubitParams& q : qubits)
    if (q.name == name) return q;
  throw std::invalid_argument("SystemSpec: unknown qubit " + name);
}

void SystemSpec::validate() const {
  if (layout.dims.size() != 3 || layout.labels.size() != 3)
    throw std::invalid_argument("SystemSpec: layout must describe three qubits");
  for (int i = 0; i < 3; ++i) {
    qubits[i].validate();
    if (qubits[i].name != layout.labels[i])
      throw std::invalid_argument("SystemSpec: qubit order must match layout");
    for (int j = i + 1; j < 3; ++j)
      if (qubits[i].name == qubits[j].name)
        throw std::invalid_argument("SystemSpec: duplicate qubit name");
  }
}

SubsystemLayout three_qubit_layout() {
  return {{2, 2, 2}, {"Ancilla", "Qubit", "Environment"}};
}

SubsystemLayout two_qubit_layout() { return {{2, 2}, {"Ancilla", "Qubit"}}; }

SystemSpec device_spec() {
  SystemSpec s;
  s.qubits = {QubitParams{"Ancilla", 32.0, 41.0, 0.96},
              QubitParams{"Qubit", 31.0, 39.0, 0.97},
              QubitParams{"Environment", 28.0, 38.0, 1.0}};
  s.layout = three_qubit_layout();
  s.validate();
  return s;
}

Mat exchange_hamiltonian(const CouplingSpec& c, const SubsystemLayout& layout) {
  const int a = layout.site_of(c.qubit_a);
  const int b = layout.site_of(c.qubit_b);
  if (a == b) throw std::invalid_argument("exchange_hamiltonian: coupling a qubit to itself");
  const Mat sp_a = embed(sigma_plus(), layout, a);
  const Mat sm_a = embed(sigma_minus(), layout, a);
  const Mat sp_b = embed(sigma_plus(), layout, b);
  const Mat sm_b = embed(sigma_minus(), layout, b);
  Mat h = 0.5 * c.omega * (sp_a * sm_b + sm_a * sp_b);
  if (c.detuning != 0.0) {
    const Mat za = embed(pauli_z(), layout, a);
    const Mat zb = embed(pauli_z(), layout, b);
    h += 0.25 * c.detuning * (za - zb);
  }
  return h;
}

std::vector<CollapseOp> collapse_operators(const SystemSpec& spec, const Stage& stage) {
  std::vector<CollapseOp> out;
  auto push = [&](const Mat& op2, int site, double rate) {
    if (rate > 0) out.push_back({embed(op2, spec.layout, site), rate});
  };
  if (stage.intrinsic_on) {
    for (int site = 0; site < 3; ++site) {
      const QubitParams& q = spec.qubits[site];
      const double gphi = q.pure_dephasing_rate();
      if (gphi < 0)
        throw std::invalid_argument("collapse_operators: negative pure dephasing rate for " +
                                    q.name);
      if (!std::isinf(q.t1)) push(sigma_minus(), site, 1.0 / q.t1);
      push(pauli_z(), site, 0.5 * gphi);
    }
  }
  for (const DephasingSpec& d : stage.engineered) {
    if (d.gamma < 0) throw std::invalid_argument("collapse_operators: negative engineered gamma");
    push(pauli_z(), spec.layout.site_of(d.qubit), 0.5 * d.gamma);
  }
  return out;
}

Mat gate_unitary(const GateSpec& g, const SubsystemLayout& layout) {
  Mat s;
  switch (g.axis) {
    case 'x': s = pauli_x(); break;
    case 'y': s = pauli_y(); break;
    case 'z': s = pauli_z(); break;
    default: throw std::invalid_argument("gate_unitary: axis must be x, y or z");
  }
  const cxd mi(0, -1);
  Mat u = std::cos(0.5 * g.angle) * identity(2) + mi * std::sin(0.5 * g.angle) * s;
  return embed(u, layout, layout.site_of(g.qubit));
}

Mat bell_state(double phi) {
  Vec psi = Vec::Zero(4);
  psi(2) = 1.0 / std::sqrt(2.0);                       // |10> : Ancilla excited
  psi(1) = std::exp(cxd(0, phi)) / std::sqrt(2.0);     // |01> : Qubit excited
  return psi * psi.adjoint();
}

double dephasing_from_noise_amplitude(double a_in) {
  if (a_in < 0) throw std::invalid_argument("dephasing_from_noise_amplitude: negative amplitude");
  return 1.84 * std::pow(a_in, 1.5);
}

}  // namespace entprobe
