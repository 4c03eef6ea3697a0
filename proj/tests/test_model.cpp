#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "entprobe/model.hpp"
#include "testutil.hpp"

using namespace entprobe;
using testutil::max_abs_diff;

namespace {

// evolution operator of a Hermitian h over time t, via spectral decomposition
Mat propagator(const Mat& h, double t) {
  EigResult e = hermitian_eigs(h);
  Vec phases(e.values.size());
  for (Eigen::Index k = 0; k < e.values.size(); ++k)
    phases(k) = std::exp(cxd(0, -e.values(k) * t));
  return e.vectors * phases.asDiagonal() * e.vectors.adjoint();
}

double transfer_probability(const CouplingSpec& c, double t) {
  const SubsystemLayout lay = two_qubit_layout();
  Mat h = exchange_hamiltonian(c, lay);
  Vec init = Vec::Zero(4);
  init(1) = 1.0;  // Qubit excited
  Vec fin = propagator(h, t) * init;
  return std::norm(fin(2));  // Ancilla excited
}

}  // namespace

TEST_CASE("exchange hamiltonian structure") {
  const SubsystemLayout lay = two_qubit_layout();
  CouplingSpec c{"Ancilla", "Qubit", kOmegaQA, 0.0};
  Mat h = exchange_hamiltonian(c, lay);

  CHECK(is_hermitian(h, 1e-12));
  CHECK(std::abs(h.trace()) < 1e-12);
  CHECK(std::abs(h(1, 2) - cxd(kOmegaQA / 2, 0)) < 1e-12);
  CHECK(std::abs(h(2, 1) - cxd(kOmegaQA / 2, 0)) < 1e-12);

  CouplingSpec zero{"Ancilla", "Qubit", 0.0, 0.0};
  CHECK(exchange_hamiltonian(zero, lay).cwiseAbs().maxCoeff() == 0.0);

  CHECK_THROWS_AS(exchange_hamiltonian(CouplingSpec{"Ancilla", "Cavity", 1.0, 0.0}, lay),
                  std::invalid_argument);
  CHECK_THROWS_AS(exchange_hamiltonian(CouplingSpec{"Qubit", "Qubit", 1.0, 0.0}, lay),
                  std::invalid_argument);
}

TEST_CASE("exchange hamiltonian conserves total excitation number") {
  const SubsystemLayout lay = three_qubit_layout();
  Mat n_tot = Mat::Zero(8, 8);
  for (int s = 0; s < 3; ++s)
    n_tot += embed(sigma_plus() * sigma_minus(), lay, s);
  for (double delta : {0.0, 1.3}) {
    CouplingSpec c{"Qubit", "Environment", kOmegaQE, delta};
    Mat h = exchange_hamiltonian(c, lay);
    CHECK(max_abs_diff(h * n_tot, n_tot * h) < 1e-12);
    CHECK(is_hermitian(h, 1e-12));
    CHECK(std::abs(h.trace()) < 1e-12);
  }
}

TEST_CASE("resonant transfer times match the Rabi formula") {
  // full swap at pi/Omega
  CouplingSpec qa{"Ancilla", "Qubit", kOmegaQA, 0.0};
  const double t_full = M_PI / kOmegaQA;
  CHECK(t_full == doctest::Approx(1.048).epsilon(0.005));
  CHECK(transfer_probability(qa, t_full) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(transfer_probability(qa, 0.5 * t_full) == doctest::Approx(0.5).epsilon(1e-9));

  CouplingSpec qe{"Ancilla", "Qubit", kOmegaQE, 0.0};
  CHECK(std::abs(transfer_probability(qe, 1.057) - 1.0) < 1e-6);
}

TEST_CASE("detuned transfer follows the generalized Rabi formula") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-4.0, 4.0);
  for (int trial = 0; trial < 20; ++trial) {
    const double om = 1.0 + std::abs(u(rng));
    const double dl = u(rng);
    const double t = 0.3 + 0.2 * trial;
    CouplingSpec c{"Ancilla", "Qubit", om, dl};
    const double g = std::sqrt(om * om + dl * dl);
    const double expect = om * om / (g * g) * std::pow(std::sin(0.5 * g * t), 2);
    CHECK(transfer_probability(c, t) == doctest::Approx(expect).epsilon(1e-9));
  }
}

TEST_CASE("intrinsic collapse operators") {
  SystemSpec spec = device_spec();
  Stage stage;
  stage.intrinsic_on = true;
  auto ops = collapse_operators(spec, stage);
  CHECK(ops.size() == 6);  // sigma_minus + sigma_z per qubit

  // Qubit row: gamma_phi = 1/39 - 1/62
  const double gphi_q = spec.qubit("Qubit").pure_dephasing_rate();
  CHECK(gphi_q == doctest::Approx(1.0 / 39 - 1.0 / 62).epsilon(1e-12));
  CHECK(gphi_q == doctest::Approx(0.00951).epsilon(1e-3));

  Stage off;
  off.intrinsic_on = false;
  CHECK(collapse_operators(spec, off).empty());
}

TEST_CASE("engineered dephasing and T1=inf handling") {
  SystemSpec spec = device_spec();
  spec.qubits[1].t1 = INFINITY;  // Qubit
  spec.qubits[1].t2_star = 39.0;

  Stage stage;
  stage.intrinsic_on = false;
  stage.engineered.push_back({"Environment", 3.0});
  auto ops = collapse_operators(spec, stage);
  REQUIRE(ops.size() == 1);
  CHECK(ops[0].rate == doctest::Approx(1.5));  // gamma/2
  CHECK(max_abs_diff(ops[0].op, embed(pauli_z(), spec.layout, 2)) == 0.0);

  // T1 = inf: only the sigma_z channel, Lindblad weight (1/T2*)/2
  Stage intr;
  intr.intrinsic_on = true;
  SystemSpec dephase_only = device_spec();
  for (auto& q : dephase_only.qubits) q.t1 = INFINITY;
  auto ops2 = collapse_operators(dephase_only, intr);
  CHECK(ops2.size() == 3);
  CHECK(ops2[1].rate == doctest::Approx(0.5 / 39.0));

  CHECK_THROWS_AS(collapse_operators(spec, Stage{1.0, {}, {}, {{"Qubit", -1.0}}, false}),
                  std::invalid_argument);
}

TEST_CASE("qubit parameter validation") {
  QubitParams bad_t2{"Qubit", 10.0, 25.0, 0.97};  // T2* > 2 T1
  CHECK_THROWS_AS(bad_t2.validate(), std::invalid_argument);
  QubitParams bad_f{"Qubit", 31.0, 39.0, 0.4};
  CHECK_THROWS_AS(bad_f.validate(), std::invalid_argument);
  QubitParams bad_name{"Cavity", 31.0, 39.0, 0.9};
  CHECK_THROWS_AS(bad_name.validate(), std::invalid_argument);
  CHECK_NOTHROW(device_spec().validate());
}

TEST_CASE("bell_state structure and phase placement") {
  Mat rho = bell_state(0.0);
  CHECK(std::abs(rho.trace().real() - 1.0) < 1e-15);
  CHECK(is_hermitian(rho, 1e-15));
  CHECK(max_abs_diff(rho * rho, rho) < 1e-14);  // pure
  CHECK(std::abs(rho(1, 1).real() - 0.5) < 1e-15);
  CHECK(std::abs(rho(2, 2).real() - 0.5) < 1e-15);

  // phi = pi/2: <01|rho|10> = +i/2 and its conjugate entry -i/2
  Mat rp = bell_state(M_PI / 2);
  CHECK(std::abs(rp(1, 2) - cxd(0, 0.5)) < 1e-15);
  CHECK(std::abs(rp(2, 1) - cxd(0, -0.5)) < 1e-15);
}

TEST_CASE("gate unitaries") {
  const SubsystemLayout lay = three_qubit_layout();
  Mat u = gate_unitary({"Qubit", 'x', M_PI}, lay);
  CHECK(max_abs_diff(u * u.adjoint(), identity(8)) < 1e-14);

  // pi rotation about x flips the Qubit: |000> -> -i|010>
  Vec v0 = Vec::Zero(8);
  v0(0) = 1.0;
  Vec v = u * v0;
  CHECK(std::abs(v(2) - cxd(0, -1)) < 1e-14);

  CHECK_THROWS_AS(gate_unitary({"Qubit", 'w', M_PI}, lay), std::invalid_argument);
}

TEST_CASE("noise amplitude to dephasing rate") {
  CHECK(dephasing_from_noise_amplitude(0.0) == 0.0);
  CHECK(dephasing_from_noise_amplitude(1.0) == doctest::Approx(1.84));
  CHECK(dephasing_from_noise_amplitude(4.0) == doctest::Approx(14.72));
  CHECK_THROWS_AS(dephasing_from_noise_amplitude(-0.1), std::invalid_argument);
}
