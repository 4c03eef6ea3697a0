#pragma once

// Simulated two-qubit measurement pipeline (rotation settings, readout
// confusion, shot sampling) and maximum-likelihood state reconstruction.
//
// Pauli-expectation indexing used throughout: index = 4*pa + pb with the
// single-qubit order {I, X, Y, Z}; slot 0 is the trivial <II> = 1.

#include <array>
#include <cstdint>
#include <utility>

#include "entprobe/qops.hpp"

namespace entprobe {

enum class Rotation { I, Ry90, RxM90 };

struct TomographySetting {
  Rotation rotation_a = Rotation::I;
  Rotation rotation_b = Rotation::I;

  bool operator==(const TomographySetting&) const = default;
};

// The 9 settings in measurement-operator order XX, XY, XZ, YX, ..., ZZ.
std::vector<TomographySetting> all_settings();

struct ReadoutModel {
  double fidelity_a = 1.0;  // first (Ancilla) qubit
  double fidelity_b = 1.0;  // second (Qubit) qubit

  void validate() const;
};

struct MeasurementRecord {
  TomographySetting setting;
  std::array<double, 4> counts{};  // outcome counts {00,01,10,11}, or probabilities
};

// 16 parameters of the lower-triangular factor T; t[0..3] is the diagonal.
struct TParams {
  std::array<double, 16> t{};
};

// Single-qubit rotation realizing the setting (Ry90 measures X, RxM90
// measures Y when a Z measurement follows).
Mat rotation_unitary_1q(Rotation r);

// kron of the two single-qubit rotations.
Mat rotation_unitary(const TomographySetting& s);

// diag of U rho U^dag: outcome probabilities {00,01,10,11}.
std::array<double, 4> ideal_probabilities(const Mat& rho, const TomographySetting& s);

// Per-qubit symmetric bit-flip confusion with probability 1-F each.
std::array<double, 4> apply_readout_confusion(const std::array<double, 4>& probs,
                                              const ReadoutModel& model);

// Deterministic multinomial draw.
std::array<long, 4> sample_counts(const std::array<double, 4>& probs, long shots,
                                  std::uint64_t seed);

// sigma_pa (x) sigma_pb with 0=I, 1=X, 2=Y, 3=Z.
Mat pauli_operator(int pa, int pb);

// Signed-sum expectations from all 9 settings; duplicated marginal estimates
// are averaged; slot 0 is fixed to 1.
std::array<double, 16> expectations_from_counts(const std::vector<MeasurementRecord>& records);

// rho = (1/4) sum_k <P_k> P_k (not necessarily PSD for noisy input).
Mat linear_inversion(const std::array<double, 16>& expectations);

// rho = T^dag T / Tr(T^dag T); PSD and trace-1 by construction.
Mat t_to_rho(const TParams& t);

// Inverse used to seed the optimizer: PSD-projected (eigenvalue clipping and
// renormalization) then factored back into T parameters.
TParams rho_to_t(const Mat& rho);

struct MleDiagnostics {
  int iterations = 0;
  double final_cost = 0.0;
  double gradient_norm = 0.0;
  bool converged = false;
};

// Damped Gauss-Newton least squares over TParams against the 16 targets.
std::pair<Mat, MleDiagnostics> mle_reconstruct(const std::array<double, 16>& expectations);
std::pair<Mat, MleDiagnostics> mle_reconstruct(const std::vector<MeasurementRecord>& records);

// JSON round-trip for measurement records (rotation names "I", "Ry90", "Rx-90").
std::string records_to_json(const std::vector<MeasurementRecord>& records);
std::vector<MeasurementRecord> records_from_json(const std::string& text);

}  // namespace entprobe
