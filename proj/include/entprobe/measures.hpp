#pragma once

// Entanglement and non-Markovianity quantifiers, decay-rate fitting and the
// Zeno-scaling prediction. Pure functions throughout.

#include <utility>

#include "entprobe/qops.hpp"

namespace entprobe {

struct ConcurrenceSeries {
  std::vector<double> times;   // uniform ascending grid, us
  std::vector<double> values;  // within [-1e-9, 1 + 1e-9]

  void validate() const;
};

struct DecayFit {
  double rate = 0.0;      // 1/us, >= 0
  double amplitude = 0.0;
  double residual = 0.0;  // weighted RMS of log-domain residuals
  std::vector<std::pair<double, double>> points_used;
};

// Wootters concurrence of a two-qubit state.
double concurrence(const Mat& rho);

// <psi(phi)| rho |psi(phi)> against (|10> + e^{i phi}|01>)/sqrt(2).
double bell_fidelity(const Mat& rho, double phi);

// Uhlmann fidelity (tr sqrt(sqrt(rho) sigma sqrt(rho)))^2 between states.
double state_fidelity(const Mat& rho, const Mat& sigma);

// Accumulated concurrence rise: sum_i |C_{i+1}-C_i| - (C_0 - C_end), i.e.
// twice the total rise; zero exactly when the series is non-increasing.
double non_markovianity(const ConcurrenceSeries& series);

// Variant for shot-noise-limited series: only rises exceeding eps count.
double non_markovianity_thresholded(const ConcurrenceSeries& series, double eps);

// t = 0 point plus all strict local maxima.
std::vector<std::pair<double, double>> revival_envelope(const ConcurrenceSeries& series);

// Least-squares A e^{-Gamma t} via linear regression on log-values with
// weights proportional to the value; non-positive values are excluded.
DecayFit fit_exponential_decay(const std::vector<std::pair<double, double>>& points);

// Decay-rate extraction rule used by the scenario layer: fit the revival
// envelope when it has >= 3 points, otherwise fit the full series.
DecayFit fit_concurrence_decay(const ConcurrenceSeries& series);

// Zeno-suppressed concurrence decay prediction Omega^2/(4 gamma) + Gamma0.
double zeno_rate(double omega, double gamma, double gamma0);

}  // namespace entprobe
