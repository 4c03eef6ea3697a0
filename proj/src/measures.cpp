#include "entprobe/measures.hpp"

#include <algorithm>
#include <cmath>

#include "entprobe/model.hpp"

namespace entprobe {

void ConcurrenceSeries::validate() const {
  if (times.size() != values.size())
    throw std::invalid_argument("ConcurrenceSeries: times/values size mismatch");
  if (times.size() < 2) throw std::invalid_argument("ConcurrenceSeries: need at least 2 samples");
  const double dt = times[1] - times[0];
  if (!(dt > 0)) throw std::invalid_argument("ConcurrenceSeries: times must be increasing");
  for (size_t k = 1; k < times.size(); ++k)
    if (std::abs(times[k] - times[k - 1] - dt) > 1e-9)
      throw std::invalid_argument("ConcurrenceSeries: non-uniform time grid");
  for (double v : values)
    if (v < -1e-9 || v > 1.0 + 1e-9)
      throw std::invalid_argument("ConcurrenceSeries: value outside [0, 1]");
}

namespace {

void check_two_qubit_state(const Mat& rho) {
  if (rho.rows() != 4 || rho.cols() != 4)
    throw std::invalid_argument("expected a 4x4 two-qubit state");
  if (!is_hermitian(rho, 1e-8) || std::abs(rho.trace().real() - 1.0) > 1e-6)
    throw std::invalid_argument("input is not a valid density matrix");
}

}  // namespace

double concurrence(const Mat& rho) {
  check_two_qubit_state(rho);
  const Mat yy = kron(pauli_y(), pauli_y());
  const Mat rho_tilde = yy * rho.conjugate() * yy;
  // Hermitian route: eigenvalues of sqrt(rho) rho_tilde sqrt(rho) equal those
  // of rho rho_tilde but keep the problem self-adjoint.
  const Mat r = sqrt_psd(rho);
  const EigResult e = hermitian_eigs(r * rho_tilde * r);
  Eigen::Vector4d lam;
  for (int k = 0; k < 4; ++k) lam(k) = std::sqrt(std::max(0.0, e.values(3 - k)));  // descending
  return std::max(0.0, lam(0) - lam(1) - lam(2) - lam(3));
}

double bell_fidelity(const Mat& rho, double phi) {
  check_two_qubit_state(rho);
  return (bell_state(phi) * rho).trace().real();
}

double state_fidelity(const Mat& rho, const Mat& sigma) {
  if (rho.rows() != sigma.rows() || rho.cols() != sigma.cols())
    throw std::invalid_argument("state_fidelity: dimension mismatch");
  const Mat r = sqrt_psd(rho);
  const EigResult e = hermitian_eigs(r * sigma * r);
  double sum = 0.0;
  for (Eigen::Index k = 0; k < e.values.size(); ++k)
    sum += std::sqrt(std::max(0.0, e.values(k)));
  return sum * sum;
}

double non_markovianity(const ConcurrenceSeries& series) {
  series.validate();
  double total = 0.0;
  for (size_t k = 1; k < series.values.size(); ++k)
    total += std::abs(series.values[k] - series.values[k - 1]);
  return total - (series.values.front() - series.values.back());
}

double non_markovianity_thresholded(const ConcurrenceSeries& series, double eps) {
  series.validate();
  if (eps < 0) throw std::invalid_argument("non_markovianity_thresholded: negative threshold");
  double rises = 0.0;
  for (size_t k = 1; k < series.values.size(); ++k) {
    const double d = series.values[k] - series.values[k - 1];
    if (d > eps) rises += d;
  }
  return 2.0 * rises;
}

std::vector<std::pair<double, double>> revival_envelope(const ConcurrenceSeries& series) {
  series.validate();
  if (series.values.size() < 3)
    throw std::invalid_argument("revival_envelope: need at least 3 samples");
  std::vector<std::pair<double, double>> env;
  env.emplace_back(series.times.front(), series.values.front());
  for (size_t k = 1; k + 1 < series.values.size(); ++k)
    if (series.values[k] > series.values[k - 1] && series.values[k] > series.values[k + 1])
      env.emplace_back(series.times[k], series.values[k]);
  return env;
}

DecayFit fit_exponential_decay(const std::vector<std::pair<double, double>>& points) {
  std::vector<std::pair<double, double>> used;
  for (const auto& p : points)
    if (p.second > 0) used.push_back(p);
  if (used.size() < 3)
    throw std::invalid_argument("fit_exponential_decay: fewer than 3 positive points");

  // weighted linear regression of log(v) on t, weights proportional to v
  double sw = 0, st = 0, sy = 0;
  for (const auto& [t, v] : used) {
    sw += v;
    st += v * t;
    sy += v * std::log(v);
  }
  const double tbar = st / sw, ybar = sy / sw;
  double num = 0, den = 0;
  for (const auto& [t, v] : used) {
    num += v * (t - tbar) * (std::log(v) - ybar);
    den += v * (t - tbar) * (t - tbar);
  }
  if (den == 0) throw std::invalid_argument("fit_exponential_decay: degenerate time values");
  const double slope = num / den;
  const double intercept = ybar - slope * tbar;

  DecayFit fit;
  fit.rate = std::max(0.0, -slope);
  fit.amplitude = std::exp(intercept);
  double ss = 0;
  for (const auto& [t, v] : used) {
    const double r = std::log(v) - (intercept + slope * t);
    ss += v * r * r;
  }
  fit.residual = std::sqrt(ss / sw);
  fit.points_used = std::move(used);
  return fit;
}

DecayFit fit_concurrence_decay(const ConcurrenceSeries& series) {
  const auto env = revival_envelope(series);
  if (env.size() >= 3) return fit_exponential_decay(env);
  std::vector<std::pair<double, double>> all;
  for (size_t k = 0; k < series.times.size(); ++k)
    all.emplace_back(series.times[k], series.values[k]);
  return fit_exponential_decay(all);
}

double zeno_rate(double omega, double gamma, double gamma0) {
  if (!(gamma > 0)) throw std::invalid_argument("zeno_rate: gamma must be positive");
  return omega * omega / (4.0 * gamma) + gamma0;
}

}  // namespace entprobe
