#pragma once

// Shared random-object generators for the test suites. Deterministic: every
// suite seeds its own mt19937_64.

#include <random>

#include "entprobe/qops.hpp"

namespace testutil {

using entprobe::Mat;
using entprobe::Vec;
using entprobe::cxd;

inline Vec random_vector(int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Vec v(dim);
  for (int i = 0; i < dim; ++i) v(i) = cxd(g(rng), g(rng));
  return v;
}

inline Mat random_pure(int dim, std::mt19937_64& rng) {
  Vec v = random_vector(dim, rng);
  v.normalize();
  return v * v.adjoint();
}

// Full-rank mixed state (Wishart construction).
inline Mat random_density(int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Mat G(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) G(i, j) = cxd(g(rng), g(rng));
  Mat rho = G * G.adjoint();
  return rho / rho.trace().real();
}

inline Mat random_hermitian(int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Mat A(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) A(i, j) = cxd(g(rng), g(rng));
  return 0.5 * (A + Mat(A.adjoint()));
}

// Haar-random unitary via QR with phase fix.
inline Mat random_unitary(int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Mat A(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) A(i, j) = cxd(g(rng), g(rng));
  Eigen::HouseholderQR<Mat> qr(A);
  Mat Q = qr.householderQ();
  Mat R = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int i = 0; i < dim; ++i) {
    cxd d = R(i, i);
    Q.col(i) *= (std::abs(d) > 0 ? d / std::abs(d) : cxd(1, 0));
  }
  return Q;
}

inline double max_abs_diff(const Mat& a, const Mat& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace testutil
