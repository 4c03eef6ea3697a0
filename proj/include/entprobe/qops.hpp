#pragma once

// Dense complex linear-algebra kernels and quantum-operator utilities for
// register dimensions up to 16 (4 qubits). Everything here is a pure function;
// values may be freely shared across threads.

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace entprobe {

using cxd = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

// Ordered tensor factorization of a register: dims per subsystem plus labels.
struct SubsystemLayout {
  std::vector<int> dims;
  std::vector<std::string> labels;

  int dim() const;                              // product of dims
  int site_of(const std::string& label) const;  // throws on unknown label
};

// Basis convention used throughout: per-qubit index 0 = ground, 1 = excited;
// sigma_z = diag(1,-1) (ground -> +1), sigma_minus = |g><e| (decay).
Mat pauli_x();
Mat pauli_y();
Mat pauli_z();
Mat sigma_plus();
Mat sigma_minus();
Mat identity(int n);

Mat kron(const Mat& a, const Mat& b);

// Single-site operator embedded into the full register (identity elsewhere).
Mat embed(const Mat& op, const SubsystemLayout& layout, int site);

// Reduced density matrix over the kept subsystems (ascending site order).
Mat partial_trace(const Mat& rho, const SubsystemLayout& layout,
                  const std::vector<int>& keep);

Mat adjoint(const Mat& a);
cxd trace(const Mat& a);
double frobenius_distance(const Mat& a, const Mat& b);

bool is_hermitian(const Mat& a, double tol = 1e-9);

struct EigResult {
  Eigen::VectorXd values;  // ascending
  Mat vectors;             // columns match values
};

// Hermitian eigendecomposition; rejects inputs with max |h - h^dag| > 1e-9.
EigResult hermitian_eigs(const Mat& h);

// 1/2 * sum |eig(rho1 - rho2)|; both inputs must be Hermitian.
double trace_distance(const Mat& rho1, const Mat& rho2);

// Spectral square root with negative eigenvalues clamped to zero.
Mat sqrt_psd(const Mat& rho);

}  // namespace entprobe
