#include "entprobe/qops.hpp"

#include <algorithm>
#include <cmath>

namespace entprobe {

int SubsystemLayout::dim() const {
  int d = 1;
  for (int k : dims) d *= k;
  return d;
}

int SubsystemLayout::site_of(const std::string& label) const {
  for (size_t i = 0; i < labels.size(); ++i)
    if (labels[i] == label) return static_cast<int>(i);
  throw std::invalid_argument("unknown subsystem label: " + label);
}

Mat pauli_x() {
  Mat m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

Mat pauli_y() {
  Mat m(2, 2);
  m << 0, cxd(0, -1), cxd(0, 1), 0;
  return m;
}

Mat pauli_z() {
  Mat m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

Mat sigma_minus() {
  Mat m(2, 2);
  m << 0, 1, 0, 0;
  return m;
}

Mat sigma_plus() {
  Mat m(2, 2);
  m << 0, 0, 1, 0;
  return m;
}

Mat identity(int n) { return Mat::Identity(n, n); }

Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Mat embed(const Mat& op, const SubsystemLayout& layout, int site) {
  if (site < 0 || site >= static_cast<int>(layout.dims.size()))
    throw std::invalid_argument("embed: site out of range");
  if (op.rows() != layout.dims[site] || op.cols() != layout.dims[site])
    throw std::invalid_argument("embed: operator dimension mismatch");
  Mat out = Mat::Identity(1, 1);
  for (size_t k = 0; k < layout.dims.size(); ++k)
    out = kron(out, static_cast<int>(k) == site ? op
                                                : Mat(identity(layout.dims[k])));
  return out;
}

Mat partial_trace(const Mat& rho, const SubsystemLayout& layout,
                  const std::vector<int>& keep) {
  const int n = static_cast<int>(layout.dims.size());
  if (rho.rows() != rho.cols() || rho.rows() != layout.dim())
    throw std::invalid_argument("partial_trace: dimension mismatch");
  for (int k : keep)
    if (k < 0 || k >= n) throw std::invalid_argument("partial_trace: keep index out of range");

  std::vector<int> kept(keep), traced;
  std::sort(kept.begin(), kept.end());
  for (int s = 0; s < n; ++s)
    if (!std::binary_search(kept.begin(), kept.end(), s)) traced.push_back(s);

  int dk = 1, dt = 1;
  for (int s : kept) dk *= layout.dims[s];
  for (int s : traced) dt *= layout.dims[s];

  // strides of each site in the flattened register index (row-major tensor order)
  std::vector<int> stride(n, 1);
  for (int s = n - 2; s >= 0; --s) stride[s] = stride[s + 1] * layout.dims[s + 1];

  auto full_index = [&](int ik, int it) {
    int idx = 0, r = ik;
    for (int s = static_cast<int>(kept.size()) - 1; s >= 0; --s) {
      idx += (r % layout.dims[kept[s]]) * stride[kept[s]];
      r /= layout.dims[kept[s]];
    }
    r = it;
    for (int s = static_cast<int>(traced.size()) - 1; s >= 0; --s) {
      idx += (r % layout.dims[traced[s]]) * stride[traced[s]];
      r /= layout.dims[traced[s]];
    }
    return idx;
  };

  Mat out = Mat::Zero(dk, dk);
  for (int i = 0; i < dk; ++i)
    for (int j = 0; j < dk; ++j)
      for (int t = 0; t < dt; ++t) out(i, j) += rho(full_index(i, t), full_index(j, t));
  return out;
}

Mat adjoint(const Mat& a) { return a.adjoint(); }

cxd trace(const Mat& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("trace: non-square matrix");
  return a.trace();
}

double frobenius_distance(const Mat& a, const Mat& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument("frobenius_distance: dimension mismatch");
  return (a - b).norm();
}

bool is_hermitian(const Mat& a, double tol) {
  if (a.rows() != a.cols()) return false;
  return (a - a.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

EigResult hermitian_eigs(const Mat& h) {
  if (!is_hermitian(h)) throw std::invalid_argument("hermitian_eigs: input not Hermitian");
  Eigen::SelfAdjointEigenSolver<Mat> es(h);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("hermitian_eigs: eigensolver failed");
  return {es.eigenvalues(), es.eigenvectors()};
}

double trace_distance(const Mat& rho1, const Mat& rho2) {
  if (rho1.rows() != rho2.rows() || rho1.cols() != rho2.cols())
    throw std::invalid_argument("trace_distance: dimension mismatch");
  if (!is_hermitian(rho1) || !is_hermitian(rho2))
    throw std::invalid_argument("trace_distance: inputs must be Hermitian");
  const EigResult e = hermitian_eigs(rho1 - rho2);
  return 0.5 * e.values.cwiseAbs().sum();
}

Mat sqrt_psd(const Mat& rho) {
  const EigResult e = hermitian_eigs(rho);
  Eigen::VectorXd s = e.values.cwiseMax(0.0).cwiseSqrt();
  return e.vectors * s.asDiagonal() * e.vectors.adjoint();
}

}  // namespace entprobe
