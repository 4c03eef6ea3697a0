#include "entprobe/tomography.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include <json.hpp>

namespace entprobe {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

// Pauli index measured by a setting axis: Ry90 -> X, RxM90 -> Y, I -> Z.
int pauli_index(Rotation r) {
  switch (r) {
    case Rotation::Ry90:
      return 1;
    case Rotation::RxM90:
      return 2;
    case Rotation::I:
      return 3;
  }
  throw std::invalid_argument("unknown rotation");
}

std::string rotation_name(Rotation r) {
  switch (r) {
    case Rotation::I:
      return "I";
    case Rotation::Ry90:
      return "Ry90";
    case Rotation::RxM90:
      return "Rx-90";
  }
  throw std::invalid_argument("unknown rotation");
}

Rotation rotation_from_name(const std::string& name) {
  if (name == "I") return Rotation::I;
  if (name == "Ry90") return Rotation::Ry90;
  if (name == "Rx-90") return Rotation::RxM90;
  throw std::invalid_argument("unknown rotation name: " + name);
}

Mat single_pauli(int p) {
  switch (p) {
    case 0:
      return identity(2);
    case 1:
      return pauli_x();
    case 2:
      return pauli_y();
    case 3:
      return pauli_z();
  }
  throw std::invalid_argument("pauli index out of range");
}

void check_two_qubit_state(const Mat& rho) {
  if (rho.rows() != 4 || rho.cols() != 4)
    throw std::invalid_argument("expected a 4x4 density matrix");
  if (!is_hermitian(rho, 1e-8)) throw std::invalid_argument("density matrix not Hermitian");
  if (std::abs(trace(rho).real() - 1.0) > 1e-6)
    throw std::invalid_argument("density matrix trace != 1");
}

// Lower-triangular factor in the fixed parameter layout; diagonal first.
Mat t_matrix(const TParams& p) {
  const auto& t = p.t;
  Mat T = Mat::Zero(4, 4);
  T(0, 0) = t[0];
  T(1, 1) = t[1];
  T(2, 2) = t[2];
  T(3, 3) = t[3];
  T(1, 0) = cxd(t[4], t[5]);
  T(2, 0) = cxd(t[6], t[7]);
  T(2, 1) = cxd(t[8], t[9]);
  T(3, 0) = cxd(t[10], t[11]);
  T(3, 1) = cxd(t[12], t[13]);
  T(3, 2) = cxd(t[14], t[15]);
  return T;
}

using Params = Eigen::Matrix<double, 16, 1>;
using ResidualVec = Eigen::Matrix<double, 16, 1>;

TParams to_tparams(const Params& v) {
  TParams p;
  for (int i = 0; i < 16; ++i) p.t[i] = v(i);
  return p;
}

ResidualVec residuals(const Params& v, const std::array<double, 16>& targets,
                      const std::vector<Mat>& paulis) {
  const Mat rho = t_to_rho(to_tparams(v));
  ResidualVec r;
  for (int k = 0; k < 16; ++k) r(k) = (paulis[k] * rho).trace().real() - targets[k];
  return r;
}

}  // namespace

std::vector<TomographySetting> all_settings() {
  const std::array<Rotation, 3> order = {Rotation::Ry90, Rotation::RxM90, Rotation::I};
  std::vector<TomographySetting> out;
  out.reserve(9);
  for (Rotation ra : order)
    for (Rotation rb : order) out.push_back({ra, rb});
  return out;
}

void ReadoutModel::validate() const {
  for (double f : {fidelity_a, fidelity_b})
    if (!(f > 0.5 && f <= 1.0))
      throw std::invalid_argument("readout fidelity must lie in (0.5, 1]");
}

Mat rotation_unitary_1q(Rotation r) {
  Mat u(2, 2);
  switch (r) {
    case Rotation::I:
      return identity(2);
    case Rotation::Ry90:
      u << 1, 1, -1, 1;
      return kInvSqrt2 * u;
    case Rotation::RxM90:
      u << 1, cxd(0, -1), cxd(0, -1), 1;
      return kInvSqrt2 * u;
  }
  throw std::invalid_argument("unknown rotation");
}

Mat rotation_unitary(const TomographySetting& s) {
  return kron(rotation_unitary_1q(s.rotation_a), rotation_unitary_1q(s.rotation_b));
}

std::array<double, 4> ideal_probabilities(const Mat& rho, const TomographySetting& s) {
  check_two_qubit_state(rho);
  const Mat u = rotation_unitary(s);
  const Mat rotated = u * rho * u.adjoint();
  std::array<double, 4> probs{};
  for (int k = 0; k < 4; ++k) probs[k] = std::max(0.0, rotated(k, k).real());
  return probs;
}

std::array<double, 4> apply_readout_confusion(const std::array<double, 4>& probs,
                                              const ReadoutModel& model) {
  model.validate();
  const double fa = model.fidelity_a;
  const double fb = model.fidelity_b;
  std::array<double, 4> out{};
  for (int oa = 0; oa < 2; ++oa) {
    for (int ob = 0; ob < 2; ++ob) {
      double acc = 0.0;
      for (int ia = 0; ia < 2; ++ia) {
        for (int ib = 0; ib < 2; ++ib) {
          const double wa = (oa == ia) ? fa : 1.0 - fa;
          const double wb = (ob == ib) ? fb : 1.0 - fb;
          acc += wa * wb * probs[2 * ia + ib];
        }
      }
      out[2 * oa + ob] = acc;
    }
  }
  return out;
}

std::array<long, 4> sample_counts(const std::array<double, 4>& probs, long shots,
                                  std::uint64_t seed) {
  if (shots < 0) throw std::invalid_argument("shots must be non-negative");
  double total = 0.0;
  for (double p : probs) {
    if (!(p >= -1e-9) || !std::isfinite(p))
      throw std::invalid_argument("outcome probabilities must be non-negative");
    total += std::max(0.0, p);
  }
  if (total <= 0.0) throw std::invalid_argument("outcome probabilities sum to zero");

  std::mt19937_64 rng(seed);
  std::array<long, 4> counts{};
  long remaining = shots;
  double mass = total;
  for (int k = 0; k < 3; ++k) {
    const double p = std::max(0.0, probs[k]);
    if (remaining == 0) break;
    double cond = (mass > 0.0) ? p / mass : 0.0;
    cond = std::min(1.0, std::max(0.0, cond));
    std::binomial_distribution<long> dist(remaining, cond);
    counts[k] = dist(rng);
    remaining -= counts[k];
    mass -= p;
  }
  counts[3] = remaining;
  return counts;
}

Mat pauli_operator(int pa, int pb) {
  if (pa < 0 || pa > 3 || pb < 0 || pb > 3)
    throw std::invalid_argument("pauli index out of range");
  return kron(single_pauli(pa), single_pauli(pb));
}

std::array<double, 16> expectations_from_counts(const std::vector<MeasurementRecord>& records) {
  if (records.size() != 9)
    throw std::invalid_argument("expected exactly 9 measurement records");
  std::array<bool, 16> have_corr{};
  std::array<double, 4> marg_a_sum{}, marg_b_sum{};
  std::array<int, 4> marg_a_n{}, marg_b_n{};
  std::array<double, 16> e{};
  e[0] = 1.0;

  for (const auto& rec : records) {
    const int pa = pauli_index(rec.setting.rotation_a);
    const int pb = pauli_index(rec.setting.rotation_b);
    const int slot = 4 * pa + pb;
    if (have_corr[slot]) throw std::invalid_argument("duplicate measurement setting");
    have_corr[slot] = true;

    double total = 0.0;
    for (double c : rec.counts) {
      if (!(c >= 0.0) || !std::isfinite(c))
        throw std::invalid_argument("counts must be non-negative");
      total += c;
    }
    if (total <= 0.0) throw std::invalid_argument("record has zero total counts");
    const double f00 = rec.counts[0] / total;
    const double f01 = rec.counts[1] / total;
    const double f10 = rec.counts[2] / total;
    const double f11 = rec.counts[3] / total;

    e[slot] = f00 - f01 - f10 + f11;
    marg_a_sum[pa] += f00 + f01 - f10 - f11;
    marg_a_n[pa] += 1;
    marg_b_sum[pb] += f00 - f01 + f10 - f11;
    marg_b_n[pb] += 1;
  }

  for (int p = 1; p < 4; ++p) {
    if (marg_a_n[p] == 0 || marg_b_n[p] == 0)
      throw std::invalid_argument("measurement settings do not cover all axes");
    e[4 * p] = marg_a_sum[p] / marg_a_n[p];
    e[p] = marg_b_sum[p] / marg_b_n[p];
  }
  return e;
}

Mat linear_inversion(const std::array<double, 16>& expectations) {
  Mat rho = Mat::Zero(4, 4);
  for (int pa = 0; pa < 4; ++pa)
    for (int pb = 0; pb < 4; ++pb)
      rho += expectations[4 * pa + pb] * pauli_operator(pa, pb);
  return 0.25 * rho;
}

Mat t_to_rho(const TParams& p) {
  const Mat T = t_matrix(p);
  const double norm = T.squaredNorm();
  if (!(norm > 0.0) || !std::isfinite(norm))
    throw std::invalid_argument("T parameters must not all vanish");
  return (T.adjoint() * T) / norm;
}

TParams rho_to_t(const Mat& rho) {
  check_two_qubit_state(rho);
  const Mat sym = 0.5 * (rho + rho.adjoint());
  EigResult eig = hermitian_eigs(sym);

  // Project to strictly positive spectrum so the Cholesky factor exists.
  const double clip = 1e-12;
  double total = 0.0;
  for (int i = 0; i < 4; ++i) {
    eig.values(i) = std::max(eig.values(i), clip);
    total += eig.values(i);
  }
  Mat pos = Mat::Zero(4, 4);
  for (int i = 0; i < 4; ++i)
    pos += (eig.values(i) / total) * eig.vectors.col(i) * eig.vectors.col(i).adjoint();

  // rho = T^dag T with lower-triangular T is the Cholesky factorization of
  // the index-reversed matrix, reversed back.
  const Mat reversed = pos.reverse();
  Eigen::LLT<Mat> llt(reversed);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("Cholesky factorization of projected state failed");
  const Mat L = llt.matrixL();
  const Mat T = Mat(L.adjoint()).reverse();

  TParams out;
  out.t[0] = T(0, 0).real();
  out.t[1] = T(1, 1).real();
  out.t[2] = T(2, 2).real();
  out.t[3] = T(3, 3).real();
  out.t[4] = T(1, 0).real();
  out.t[5] = T(1, 0).imag();
  out.t[6] = T(2, 0).real();
  out.t[7] = T(2, 0).imag();
  out.t[8] = T(2, 1).real();
  out.t[9] = T(2, 1).imag();
  out.t[10] = T(3, 0).real();
  out.t[11] = T(3, 0).imag();
  out.t[12] = T(3, 1).real();
  out.t[13] = T(3, 1).imag();
  out.t[14] = T(3, 2).real();
  out.t[15] = T(3, 2).imag();
  return out;
}

std::pair<Mat, MleDiagnostics> mle_reconstruct(const std::array<double, 16>& expectations) {
  std::vector<Mat> paulis;
  paulis.reserve(16);
  for (int pa = 0; pa < 4; ++pa)
    for (int pb = 0; pb < 4; ++pb) paulis.push_back(pauli_operator(pa, pb));

  std::array<double, 16> targets = expectations;
  targets[0] = 1.0;  // trace constraint; t_to_rho already enforces it

  Params v;
  {
    const TParams seed = rho_to_t(linear_inversion(targets));
    for (int i = 0; i < 16; ++i) v(i) = seed.t[i];
  }

  const int max_iters = 1000;
  const double grad_tol = 1e-10;
  ResidualVec r = residuals(v, targets, paulis);
  double cost = r.squaredNorm();
  double lambda = 1e-3;

  MleDiagnostics diag;
  for (int iter = 0; iter < max_iters; ++iter) {
    diag.iterations = iter;

    // Central-difference Jacobian of the residual vector.
    Eigen::Matrix<double, 16, 16> J;
    for (int j = 0; j < 16; ++j) {
      const double h = 1e-5 * std::max(1.0, std::abs(v(j)));
      Params vp = v, vm = v;
      vp(j) += h;
      vm(j) -= h;
      J.col(j) = (residuals(vp, targets, paulis) - residuals(vm, targets, paulis)) / (2.0 * h);
    }

    const Eigen::Matrix<double, 16, 1> grad = 2.0 * J.transpose() * r;
    diag.gradient_norm = grad.norm();
    if (diag.gradient_norm < grad_tol) {
      diag.converged = true;
      break;
    }

    const Eigen::Matrix<double, 16, 16> JtJ = J.transpose() * J;
    bool accepted = false;
    for (int attempt = 0; attempt < 40; ++attempt) {
      Eigen::Matrix<double, 16, 16> damped = JtJ;
      damped.diagonal() += lambda * JtJ.diagonal();
      damped.diagonal().array() += 1e-14;
      const Params step = damped.ldlt().solve(-J.transpose() * r);
      const Params v_try = v + step;
      const ResidualVec r_try = residuals(v_try, targets, paulis);
      const double cost_try = r_try.squaredNorm();
      if (cost_try < cost) {
        v = v_try;
        r = r_try;
        cost = cost_try;
        lambda = std::max(lambda / 3.0, 1e-12);
        accepted = true;
        break;
      }
      lambda = std::min(lambda * 10.0, 1e12);
    }
    if (!accepted) break;  // damping exhausted; gradient norm reported as-is
  }
  diag.final_cost = cost;
  return {t_to_rho(to_tparams(v)), diag};
}

std::pair<Mat, MleDiagnostics> mle_reconstruct(const std::vector<MeasurementRecord>& records) {
  return mle_reconstruct(expectations_from_counts(records));
}

std::string records_to_json(const std::vector<MeasurementRecord>& records) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& rec : records) {
    nlohmann::json counts = nlohmann::json::array();
    for (double c : rec.counts) {
      const double rounded = std::nearbyint(c);
      if (std::abs(c - rounded) < 1e-9 && std::abs(c) < 9e15)
        counts.push_back(static_cast<long long>(rounded));
      else
        counts.push_back(c);
    }
    arr.push_back({{"setting",
                    {rotation_name(rec.setting.rotation_a), rotation_name(rec.setting.rotation_b)}},
                   {"counts", counts}});
  }
  return arr.dump(2);
}

std::vector<MeasurementRecord> records_from_json(const std::string& text) {
  nlohmann::json parsed;
  try {
    parsed = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("invalid measurement JSON: ") + e.what());
  }
  if (!parsed.is_array()) throw std::invalid_argument("measurement JSON must be an array");

  std::vector<MeasurementRecord> out;
  out.reserve(parsed.size());
  for (const auto& item : parsed) {
    if (!item.is_object() || !item.contains("setting") || !item.contains("counts"))
      throw std::invalid_argument("each record needs \"setting\" and \"counts\"");
    const auto& setting = item.at("setting");
    const auto& counts = item.at("counts");
    if (!setting.is_array() || setting.size() != 2)
      throw std::invalid_argument("\"setting\" must list two rotation names");
    if (!counts.is_array() || counts.size() != 4)
      throw std::invalid_argument("\"counts\" must list four outcome values");
    MeasurementRecord rec;
    try {
      rec.setting.rotation_a = rotation_from_name(setting.at(0).get<std::string>());
      rec.setting.rotation_b = rotation_from_name(setting.at(1).get<std::string>());
      for (int k = 0; k < 4; ++k) rec.counts[k] = counts.at(k).get<double>();
    } catch (const nlohmann::json::exception& e) {
      throw std::invalid_argument(std::string("invalid measurement JSON: ") + e.what());
    }
    out.push_back(rec);
  }
  return out;
}

}  // namespace entprobe
