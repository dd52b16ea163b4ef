#include "postcap/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace postcap {

namespace {

// Decomposes a flat index into per-factor digits, first factor most significant.
void to_digits(Eigen::Index flat, const std::vector<Eigen::Index>& dims,
               std::vector<Eigen::Index>& digits) {
  for (int k = static_cast<int>(dims.size()) - 1; k >= 0; --k) {
    digits[k] = flat % dims[k];
    flat /= dims[k];
  }
}

Eigen::Index from_digits(const std::vector<Eigen::Index>& digits,
                         const std::vector<Eigen::Index>& dims) {
  Eigen::Index flat = 0;
  for (std::size_t k = 0; k < dims.size(); ++k) flat = flat * dims[k] + digits[k];
  return flat;
}

Eigen::Index total_dim(const std::vector<Eigen::Index>& dims) {
  Eigen::Index d = 1;
  for (auto x : dims) d *= x;
  return d;
}

}  // namespace

Mat identity(Eigen::Index d) { return Mat::Identity(d, d); }

Vec basis_ket(Eigen::Index d, Eigen::Index k) {
  Vec v = Vec::Zero(d);
  v(k) = 1.0;
  return v;
}

Mat max_entangled_state(Eigen::Index d) {
  Vec phi = Vec::Zero(d * d);
  for (Eigen::Index i = 0; i < d; ++i) phi(i * d + i) = 1.0 / std::sqrt(double(d));
  return phi * phi.adjoint();
}

double max_abs(const Mat& m) {
  if (m.size() == 0) return 0.0;
  return m.cwiseAbs().maxCoeff();
}

bool is_hermitian(const Mat& m, double tol) {
  if (m.rows() != m.cols()) return false;
  double dev = max_abs(m - m.adjoint());
  return dev <= tol * std::max(1.0, max_abs(m));
}

Mat require_hermitian(const Mat& m, double tol, const char* what) {
  if (!is_hermitian(m, tol)) {
    std::ostringstream os;
    os << what << " is not Hermitian within tolerance " << tol;
    throw NotHermitian(os.str());
  }
  return 0.5 * (m + m.adjoint());
}

double min_eig(const Mat& m) {
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (m + m.adjoint()),
                                        Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double max_eig(const Mat& m) {
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (m + m.adjoint()),
                                        Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

bool is_psd(const Mat& m, double tol) {
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (m + m.adjoint()),
                                        Eigen::EigenvaluesOnly);
  double lo = es.eigenvalues().minCoeff();
  double hi = es.eigenvalues().maxCoeff();
  return lo >= -tol * std::max(1.0, hi);
}

void require_psd(const Mat& m, double tol, const char* what) {
  if (!is_psd(m, tol)) {
    std::ostringstream os;
    os << what << " is not positive semidefinite within tolerance " << tol;
    throw NotPsd(os.str());
  }
}

double hs_inner(const Mat& a, const Mat& b) {
  return (a.adjoint() * b).trace().real();
}

double trace_norm_herm(const Mat& m) {
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (m + m.adjoint()),
                                        Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().sum();
}

Spectrum eig_hermitian(const Mat& m, double herm_tol) {
  Mat h = require_hermitian(m, herm_tol, "eig_hermitian input");
  Eigen::SelfAdjointEigenSolver<Mat> es(h);
  if (es.info() != Eigen::Success) throw SolverFailure("Hermitian eigensolver failed");
  // Eigen returns ascending order; flip to descending.
  Eigen::Index n = h.rows();
  Spectrum s;
  s.values.resize(n);
  s.vectors.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    s.values(i) = es.eigenvalues()(n - 1 - i);
    s.vectors.col(i) = es.eigenvectors().col(n - 1 - i);
  }
  return s;
}

Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Mat support_projector(const Mat& m, double rank_tol) {
  Spectrum s = eig_hermitian(m);
  double scale = s.values.cwiseAbs().maxCoeff();
  Eigen::Index n = m.rows();
  Mat proj = Mat::Zero(n, n);
  if (scale == 0.0) return proj;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(s.values(i)) > rank_tol * scale)
      proj += s.vectors.col(i) * s.vectors.col(i).adjoint();
  }
  return proj;
}

Mat pseudo_inv_sqrt(const Mat& m, double rank_tol) {
  Spectrum s = eig_hermitian(m);
  double scale = s.values.cwiseAbs().maxCoeff();
  Eigen::Index n = m.rows();
  Mat out = Mat::Zero(n, n);
  if (scale == 0.0) return out;
  for (Eigen::Index i = 0; i < n; ++i) {
    double lam = s.values(i);
    if (lam <= rank_tol * scale) continue;  // null directions, including tiny negatives
    out += (1.0 / std::sqrt(lam)) * s.vectors.col(i) * s.vectors.col(i).adjoint();
  }
  return out;
}

Mat partial_trace(const Mat& m, const std::vector<Eigen::Index>& dims,
                  const std::vector<int>& keep) {
  Eigen::Index d = total_dim(dims);
  if (m.rows() != d || m.cols() != d)
    throw DimensionMismatch("partial_trace: dims do not match matrix size");
  std::vector<int> traced;
  for (int k = 0; k < static_cast<int>(dims.size()); ++k)
    if (std::find(keep.begin(), keep.end(), k) == keep.end()) traced.push_back(k);
  for (int k : keep)
    if (k < 0 || k >= static_cast<int>(dims.size()))
      throw DimensionMismatch("partial_trace: keep index out of range");

  std::vector<Eigen::Index> kept_dims, traced_dims;
  for (int k : keep) kept_dims.push_back(dims[k]);
  for (int k : traced) traced_dims.push_back(dims[k]);
  Eigen::Index dk = total_dim(kept_dims);
  Eigen::Index dt = total_dim(traced_dims);

  Mat out = Mat::Zero(dk, dk);
  std::vector<Eigen::Index> row(dims.size()), col(dims.size());
  std::vector<Eigen::Index> kd(kept_dims.size()), kc(kept_dims.size()), td(traced_dims.size());
  for (Eigen::Index r = 0; r < dk; ++r) {
    to_digits(r, kept_dims, kd);
    for (Eigen::Index c = 0; c < dk; ++c) {
      to_digits(c, kept_dims, kc);
      cplx acc = 0.0;
      for (Eigen::Index t = 0; t < dt; ++t) {
        to_digits(t, traced_dims, td);
        for (std::size_t k = 0; k < keep.size(); ++k) {
          row[keep[k]] = kd[k];
          col[keep[k]] = kc[k];
        }
        for (std::size_t k = 0; k < traced.size(); ++k) {
          row[traced[k]] = td[k];
          col[traced[k]] = td[k];
        }
        acc += m(from_digits(row, dims), from_digits(col, dims));
      }
      out(r, c) = acc;
    }
  }
  return out;
}

Mat permute_systems(const Mat& m, const std::vector<Eigen::Index>& dims,
                    const std::vector<int>& perm) {
  Eigen::Index d = total_dim(dims);
  if (m.rows() != d || m.cols() != d)
    throw DimensionMismatch("permute_systems: dims do not match matrix size");
  if (perm.size() != dims.size())
    throw DimensionMismatch("permute_systems: perm length does not match dims");

  std::vector<Eigen::Index> new_dims(dims.size());
  for (std::size_t k = 0; k < perm.size(); ++k) new_dims[k] = dims[perm[k]];

  // index map: flat index in the original ordering for each new flat index
  std::vector<Eigen::Index> map(d);
  std::vector<Eigen::Index> nd(dims.size()), od(dims.size());
  for (Eigen::Index i = 0; i < d; ++i) {
    to_digits(i, new_dims, nd);
    for (std::size_t k = 0; k < perm.size(); ++k) od[perm[k]] = nd[k];
    map[i] = from_digits(od, dims);
  }

  Mat out(d, d);
  for (Eigen::Index r = 0; r < d; ++r)
    for (Eigen::Index c = 0; c < d; ++c) out(r, c) = m(map[r], map[c]);
  return out;
}

}  // namespace postcap
