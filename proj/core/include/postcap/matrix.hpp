#ifndef POSTCAP_MATRIX_HPP
#define POSTCAP_MATRIX_HPP

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "postcap/errors.hpp"
#include "postcap/tolerances.hpp"

namespace postcap {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

// Eigendecomposition of a Hermitian matrix, eigenvalues descending,
// eigenvector columns orthonormal and aligned with `values`.
struct Spectrum {
  Eigen::VectorXd values;
  Mat vectors;
};

//==============================================================================
// Basic constructions
//==============================================================================

// d x d identity.
Mat identity(Eigen::Index d);

// Computational basis ket |k> in dimension d.
Vec basis_ket(Eigen::Index d, Eigen::Index k);

// Maximally entangled state (1/d) sum_ij |ii><jj| on C^d (x) C^d, trace 1.
Mat max_entangled_state(Eigen::Index d);

//==============================================================================
// Checks and scalar maps
//==============================================================================

// Largest absolute entry.
double max_abs(const Mat& m);

// True when ||m - m^dag||_max is within tol (scaled by max(1, ||m||_max)).
bool is_hermitian(const Mat& m, double tol = kHermTol);

// Throws NotHermitian unless is_hermitian; returns the Hermitized (m + m^dag)/2.
Mat require_hermitian(const Mat& m, double tol = kHermTol, const char* what = "matrix");

// Smallest eigenvalue of a Hermitian matrix.
double min_eig(const Mat& m);

// Largest eigenvalue of a Hermitian matrix.
double max_eig(const Mat& m);

// True when the Hermitian matrix has min eigenvalue >= -tol * max(1, max eigenvalue).
bool is_psd(const Mat& m, double tol = kPsdTol);

// Throws NotPsd unless is_psd.
void require_psd(const Mat& m, double tol = kPsdTol, const char* what = "matrix");

// Re Tr[a^dag b], the Hilbert-Schmidt inner product (real for Hermitian pairs).
double hs_inner(const Mat& a, const Mat& b);

// Trace norm of a Hermitian matrix (sum of absolute eigenvalues).
double trace_norm_herm(const Mat& m);

//==============================================================================
// Spectral ops
//==============================================================================

// Hermiticity-checked eigendecomposition, eigenvalues descending.
Spectrum eig_hermitian(const Mat& m, double herm_tol = kHermTol);

// Kronecker product, first factor most significant in the index ordering.
Mat kron(const Mat& a, const Mat& b);

// Orthogonal projector onto eigenspaces with |eigenvalue| > rank_tol * max|eigenvalue|.
Mat support_projector(const Mat& m, double rank_tol = kRankTol);

// Moore-Penrose inverse square root of a PSD matrix; eigenvalues under the
// relative cutoff are treated as exact zeros. Satisfies r * m * r = support projector
// up to the cutoff, with r the returned matrix.
Mat pseudo_inv_sqrt(const Mat& m, double rank_tol = kRankTol);

//==============================================================================
// Multipartite index plumbing
//==============================================================================

// Partial trace over the factors NOT listed in `keep`; kept factors stay in
// their original relative order. `dims` lists every factor dimension.
Mat partial_trace(const Mat& m, const std::vector<Eigen::Index>& dims,
                  const std::vector<int>& keep);

// Reorders tensor factors: output factor k is input factor perm[k].
Mat permute_systems(const Mat& m, const std::vector<Eigen::Index>& dims,
                    const std::vector<int>& perm);

}  // namespace postcap

#endif  // POSTCAP_MATRIX_HPP
