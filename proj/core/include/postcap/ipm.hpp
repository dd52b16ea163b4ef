#pragma once

#include <vector>

#include "postcap/matrix.hpp"

namespace postcap {

// Orthonormal basis of d x d Hermitian matrices under the trace inner product:
// d diagonal units followed by symmetric and antisymmetric off diagonal pairs.
std::vector<Mat> herm_basis(Eigen::Index d);

// Block diagonal semidefinite program in equality form:
//   minimize   sum_k <c[k], X_k>
//   subject to sum_k <rows[i][k], X_k> = b[i],   X_k >= 0.
// The reported y and z solve the dual
//   maximize   b . y
//   subject to sum_i y[i] rows[i][k] + Z_k = c[k],   Z_k >= 0,
// so a linear matrix inequality problem enters through (c, rows, b) and reads
// its answer from (y, z) while x carries the multiplier certificate.
// An empty matrix in rows[i][k] stands for the zero operator on block k.
struct SdpProblem {
  std::vector<Mat> c;
  std::vector<std::vector<Mat>> rows;
  Eigen::VectorXd b;
};

struct SdpResult {
  std::vector<Mat> x;
  Eigen::VectorXd y;
  std::vector<Mat> z;
  double primal_obj = 0.0;
  double dual_obj = 0.0;
  double rel_gap = 0.0;
  double primal_infeas = 0.0;
  double dual_infeas = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct SdpOptions {
  double tol = 1e-9;
  int max_iter = 100;
  double step_frac = 0.98;
};

SdpResult solve_sdp(const SdpProblem& prob, const SdpOptions& opts = {});

}  // namespace postcap
