#include "postcap/random.hpp"

#include <cmath>

namespace postcap {

Mat gaussian_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  Mat m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = cplx(rng.normal(), rng.normal());
  return m;
}

Vec random_pure_state(Rng& rng, Eigen::Index d) {
  Vec v(d);
  for (Eigen::Index i = 0; i < d; ++i) v(i) = cplx(rng.normal(), rng.normal());
  return v / v.norm();
}

Mat random_density(Rng& rng, Eigen::Index d) {
  Mat g = gaussian_matrix(rng, d, d);
  Mat w = g * g.adjoint();
  return w / w.trace().real();
}

Mat random_isometry(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  if (rows < cols) throw DimensionMismatch("random_isometry: rows < cols");
  Mat g = gaussian_matrix(rng, rows, cols);
  Eigen::HouseholderQR<Mat> qr(g);
  Mat q = qr.householderQ() * Mat::Identity(rows, cols);
  Mat r = qr.matrixQR().topLeftCorner(cols, cols).triangularView<Eigen::Upper>();
  // phase fix so the distribution is exactly Haar
  for (Eigen::Index j = 0; j < cols; ++j) {
    cplx d = r(j, j);
    cplx phase = (std::abs(d) > 0) ? d / std::abs(d) : cplx(1.0, 0.0);
    q.col(j) *= phase;
  }
  return q;
}

}  // namespace postcap
