#include "postcap/ipm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "postcap/errors.hpp"

namespace postcap {

std::vector<Mat> herm_basis(Eigen::Index d) {
  std::vector<Mat> out;
  out.reserve(static_cast<std::size_t>(d * d));
  const double r = 1.0 / std::sqrt(2.0);
  for (Eigen::Index i = 0; i < d; ++i) {
    Mat m = Mat::Zero(d, d);
    m(i, i) = 1.0;
    out.push_back(m);
  }
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = i + 1; j < d; ++j) {
      Mat m = Mat::Zero(d, d);
      m(i, j) = r;
      m(j, i) = r;
      out.push_back(m);
      Mat g = Mat::Zero(d, d);
      g(i, j) = cplx(0.0, -r);
      g(j, i) = cplx(0.0, r);
      out.push_back(g);
    }
  }
  return out;
}

namespace {

using BlockVec = std::vector<Mat>;

double block_inner(const BlockVec& a, const BlockVec& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += hs_inner(a[k], b[k]);
  return s;
}

// Inner product of a sparse-by-block constraint row with full blocks.
double row_inner(const std::vector<Mat>& row, const BlockVec& x) {
  double s = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k)
    if (row[k].size() > 0) s += hs_inner(row[k], x[k]);
  return s;
}

// Spectral square root and inverse square root with a positivity floor; the
// floor only engages when rounding pushed an eigenvalue fractionally negative.
void sqrt_pair(const Mat& a, Mat& rt, Mat& inv_rt) {
  Spectrum s = eig_hermitian(a);
  double top = std::max(s.values(0), 1e-300);
  Eigen::VectorXd lam = s.values.cwiseMax(top * 1e-18);
  Eigen::VectorXd rl = lam.cwiseSqrt();
  rt = s.vectors * rl.asDiagonal() * s.vectors.adjoint();
  inv_rt = s.vectors * rl.cwiseInverse().asDiagonal() * s.vectors.adjoint();
}

// Largest step alpha with x + alpha * dx staying positive semidefinite.
double step_to_boundary(const Mat& x, const Mat& dx) {
  Eigen::LLT<Mat> llt(x);
  if (llt.info() != Eigen::Success) return 0.0;
  Mat l = llt.matrixL();
  Mat t = l.triangularView<Eigen::Lower>().solve(dx);
  Mat s = l.triangularView<Eigen::Lower>().solve(t.adjoint());
  double lam = min_eig(0.5 * (s + s.adjoint()));
  if (lam >= -1e-300) return std::numeric_limits<double>::infinity();
  return -1.0 / lam;
}

double steps_min(const BlockVec& x, const BlockVec& dx) {
  double a = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < x.size(); ++k) a = std::min(a, step_to_boundary(x[k], dx[k]));
  return a;
}

}  // namespace

SdpResult solve_sdp(const SdpProblem& prob, const SdpOptions& opts) {
  const std::size_t nb = prob.c.size();
  const int m = static_cast<int>(prob.b.size());
  if (prob.rows.size() != static_cast<std::size_t>(m))
    throw DimensionMismatch("solve_sdp: constraint count disagrees with b");

  std::vector<Eigen::Index> dims(nb);
  double n_total = 0.0;
  for (std::size_t k = 0; k < nb; ++k) {
    if (prob.c[k].rows() != prob.c[k].cols())
      throw DimensionMismatch("solve_sdp: objective block not square");
    dims[k] = prob.c[k].rows();
    n_total += static_cast<double>(dims[k]);
  }
  for (int i = 0; i < m; ++i) {
    if (prob.rows[i].size() != nb)
      throw DimensionMismatch("solve_sdp: constraint row has wrong block count");
    for (std::size_t k = 0; k < nb; ++k)
      if (prob.rows[i][k].size() > 0 && prob.rows[i][k].rows() != dims[k])
        throw DimensionMismatch("solve_sdp: constraint block size mismatch");
  }

  // symmetrized copies guard against mildly non Hermitian caller input
  std::vector<Mat> cs(nb);
  for (std::size_t k = 0; k < nb; ++k) cs[k] = 0.5 * (prob.c[k] + prob.c[k].adjoint());
  std::vector<std::vector<Mat>> as(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    as[i].resize(nb);
    for (std::size_t k = 0; k < nb; ++k)
      if (prob.rows[i][k].size() > 0)
        as[i][k] = 0.5 * (prob.rows[i][k] + prob.rows[i][k].adjoint());
  }

  double bnorm = (m > 0) ? prob.b.cwiseAbs().maxCoeff() : 0.0;
  double cnorm = 0.0;
  for (std::size_t k = 0; k < nb; ++k) cnorm = std::max(cnorm, max_abs(cs[k]));

  SdpResult res;
  res.x.resize(nb);
  res.z.resize(nb);
  res.y = Eigen::VectorXd::Zero(m);
  double xi_p = 10.0 * std::max(1.0, bnorm);
  double xi_d = 10.0 * std::max(1.0, cnorm);
  for (std::size_t k = 0; k < nb; ++k) {
    res.x[k] = xi_p * identity(dims[k]);
    res.z[k] = xi_d * identity(dims[k]);
  }

  double bref = 1.0 + prob.b.norm();
  double cref = 1.0;
  for (std::size_t k = 0; k < nb; ++k) cref += cs[k].squaredNorm();
  cref = std::sqrt(cref);

  Eigen::VectorXd rp(m);
  BlockVec rd(nb), w(nb), zinv(nb), dx(nb), dz(nb), hk(nb);
  SdpResult best = res;
  double best_score = std::numeric_limits<double>::infinity();
  int best_iter = 0;

  for (int iter = 0; iter < opts.max_iter; ++iter) {
    res.iterations = iter;

    double gap_abs = block_inner(res.x, res.z);
    double mu = gap_abs / n_total;
    for (int i = 0; i < m; ++i) rp(i) = prob.b(i) - row_inner(as[i], res.x);
    double rd_norm2 = 0.0;
    for (std::size_t k = 0; k < nb; ++k) {
      rd[k] = cs[k] - res.z[k];
      for (int i = 0; i < m; ++i)
        if (as[i][k].size() > 0) rd[k] -= res.y(i) * as[i][k];
      rd_norm2 += rd[k].squaredNorm();
    }

    res.primal_obj = block_inner(cs, res.x);
    res.dual_obj = prob.b.dot(res.y);
    res.rel_gap = gap_abs / (1.0 + std::abs(res.primal_obj) + std::abs(res.dual_obj));
    res.primal_infeas = rp.norm() / bref;
    res.dual_infeas = std::sqrt(rd_norm2) / cref;
    double score = std::max({res.rel_gap, res.primal_infeas, res.dual_infeas});
    if (score < best_score) {
      best_score = score;
      best = res;
      best_iter = iter;
    }
    if (res.rel_gap <= opts.tol && res.primal_infeas <= opts.tol &&
        res.dual_infeas <= opts.tol) {
      res.converged = true;
      return res;
    }
    // a dozen iterations without improvement means the numerical floor
    if (iter - best_iter > 12) break;

    // Nesterov-Todd scaling point per block: w z w = x
    for (std::size_t k = 0; k < nb; ++k) {
      Mat zh, zih;
      sqrt_pair(res.z[k], zh, zih);
      Mat mid = zh * res.x[k] * zh;
      Mat mh, mih;
      sqrt_pair(0.5 * (mid + mid.adjoint()), mh, mih);
      w[k] = zih * mh * zih;
      w[k] = 0.5 * (w[k] + w[k].adjoint());
      zinv[k] = zih * zih;
      zinv[k] = 0.5 * (zinv[k] + zinv[k].adjoint());
    }

    // Schur complement M_ij = sum_k <A_ik, W_k A_jk W_k>
    Eigen::MatrixXd schur = Eigen::MatrixXd::Zero(m, m);
    std::vector<BlockVec> waw(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
      waw[i].resize(nb);
      for (std::size_t k = 0; k < nb; ++k)
        if (as[i][k].size() > 0) waw[i][k] = w[k] * as[i][k] * w[k];
    }
    for (int i = 0; i < m; ++i)
      for (int j = 0; j <= i; ++j) {
        double s = 0.0;
        for (std::size_t k = 0; k < nb; ++k)
          if (as[i][k].size() > 0 && as[j][k].size() > 0) s += hs_inner(as[j][k], waw[i][k]);
        schur(i, j) = s;
        schur(j, i) = s;
      }
    Eigen::LDLT<Eigen::MatrixXd> fact(schur);
    auto solve_schur = [&](const Eigen::VectorXd& rhs) {
      Eigen::VectorXd dy = fact.solve(rhs);
      if ((schur * dy - rhs).norm() > 1e-7 * (1.0 + rhs.norm())) {
        Eigen::MatrixXd ridge = schur;
        double eps = 1e-12 * (1.0 + schur.diagonal().maxCoeff());
        ridge.diagonal().array() += eps;
        dy = ridge.ldlt().solve(rhs);
      }
      return dy;
    };

    Eigen::VectorXd avec(m), wvec(m);
    for (std::size_t k = 0; k < nb; ++k) hk[k] = w[k] * rd[k] * w[k];
    for (int i = 0; i < m; ++i) {
      double sa = 0.0, sw = 0.0;
      for (std::size_t k = 0; k < nb; ++k)
        if (as[i][k].size() > 0) {
          sa += hs_inner(as[i][k], zinv[k]);
          sw += hs_inner(as[i][k], hk[k]);
        }
      avec(i) = sa;
      wvec(i) = sw;
    }

    auto build_direction = [&](double sigma_mu, BlockVec& dxo, BlockVec& dzo,
                               Eigen::VectorXd& dyo) {
      Eigen::VectorXd rhs = prob.b - sigma_mu * avec + wvec;
      dyo = solve_schur(rhs);
      for (std::size_t k = 0; k < nb; ++k) {
        dzo[k] = rd[k];
        for (int i = 0; i < m; ++i)
          if (as[i][k].size() > 0) dzo[k] -= dyo(i) * as[i][k];
        Mat t = sigma_mu * zinv[k] - res.x[k] - w[k] * dzo[k] * w[k];
        dxo[k] = 0.5 * (t + t.adjoint());
      }
    };

    // predictor fixes the centering weight, corrector takes the real step
    Eigen::VectorXd dy(m);
    build_direction(0.0, dx, dz, dy);
    double ap = std::min(1.0, steps_min(res.x, dx));
    double ad = std::min(1.0, steps_min(res.z, dz));
    double gap_aff = 0.0;
    for (std::size_t k = 0; k < nb; ++k)
      gap_aff += hs_inner(res.x[k] + ap * dx[k], res.z[k] + ad * dz[k]);
    gap_aff = std::max(gap_aff, 0.0);
    double sigma = std::pow(gap_aff / std::max(gap_abs, 1e-300), 3);
    sigma = std::clamp(sigma, 1e-9, 1.0);

    build_direction(sigma * mu, dx, dz, dy);
    ap = std::min(1.0, opts.step_frac * steps_min(res.x, dx));
    ad = std::min(1.0, opts.step_frac * steps_min(res.z, dz));
    for (std::size_t k = 0; k < nb; ++k) {
      res.x[k] += ap * dx[k];
      res.z[k] += ad * dz[k];
    }
    res.y += ad * dy;
  }
  int last_iter = std::max(res.iterations, best_iter);
  res = best;
  res.iterations = last_iter;
  return res;
}

}  // namespace postcap
