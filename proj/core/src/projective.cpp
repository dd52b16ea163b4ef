#include "postcap/projective.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "postcap/errors.hpp"
#include "postcap/ipm.hpp"
#include "postcap/random.hpp"

namespace postcap {

namespace {

Eigen::Index eig_rank(const Mat& m, double rank_tol) {
  Spectrum s = eig_hermitian(m);
  double top = s.values.cwiseAbs().maxCoeff();
  if (top <= 0.0) return 0;
  Eigen::Index r = 0;
  while (r < s.values.size() && s.values(r) > rank_tol * top) ++r;
  return r;
}

// Isometry onto the support: columns are the eigenvectors kept by the rank cut.
Mat support_isometry(const Mat& m, double rank_tol) {
  Spectrum s = eig_hermitian(m);
  double top = std::max(s.values.cwiseAbs().maxCoeff(), 0.0);
  Eigen::Index r = 0;
  while (r < s.values.size() && top > 0.0 && s.values(r) > rank_tol * top) ++r;
  return s.vectors.leftCols(r);
}

// Weighted output marginal Tr_A[(a (x) I) x].
Mat weighted_marginal(const Mat& x, const Mat& a_op, Eigen::Index d_b) {
  Eigen::Index d_a = a_op.rows();
  return partial_trace(kron(a_op, identity(d_b)) * x, {d_a, d_b}, {1});
}

struct CoreInput {
  Mat phi;        // compressed constraint operator, strictly positive
  Mat a_op;       // compressed reference-side weight, strictly positive
  Mat sigma_fix;  // state with Tr[a_op sigma_fix] = 1, used to repair marginals
  Eigen::Index d_a = 0, d_b = 0;
};

// Best certificate obtainable from a candidate S by optimal rescaling: the
// extreme eigenvalues of phi^{-1/2}(a (x) S)phi^{-1/2} give the achieved xi
// and the scale restoring the left inequality exactly.
std::optional<PrimalCertificate> primal_from_s(const CoreInput& in, const Mat& phi_inv_sqrt,
                                               const Mat& s_raw) {
  Mat m = phi_inv_sqrt * kron(in.a_op, s_raw) * phi_inv_sqrt;
  Spectrum sp = eig_hermitian(0.5 * (m + m.adjoint()));
  double hi = sp.values(0);
  double lo = sp.values(sp.values.size() - 1);
  if (lo <= 0.0 || hi <= 0.0) return std::nullopt;
  PrimalCertificate c;
  c.s = s_raw / lo;
  c.bits = std::log2(hi) - std::log2(lo);
  return c;
}

// Feasibility subproblem at a fixed xi, as a min-slack linear matrix
// inequality over (S, t):
//   maximize -t  with  a(x)S - phi + tI >= 0,  xi phi - a(x)S + tI >= 0,  S >= 0.
SdpProblem build_minslack(const CoreInput& in, double xi, double s_scale,
                          const std::vector<Mat>& basis_b) {
  Eigen::Index n = in.d_a * in.d_b;
  SdpProblem p;
  p.c = {-in.phi, xi * in.phi, Mat::Zero(in.d_b, in.d_b)};
  const int ns = static_cast<int>(basis_b.size());
  p.b = Eigen::VectorXd::Zero(ns + 1);
  p.rows.reserve(ns + 1);
  for (int i = 0; i < ns; ++i) {
    Mat lifted = s_scale * kron(in.a_op, basis_b[i]);
    p.rows.push_back({-lifted, lifted, -s_scale * basis_b[i]});
  }
  p.rows.push_back({-identity(n), -identity(n), Mat()});
  p.b(ns) = -1.0;
  return p;
}

Mat extract_s(const SdpResult& r, double s_scale, const std::vector<Mat>& basis_b,
              Eigen::Index d_b) {
  Mat s = Mat::Zero(d_b, d_b);
  for (std::size_t i = 0; i < basis_b.size(); ++i) s += (s_scale * r.y(i)) * basis_b[i];
  return 0.5 * (s + s.adjoint());
}

// Dual pair from the subproblem multipliers. The third multiplier is replaced
// by the exact weighted marginal of x2 - x1 so the matching holds to rounding,
// then the pair is scored by its own trace ratio.
std::optional<DualCertificate> dual_from_multipliers(const CoreInput& in, const SdpResult& r) {
  const Mat& x1 = r.x[0];
  const Mat& x2 = r.x[1];
  Mat w = weighted_marginal(x2 - x1, in.a_op, in.d_b);
  DualCertificate c;
  c.p = x1 + kron(in.sigma_fix, w);
  c.p = 0.5 * (c.p + c.p.adjoint());
  c.q = 0.5 * (x2 + x2.adjoint());
  double num = hs_inner(c.p, in.phi);
  double den = hs_inner(c.q, in.phi);
  if (den <= 1e-300 || num <= 1e-300) return std::nullopt;
  c.bits = std::log2(num) - std::log2(den);
  return c;
}

struct CoreState {
  Bits lower = 0.0, upper = 0.0;
  PrimalCertificate pc;
  DualCertificate dc;
  int probes = 0;
  bool gap_met = false;
};

CoreState run_core(const CoreInput& in, const IomegaOptions& opts) {
  Eigen::Index n = in.d_a * in.d_b;
  Spectrum sp = eig_hermitian(in.phi);
  Mat phi_inv_sqrt =
      sp.vectors * sp.values.cwiseMax(1e-300).cwiseSqrt().cwiseInverse().asDiagonal() *
      sp.vectors.adjoint();
  std::vector<Mat> basis_b = herm_basis(in.d_b);

  CoreState st;
  double s0 = max_eig(in.phi) / std::max(min_eig(in.a_op), 1e-300);
  auto init = primal_from_s(in, phi_inv_sqrt, s0 * identity(in.d_b));
  if (!init) throw SolverFailure("initial feasible point rejected");
  st.pc = *init;
  st.upper = st.pc.bits;
  st.dc.p = identity(n) / static_cast<double>(n);
  st.dc.q = st.dc.p;
  st.dc.bits = 0.0;
  st.lower = 0.0;

  int stalls = 0;
  while (st.upper - st.lower > opts.gap_bits && st.probes < opts.max_iter) {
    double mid = 0.5 * (st.lower + st.upper);
    SdpProblem prob = build_minslack(in, std::exp2(mid), opts.s_scale, basis_b);
    SdpResult res = solve_sdp(prob);
    ++st.probes;
    bool improved = false;

    auto cand = primal_from_s(in, phi_inv_sqrt, extract_s(res, opts.s_scale, basis_b, in.d_b));
    if (cand && cand->bits < st.upper) {
      st.pc = *cand;
      st.upper = cand->bits;
      improved = true;
    }
    auto dcand = dual_from_multipliers(in, res);
    if (dcand && dcand->bits > st.lower &&
        validate_dual(in.phi, in.a_op, *dcand, opts.psd_tol)) {
      st.dc = *dcand;
      st.lower = dcand->bits;
      improved = true;
    }
    st.lower = std::min(st.lower, st.upper);
    stalls = improved ? 0 : stalls + 1;
    if (stalls >= 3) break;
  }
  st.gap_met = (st.upper - st.lower) <= opts.gap_bits;
  return st;
}

IomegaResult finish(const CoreState& st, const Mat& v_a, const Mat& v_b, const Mat& phi_full,
                    const Mat& a_full, const IomegaOptions& opts) {
  IomegaResult out;
  out.finite = true;
  out.lower_bits = st.lower;
  out.upper_bits = st.upper;
  out.iterations = st.probes;
  if (!st.gap_met) throw SolverFailure("bisection did not reach the requested gap");

  Mat lift = kron(v_a, v_b);
  PrimalCertificate pc{v_b * st.pc.s * v_b.adjoint(), st.pc.bits};
  DualCertificate dc{lift * st.dc.p * lift.adjoint(), lift * st.dc.q * lift.adjoint(),
                     st.dc.bits};
  if (!validate_primal(phi_full, a_full, pc, opts.psd_tol))
    throw SolverFailure("primal certificate failed validation");
  if (!validate_dual(phi_full, a_full, dc, opts.psd_tol))
    throw SolverFailure("dual certificate failed validation");
  out.primal = pc;
  out.dual = dc;
  return out;
}

IomegaResult infinite_result() {
  IomegaResult out;
  out.finite = false;
  out.lower_bits = kInfBits;
  out.upper_bits = kInfBits;
  out.iterations = 0;
  return out;
}

}  // namespace

bool product_support(const Mat& rho_ab, Eigen::Index d_a, double rank_tol) {
  if (rho_ab.rows() != rho_ab.cols() || d_a <= 0 || rho_ab.rows() % d_a != 0)
    throw DimensionMismatch("product_support: dimension does not factor");
  Eigen::Index d_b = rho_ab.rows() / d_a;
  Mat r = require_hermitian(rho_ab, kHermTol, "product_support input");
  Eigen::Index r_ab = eig_rank(r, rank_tol);
  Eigen::Index r_a = eig_rank(partial_trace(r, {d_a, d_b}, {0}), rank_tol);
  Eigen::Index r_b = eig_rank(partial_trace(r, {d_a, d_b}, {1}), rank_tol);
  return r_ab == r_a * r_b;
}

bool iomega_finite(const Channel& n, double rank_tol) {
  return product_support(choi_of(n), n.d_in, rank_tol);
}

IomegaResult iomega_channel(const Channel& n, const IomegaOptions& opts) {
  Mat phi = choi_of(n);
  if (!product_support(phi, n.d_in, opts.rank_tol)) return infinite_result();

  Mat phi_b = partial_trace(phi, {n.d_in, n.d_out}, {1});
  Mat v_b = support_isometry(phi_b, opts.rank_tol);
  Mat v_a = identity(n.d_in);
  Mat lift = kron(v_a, v_b);

  CoreInput in;
  in.phi = lift.adjoint() * phi * lift;
  in.phi = 0.5 * (in.phi + in.phi.adjoint());
  in.d_a = n.d_in;
  in.d_b = v_b.cols();
  in.a_op = identity(in.d_a);
  in.sigma_fix = identity(in.d_a) / static_cast<double>(in.d_a);

  CoreState st = run_core(in, opts);
  return finish(st, v_a, v_b, phi, identity(n.d_in), opts);
}

IomegaResult iomega_state(const Mat& rho_ab, Eigen::Index d_a, const IomegaOptions& opts) {
  if (rho_ab.rows() != rho_ab.cols() || d_a <= 0 || rho_ab.rows() % d_a != 0)
    throw DimensionMismatch("iomega_state: dimension does not factor");
  Eigen::Index d_b = rho_ab.rows() / d_a;
  Mat rho = require_hermitian(rho_ab, kHermTol, "iomega_state input");
  require_psd(rho, kPsdTol, "iomega_state input");
  if (std::abs(rho.trace().real() - 1.0) > 1e-8)
    throw ParamOutOfRange("iomega_state: state is not normalized");

  if (!product_support(rho, d_a, opts.rank_tol)) return infinite_result();

  Mat rho_a = partial_trace(rho, {d_a, d_b}, {0});
  Mat rho_b = partial_trace(rho, {d_a, d_b}, {1});
  Mat v_a = support_isometry(rho_a, opts.rank_tol);
  Mat v_b = support_isometry(rho_b, opts.rank_tol);
  Mat lift = kron(v_a, v_b);

  CoreInput in;
  in.phi = lift.adjoint() * rho * lift;
  in.phi = 0.5 * (in.phi + in.phi.adjoint());
  in.d_a = v_a.cols();
  in.d_b = v_b.cols();
  in.a_op = v_a.adjoint() * rho_a * v_a;
  in.a_op = 0.5 * (in.a_op + in.a_op.adjoint());
  in.sigma_fix = identity(in.d_a);

  CoreState st = run_core(in, opts);
  return finish(st, v_a, v_b, rho, rho_a, opts);
}

bool validate_primal(const Mat& phi, const Mat& a_op, const PrimalCertificate& cert,
                     double tol) {
  if (!std::isfinite(cert.bits)) return false;
  Eigen::Index d_b = cert.s.rows();
  if (a_op.rows() * d_b != phi.rows()) return false;
  if (min_eig(cert.s) < -tol * std::max(1.0, max_abs(cert.s))) return false;
  Mat lifted = kron(a_op, cert.s);
  double scale_lo = std::max(1.0, std::max(max_abs(phi), max_abs(lifted)));
  if (min_eig(lifted - phi) < -tol * scale_lo) return false;
  Mat upper = std::exp2(cert.bits) * phi - lifted;
  double scale_hi = std::max(scale_lo, std::exp2(cert.bits) * max_abs(phi));
  return min_eig(upper) >= -tol * scale_hi;
}

bool validate_dual(const Mat& phi, const Mat& a_op, const DualCertificate& cert, double tol) {
  if (cert.p.rows() != phi.rows() || cert.q.rows() != phi.rows()) return false;
  if (a_op.rows() <= 0 || phi.rows() % a_op.rows() != 0) return false;
  Eigen::Index d_b = phi.rows() / a_op.rows();
  double scale = std::max({1.0, max_abs(cert.p), max_abs(cert.q)});
  if (min_eig(cert.p) < -tol * scale) return false;
  if (min_eig(cert.q) < -tol * scale) return false;
  Mat mismatch = weighted_marginal(cert.p - cert.q, a_op, d_b);
  if (max_abs(mismatch) > kMarginalTol * std::max(1.0, max_abs(a_op))) return false;
  double num = hs_inner(cert.p, phi);
  double den = hs_inner(cert.q, phi);
  if (den <= 1e-300 || num <= 1e-300) return false;
  return std::log2(num) - std::log2(den) >= cert.bits - 1e-9;
}

DualCertificate improve_dual(const Channel& n, std::uint64_t seed) {
  IomegaResult res = iomega_channel(n);
  if (!res.finite || !res.dual)
    throw SolverFailure("no attaining dual pair for an infinite projective value");
  Mat phi = choi_of(n);
  Mat id_a = identity(n.d_in);
  DualCertificate best = *res.dual;

  // seeded local refinement: marginal-preserving nudges kept only when the
  // full validation still passes and the ratio strictly improves
  Rng rng(seed);
  Eigen::Index nn = phi.rows();
  for (int trial = 0; trial < 30; ++trial) {
    Mat g = gaussian_matrix(rng, nn, nn);
    g = 0.5 * (g + g.adjoint());
    Mat delta = g - kron(id_a / static_cast<double>(n.d_in),
                         partial_trace(g, {n.d_in, n.d_out}, {1}));
    double eta = 0.05 * max_abs(best.p) / (1.0 + max_abs(delta)) / (1.0 + trial);
    DualCertificate cand = best;
    if (trial % 2 == 0)
      cand.p = best.p + eta * delta;
    else
      cand.q = best.q + eta * delta;
    double num = hs_inner(cand.p, phi);
    double den = hs_inner(cand.q, phi);
    if (num <= 1e-300 || den <= 1e-300) continue;
    cand.bits = std::log2(num) - std::log2(den);
    if (cand.bits > best.bits && validate_dual(phi, id_a, cand, kPsdTol)) best = cand;
  }
  return best;
}

Bits delta_lower_sample(const Channel& n, int trials, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::Index d_s = n.d_out;
  Eigen::Index d_a = n.d_in;
  Bits best = 0.0;
  std::vector<std::pair<Channel, Channel>> pairs;
  for (Eigen::Index i = 0; i < d_a && static_cast<int>(pairs.size()) < trials; ++i)
    for (Eigen::Index j = i + 1; j < d_a && static_cast<int>(pairs.size()) < trials; ++j) {
      Mat ei = basis_ket(d_a, i) * basis_ket(d_a, i).adjoint();
      Mat ej = basis_ket(d_a, j) * basis_ket(d_a, j).adjoint();
      pairs.emplace_back(replacement_channel(d_s, ei), replacement_channel(d_s, ej));
    }
  Eigen::Index env = (d_s + d_a - 1) / d_a;
  while (static_cast<int>(pairs.size()) < trials) {
    if (pairs.size() % 2 == 0) {
      pairs.emplace_back(haar_channel(rng, d_s, d_a, env),
                         haar_channel(rng, d_s, d_a, env + 1));
    } else {
      Vec u = random_pure_state(rng, d_a);
      Vec v = random_pure_state(rng, d_a);
      pairs.emplace_back(replacement_channel(d_s, u * u.adjoint()),
                         replacement_channel(d_s, v * v.adjoint()));
    }
  }
  for (const auto& [p, q] : pairs) {
    Bits v = dmax_channels(compose(n, p), compose(n, q));
    if (std::isinf(v) && v > 0) return kInfBits;
    best = std::max(best, v);
  }
  return best;
}

namespace {

// Action of a map given by its Choi state on the first factor of a bipartite
// operator: result_(a b),(a' b') = d_T sum_{i j} choi_(j a),(i a') o_(j b),(i b').
Mat action_of_choi(const Mat& choi_ta, const Mat& o_tb, Eigen::Index d_t, Eigen::Index d_out,
                   Eigen::Index d_b) {
  Mat out = Mat::Zero(d_out * d_b, d_out * d_b);
  for (Eigen::Index a = 0; a < d_out; ++a)
    for (Eigen::Index b = 0; b < d_b; ++b)
      for (Eigen::Index a2 = 0; a2 < d_out; ++a2)
        for (Eigen::Index b2 = 0; b2 < d_b; ++b2) {
          cplx acc = 0.0;
          for (Eigen::Index i = 0; i < d_t; ++i)
            for (Eigen::Index j = 0; j < d_t; ++j)
              acc += choi_ta(j * d_out + a, i * d_out + a2) * o_tb(j * d_b + b, i * d_b + b2);
          out(a * d_b + b, a2 * d_b + b2) = static_cast<double>(d_t) * acc;
        }
  return out;
}

// Recovers the Choi state of a channel T -> d_out whose action on the first
// factor of o equals target, by the min-slack engine over the exact linear
// constraints (trace preservation plus action).
Mat solve_recovery(const Mat& o, const Mat& target, Eigen::Index d_t, Eigen::Index d_out) {
  Eigen::Index d_b = o.rows() / d_t;
  Eigen::Index n_p = d_t * d_out;
  std::vector<Mat> basis_p = herm_basis(n_p);
  std::vector<Mat> basis_t = herm_basis(d_t);
  std::vector<Mat> basis_ab = herm_basis(d_out * d_b);
  const int nv = static_cast<int>(basis_p.size());

  std::vector<Mat> acted(basis_p.size());
  for (std::size_t i = 0; i < basis_p.size(); ++i)
    acted[i] = action_of_choi(basis_p[i], o, d_t, d_out, d_b);

  // equality rows: coefficient vector per variable plus a constant
  struct EqRow {
    Eigen::VectorXd g;
    double c = 0.0;
  };
  std::vector<EqRow> eqs;
  for (const Mat& f : basis_t) {
    EqRow row;
    row.g.resize(nv);
    Mat lifted = kron(f, identity(d_out));
    for (int i = 0; i < nv; ++i) row.g(i) = hs_inner(lifted, basis_p[i]);
    row.c = f.trace().real() / static_cast<double>(d_t);
    eqs.push_back(std::move(row));
  }
  for (const Mat& f : basis_ab) {
    EqRow row;
    row.g.resize(nv);
    for (int i = 0; i < nv; ++i) row.g(i) = hs_inner(f, acted[i]);
    row.c = hs_inner(f, target);
    eqs.push_back(std::move(row));
  }

  const int m = nv + 1;
  const std::size_t nblocks = 1 + 2 * eqs.size();
  SdpProblem prob;
  prob.c.assign(nblocks, Mat());
  prob.c[0] = Mat::Zero(n_p, n_p);
  prob.b = Eigen::VectorXd::Zero(m);
  prob.b(nv) = -1.0;
  prob.rows.assign(m, std::vector<Mat>(nblocks));
  for (int i = 0; i < nv; ++i) prob.rows[i][0] = -basis_p[i];
  for (std::size_t l = 0; l < eqs.size(); ++l) {
    Mat plus(1, 1), minus(1, 1);
    plus(0, 0) = eqs[l].c;
    minus(0, 0) = -eqs[l].c;
    prob.c[1 + 2 * l] = plus;
    prob.c[2 + 2 * l] = minus;
    for (int i = 0; i < nv; ++i) {
      Mat gp(1, 1), gm(1, 1);
      gp(0, 0) = eqs[l].g(i);
      gm(0, 0) = -eqs[l].g(i);
      prob.rows[i][1 + 2 * l] = gp;
      prob.rows[i][2 + 2 * l] = gm;
    }
    Mat t_coeff(1, 1);
    t_coeff(0, 0) = -1.0;
    prob.rows[nv][1 + 2 * l] = t_coeff;
    prob.rows[nv][2 + 2 * l] = t_coeff;
  }

  SdpResult res = solve_sdp(prob);
  Mat choi = Mat::Zero(n_p, n_p);
  for (int i = 0; i < nv; ++i) choi += res.y(i) * basis_p[i];
  return 0.5 * (choi + choi.adjoint());
}

// PSD part with trace preservation repaired at the Kraus level; any leftover
// defect (rank-deficient recovery) is completed by dumping the null space
// onto a fixed output state.
std::vector<Mat> kraus_from_recovered(const Mat& choi, Eigen::Index d_t, Eigen::Index d_out) {
  Spectrum sp = eig_hermitian(choi);
  Mat clipped = sp.vectors * sp.values.cwiseMax(0.0).asDiagonal() * sp.vectors.adjoint();
  std::vector<Mat> ks = choi_to_kraus(clipped, d_t, d_out);
  Mat total = Mat::Zero(d_t, d_t);
  for (const Mat& k : ks) total += k.adjoint() * k;
  Spectrum ts = eig_hermitian(total);
  Mat fix = ts.vectors *
            ts.values.cwiseMax(1e-14).cwiseSqrt().cwiseInverse().asDiagonal() *
            ts.vectors.adjoint();
  for (Mat& k : ks) k = k * fix;
  total.setZero();
  for (const Mat& k : ks) total += k.adjoint() * k;
  Mat defect = identity(d_t) - total;
  if (max_abs(defect) > 1e-12) {
    Spectrum ds = eig_hermitian(0.5 * (defect + defect.adjoint()));
    Mat droot = ds.vectors * ds.values.cwiseMax(0.0).cwiseSqrt().asDiagonal() *
                ds.vectors.adjoint();
    for (Eigen::Index i = 0; i < d_t; ++i)
      ks.push_back(basis_ket(d_out, 0) * droot.row(i));
  }
  return ks;
}

}  // namespace

EncoderPair encoders_from_dual(const Channel& n, const DualCertificate& cert, double tol) {
  Eigen::Index d_a = n.d_in;
  Eigen::Index d_b = n.d_out;
  Eigen::Index nn = d_a * d_b;
  if (cert.p.rows() != nn || cert.q.rows() != nn)
    throw DimensionMismatch("encoders_from_dual: certificate shape mismatch");
  double scale = std::max({1.0, max_abs(cert.p), max_abs(cert.q)});
  if (min_eig(cert.p) < -kPsdTol * scale || min_eig(cert.q) < -kPsdTol * scale)
    throw FeasibilityFailure("encoders_from_dual: certificate is not positive");
  Mat pb = partial_trace(cert.p, {d_a, d_b}, {1});
  Mat qb = partial_trace(cert.q, {d_a, d_b}, {1});
  if (max_abs(pb - qb) > kMarginalTol * scale)
    throw FeasibilityFailure("encoders_from_dual: certificate marginals do not match");

  // joint rescale keeps the ratio and brings the measurement under identity
  Mat common = 0.5 * (pb + qb);
  double c = std::max(common.trace().real(), 1.0);
  Mat p = cert.p / c;
  Mat q = cert.q / c;
  common /= c;

  Spectrum cs = eig_hermitian(common);
  Mat root = cs.vectors * cs.values.cwiseMax(0.0).cwiseSqrt().asDiagonal() * cs.vectors.adjoint();
  Vec ovec = Vec::Zero(d_b * d_b);
  for (Eigen::Index i = 0; i < d_b; ++i) {
    Vec col = root * basis_ket(d_b, i);
    for (Eigen::Index b = 0; b < d_b; ++b) ovec(i * d_b + b) = col(b);
  }
  Mat o = ovec * ovec.adjoint();

  auto recover = [&](const Mat& target) {
    Mat choi = solve_recovery(o, target, d_b, d_a);
    std::vector<Mat> ks = kraus_from_recovered(choi, d_b, d_a);
    Mat achieved = apply_on_factor(o, {d_b, d_b}, 0, ks, d_a);
    if (max_abs(achieved - target) > tol)
      throw FeasibilityFailure("encoders_from_dual: action constraint unmet");
    std::vector<Mat> conj;
    conj.reserve(ks.size());
    for (const Mat& k : ks) conj.push_back(k.conjugate());
    return make_channel(std::move(conj));
  };

  EncoderPair out;
  out.p_enc = recover(p);
  out.q_enc = recover(q);
  out.o = o;
  double num = hs_inner(o, choi_of(compose(n, out.p_enc)));
  double den = hs_inner(o, choi_of(compose(n, out.q_enc)));
  if (den <= 1e-300) throw FeasibilityFailure("encoders_from_dual: degenerate denominator");
  out.ratio = num / den;
  return out;
}

}  // namespace postcap
