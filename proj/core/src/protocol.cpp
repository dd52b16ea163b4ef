#include "postcap/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "postcap/divergence.hpp"
#include "postcap/errors.hpp"
#include "postcap/random.hpp"

namespace postcap {

namespace {

constexpr double kConclusiveTol = 1e-12;  // below this, conditional metrics are undefined

Mat hermitize(const Mat& m) { return 0.5 * (m + m.adjoint()); }

double trace_norm(const Mat& m) {
  Spectrum s = eig_hermitian(hermitize(m), 1.0);
  return s.values.cwiseAbs().sum();
}

// Splits a traceless Hermitian operator into (plus, minus) with plus - minus
// proportional to it and both of unit trace.
struct StateDiff {
  Mat plus, minus;
};

std::vector<StateDiff> traceless_state_diffs(Eigen::Index d) {
  std::vector<Mat> basis;
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = i + 1; j < d; ++j) {
      Mat re = Mat::Zero(d, d), im = Mat::Zero(d, d);
      re(i, j) = 1.0;
      re(j, i) = 1.0;
      im(i, j) = cplx(0.0, -1.0);
      im(j, i) = cplx(0.0, 1.0);
      basis.push_back(re);
      basis.push_back(im);
    }
  for (Eigen::Index k = 1; k < d; ++k) {
    Mat m = Mat::Zero(d, d);
    for (Eigen::Index l = 0; l < k; ++l) m(l, l) = 1.0;
    m(k, k) = -double(k);
    basis.push_back(m);
  }
  std::vector<StateDiff> out;
  for (const Mat& b : basis) {
    Spectrum s = eig_hermitian(b);
    Mat plus = Mat::Zero(d, d), minus = Mat::Zero(d, d);
    double t = 0.0;
    for (Eigen::Index k = 0; k < s.values.size(); ++k) {
      double lam = s.values(k);
      Mat proj = s.vectors.col(k) * s.vectors.col(k).adjoint();
      if (lam > 0.0) {
        plus += lam * proj;
        t += lam;
      } else {
        minus -= lam * proj;
      }
    }
    out.push_back({plus / t, minus / t});
  }
  return out;
}

// Informationally complete family of pure states spanning Herm(C^d).
std::vector<Mat> spanning_states(Eigen::Index d) {
  std::vector<Mat> out;
  for (Eigen::Index i = 0; i < d; ++i) {
    Vec v = basis_ket(d, i);
    out.push_back(v * v.adjoint());
  }
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = i + 1; j < d; ++j) {
      Vec a = (basis_ket(d, i) + basis_ket(d, j)) / std::sqrt(2.0);
      Vec b = (basis_ket(d, i) + cplx(0.0, 1.0) * basis_ket(d, j)) / std::sqrt(2.0);
      out.push_back(a * a.adjoint());
      out.push_back(b * b.adjoint());
    }
  return out;
}

// Action of the supermap on a product input: message x_m on M, slot input y_b
// fed to the open channel wire.  Output lives on (A, Mhat).
Mat slot_action(const Supermap& sm, const Mat& x_m, const Mat& y_b) {
  Mat t = apply_kraus(sm.pre.kraus, x_m);  // (A, E)
  Mat u = kron(t, y_b);                    // (A, E, B)
  u = permute_systems(u, {sm.d_A, sm.d_E, sm.d_B}, {0, 2, 1});
  return apply_on_factor(u, {sm.d_A, sm.d_B * sm.d_E}, 1, sm.post.kraus, sm.d_Mhat);
}

// Bell-basis column m on (M, R) for the phase-free Heisenberg-Weyl labeling
// m = a d + b.
Vec bell_column(Eigen::Index d, Eigen::Index m) {
  Mat w = heisenberg_weyl(d, m / d, m % d);
  Vec v = Vec::Zero(d * d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index r = 0; r < d; ++r) v(i * d + r) = w(i, r) / std::sqrt(double(d));
  return v;
}

Channel depolarising_channel(Eigen::Index d) {
  return make_builtin("depolarizing", {{"p", 1.0}, {"d", double(d)}});
}

// Supermap that ignores the plugged channel (feeding it the maximally mixed
// state) and applies `prep` to the message.
Supermap discard_prepare_supermap(Eigen::Index d_a, Eigen::Index d_b, const Channel& prep) {
  Eigen::Index dm = prep.d_in;
  std::vector<Mat> pre;
  for (Eigen::Index a = 0; a < d_a; ++a) {
    Mat k = kron(basis_ket(d_a, a), identity(dm)) / std::sqrt(double(d_a));
    pre.push_back(k);
  }
  std::vector<Mat> post;
  for (Eigen::Index b = 0; b < d_b; ++b)
    for (const Mat& g : prep.kraus) post.push_back(kron(basis_ket(d_b, b).adjoint(), g));
  return make_supermap(dm, d_a, d_b, prep.d_out, dm, make_channel(std::move(pre)),
                       make_subchannel(std::move(post)));
}

}  // namespace

double conditional_error_classical(const Subchannel& np) {
  if (np.d_in != np.d_out)
    throw DimensionMismatch("conditional error needs matching message dimensions");
  double worst = 1.0;
  for (Eigen::Index m = 0; m < np.d_in; ++m) {
    Vec v = basis_ket(np.d_in, m);
    Mat out = apply_subchannel(np, Mat(v * v.adjoint()));
    double conclusive = out.trace().real();
    if (conclusive <= kConclusiveTol)
      throw AllInconclusive("message " + std::to_string(m) + " is never conclusive");
    worst = std::min(worst, out(m, m).real() / conclusive);
  }
  return 1.0 - worst;
}

double conditional_fidelity(const Subchannel& np, const Mat& psi, Eigen::Index d_r) {
  if (np.d_in != np.d_out)
    throw DimensionMismatch("conditional fidelity needs matching message dimensions");
  if (psi.rows() != psi.cols() || psi.rows() != d_r * np.d_in)
    throw DimensionMismatch("input state does not match d_r (x) d_in");
  Mat rho = require_hermitian(psi, kHermTol, "input state");
  Mat out = apply_on_factor(rho, {d_r, np.d_in}, 1, np.kraus, np.d_out);
  double den = out.trace().real();
  if (den <= kConclusiveTol) throw AllInconclusive("input state is never conclusive");
  return hs_inner(rho, out) / den;
}

QuantumErrorReport conditional_error_quantum(const Subchannel& np, int restarts,
                                             std::uint64_t seed) {
  if (np.d_in != np.d_out)
    throw DimensionMismatch("conditional error needs matching message dimensions");
  Eigen::Index d = np.d_in;
  Eigen::Index n2 = d * d;
  std::vector<Mat> lifted;
  for (const Mat& k : np.kraus) lifted.push_back(kron(identity(d), k));
  Mat gram = Mat::Zero(n2, n2);
  for (const Mat& a : lifted) gram += a.adjoint() * a;

  auto value = [&](const Vec& psi) -> double {
    double den = (psi.adjoint() * gram * psi)(0, 0).real();
    if (den <= kConclusiveTol) return 2.0;  // excluded from the infimum
    double num = 0.0;
    for (const Mat& a : lifted) num += std::norm((psi.adjoint() * a * psi)(0, 0));
    return num / den;
  };
  auto gradient = [&](const Vec& psi, double num, double den) -> Vec {
    Vec gnum = Vec::Zero(n2);
    for (const Mat& a : lifted) {
      cplx c = (psi.adjoint() * a * psi)(0, 0);
      gnum += std::conj(c) * (a * psi) + c * (a.adjoint() * psi);
    }
    Vec gden = gram * psi;
    return (gnum * den - num * gden) / (den * den);
  };
  auto search = [&](Vec psi) -> double {
    double f = value(psi);
    int stalls = 0;
    for (int it = 0; it < 400 && stalls < 2; ++it) {
      double den = (psi.adjoint() * gram * psi)(0, 0).real();
      if (den <= kConclusiveTol) break;
      double num = f * den;
      Vec g = gradient(psi, num, den);
      g -= (psi.adjoint() * g)(0, 0) * psi;
      double eta = 0.2;
      bool moved = false;
      for (int ls = 0; ls < 25; ++ls) {
        Vec trial = psi - eta * g;
        trial.normalize();
        double ft = value(trial);
        if (ft < f - 1e-14) {
          psi = trial;
          f = ft;
          moved = true;
          break;
        }
        eta *= 0.5;
      }
      stalls = moved ? 0 : stalls + 1;
    }
    return f;
  };

  Vec me = Vec::Zero(n2);
  for (Eigen::Index i = 0; i < d; ++i) me(i * d + i) = 1.0 / std::sqrt(double(d));
  double me_f = value(me);
  if (me_f > 1.5) throw AllInconclusive("maximally entangled input is never conclusive");

  Rng rng(seed);
  double best = search(me);
  for (int t = 1; t < restarts; ++t) best = std::min(best, search(random_pure_state(rng, n2)));
  best = std::min(best, me_f);
  return {1.0 - best, 1.0 - me_f};
}

TeleportProtocol teleport_protocol(Eigen::Index d_m, const EncoderPair& enc) {
  Eigen::Index d_b = enc.p_enc.d_in;
  if (enc.o.rows() != d_b * d_b) throw DimensionMismatch("effect does not match encoder input");
  TeleportProtocol t;
  t.d_m = d_m;
  t.p_enc = enc.p_enc;
  t.q_enc = enc.q_enc;
  t.o = permute_systems(enc.o, {d_b, d_b}, {1, 0});
  return t;
}

Supermap build_teleport(const Channel& n, const TeleportProtocol& proto) {
  Eigen::Index dm = proto.d_m, da = n.d_in, db = n.d_out;
  if (dm < 1) throw ParamOutOfRange("message dimension must be positive");
  if (proto.p_enc.d_in != db || proto.p_enc.d_out != da || proto.q_enc.d_in != db ||
      proto.q_enc.d_out != da)
    throw DimensionMismatch("branch encoders must map the pair dimension to the channel input");
  if (proto.o.rows() != db * db || proto.o.cols() != db * db)
    throw DimensionMismatch("decoder effect must live on output (x) pair");
  Mat o = require_hermitian(proto.o, kHermTol, "decoder effect");
  Spectrum so = eig_hermitian(o);
  if (so.values.size() && so.values(so.values.size() - 1) < -kPsdTol)
    throw NotPsd("decoder effect has a negative eigenvalue");
  if (so.values.size() && so.values(0) > 1.0 + kPsdTol)
    throw ParamOutOfRange("decoder effect exceeds identity");

  // Shared state: two maximally entangled pairs, reordered to
  // (A1', A2') (x) (B1', B2').
  Mat gamma = kron(max_entangled_state(dm), max_entangled_state(db));
  gamma = permute_systems(gamma, {dm, dm, db, db}, {0, 2, 1, 3});

  // Encoder on (M, A1', A2'): incomplete Bell measurement on (M, A1'), then
  // the success or failure branch encoder on A2'.
  Vec bell = Vec::Zero(dm * dm);
  for (Eigen::Index i = 0; i < dm; ++i) bell(i * dm + i) = 1.0 / std::sqrt(double(dm));
  std::vector<Mat> enc_kraus;
  for (const Mat& g : proto.p_enc.kraus)
    enc_kraus.push_back(kron(Mat(bell.adjoint()), g));
  Mat fail = identity(dm * dm) - bell * bell.adjoint();
  Spectrum sf = eig_hermitian(fail);
  for (Eigen::Index j = 0; j < sf.values.size(); ++j) {
    if (sf.values(j) < 0.5) continue;
    Mat u = sf.vectors.col(j).adjoint();
    for (const Mat& h : proto.q_enc.kraus) enc_kraus.push_back(kron(u, h));
  }

  // Decoder on (B, B1', B2'): measure the effect on (B, B2'), pass B1'.
  double top = std::max(so.values.size() ? so.values(0) : 0.0, 1.0);
  std::vector<Mat> dec_kraus;
  for (Eigen::Index l = 0; l < so.values.size(); ++l) {
    if (so.values(l) <= 1e-14) continue;
    double w = std::sqrt(so.values(l) / top) * std::sqrt(std::min(top, 1.0));
    Mat k = Mat::Zero(dm, db * dm * db);
    for (Eigen::Index b = 0; b < db; ++b)
      for (Eigen::Index beta = 0; beta < dm; ++beta)
        for (Eigen::Index kap = 0; kap < db; ++kap)
          k(beta, (b * dm + beta) * db + kap) = w * std::conj(so.vectors(b * db + kap, l));
    dec_kraus.push_back(k);
  }
  if (dec_kraus.empty()) dec_kraus.push_back(Mat::Zero(dm, db * dm * db));

  PEATriple t;
  t.gamma = gamma;
  t.d_ap = dm * db;
  t.d_bp = dm * db;
  t.enc = make_channel(std::move(enc_kraus));
  t.dec = make_subchannel(std::move(dec_kraus));
  return build_pea_supermap(t);
}

double teleport_error_bound(const Channel& n, const TeleportProtocol& proto) {
  if (proto.d_m < 2) throw ParamOutOfRange("error bound needs message dimension at least 2");
  Eigen::Index db = n.d_out;
  Mat o = require_hermitian(proto.o, kHermTol, "decoder effect");
  Mat cp = permute_systems(choi_of(compose(n, proto.p_enc)), {db, db}, {1, 0});
  Mat cq = permute_systems(choi_of(compose(n, proto.q_enc)), {db, db}, {1, 0});
  double kp = std::max(hs_inner(o, cp), 0.0);
  double kq = std::max(hs_inner(o, cq), 0.0);
  if (kp <= kConclusiveTol && kq <= kConclusiveTol)
    throw AllInconclusive("both branch overlaps vanish");
  if (kq <= kConclusiveTol) return 0.0;
  double ratio = kp / kq;
  return 1.0 / (ratio / double(proto.d_m * proto.d_m - 1) + 1.0);
}

Supermap build_pea_supermap(const PEATriple& t) {
  if (t.d_ap < 1 || t.d_bp < 1) throw DimensionMismatch("shared-state factors must be positive");
  if (t.gamma.rows() != t.d_ap * t.d_bp || t.gamma.cols() != t.gamma.rows())
    throw DimensionMismatch("shared state does not match its factor dimensions");
  if (t.enc.d_in % t.d_ap != 0)
    throw DimensionMismatch("encoder input must factor as M (x) A'");
  if (t.dec.d_in % t.d_bp != 0)
    throw DimensionMismatch("decoder input must factor as B (x) B'");
  Mat gamma = require_hermitian(t.gamma, kHermTol, "shared state");
  Spectrum sg = eig_hermitian(gamma);
  if (sg.values.size() && sg.values(sg.values.size() - 1) < -kPsdTol)
    throw NotPsd("shared state has a negative eigenvalue");
  if (std::abs(gamma.trace().real() - 1.0) > 1e-8)
    throw ParamOutOfRange("shared state is not normalized");

  Eigen::Index dm = t.enc.d_in / t.d_ap;
  Eigen::Index db = t.dec.d_in / t.d_bp;
  std::vector<Mat> pre_kraus;
  Mat ibp = identity(t.d_bp);
  Mat im = identity(dm);
  for (Eigen::Index r = 0; r < sg.values.size(); ++r) {
    if (sg.values(r) <= 1e-14) continue;
    Mat attach = kron(im, Mat(std::sqrt(sg.values(r)) * sg.vectors.col(r)));
    for (const Mat& e : t.enc.kraus) pre_kraus.push_back(kron(e, ibp) * attach);
  }
  return make_supermap(dm, t.enc.d_out, db, t.dec.d_out, t.d_bp,
                       make_channel(std::move(pre_kraus)), t.dec);
}

Supermap superdense_lift(const Supermap& theta_q) {
  Eigen::Index dm = theta_q.d_M;
  if (theta_q.d_Mhat != dm)
    throw DimensionMismatch("lift needs a message-preserving quantum supermap");
  Eigen::Index dm2 = dm * dm;
  Eigen::Index de = theta_q.d_E;
  Mat idm = identity(dm);
  std::vector<Mat> pre_kraus;
  for (Eigen::Index m = 0; m < dm2; ++m) {
    Mat prep = bell_column(dm, m) * basis_ket(dm2, m).adjoint();
    for (const Mat& k : theta_q.pre.kraus) pre_kraus.push_back(kron(k, idm) * prep);
  }
  std::vector<Mat> post_kraus;
  for (Eigen::Index m = 0; m < dm2; ++m) {
    Mat meas = basis_ket(dm2, m) * bell_column(dm, m).adjoint();
    for (const Mat& k : theta_q.post.kraus) post_kraus.push_back(meas * kron(k, idm));
  }
  return make_supermap(dm2, theta_q.d_A, theta_q.d_B, dm2, de * dm,
                       make_channel(std::move(pre_kraus)),
                       make_subchannel(std::move(post_kraus)));
}

double check_nonsignalling(const Supermap& theta, Direction dir, int samples,
                           std::uint64_t seed) {
  Eigen::Index vary = dir == Direction::AtoB ? theta.d_M : theta.d_B;
  Eigen::Index fixed = dir == Direction::AtoB ? theta.d_B : theta.d_M;
  auto margin = [&](const Mat& x_m, const Mat& y_b) -> Mat {
    Mat out = slot_action(theta, x_m, y_b);
    std::vector<int> keep{dir == Direction::AtoB ? 1 : 0};
    return partial_trace(out, {theta.d_A, theta.d_Mhat}, keep);
  };
  auto pair_value = [&](const Mat& rho, const Mat& omega, const Mat& sig) -> double {
    Mat diff = dir == Direction::AtoB ? Mat(margin(rho, sig) - margin(omega, sig))
                                      : Mat(margin(sig, rho) - margin(sig, omega));
    return trace_norm(diff);
  };
  double violation = 0.0;
  std::vector<Mat> fixed_states = spanning_states(fixed);
  for (const StateDiff& d : traceless_state_diffs(vary))
    for (const Mat& sig : fixed_states)
      violation = std::max(violation, pair_value(d.plus, d.minus, sig));
  Rng rng(seed);
  for (int t = 0; t < samples; ++t) {
    Mat rho = random_density(rng, vary);
    Mat omega = random_density(rng, vary);
    Mat sig = random_density(rng, fixed);
    violation = std::max(violation, pair_value(rho, omega, sig));
  }
  return violation;
}

ReplacementFit check_replacement_preserving(const Supermap& theta, int trials,
                                            std::uint64_t seed) {
  Eigen::Index dm = theta.d_M, dmh = theta.d_Mhat;
  Rng rng(seed);
  ReplacementFit fit;
  fit.sigma = identity(dmh) / double(dmh);
  for (int t = 0; t < std::max(trials, 1); ++t) {
    Mat target = t == 0 ? Mat(identity(theta.d_B) / double(theta.d_B))
                        : random_density(rng, theta.d_B);
    Subchannel sub = apply_supermap(theta, replacement_channel(theta.d_A, target));
    Mat c = choi_of(sub);
    Mat w = partial_trace(c, {dm, dmh}, {1});
    fit.violation = std::max(fit.violation, max_abs(Mat(c - kron(identity(dm) / double(dm), w))));
    if (t == 0) {
      fit.p = std::max(w.trace().real(), 0.0);
      if (fit.p > kConclusiveTol) fit.sigma = w / fit.p;
    }
  }
  return fit;
}

NSCheckReport check_supermap(const Supermap& theta, int samples, std::uint64_t seed) {
  NSCheckReport r;
  r.a_to_b_violation = check_nonsignalling(theta, Direction::AtoB, samples, seed);
  r.b_to_a_violation = check_nonsignalling(theta, Direction::BtoA, samples, seed + 1);
  ReplacementFit fit = check_replacement_preserving(theta, std::max(samples / 2, 3), seed + 2);
  r.replacement_preserving_violation = fit.violation;
  r.scale_c = fit.p;
  return r;
}

Supermap bell_loop_supermap(Eigen::Index d) {
  if (d < 2) throw ParamOutOfRange("loop needs dimension at least 2");
  PEATriple t;
  t.gamma = max_entangled_state(d);
  t.d_ap = d;
  t.d_bp = d;
  std::vector<Mat> enc;
  for (Eigen::Index m = 0; m < d; ++m)
    enc.push_back(kron(Mat(basis_ket(d, m).adjoint()), identity(d)));
  t.enc = make_channel(std::move(enc));
  Vec bell = Vec::Zero(d * d);
  for (Eigen::Index i = 0; i < d; ++i) bell(i * d + i) = 1.0 / std::sqrt(double(d));
  t.dec = make_subchannel({Mat(bell.adjoint())});
  return build_pea_supermap(t);
}

Supermap depolarising_supermap(Eigen::Index d_m, Eigen::Index d_a, Eigen::Index d_b,
                               Eigen::Index d_mhat) {
  std::vector<Mat> pre;
  for (Eigen::Index a = 0; a < d_a; ++a)
    for (Eigen::Index m = 0; m < d_m; ++m)
      pre.push_back(Mat(basis_ket(d_a, a) * basis_ket(d_m, m).adjoint() / std::sqrt(double(d_a))));
  std::vector<Mat> post;
  for (Eigen::Index mh = 0; mh < d_mhat; ++mh)
    for (Eigen::Index b = 0; b < d_b; ++b)
      post.push_back(
          Mat(basis_ket(d_mhat, mh) * basis_ket(d_b, b).adjoint() / std::sqrt(double(d_mhat))));
  return make_supermap(d_m, d_a, d_b, d_mhat, 1, make_channel(std::move(pre)),
                       make_subchannel(std::move(post)));
}

Supermap comb_from_bipartite(const BipartiteChoi& bc, double rank_tol) {
  Eigen::Index dm = bc.d_M, db = bc.d_B, da = bc.d_A, dmh = bc.d_Mhat;
  Mat c = require_hermitian(bc.choi, kHermTol, "comb Choi");
  Mat s1 = hermitize(partial_trace(c, {dm, db, da, dmh}, {0, 2}));
  Mat tm = partial_trace(s1, {dm, da}, {0});
  if (max_abs(Mat(tm - identity(dm) / double(dm))) > 1e-7)
    throw AdmissibilityFailure("first tooth of the comb is not trace preserving");

  Spectrum ss = eig_hermitian(s1);
  double top = ss.values(0);
  Eigen::Index r = 0;
  while (r < ss.values.size() && ss.values(r) > std::max(rank_tol * top, 1e-14)) ++r;
  if (r == 0) throw AdmissibilityFailure("first-tooth Choi vanishes");

  // Isometric first tooth from the spectral Kraus operators.
  Mat v = Mat::Zero(da * r, dm);
  for (Eigen::Index e = 0; e < r; ++e) {
    double w = std::sqrt(ss.values(e) * double(dm));
    for (Eigen::Index a = 0; a < da; ++a)
      for (Eigen::Index m = 0; m < dm; ++m) v(a * r + e, m) = w * ss.vectors(m * da + a, e);
  }

  // Second tooth by contracting the comb against the first tooth's Schmidt
  // vectors; the result is the state Choi of the post map on (B, E).
  Mat cp = permute_systems(c, {dm, db, da, dmh}, {0, 2, 1, 3});
  Mat gmat(dm * da, r);
  for (Eigen::Index e = 0; e < r; ++e)
    gmat.col(e) = ss.vectors.col(e) / std::sqrt(ss.values(e));
  Mat wmat = kron(gmat, identity(db * dmh));
  Mat t = hermitize(wmat.adjoint() * cp * wmat);  // [E', B', Mhat]
  Mat post_choi = permute_systems(t, {r, db, dmh}, {1, 0, 2}) / double(r);
  std::vector<Mat> post_kraus = choi_to_kraus(post_choi, db * r, dmh, rank_tol);
  Mat gram = Mat::Zero(db * r, db * r);
  for (const Mat& k : post_kraus) gram += k.adjoint() * k;
  double gtop = max_eig(gram);
  if (gtop > 1.0 + 1e-7) throw AdmissibilityFailure("second tooth exceeds trace preservation");
  if (gtop > 1.0)
    for (Mat& k : post_kraus) k /= std::sqrt(gtop);

  Supermap sm = make_supermap(dm, da, db, dmh, r, make_channel({v}),
                              make_subchannel(std::move(post_kraus)));
  double err = max_abs(Mat(supermap_to_bipartite(sm).choi - c));
  if (err > 1e-8 * std::max(1.0, max_abs(c)))
    throw AdmissibilityFailure("comb reconstruction mismatch");
  return sm;
}

PnaNormalized pna_normalize(const Supermap& theta) {
  double viol = check_nonsignalling(theta, Direction::AtoB, 12, 7);
  if (viol > 1e-8)
    throw NotNonsignalling("supermap signals from sender to receiver: violation " +
                           std::to_string(viol));
  Eigen::Index dm = theta.d_M, da = theta.d_A, db = theta.d_B, dmh = theta.d_Mhat;
  double c = double(dm) * double(dm) * double(da) * double(db);
  Mat ct = supermap_to_bipartite(theta).choi;
  Eigen::Index total = dm * db * da * dmh;
  Mat cu = identity(total) / double(total);
  Mat cl = hermitize(cu - ct / c);
  if (min_eig(cl) < -1e-9)
    throw AdmissibilityFailure("complement Choi is not positive semidefinite");

  Mat p0 = Mat::Zero(2, 2), p1 = Mat::Zero(2, 2);
  p0(0, 0) = 1.0;
  p1(1, 1) = 1.0;
  BipartiteChoi bcx;
  bcx.d_M = dm;
  bcx.d_B = db;
  bcx.d_A = da;
  bcx.d_Mhat = dmh * 2;
  bcx.choi = kron(cl, p0) + kron(ct, p1) / c;

  PnaNormalized out;
  out.xi = comb_from_bipartite(bcx);
  out.c = c;
  Rng rng(11);
  for (int t = 0; t < 5; ++t) {
    Subchannel sub = apply_supermap(out.xi, haar_channel(rng, da, db, da));
    Mat gram = Mat::Zero(dm, dm);
    for (const Mat& k : sub.kraus) gram += k.adjoint() * k;
    if (max_abs(Mat(gram - identity(dm))) > 1e-8)
      throw AdmissibilityFailure("completed supermap is not deterministic");
  }
  Mat flag = Mat::Zero(dmh, dmh * 2);
  for (Eigen::Index m = 0; m < dmh; ++m) flag(m, m * 2 + 1) = 1.0;
  out.d_flag = make_subchannel({flag});
  return out;
}

Supermap build_pna_achiever(const Channel& n, Eigen::Index d_m, double eps,
                            const DualCertificate& cert, const PrimalCertificate& primal) {
  if (!(eps > 0.0 && eps < 1.0)) throw EpsOutOfRange("error parameter outside (0, 1)");
  if (d_m < 1) throw ParamOutOfRange("message dimension must be positive");
  Eigen::Index da = n.d_in, db = n.d_out;
  double dm2 = double(d_m) * double(d_m);

  if (eps > (dm2 - 1.0) / dm2)
    return discard_prepare_supermap(da, db, depolarising_channel(d_m));

  if (cert.p.rows() != da * db || cert.q.rows() != da * db)
    throw DimensionMismatch("certificate pair does not match the channel Choi space");
  if (primal.s.rows() != db) throw DimensionMismatch("primal certificate does not match output");
  if (!(dm2 < eps / (1.0 - eps) * std::exp2(cert.bits) + 1.0))
    throw InfeasibleRate("message dimension exceeds the certified one-shot bound");

  double eps_min = (dm2 - 1.0) / (std::exp2(cert.bits) + dm2 - 1.0);
  double eps_p = eps - std::min(0.01, (eps - eps_min) / 2.0);

  Mat s = require_hermitian(primal.s, kHermTol, "primal certificate");
  double trs = s.trace().real();
  if (trs <= 0.0) throw FeasibilityFailure("primal certificate has nonpositive trace");
  Mat sigma = s / trs;
  Mat cn = choi_of(n);
  Mat rsig = kron(identity(da) / double(da), sigma);
  double lam = std::exp2(dmax_states(cn, rsig));
  double mu = std::exp2(dmax_states(rsig, cn));
  if (!std::isfinite(lam) || !std::isfinite(mu))
    throw EmptyScalingInterval("replacement comparison with the certificate state is unbounded");

  double lo = (dm2 - 1.0) / (dm2 * mu * eps_p);
  double hi = lam / (dm2 * (1.0 - eps_p));
  if (lo > hi * (1.0 + 1e-9)) throw EmptyScalingInterval("no feasible noise scale");
  double r = std::min(std::max(std::sqrt(lo * hi), lo), hi);

  Mat phi = max_entangled_state(d_m);
  Mat cc = identity(d_m * d_m) / dm2;
  Mat choit = (1.0 - eps_p) * phi + eps_p / (dm2 - 1.0) * (dm2 * cc - phi);
  if (min_eig(Mat(lam * cc - r * choit)) < -1e-12 * std::max(lam, 1.0))
    throw EmptyScalingInterval("upper operator inequality fails");
  if (min_eig(Mat(mu * r * choit - cc)) < -1e-12 * std::max(mu * r, 1.0))
    throw EmptyScalingInterval("lower operator inequality fails");

  std::vector<Mat> gp = choi_to_kraus(hermitize(Mat(r * choit - cc / mu)), d_m, d_m);
  std::vector<Mat> gq = choi_to_kraus(hermitize(Mat(lam * cc - r * choit)), d_m, d_m);
  double ap = r - 1.0 / mu, aq = lam - r;
  double g = 1.0 / std::max({ap, aq, 1.0});

  Mat pq = hermitize(cert.p + cert.q);
  double sm_scale = std::max(max_eig(pq), 1.0);
  auto meas_rows = [&](const Mat& x) {
    Spectrum sx = eig_hermitian(hermitize(x) / sm_scale);
    std::vector<Vec> rows;
    for (Eigen::Index l = 0; l < sx.values.size(); ++l) {
      if (sx.values(l) <= 1e-14) continue;
      // reindex from (R, B) to the (B, R) layout of the post input
      Vec row = Vec::Zero(da * db);
      for (Eigen::Index rr = 0; rr < da; ++rr)
        for (Eigen::Index b = 0; b < db; ++b)
          row(b * da + rr) = std::sqrt(sx.values(l)) * sx.vectors(rr * db + b, l);
      rows.push_back(row);
    }
    return rows;
  };

  std::vector<Mat> post_kraus;
  for (const Vec& row : meas_rows(cert.p))
    for (const Mat& k : gp) post_kraus.push_back(std::sqrt(g) * kron(Mat(row.adjoint()), k));
  for (const Vec& row : meas_rows(cert.q))
    for (const Mat& k : gq) post_kraus.push_back(std::sqrt(g) * kron(Mat(row.adjoint()), k));
  if (post_kraus.empty()) post_kraus.push_back(Mat::Zero(d_m, db * da * d_m));

  Mat v = Mat::Zero(da * da * d_m, d_m);
  for (Eigen::Index a = 0; a < da; ++a)
    for (Eigen::Index m = 0; m < d_m; ++m)
      v((a * da + a) * d_m + m, m) = 1.0 / std::sqrt(double(da));
  return make_supermap(d_m, da, db, d_m, da * d_m, make_channel({v}),
                       make_subchannel(std::move(post_kraus)));
}

}  // namespace postcap
