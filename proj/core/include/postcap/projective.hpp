#pragma once

#include <cstdint>
#include <optional>

#include "postcap/channel.hpp"
#include "postcap/divergence.hpp"
#include "postcap/tolerances.hpp"

namespace postcap {

// Upper bound witness: an operator S on the output factor with
// phi <= a (x) S <= 2^bits * phi, where a is the reference-side weight
// (identity for channels, the A marginal for states).
struct PrimalCertificate {
  Mat s;
  Bits bits = 0.0;
};

// Lower bound witness: P, Q >= 0 with matching weighted output marginals and
// Tr[P phi] / Tr[Q phi] = 2^bits.
struct DualCertificate {
  Mat p, q;
  Bits bits = 0.0;
};

struct IomegaResult {
  Bits lower_bits = 0.0;
  Bits upper_bits = 0.0;
  bool finite = true;
  std::optional<PrimalCertificate> primal;
  std::optional<DualCertificate> dual;
  int iterations = 0;

  Bits value() const { return finite ? 0.5 * (lower_bits + upper_bits) : kInfBits; }
};

struct IomegaOptions {
  double gap_bits = kGapBits;
  int max_iter = kBisectionMaxIter;
  double rank_tol = kRankTol;
  double psd_tol = kPsdTol;
  // scale convention for the feasibility subproblem's S variable; the result
  // is invariant under this choice
  double s_scale = 1.0;
};

// True iff the channel's Choi state has product support I_R (x) supp(phi_B),
// the exact condition for a finite projective mutual information.
bool iomega_finite(const Channel& n, double rank_tol = kRankTol);

// Support product test for the state variant.
bool product_support(const Mat& rho_ab, Eigen::Index d_a, double rank_tol = kRankTol);

// Projective mutual information of a channel in bits, with certified
// two-sided bounds: upper - lower <= gap_bits on success.
IomegaResult iomega_channel(const Channel& n, const IomegaOptions& opts = {});

// Projective mutual information of a bipartite state: the least log2(xi)
// admitting rho_AB <= rho_A (x) S <= xi rho_AB.
IomegaResult iomega_state(const Mat& rho_ab, Eigen::Index d_a, const IomegaOptions& opts = {});

// Independent eigenvalue-based certificate checks; a_op is the reference-side
// weight (identity(d_r) for channels, rho_A for states).
bool validate_primal(const Mat& phi, const Mat& a_op, const PrimalCertificate& cert,
                     double tol = kPsdTol);
bool validate_dual(const Mat& phi, const Mat& a_op, const DualCertificate& cert,
                   double tol = kPsdTol);

// Best dual certificate available for a channel, seeded refinement included.
DualCertificate improve_dual(const Channel& n, std::uint64_t seed = 0);

// Sampled lower bound on the channel distinguishability measure: the largest
// dmax between N composed with two preparation or processing channels whose
// input dimension matches the output of N.
Bits delta_lower_sample(const Channel& n, int trials = 50, std::uint64_t seed = 0);

// Encoders realizing a dual certificate operationally: channels p_enc, q_enc
// (d_B -> d_A) and a rank-one measurement operator 0 <= o <= I such that
// Tr[o choi(N after p_enc)] / Tr[o choi(N after q_enc)] equals the certified
// ratio.
struct EncoderPair {
  Channel p_enc, q_enc;
  Mat o;
  double ratio = 1.0;
};
EncoderPair encoders_from_dual(const Channel& n, const DualCertificate& cert,
                               double tol = kActionTol);

}  // namespace postcap
