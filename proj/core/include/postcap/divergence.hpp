#ifndef POSTCAP_DIVERGENCE_HPP
#define POSTCAP_DIVERGENCE_HPP

#include <cstdint>
#include <limits>

#include "postcap/channel.hpp"
#include "postcap/matrix.hpp"

namespace postcap {

// Extended-real number of bits; +infinity marks support mismatch regimes.
using Bits = double;

inline constexpr Bits kInfBits = std::numeric_limits<double>::infinity();

// Max-relative entropy log2 inf{lambda : rho <= lambda sigma}, +infinity iff
// supp(rho) is not contained in supp(sigma) within the relative tolerance.
// Inputs must be PSD; values are exact spectral computations, no SDP involved.
Bits dmax_states(const Mat& rho, const Mat& sigma, double rank_tol = kRankTol);

// Max-relative entropy between channels through their Choi states; the
// normalization factor cancels, so the state convention loses nothing.
Bits dmax_channels(const Channel& a, const Channel& b, double rank_tol = kRankTol);

// Hilbert projective divergence dmax(rho||sigma) + dmax(sigma||rho).
// Finite iff the two supports coincide; invariant under scaling either input.
Bits domega_states(const Mat& rho, const Mat& sigma, double rank_tol = kRankTol);

// Postselected hypothesis-testing relative entropy from the projective
// divergence: log2((eps/(1-eps)) 2^domega + 1), computed in a form stable for
// large arguments. Throws EpsOutOfRange unless eps lies strictly in (0, 1).
Bits dph_closed(Bits domega, double eps);

// Feasible three-outcome measurement witness: P, Q PSD with P + Q <= I, the
// conditional type-I error alpha <= eps, and value = -log2(beta) for the
// achieved conditional type-II error beta.
struct DphWitness {
  Bits value = 0.0;
  Mat p;
  Mat q;
  double alpha = 0.0;
  double beta = 1.0;
};

// Variational lower-bound search for the postselected hypothesis-testing
// entropy: alternating generalized-eigenvector updates on the two rank-one
// measurement directions, with seeded random restarts. The returned value is
// evaluated from the witness operators, never from the closed form.
DphWitness dph_search(const Mat& rho, const Mat& sigma, double eps, int restarts = 50,
                      std::uint64_t seed = 0);

}  // namespace postcap

#endif  // POSTCAP_DIVERGENCE_HPP
