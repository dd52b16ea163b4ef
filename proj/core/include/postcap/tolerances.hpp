#ifndef POSTCAP_TOLERANCES_HPP
#define POSTCAP_TOLERANCES_HPP

namespace postcap {

// Default numerical tolerances, overridable per call where a signature allows it.
inline constexpr double kHermTol = 1e-10;   // max-abs deviation from Hermiticity
inline constexpr double kPsdTol = 1e-9;     // relative eigenvalue floor for PSD checks
inline constexpr double kRankTol = 1e-9;    // relative eigenvalue cutoff for support/rank
inline constexpr double kGapBits = 1e-6;    // default certified gap for the projective SDP, in bits
inline constexpr double kMarginalTol = 1e-8;   // dual-pair marginal mismatch bound
inline constexpr double kActionTol = 1e-7;     // encoder recovery action-constraint bound
inline constexpr int kBisectionMaxIter = 200;  // hard cap on bisection steps

}  // namespace postcap

#endif  // POSTCAP_TOLERANCES_HPP
