#pragma once

#include "postcap/channel.hpp"
#include "postcap/divergence.hpp"
#include "postcap/projective.hpp"

namespace postcap {

// One-shot bound pair in bits. edge_case marks arguments within the 1e-9
// log-space guard band of an integer, where the floor/ceiling convention
// (treat as exactly that integer) decided the value.
struct BoundPair {
  Bits lower = 0.0;
  Bits upper = 0.0;
  bool edge_case = false;
};

// Largest verified message sizes for quantum transmission at error eps:
// lower = log2 ceil(sqrt(arg) - 1) clamped >= 0, upper = log2 floor(sqrt(arg))
// with arg = eps/(1-eps) * 2^iomega + 1. Infinite iomega gives infinite bounds.
BoundPair oneshot_quantum_bounds(Bits iomega, double eps);

// Classical counterpart: lower = 2 * quantum lower (same ceiling squared),
// upper = log2 floor(arg).
BoundPair oneshot_classical_bounds(Bits iomega, double eps);

struct CapacityReport {
  double eps = 0.5;
  Bits iomega_bits = 0.0;
  Bits q_lower_bits = 0.0, q_upper_bits = 0.0;
  Bits c_lower_bits = 0.0, c_upper_bits = 0.0;
  Bits asymptotic_c_bits = 0.0, asymptotic_q_bits = 0.0;
  bool edge_case = false;
  bool finite = true;
};

// Assembles every bound from a precomputed projective value.
CapacityReport report_from_iomega(Bits iomega, double eps);

// Full report for a channel at a given eps; runs the projective SDP once.
CapacityReport capacity_report(const Channel& n, double eps, const IomegaOptions& opts = {});

// Asymptotic quantities only depend on the channel; one-shot fields are
// filled at the reference error 1/2.
CapacityReport asymptotic_report(const Channel& n, double gap_bits = kGapBits);

// Verifies the two-sided squeeze on the n-copy one-shot classical bounds:
//   (1/n) log2(eps/(4(1-eps))) + iomega <= (1/n) c_lower(N^n)
//   (1/n) c_upper(N^n) <= (1/n) log2(1/(1-eps)) + iomega.
// The n-copy projective value is computed by a direct SDP for n <= 2 and by
// additivity for n = 3.
bool asymptotic_sandwich_check(const Channel& n, double eps, int n_copies);

}  // namespace postcap
