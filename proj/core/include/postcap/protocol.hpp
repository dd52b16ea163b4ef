#ifndef POSTCAP_PROTOCOL_HPP
#define POSTCAP_PROTOCOL_HPP

#include <cstdint>

#include "postcap/channel.hpp"
#include "postcap/projective.hpp"

namespace postcap {

// Teleportation-based coding protocol: two maximally entangled pairs, an
// incomplete Bell measurement on (message, first pair), branch encoders
// p_enc / q_enc on the sender half of the second pair, and a decoder effect o
// measured on (channel output, receiver half of the second pair), in that
// factor order.  0 <= o <= I.
struct TeleportProtocol {
  Eigen::Index d_m = 0;
  Channel p_enc, q_enc;
  Mat o;
};

// Adapter: wraps the encoder pair extracted from a dual certificate into a
// protocol for message dimension d_m.  Reorders the stored effect from
// (reference, output) to (output, reference).
TeleportProtocol teleport_protocol(Eigen::Index d_m, const EncoderPair& enc);

// Entanglement-assisted protocol triple: shared state gamma on A' (x) B',
// encoder enc: M (x) A' -> A, decoder dec: B (x) B' -> Mhat.
struct PEATriple {
  Mat gamma;
  Eigen::Index d_ap = 0;
  Eigen::Index d_bp = 0;
  Channel enc;
  Subchannel dec;
};

enum class Direction { AtoB, BtoA };

// Fit of a supermap's action on replacement channels: residual against
// p (I/d_M) (x) sigma, with (p, sigma) fitted at the maximally mixed target.
struct ReplacementFit {
  double violation = 0.0;
  double p = 0.0;
  Mat sigma;
};

// Bundled nonsignalling diagnostics; scale_c is the fitted replacement scale.
struct NSCheckReport {
  double a_to_b_violation = 0.0;
  double b_to_a_violation = 0.0;
  double replacement_preserving_violation = 0.0;
  double scale_c = 0.0;
};

// Deterministic completion of a nonsignalling supermap: xi carries a flag
// qubit appended to the output, d_flag projects flag 1, and c (Theta / c is
// the flag-1 branch) is the normalization constant.
struct PnaNormalized {
  Supermap xi;
  Subchannel d_flag;
  double c = 0.0;
};

struct QuantumErrorReport {
  double heuristic_worst = 0.0;
  double me_value = 0.0;
};

// Worst-case conditional error over classical messages:
// 1 - min_m <m| np[|m><m|] |m> / Tr[np[|m><m|]].  Requires d_in == d_out.
double conditional_error_classical(const Subchannel& np);

// Conditional fidelity Tr[psi np[psi]] / Tr[np[psi]] at a (pure) input state
// psi on R (x) M with d_R = d_r; the subchannel acts on the trailing factor.
double conditional_fidelity(const Subchannel& np, const Mat& psi, Eigen::Index d_r);

// Worst-case conditional quantum error: me_value is the exact value at the
// maximally entangled input (a certified lower bound on the worst case);
// heuristic_worst is the best value found by a seeded projected-gradient
// search over pure inputs with d_R = d_M, never below me_value.  The search
// keeps earlier initial points as restarts grow, so the result is monotone.
QuantumErrorReport conditional_error_quantum(const Subchannel& np, int restarts = 8,
                                             std::uint64_t seed = 0);

// Wires a protocol triple into a supermap: attach gamma, apply the encoder,
// route B' as memory to the decoder.
Supermap build_pea_supermap(const PEATriple& t);

// Wires the teleportation protocol over channel n into a supermap.
Supermap build_teleport(const Channel& n, const TeleportProtocol& proto);

// Conditional-error bound of the teleportation protocol:
// (ratio / (d_m^2 - 1) + 1)^{-1} with ratio the conclusive-overlap quotient
// of the two branch encoders.  Equals the maximally-entangled-input error of
// the simulated subchannel and upper-bounds its worst-case error.
double teleport_error_bound(const Channel& n, const TeleportProtocol& proto);

// Lifts a quantum supermap on d_M-dimensional messages to a classical one on
// d_M^2 messages: controlled Bell-state preparation on a fresh pair, quantum
// transmission, Bell-basis decoding.
Supermap superdense_lift(const Supermap& theta_q);

// Largest trace-norm deviation of the far-side output marginal under a change
// of the near-side input, maximized exactly over a spanning operator family
// and redundantly over `samples` random state triples.
double check_nonsignalling(const Supermap& theta, Direction dir, int samples = 20,
                           std::uint64_t seed = 0);

// Fits the supermap's action on sampled replacement channels to a scaled
// replacement channel; violation is the largest Choi residual.
ReplacementFit check_replacement_preserving(const Supermap& theta, int trials = 10,
                                            std::uint64_t seed = 0);

// Runs both direction checks and the replacement fit.
NSCheckReport check_supermap(const Supermap& theta, int samples = 20, std::uint64_t seed = 0);

// Shared maximally entangled pair with a postselected entangled measurement
// after the channel: routes the slot input backwards, the canonical witness
// that postselection breaks receiver-to-sender causality.
Supermap bell_loop_supermap(Eigen::Index d = 2);

// Supermap that discards the message and the plugged channel and outputs the
// maximally mixed state.
Supermap depolarising_supermap(Eigen::Index d_m, Eigen::Index d_a, Eigen::Index d_b,
                               Eigen::Index d_mhat);

// Reconstructs a decomposed supermap from the bipartite Choi state of a
// deterministic comb (trace-preserving first tooth).  The result is validated
// against the input; memory dimension is the rank of the first-tooth Choi.
Supermap comb_from_bipartite(const BipartiteChoi& bc, double rank_tol = kRankTol);

// Completes a nonsignalling supermap Theta to a deterministic flag-carrying
// supermap xi with c * (flag-1 branch of xi) = Theta, c = d_M^2 d_A d_B.
PnaNormalized pna_normalize(const Supermap& theta);

// Measure-and-prepare supermap achieving conditional error <= eps for message
// dimension d_m whenever d_m^2 < eps/(1-eps) 2^{cert.bits} + 1: prepare the
// maximally entangled probe, measure the certificate pair on (reference,
// channel output), and prepare the matching mixture of identity and
// depolarising noise on the message.  Errors over eps > (d_m^2-1)/d_m^2
// reduce to discarding the channel and preparing depolarising noise.
Supermap build_pna_achiever(const Channel& n, Eigen::Index d_m, double eps,
                            const DualCertificate& cert, const PrimalCertificate& primal);

}  // namespace postcap

#endif  // POSTCAP_PROTOCOL_HPP
