#ifndef POSTCAP_CHANNEL_HPP
#define POSTCAP_CHANNEL_HPP

#include <map>
#include <string>
#include <vector>

#include "postcap/matrix.hpp"
#include "postcap/random.hpp"

namespace postcap {

// Completely positive trace-preserving map, Kraus form authoritative.
struct Channel {
  Eigen::Index d_in = 0;
  Eigen::Index d_out = 0;
  std::vector<Mat> kraus;
};

// Completely positive trace-nonincreasing map (sum K^dag K <= I).
struct Subchannel {
  Eigen::Index d_in = 0;
  Eigen::Index d_out = 0;
  std::vector<Mat> kraus;
};

// Probabilistic supermap in decomposed form: a pre channel M -> A (x) E feeding
// the channel slot, a memory E, and a post subchannel B (x) E -> Mhat.
// Memory is always the trailing tensor factor on both sides.
struct Supermap {
  Eigen::Index d_M = 0;
  Eigen::Index d_A = 0;
  Eigen::Index d_B = 0;
  Eigen::Index d_Mhat = 0;
  Eigen::Index d_E = 1;
  Channel pre;      // M -> A (x) E
  Subchannel post;  // B (x) E -> Mhat
};

// Choi state of the induced bipartite map M (x) B -> A (x) Mhat, stored on
// factors [M', B', A, Mhat] (primes are the input references). Derived object;
// the decomposed form above stays authoritative.
struct BipartiteChoi {
  Eigen::Index d_M = 0;
  Eigen::Index d_B = 0;
  Eigen::Index d_A = 0;
  Eigen::Index d_Mhat = 0;
  Mat choi;
};

//==============================================================================
// Construction and validation
//==============================================================================

// Validates sum K^dag K = I within tol and consistent shapes.
Channel make_channel(std::vector<Mat> kraus, double tol = kPsdTol);

// Validates sum K^dag K <= I within tol.
Subchannel make_subchannel(std::vector<Mat> kraus, double tol = kPsdTol);

// Every channel is a subchannel.
Subchannel as_subchannel(const Channel& ch);

// Scales the map by c in [0, 1] (Kraus by sqrt(c)).
Subchannel scale_subchannel(const Subchannel& s, double c);

// Named single-parameter channels. Names: depolarizing (p, optional d),
// dephasing (q), amplitude_damping (gamma), erasure (p, optional d),
// bsc_embed (f), identity (d), replacement (d_in, d_out; maximally mixed target).
Channel make_builtin(const std::string& name, const std::map<std::string, double>& params);

// Replacement channel rho -> Tr[rho] sigma for an arbitrary target state.
Channel replacement_channel(Eigen::Index d_in, const Mat& sigma);

// Haar-random channel from an isometry with environment dimension d_env.
Channel haar_channel(Rng& rng, Eigen::Index d_in, Eigen::Index d_out, Eigen::Index d_env);

// Discrete Weyl unitary X^a Z^b on C^d, global phases omitted.
Mat heisenberg_weyl(Eigen::Index d, Eigen::Index a, Eigen::Index b);

//==============================================================================
// Choi correspondence
//==============================================================================
// Choi operators are STATES here: choi(N) = (id (x) N)[Phi] with Phi the
// maximally entangled state, input reference first, trace 1 for channels.
// The unnormalized convention differs by the factor d_in.

Mat choi_of(const Channel& ch);
Mat choi_of(const Subchannel& s);
Mat choi_from_kraus(const std::vector<Mat>& kraus, Eigen::Index d_in, Eigen::Index d_out);

// Kraus operators from a state-normalized Choi matrix, eigenvalues below
// rank_tol (relative) dropped.
std::vector<Mat> choi_to_kraus(const Mat& choi, Eigen::Index d_in, Eigen::Index d_out,
                               double rank_tol = kRankTol);

// Subchannel from a state-normalized Choi matrix; validates PSD and the
// trace-nonincreasing marginal condition.
Subchannel subchannel_from_choi(const Mat& choi, Eigen::Index d_in, Eigen::Index d_out,
                                double rank_tol = kRankTol);

// Channel from a state-normalized Choi matrix; additionally validates the
// trace-preserving marginal Tr_out[choi] = I/d_in.
Channel channel_from_choi(const Mat& choi, Eigen::Index d_in, Eigen::Index d_out,
                          double rank_tol = kRankTol);

//==============================================================================
// Application and composition
//==============================================================================

Mat apply_kraus(const std::vector<Mat>& kraus, const Mat& x);
Mat apply_channel(const Channel& ch, const Mat& x);
Mat apply_subchannel(const Subchannel& s, const Mat& x);

// Heisenberg-picture adjoint, sum K^dag X K.
Mat apply_adjoint(const Subchannel& s, const Mat& x);

// Applies a Kraus list to one tensor factor of a multipartite operator,
// replacing that factor's dimension by d_new (which may itself be composite).
Mat apply_on_factor(const Mat& x, const std::vector<Eigen::Index>& dims, int factor,
                    const std::vector<Mat>& kraus, Eigen::Index d_new);

// Tensor product channel; Choi factors interleave to (R R') (x) (B B').
Channel tensor_channels(const Channel& a, const Channel& b);

// Sequential composition second after first.
Channel compose(const Channel& second, const Channel& first);
Subchannel compose(const Subchannel& second, const Channel& first);
Subchannel compose(const Subchannel& second, const Subchannel& first);

//==============================================================================
// Supermaps
//==============================================================================

// Validates the dimension wiring of the decomposed form.
Supermap make_supermap(Eigen::Index d_M, Eigen::Index d_A, Eigen::Index d_B,
                       Eigen::Index d_Mhat, Eigen::Index d_E, Channel pre, Subchannel post);

// The simulated subchannel post o (N (x) id_E) o pre.
Subchannel apply_supermap(const Supermap& sm, const Channel& n);

// Choi state of the bipartite map with the channel slot left open.
BipartiteChoi supermap_to_bipartite(const Supermap& sm);

// Recovers the supermap action by contracting the bipartite Choi with choi(N).
// Redundant route used for consistency checks against apply_supermap.
Subchannel action_from_bipartite(const BipartiteChoi& bc, const Channel& n);

}  // namespace postcap

#endif  // POSTCAP_CHANNEL_HPP
