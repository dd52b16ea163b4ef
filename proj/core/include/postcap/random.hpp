#ifndef POSTCAP_RANDOM_HPP
#define POSTCAP_RANDOM_HPP

#include <cstdint>
#include <random>

#include "postcap/matrix.hpp"

namespace postcap {

// Deterministic random source; every sampling routine takes one explicitly.
struct Rng {
  std::mt19937_64 engine;
  explicit Rng(std::uint64_t seed) : engine(seed) {}
  double normal() {
    std::normal_distribution<double> n(0.0, 1.0);
    return n(engine);
  }
};

// Matrix with iid standard complex Gaussian entries.
Mat gaussian_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols);

// Haar-random unit vector in C^d.
Vec random_pure_state(Rng& rng, Eigen::Index d);

// Random full-rank density matrix (Gaussian Wishart, normalized to trace 1).
Mat random_density(Rng& rng, Eigen::Index d);

// Haar-random isometry C^{cols} -> C^{rows}; requires rows >= cols.
Mat random_isometry(Rng& rng, Eigen::Index rows, Eigen::Index cols);

}  // namespace postcap

#endif  // POSTCAP_RANDOM_HPP
