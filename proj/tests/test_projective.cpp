#include <doctest.h>

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "postcap/channel.hpp"
#include "postcap/divergence.hpp"
#include "postcap/errors.hpp"
#include "postcap/projective.hpp"
#include "postcap/random.hpp"

using namespace postcap;

namespace {

Channel depol(double p) { return make_builtin("depolarizing", {{"p", p}}); }

Channel classical_channel(const Eigen::MatrixXd& t) {
  // column a holds the distribution over outputs b; Kraus sqrt(t(b,a)) |b><a|
  std::vector<Mat> ks;
  for (Eigen::Index a = 0; a < t.cols(); ++a)
    for (Eigen::Index b = 0; b < t.rows(); ++b)
      ks.push_back(std::sqrt(t(b, a)) * basis_ket(t.rows(), b) *
                   basis_ket(t.cols(), a).adjoint());
  return make_channel(std::move(ks));
}

Mat diag2(double a, double b) {
  Mat m = Mat::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}

double classical_oracle(const Eigen::MatrixXd& t) {
  double worst = 1.0;
  for (Eigen::Index b = 0; b < t.rows(); ++b) {
    double hi = t.row(b).maxCoeff();
    double lo = t.row(b).minCoeff();
    worst = std::max(worst, hi / lo);
  }
  return std::log2(worst);
}

}  // namespace

TEST_CASE("depolarizing family matches the closed form") {
  for (double p : {0.3, 0.5, 0.8, 1.0}) {
    IomegaResult r = iomega_channel(depol(p));
    REQUIRE(r.finite);
    double want = std::log2((4.0 - 3.0 * p) / p);
    CHECK(std::abs(r.value() - want) <= 1e-5);
    CHECK(r.upper_bits - r.lower_bits <= kGapBits + 1e-12);
    CHECK(r.lower_bits <= r.upper_bits);
  }
}

TEST_CASE("replacement channel carries no information") {
  Channel rep = make_builtin("replacement", {{"d_in", 2}, {"d_out", 3}});
  IomegaResult r = iomega_channel(rep);
  REQUIRE(r.finite);
  CHECK(r.upper_bits <= 1e-6);
  CHECK(r.lower_bits >= -1e-9);
}

TEST_CASE("binary symmetric embedding matches max column ratio") {
  IomegaResult r1 = iomega_channel(make_builtin("bsc_embed", {{"f", 0.1}}));
  CHECK(std::abs(r1.value() - std::log2(9.0)) <= 1e-5);
  IomegaResult r2 = iomega_channel(make_builtin("bsc_embed", {{"f", 0.2}}));
  CHECK(std::abs(r2.value() - 2.0) <= 1e-5);
}

TEST_CASE("finiteness classification across the channel zoo") {
  CHECK(iomega_finite(depol(0.5)));
  CHECK(iomega_finite(depol(1.0)));
  CHECK_FALSE(iomega_finite(make_builtin("identity", {{"d", 2}})));
  CHECK_FALSE(iomega_finite(make_builtin("dephasing", {{"q", 0.3}})));
  CHECK_FALSE(iomega_finite(make_builtin("erasure", {{"p", 0.5}})));
  CHECK_FALSE(iomega_finite(make_builtin("amplitude_damping", {{"gamma", 0.4}})));
  Rng rng(7);
  CHECK(iomega_finite(haar_channel(rng, 2, 2, 4)));
}

TEST_CASE("infinite value is reported, not thrown") {
  IomegaResult r = iomega_channel(make_builtin("identity", {{"d", 2}}));
  CHECK_FALSE(r.finite);
  CHECK(std::isinf(r.lower_bits));
  CHECK(std::isinf(r.upper_bits));
  CHECK(std::isinf(r.value()));
  CHECK_FALSE(r.primal.has_value());
  CHECK_FALSE(r.dual.has_value());
}

TEST_CASE("state variant: product, entangled-choi, and pure cases") {
  Rng rng(11);
  Mat ra = random_density(rng, 2);
  Mat rb = random_density(rng, 3);
  IomegaResult prod = iomega_state(kron(ra, rb), 2);
  REQUIRE(prod.finite);
  CHECK(prod.upper_bits <= 1e-6);

  IomegaResult choi = iomega_state(choi_of(depol(0.5)), 2);
  REQUIRE(choi.finite);
  CHECK(std::abs(choi.value() - std::log2(5.0)) <= 1e-5);

  IomegaResult pure = iomega_state(max_entangled_state(2), 2);
  CHECK_FALSE(pure.finite);

  CHECK_THROWS_AS(iomega_state(kron(ra, rb) * 2.0, 2), ParamOutOfRange);
  CHECK_THROWS_AS(iomega_state(random_density(rng, 5), 2), DimensionMismatch);
}

TEST_CASE("additivity on a product of depolarizing channels") {
  Channel pair = tensor_channels(depol(0.5), depol(0.8));
  IomegaResult r = iomega_channel(pair);
  REQUIRE(r.finite);
  CHECK(std::abs(r.value() - std::log2(10.0)) <= 3e-5);
}

TEST_CASE("random qubit channels return validated certificates") {
  Rng rng(23);
  for (int i = 0; i < 5; ++i) {
    Channel n = haar_channel(rng, 2, 2, 4);
    REQUIRE(iomega_finite(n));
    IomegaResult r = iomega_channel(n);
    REQUIRE(r.finite);
    REQUIRE(r.primal.has_value());
    REQUIRE(r.dual.has_value());
    Mat phi = choi_of(n);
    CHECK(validate_primal(phi, identity(2), *r.primal));
    CHECK(validate_dual(phi, identity(2), *r.dual));
    CHECK(r.upper_bits - r.lower_bits <= kGapBits + 1e-12);
    CHECK(r.lower_bits >= 0.0);
  }
}

TEST_CASE("classical channels match the exact column-ratio value") {
  Rng rng(31);
  for (int trial = 0; trial < 3; ++trial) {
    Eigen::MatrixXd t(3, 3);
    for (Eigen::Index b = 0; b < 3; ++b)
      for (Eigen::Index a = 0; a < 3; ++a)
        t(b, a) = 0.1 + std::abs(gaussian_matrix(rng, 1, 1)(0, 0).real());
    for (Eigen::Index a = 0; a < 3; ++a) t.col(a) /= t.col(a).sum();
    IomegaResult r = iomega_channel(classical_channel(t));
    REQUIRE(r.finite);
    CHECK(std::abs(r.value() - classical_oracle(t)) <= 1e-5);
  }
}

TEST_CASE("value is invariant under the subproblem scale convention") {
  IomegaOptions a, b, c;
  b.s_scale = 2.0;
  c.s_scale = 3.0;
  double va = iomega_channel(depol(0.3), a).value();
  double vb = iomega_channel(depol(0.3), b).value();
  double vc = iomega_channel(depol(0.3), c).value();
  CHECK(std::abs(va - vb) <= 1e-8);
  CHECK(std::abs(va - vc) <= 1e-8);
}

TEST_CASE("improve_dual reaches the optimum and respects feasibility") {
  DualCertificate best = improve_dual(depol(0.5), 5);
  CHECK(best.bits >= std::log2(5.0) - 1e-6);
  CHECK(validate_dual(choi_of(depol(0.5)), identity(2), best));

  Channel rep = make_builtin("replacement", {{"d_in", 2}, {"d_out", 2}});
  DualCertificate triv = improve_dual(rep, 5);
  CHECK(triv.bits >= -1e-6);
  CHECK(triv.bits <= 1e-9);
  CHECK(validate_dual(choi_of(rep), identity(2), triv));
}

TEST_CASE("sampled distinguishability lower bound") {
  // identity: preparing two basis states gives orthogonal outputs
  CHECK(std::isinf(delta_lower_sample(make_builtin("identity", {{"d", 2}}), 10, 1)));
  // replacement: all inputs map to the same state
  Channel rep = make_builtin("replacement", {{"d_in", 2}, {"d_out", 2}});
  CHECK(delta_lower_sample(rep, 10, 1) <= 1e-9);
  // generic: below the projective value, above the basis-pair bound
  Bits s = delta_lower_sample(depol(0.5), 20, 1);
  CHECK(s >= std::log2(3.0) - 1e-9);
  CHECK(s <= iomega_channel(depol(0.5)).upper_bits + 1e-6);
}

TEST_CASE("encoders realize the dual certificate ratio") {
  Channel n = depol(0.5);
  IomegaResult r = iomega_channel(n);
  REQUIRE(r.dual.has_value());
  EncoderPair enc = encoders_from_dual(n, *r.dual);
  CHECK(enc.ratio >= 5.0 - 1e-3);
  CHECK(std::abs(enc.ratio - std::exp2(r.dual->bits)) <= 1e-4 * enc.ratio);
  // measurement operator is rank one and an effect
  Spectrum os = eig_hermitian(enc.o);
  CHECK(os.values(0) <= 1.0 + 1e-9);
  CHECK(os.values(0) >= 0.0);
  CHECK(std::abs(os.values(1)) <= 1e-9);
  CHECK(enc.p_enc.d_in == 2);
  CHECK(enc.p_enc.d_out == 2);
}

TEST_CASE("identical certificate halves give indistinguishable encoders") {
  Rng rng(41);
  Channel n = depol(0.3);
  Mat pi = random_density(rng, 4);
  DualCertificate cert{0.7 * pi, 0.7 * pi, 0.0};
  EncoderPair enc = encoders_from_dual(n, cert);
  CHECK(std::abs(enc.ratio - 1.0) <= 1e-6);
  Mat c1 = choi_of(compose(n, enc.p_enc));
  Mat c2 = choi_of(compose(n, enc.q_enc));
  CHECK(max_abs(c1 - c2) <= 1e-6);
}

TEST_CASE("encoder extraction rejects malformed certificates") {
  Channel n = depol(0.5);
  DualCertificate wrong_shape{identity(3), identity(3), 0.0};
  CHECK_THROWS_AS(encoders_from_dual(n, wrong_shape), DimensionMismatch);
  DualCertificate negative{-identity(4), identity(4), 0.0};
  CHECK_THROWS_AS(encoders_from_dual(n, negative), FeasibilityFailure);
  DualCertificate mismatched{kron(identity(2), diag2(0.9, 0.1)),
                             kron(identity(2), diag2(0.5, 0.5)), 0.0};
  CHECK_THROWS_AS(encoders_from_dual(n, mismatched), FeasibilityFailure);
}
