#include <benchmark/benchmark.h>

#include "postcap/capacity.hpp"
#include "postcap/channel.hpp"
#include "postcap/divergence.hpp"
#include "postcap/matrix.hpp"
#include "postcap/projective.hpp"
#include "postcap/protocol.hpp"
#include "postcap/random.hpp"

namespace {

using namespace postcap;

Mat random_herm(Rng& rng, Eigen::Index d) {
  Mat g = gaussian_matrix(rng, d, d);
  return Mat(g + g.adjoint());
}

void bm_iomega_qubit(benchmark::State& state) {
  Channel n = make_builtin("depolarizing", {{"p", 0.5}});
  for (auto _ : state) benchmark::DoNotOptimize(iomega_channel(n).upper_bits);
}
BENCHMARK(bm_iomega_qubit)->Unit(benchmark::kMillisecond);

void bm_iomega_random_qubit(benchmark::State& state) {
  Rng rng(7);
  Channel n = haar_channel(rng, 2, 2, 4);
  for (auto _ : state) benchmark::DoNotOptimize(iomega_channel(n).upper_bits);
}
BENCHMARK(bm_iomega_random_qubit)->Unit(benchmark::kMillisecond);

void bm_iomega_product_dim16(benchmark::State& state) {
  Channel n = tensor_channels(make_builtin("depolarizing", {{"p", 0.5}}),
                              make_builtin("depolarizing", {{"p", 0.8}}));
  for (auto _ : state) benchmark::DoNotOptimize(iomega_channel(n).upper_bits);
}
BENCHMARK(bm_iomega_product_dim16)->Unit(benchmark::kMillisecond);

void bm_dph_search(benchmark::State& state) {
  Rng rng(11);
  Mat rho = random_density(rng, 2);
  Mat sigma = random_density(rng, 2);
  for (auto _ : state) benchmark::DoNotOptimize(dph_search(rho, sigma, 0.5).value);
}
BENCHMARK(bm_dph_search)->Unit(benchmark::kMillisecond);

void bm_teleport_build_and_apply(benchmark::State& state) {
  Channel n = make_builtin("depolarizing", {{"p", 0.5}});
  DualCertificate cert = improve_dual(n, 1);
  EncoderPair enc = encoders_from_dual(n, cert);
  for (auto _ : state) {
    Supermap tel = build_teleport(n, teleport_protocol(2, enc));
    benchmark::DoNotOptimize(apply_supermap(tel, n).kraus.size());
  }
}
BENCHMARK(bm_teleport_build_and_apply)->Unit(benchmark::kMillisecond);

void bm_partial_trace(benchmark::State& state) {
  Eigen::Index d = state.range(0);
  Rng rng(3);
  Mat m = random_herm(rng, d * d);
  for (auto _ : state) benchmark::DoNotOptimize(partial_trace(m, {d, d}, {0}).trace());
}
BENCHMARK(bm_partial_trace)->Arg(4)->Arg(8)->Arg(16);

void bm_eig_hermitian(benchmark::State& state) {
  Eigen::Index d = state.range(0);
  Rng rng(5);
  Mat m = random_herm(rng, d);
  for (auto _ : state) benchmark::DoNotOptimize(eig_hermitian(m).values.sum());
}
BENCHMARK(bm_eig_hermitian)->Arg(16)->Arg(64);

void bm_choi_kraus_round_trip(benchmark::State& state) {
  Rng rng(9);
  Channel n = haar_channel(rng, 4, 4, 4);
  Mat choi = choi_of(n);
  for (auto _ : state) {
    auto kraus = choi_to_kraus(choi, 4, 4);
    benchmark::DoNotOptimize(choi_from_kraus(kraus, 4, 4).trace());
  }
}
BENCHMARK(bm_choi_kraus_round_trip);

}  // namespace

BENCHMARK_MAIN();
