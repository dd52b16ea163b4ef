// Acceptance gate: every release-blocking property checked end to end, one
// verdict line per criterion. Exit code 0 iff all criteria pass.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "postcap/capacity.hpp"
#include "postcap/channel.hpp"
#include "postcap/divergence.hpp"
#include "postcap/errors.hpp"
#include "postcap/matrix.hpp"
#include "postcap/projective.hpp"
#include "postcap/protocol.hpp"
#include "postcap/random.hpp"

namespace {

using namespace postcap;
using Clock = std::chrono::steady_clock;

struct Verdict {
  bool pass = true;
  std::string detail;
};

struct Tally {
  Verdict v;
  std::ostringstream note;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      v.pass = false;
      if (!v.detail.empty()) v.detail += "; ";
      v.detail += what;
    }
  }
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

Channel depol(double p) { return make_builtin("depolarizing", {{"p", p}}); }

Channel random_full_rank_channel(Rng& rng) {
  for (;;) {
    Channel c = haar_channel(rng, 2, 2, 4);
    Spectrum s = eig_hermitian(choi_of(c));
    if (s.values(s.values.size() - 1) > 1e-8) return c;
  }
}

Verdict closed_form_projective_values() {
  Tally t;
  for (double p : {0.3, 0.5, 0.8, 1.0}) {
    auto t0 = Clock::now();
    IomegaResult r = iomega_channel(depol(p));
    double dt = seconds_since(t0);
    double want = std::log2((4.0 - 3.0 * p) / p);
    t.require(r.finite, "depolarizing value not finite");
    t.require(std::abs(r.value() - want) <= 1e-5, "depolarizing value off at p=" + std::to_string(p));
    t.require(dt <= 2.0, "depolarizing solve too slow");
  }
  for (double f : {0.1, 0.2}) {
    auto t0 = Clock::now();
    IomegaResult r = iomega_channel(make_builtin("bsc_embed", {{"f", f}}));
    double dt = seconds_since(t0);
    double want = f == 0.1 ? std::log2(9.0) : 2.0;
    t.require(r.finite && std::abs(r.value() - want) <= 1e-5,
              "flip-embedding value off at f=" + std::to_string(f));
    t.require(dt <= 2.0, "flip-embedding solve too slow");
  }
  return t.v;
}

Verdict duality_gap_and_revalidation() {
  Tally t;
  Rng rng(2024);
  double worst_dt = 0.0;
  for (int i = 0; i < 50; ++i) {
    Channel c = random_full_rank_channel(rng);
    auto t0 = Clock::now();
    IomegaResult r = iomega_channel(c);
    worst_dt = std::max(worst_dt, seconds_since(t0));
    t.require(r.finite, "full-rank channel reported unbounded");
    t.require(r.upper_bits - r.lower_bits <= 1e-5, "gap above 1e-5 bits");
    t.require(bool(r.primal) && bool(r.dual), "missing certificate");
    if (r.primal && r.dual) {
      Mat phi = choi_of(c);
      t.require(validate_primal(phi, identity(2), *r.primal), "primal failed re-validation");
      t.require(validate_dual(phi, identity(2), *r.dual), "dual failed re-validation");
    }
  }
  t.require(worst_dt <= 10.0, "slowest solve above 10 s");
  return t.v;
}

Verdict additivity_under_tensor_products() {
  Tally t;
  {
    auto t0 = Clock::now();
    Channel a = depol(0.5), b = depol(0.8);
    double va = iomega_channel(a).value();
    double vb = iomega_channel(b).value();
    double vprod = iomega_channel(tensor_channels(a, b)).value();
    t.require(std::abs(vprod - std::log2(10.0)) <= 2e-5, "product value misses log2 10");
    t.require(std::abs(vprod - va - vb) <= 3e-5, "depolarizing pair not additive");
    t.require(seconds_since(t0) <= 60.0, "depolarizing pair too slow");
  }
  Rng rng(77);
  for (int i = 0; i < 10; ++i) {
    Channel a = random_full_rank_channel(rng);
    Channel b = random_full_rank_channel(rng);
    auto t0 = Clock::now();
    double va = iomega_channel(a).value();
    double vb = iomega_channel(b).value();
    double vprod = iomega_channel(tensor_channels(a, b)).value();
    t.require(std::abs(vprod - va - vb) <= 3e-5, "random pair " + std::to_string(i) + " not additive");
    t.require(seconds_since(t0) <= 60.0, "random pair too slow");
  }
  return t.v;
}

Verdict finiteness_classification() {
  Tally t;
  std::vector<std::pair<Channel, bool>> table;
  table.emplace_back(make_builtin("identity", {{"d", 2}}), false);
  table.emplace_back(make_builtin("dephasing", {{"q", 0.3}}), false);
  table.emplace_back(make_builtin("amplitude_damping", {{"gamma", 0.3}}), false);
  table.emplace_back(depol(0.3), true);
  table.emplace_back(depol(0.5), true);
  table.emplace_back(depol(1.0), true);
  table.emplace_back(make_builtin("bsc_embed", {{"f", 0.1}}), true);
  table.emplace_back(make_builtin("bsc_embed", {{"f", 0.5}}), true);
  table.emplace_back(make_builtin("bsc_embed", {{"f", 0.9}}), true);
  table.emplace_back(make_builtin("replacement", {{"d_in", 2}}), true);
  int idx = 0;
  for (const auto& [c, want_finite] : table) {
    t.require(iomega_finite(c) == want_finite,
              "support classifier wrong at entry " + std::to_string(idx));
    t.require(iomega_channel(c).finite == want_finite,
              "solver finiteness wrong at entry " + std::to_string(idx));
    ++idx;
  }
  return t.v;
}

Verdict oneshot_bound_arithmetic() {
  Tally t;
  CapacityReport r = report_from_iomega(std::log2(5.0), 0.5);
  t.require(r.q_lower_bits == 1.0 && r.q_upper_bits == 1.0, "quantum bounds not (1, 1)");
  t.require(r.c_lower_bits == 2.0, "classical lower bound not 2");
  t.require(std::abs(r.c_upper_bits - std::log2(6.0)) <= 1e-12, "classical upper bound not log2 6");
  CapacityReport z = report_from_iomega(0.0, 0.5);
  t.require(z.q_lower_bits == 0.0 && z.q_upper_bits == 0.0, "zero-value quantum bounds not (0, 0)");
  return t.v;
}

Verdict teleport_achievability_and_converse() {
  Tally t;
  Channel n = depol(0.5);
  IomegaResult res = iomega_channel(n);
  DualCertificate cert = improve_dual(n, 1);
  EncoderPair enc = encoders_from_dual(n, cert);
  t.require(enc.ratio >= 5.0 - 1e-3, "flag ratio below 5");
  TeleportProtocol proto = teleport_protocol(2, enc);
  double bound = teleport_error_bound(n, proto);
  t.require(std::abs(bound - 1.0 / (enc.ratio / 3.0 + 1.0)) <= 1e-12, "bound formula mismatch");
  t.require(bound <= 0.375 + 1e-3, "bound above 3/8");
  t.require(bound <= 0.5, "bound above target error");
  Subchannel sim = apply_supermap(build_teleport(n, proto), n);
  double me = 1.0 - conditional_fidelity(sim, max_entangled_state(2), 2);
  t.require(me <= bound + 1e-9, "simulated error exceeds certified bound");
  bool rejected = false;
  try {
    build_pna_achiever(n, 3, 0.5, cert, *res.primal);
  } catch (const InfeasibleRate&) {
    rejected = true;
  }
  t.require(rejected, "nine-message rate not rejected");
  return t.v;
}

Verdict postselected_testing_metric() {
  Tally t;
  Rng rng(1234);
  int tight = 0;
  for (int i = 0; i < 200; ++i) {
    Mat rho = random_density(rng, 2);
    Mat sigma = random_density(rng, 2);
    double closed = dph_closed(domega_states(rho, sigma), 0.5);
    DphWitness w = dph_search(rho, sigma, 0.5, 50, std::uint64_t(i));
    t.require(w.value <= closed + 1e-9, "witness exceeds closed form at pair " + std::to_string(i));
    if (closed - w.value <= 1e-3) ++tight;
  }
  t.require(tight >= 180, "closed within 1e-3 on only " + std::to_string(tight) + "/200");
  for (int i = 0; i < 100; ++i) {
    Mat rho = random_density(rng, 2);
    Mat sigma = random_density(rng, 2);
    Channel nc = haar_channel(rng, 2, 2, 2);
    double before = dph_closed(domega_states(rho, sigma), 0.5);
    double after = dph_closed(
        domega_states(apply_channel(nc, rho), apply_channel(nc, sigma)), 0.5);
    t.require(after <= before + 1e-9, "data processing violated at triple " + std::to_string(i));
  }
  return t.v;
}

Verdict nonsignalling_characterization() {
  Tally t;
  Channel n = depol(0.5);
  DualCertificate cert = improve_dual(n, 1);
  Supermap tel = build_teleport(n, teleport_protocol(2, encoders_from_dual(n, cert)));
  t.require(check_nonsignalling(tel, Direction::AtoB, 16, 3) <= 1e-8,
            "teleport signals forward");
  t.require(check_replacement_preserving(tel, 8, 3).violation <= 1e-8,
            "teleport breaks replacement preservation");
  t.require(check_nonsignalling(bell_loop_supermap(2), Direction::BtoA, 16, 3) >= 0.1,
            "postselected loop fails to signal backward");
  PnaNormalized pn = pna_normalize(tel);
  Rng rng(5);
  for (int i = 0; i < 3; ++i) {
    Channel nc = haar_channel(rng, 2, 2, 2);
    Mat lhs = choi_of(compose(pn.d_flag, apply_supermap(pn.xi, nc)));
    Mat rhs = choi_of(apply_supermap(tel, nc)) / pn.c;
    t.require(max_abs(Mat(lhs - rhs)) <= 1e-8, "flag form round trip off");
  }
  return t.v;
}

Verdict nonsignalling_achiever() {
  Tally t;
  Channel n = depol(0.5);
  IomegaResult res = iomega_channel(n);
  DualCertificate cert = improve_dual(n, 1);
  Supermap ach = build_pna_achiever(n, 2, 0.5, cert, *res.primal);
  t.require(check_replacement_preserving(ach, 8, 4).violation <= 1e-8,
            "achiever breaks replacement preservation");

  Mat phi = choi_of(n);
  Mat s = res.primal->s;
  Mat sigma = s / s.trace().real();
  Mat ref = kron(identity(2) / 2.0, sigma);
  double lam = std::exp2(dmax_states(phi, ref));
  double mu = std::exp2(dmax_states(ref, phi));
  double scale = max_abs(phi);
  Spectrum up = eig_hermitian(Mat(lam * ref - phi));
  Spectrum dn = eig_hermitian(Mat(mu * phi - ref));
  t.require(up.values(up.values.size() - 1) >= -1e-9 * scale, "upper scaling inequality fails");
  t.require(dn.values(dn.values.size() - 1) >= -1e-9 * scale, "lower scaling inequality fails");
  double lo = 3.0 / (4.0 * mu * 0.5), hi = lam / (4.0 * 0.5);
  t.require(lo <= hi + 1e-12, "scaling interval empty at target error");

  Subchannel sim = apply_supermap(ach, n);
  double me = 1.0 - conditional_fidelity(sim, max_entangled_state(2), 2);
  t.require(me <= 0.5 + 1e-6, "error above target at entangled input");
  Rng rng(9);
  for (int i = 0; i < 20; ++i) {
    Vec psi = random_pure_state(rng, 2);
    double err = 1.0 - conditional_fidelity(sim, Mat(psi * psi.adjoint()), 1);
    t.require(err <= 0.5 + 1e-6, "error above target at pure input " + std::to_string(i));
  }

  Supermap triv = build_pna_achiever(n, 2, 0.8, cert, *res.primal);
  t.require(check_replacement_preserving(triv, 8, 4).violation <= 1e-8,
            "trivial branch breaks replacement preservation");
  Subchannel tsim = apply_supermap(triv, n);
  double tfid = conditional_fidelity(tsim, max_entangled_state(2), 2);
  t.require(tfid >= 0.2 - 1e-9, "trivial branch fidelity below floor");
  return t.v;
}

Verdict asymptotic_squeeze() {
  Tally t;
  for (double eps : {0.3, 0.5})
    for (int nn : {1, 2})
      t.require(asymptotic_sandwich_check(depol(0.5), eps, nn),
                "squeeze fails at eps=" + std::to_string(eps) + " n=" + std::to_string(nn));
  return t.v;
}

}  // namespace

int main() {
  struct Item {
    const char* name;
    std::function<Verdict()> run;
  };
  const std::vector<Item> items = {
      {"closed-form projective values", closed_form_projective_values},
      {"duality gap and certificate re-validation", duality_gap_and_revalidation},
      {"additivity under tensor products", additivity_under_tensor_products},
      {"finiteness classification", finiteness_classification},
      {"one-shot bound arithmetic", oneshot_bound_arithmetic},
      {"teleport achievability and converse", teleport_achievability_and_converse},
      {"postselected hypothesis-testing metric", postselected_testing_metric},
      {"nonsignalling characterization", nonsignalling_characterization},
      {"one-shot nonsignalling achiever", nonsignalling_achiever},
      {"asymptotic capacity squeeze", asymptotic_squeeze},
  };

  auto suite0 = Clock::now();
  int passed = 0;
  for (std::size_t i = 0; i < items.size(); ++i) {
    auto t0 = Clock::now();
    Verdict v;
    try {
      v = items[i].run();
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail = std::string("exception: ") + e.what();
    }
    double dt = seconds_since(t0);
    std::printf("[%s] %2zu. %s (%.2f s)%s%s%s\n", v.pass ? "PASS" : "FAIL", i + 1, items[i].name,
                dt, v.detail.empty() ? "" : " -- ", v.detail.c_str(), "");
    if (v.pass) ++passed;
  }
  double total = seconds_since(suite0);
  bool in_budget = total <= 600.0;
  std::printf("acceptance: %d/%zu passed in %.1f s%s\n", passed, items.size(), total,
              in_budget ? "" : " (over the 10 minute budget)");
  return (passed == int(items.size()) && in_budget) ? 0 : 1;
}
