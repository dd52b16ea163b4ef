#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "io.hpp"
#include "postcap/capacity.hpp"
#include "postcap/channel.hpp"
#include "postcap/errors.hpp"
#include "postcap/projective.hpp"
#include "postcap/protocol.hpp"

namespace {

using namespace postcap;
using postcap::io::json;

struct CommonOpts {
  std::string channel_path;
  std::string out_path;
  double gap = kGapBits;
  double psd_tol = kPsdTol;
  double rank_tol = kRankTol;
  std::uint64_t seed = 0;
  bool deterministic = false;
  bool as_json = false;
  bool as_csv = false;
};

void add_common(CLI::App* cmd, CommonOpts& c, bool needs_channel) {
  auto* ch = cmd->add_option("--channel", c.channel_path, "channel spec JSON file");
  if (needs_channel) ch->required();
  cmd->add_option("--out", c.out_path, "write the JSON report to this file");
  cmd->add_option("--gap", c.gap, "target certified gap in bits");
  cmd->add_option("--psd-tol", c.psd_tol, "positive semidefinite tolerance");
  cmd->add_option("--rank-tol", c.rank_tol, "relative rank cutoff");
  cmd->add_option("--seed", c.seed, "seed for randomized refinement and sampling");
  cmd->add_flag("--deterministic", c.deterministic, "suppress the timestamp field");
  cmd->add_flag("--json", c.as_json, "print the JSON report to stdout");
  cmd->add_flag("--csv", c.as_csv, "print CSV to stdout");
}

IomegaOptions solver_opts(const CommonOpts& c) {
  IomegaOptions o;
  o.gap_bits = c.gap;
  o.psd_tol = c.psd_tol;
  o.rank_tol = c.rank_tol;
  return o;
}

io::ReportMeta meta_of(const CommonOpts& c) {
  return {c.seed, c.gap, c.psd_tol, c.rank_tol, c.deterministic};
}

// outward rounding keeps the printed interval a true enclosure
std::string interval_line(double lo, double hi) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), "I_omega in [%.6f, %.6f] bits",
                std::floor(lo * 1e6) / 1e6, std::ceil(hi * 1e6) / 1e6);
  return buf;
}

json row_json(const CapacityReport& r) {
  json o;
  o["eps"] = r.eps;
  o["q_lower_bits"] = r.q_lower_bits;
  o["q_upper_bits"] = r.q_upper_bits;
  o["c_lower_bits"] = r.c_lower_bits;
  o["c_upper_bits"] = r.c_upper_bits;
  o["asymptotic_c_bits"] = r.asymptotic_c_bits;
  o["asymptotic_q_bits"] = r.asymptotic_q_bits;
  o["edge_case"] = r.edge_case;
  return o;
}

void maybe_write(const CommonOpts& c, const json& j) {
  if (!c.out_path.empty()) io::write_text(c.out_path, j.dump(2) + "\n");
}

int run_iomega(const CommonOpts& c) {
  Channel n = io::load_channel(c.channel_path);
  IomegaResult res = iomega_channel(n, solver_opts(c));
  CapacityReport rep = report_from_iomega(res.finite ? res.value() : kInfBits, 0.5);
  json j = io::report_to_json(rep, res, meta_of(c));
  if (c.as_json) {
    std::cout << j.dump(2) << "\n";
  } else if (c.as_csv) {
    std::cout << "lower_bits,upper_bits,finite\n"
              << io::format_real(res.lower_bits) << ',' << io::format_real(res.upper_bits)
              << ',' << (res.finite ? 1 : 0) << "\n";
  } else if (res.finite) {
    std::cout << interval_line(res.lower_bits, res.upper_bits) << "\n";
  } else {
    std::cout << "I_omega = +inf (support obstruction)\n";
  }
  maybe_write(c, j);
  return 0;
}

std::vector<double> parse_eps_list(double eps_single, const std::string& grid) {
  std::vector<double> out;
  if (grid.empty()) {
    out.push_back(eps_single);
  } else {
    double a = 0.0, b = 0.0, step = 0.0;
    if (std::sscanf(grid.c_str(), "%lf:%lf:%lf", &a, &b, &step) != 3 || step <= 0.0)
      throw ParamOutOfRange("eps grid must be given as start:stop:step with step > 0");
    for (double e = a; e <= b + 1e-12; e += step) out.push_back(e);
  }
  for (double e : out)
    if (!(e > 0.0 && e < 1.0))
      throw EpsOutOfRange("eps must lie strictly between 0 and 1");
  std::sort(out.begin(), out.end());
  return out;
}

int run_capacity(const CommonOpts& c, double eps_single, const std::string& grid) {
  std::vector<double> eps_list = parse_eps_list(eps_single, grid);
  Channel n = io::load_channel(c.channel_path);
  IomegaResult res = iomega_channel(n, solver_opts(c));
  Bits v = res.finite ? res.value() : kInfBits;
  std::vector<CapacityReport> rows;
  for (double e : eps_list) rows.push_back(report_from_iomega(v, e));

  json j = io::report_to_json(rows.front(), res, meta_of(c));
  j["rows"] = json::array();
  for (const CapacityReport& r : rows) j["rows"].push_back(row_json(r));
  if (!res.finite) j["note"] = "unbounded (postselected CTC regime)";

  if (c.as_json) {
    std::cout << j.dump(2) << "\n";
  } else {
    if (!res.finite) std::cout << "unbounded (postselected CTC regime)\n";
    std::cout << io::csv_header() << "\n";
    for (const CapacityReport& r : rows) std::cout << io::csv_row(r) << "\n";
  }
  maybe_write(c, j);
  return 0;
}

// Orthogonal-support flag pair for channels without a finite projective
// value: prepare basis states, accept on the support of one output.
TeleportProtocol orthogonal_flag_protocol(const Channel& n, Eigen::Index dm,
                                          double rank_tol) {
  Eigen::Index da = n.d_in, db = n.d_out;
  TeleportProtocol best;
  double best_bound = 2.0;
  for (Eigen::Index i = 0; i < da; ++i) {
    Mat out_i = apply_kraus(n.kraus, Mat(basis_ket(da, i) * basis_ket(da, i).adjoint()));
    Spectrum s = eig_hermitian(out_i);
    Mat proj = Mat::Zero(db, db);
    for (Eigen::Index k = 0; k < s.values.size(); ++k)
      if (s.values(k) > rank_tol * std::max(s.values(0), 1e-300))
        proj += s.vectors.col(k) * s.vectors.col(k).adjoint();
    for (Eigen::Index jj = 0; jj < da; ++jj) {
      if (jj == i) continue;
      TeleportProtocol cand;
      cand.d_m = dm;
      std::vector<Mat> pk, qk;
      for (Eigen::Index b = 0; b < db; ++b) {
        pk.push_back(basis_ket(da, i) * basis_ket(db, b).adjoint());
        qk.push_back(basis_ket(da, jj) * basis_ket(db, b).adjoint());
      }
      cand.p_enc = make_channel(std::move(pk));
      cand.q_enc = make_channel(std::move(qk));
      cand.o = kron(proj, identity(db));
      double bound;
      try {
        bound = teleport_error_bound(n, cand);
      } catch (const AllInconclusive&) {
        continue;
      }
      if (bound < best_bound) {
        best_bound = bound;
        best = cand;
      }
    }
  }
  if (best.d_m == 0) throw FeasibilityFailure("no conclusive flag pair found");
  return best;
}

int run_simulate(const CommonOpts& c, Eigen::Index dm, double eps, const std::string& scheme) {
  if (!(eps > 0.0 && eps < 1.0))
    throw EpsOutOfRange("eps must lie strictly between 0 and 1");
  if (scheme != "teleport" && scheme != "pna")
    throw UnknownName("unknown scheme: " + scheme);
  Channel n = io::load_channel(c.channel_path);

  json j;
  j["scheme"] = scheme;
  j["d_m"] = dm;
  j["eps"] = eps;
  double bound = 0.0, me = 0.0;
  bool finite = iomega_finite(n, c.rank_tol);
  if (finite) {
    IomegaResult res = iomega_channel(n, solver_opts(c));
    DualCertificate cert = improve_dual(n, c.seed);
    double limit = eps / (1.0 - eps) * std::exp2(cert.bits) + 1.0;
    if (double(dm) * double(dm) >= limit)
      throw InfeasibleRate("message dimension exceeds the certified one-shot bound");
    j["certified_bits"] = cert.bits;
    j["certificates"]["dual"]["p"] = io::mat_to_json(cert.p);
    j["certificates"]["dual"]["q"] = io::mat_to_json(cert.q);
    j["certificates"]["dual"]["bits"] = cert.bits;
    if (scheme == "teleport") {
      EncoderPair enc = encoders_from_dual(n, cert);
      TeleportProtocol proto = teleport_protocol(dm, enc);
      bound = teleport_error_bound(n, proto);
      Subchannel sub = apply_supermap(build_teleport(n, proto), n);
      me = 1.0 - conditional_fidelity(sub, max_entangled_state(dm), dm);
      j["ratio"] = enc.ratio;
    } else {
      if (!res.primal) throw SolverFailure("no primal certificate available");
      Supermap ach = build_pna_achiever(n, dm, eps, cert, *res.primal);
      Subchannel sub = apply_supermap(ach, n);
      me = 1.0 - conditional_fidelity(sub, max_entangled_state(dm), dm);
      bound = eps;
      ReplacementFit fit = check_replacement_preserving(ach, 5, c.seed);
      j["replacement_violation"] = fit.violation;
    }
  } else {
    if (scheme == "pna")
      throw ParamOutOfRange("the nonsignalling achiever needs a finite projective value");
    TeleportProtocol proto = orthogonal_flag_protocol(n, dm, c.rank_tol);
    bound = teleport_error_bound(n, proto);
    Subchannel sub = apply_supermap(build_teleport(n, proto), n);
    me = 1.0 - conditional_fidelity(sub, max_entangled_state(dm), dm);
    j["certified_bits"] = "inf";
  }
  j["error_bound"] = bound;
  j["me_error"] = me;
  if (c.as_json) {
    std::cout << j.dump(2) << "\n";
  } else {
    std::printf("scheme = %s\n", scheme.c_str());
    std::printf("d_m = %lld, eps = %g\n", static_cast<long long>(dm), eps);
    std::printf("error_bound = %.9f\n", bound);
    std::printf("me_error = %.9f\n", me);
  }
  maybe_write(c, j);
  return 0;
}

int run_check(const CommonOpts& c, const std::string& supermap_path, const std::string& scheme,
              Eigen::Index dm, const std::string& direction) {
  Supermap sm = [&]() -> Supermap {
    if (!supermap_path.empty()) return io::load_supermap(supermap_path);
    if (scheme == "ctc-counterexample") return bell_loop_supermap(dm);
    if (scheme == "depolarising") return depolarising_supermap(dm, dm, dm, dm);
    if (scheme == "teleport") {
      if (c.channel_path.empty())
        throw ParamOutOfRange("teleport scheme needs --channel");
      Channel n = io::load_channel(c.channel_path);
      DualCertificate cert = improve_dual(n, c.seed);
      TeleportProtocol proto = teleport_protocol(dm, encoders_from_dual(n, cert));
      return build_teleport(n, proto);
    }
    throw UnknownName("unknown scheme: " + scheme);
  }();

  json j;
  j["d_m"] = sm.d_M;
  if (direction == "ab" || direction == "all") {
    double v = check_nonsignalling(sm, Direction::AtoB, 12, c.seed);
    std::printf("ab_violation = %.12g\n", v);
    j["ab_violation"] = v;
  }
  if (direction == "ba" || direction == "all") {
    double v = check_nonsignalling(sm, Direction::BtoA, 12, c.seed + 1);
    std::printf("ba_violation = %.12g\n", v);
    j["ba_violation"] = v;
  }
  if (direction == "replacement" || direction == "all") {
    ReplacementFit fit = check_replacement_preserving(sm, 8, c.seed + 2);
    std::printf("replacement_violation = %.12g\n", fit.violation);
    std::printf("p = %.12g\n", fit.p);
    j["replacement_violation"] = fit.violation;
    j["p"] = fit.p;
  }
  maybe_write(c, j);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"postselected communication capacities of quantum channels"};
  app.require_subcommand(1);

  CommonOpts io_opts, cap_opts, sim_opts, chk_opts;
  double eps_single = 0.0;
  std::string eps_grid;
  Eigen::Index sim_dm = 2, chk_dm = 2;
  double sim_eps = 0.5;
  std::string sim_scheme = "teleport", chk_scheme, chk_supermap, chk_direction = "all";

  CLI::App* c_io = app.add_subcommand("iomega", "projective mutual information with certificates");
  add_common(c_io, io_opts, true);

  CLI::App* c_cap = app.add_subcommand("capacity", "one-shot and asymptotic capacity bounds");
  add_common(c_cap, cap_opts, true);
  auto* o_eps = c_cap->add_option("--eps", eps_single, "postselection error parameter");
  auto* o_grid = c_cap->add_option("--eps-grid", eps_grid, "eps sweep start:stop:step");
  o_eps->excludes(o_grid);
  o_grid->excludes(o_eps);

  CLI::App* c_sim = app.add_subcommand("simulate", "build and evaluate a coding protocol");
  add_common(c_sim, sim_opts, true);
  c_sim->add_option("--dm", sim_dm, "message dimension")->required();
  c_sim->add_option("--eps", sim_eps, "postselection error parameter")->required();
  c_sim->add_option("--scheme", sim_scheme, "teleport or pna");

  CLI::App* c_chk = app.add_subcommand("check", "nonsignalling and replacement diagnostics");
  add_common(c_chk, chk_opts, false);
  c_chk->add_option("--supermap", chk_supermap, "supermap spec JSON file");
  c_chk->add_option("--scheme", chk_scheme, "teleport, ctc-counterexample, or depolarising");
  c_chk->add_option("--dm", chk_dm, "message dimension for builtin schemes");
  c_chk->add_option("--direction", chk_direction, "ab, ba, replacement, or all");

  try {
    app.parse(argc, argv);
    if (c_io->parsed()) return run_iomega(io_opts);
    if (c_cap->parsed()) {
      if (o_eps->count() == 0 && o_grid->count() == 0)
        throw ParamOutOfRange("capacity needs --eps or --eps-grid");
      return run_capacity(cap_opts, eps_single, eps_grid);
    }
    if (c_sim->parsed()) return run_simulate(sim_opts, sim_dm, sim_eps, sim_scheme);
    if (c_chk->parsed()) {
      if (chk_supermap.empty() && chk_scheme.empty())
        throw ParamOutOfRange("check needs --supermap or --scheme");
      if (chk_direction != "ab" && chk_direction != "ba" && chk_direction != "replacement" &&
          chk_direction != "all")
        throw ParamOutOfRange("direction must be ab, ba, replacement, or all");
      return run_check(chk_opts, chk_supermap, chk_scheme, chk_dm, chk_direction);
    }
    return 1;
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const InfeasibleRate&) {
    std::cerr << "rate infeasible (Theorem 1 converse)\n";
    return 3;
  } catch (const SolverFailure& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return 2;
  } catch (const NoConvergence& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return 2;
  } catch (const FeasibilityFailure& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return 2;
  } catch (const EmptyScalingInterval& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
