#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "io.hpp"
#include "postcap/capacity.hpp"
#include "postcap/channel.hpp"
#include "postcap/errors.hpp"
#include "postcap/matrix.hpp"
#include "postcap/projective.hpp"
#include "postcap/protocol.hpp"
#include "postcap/random.hpp"

namespace {

using namespace postcap;
using postcap::io::json;

Mat random_mat(Rng& rng, Eigen::Index r, Eigen::Index c) {
  Mat m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = cplx(rng.normal(), rng.normal());
  return m;
}

std::filesystem::path scratch() {
  auto p = std::filesystem::temp_directory_path() / "postcap_cli_tests";
  std::filesystem::create_directories(p);
  return p;
}

std::string fixture(const std::string& name, const std::string& text) {
  auto p = (scratch() / name).string();
  io::write_text(p, text);
  return p;
}

std::string depol05_file() {
  return fixture("depol05.json",
                 R"({"name": "depol05", "rep": {"kind": "builtin", "builtin_name": "depolarizing", "params": {"p": 0.5}}})");
}

std::string identity_file() {
  return fixture("identity.json",
                 R"({"name": "id2", "rep": {"kind": "builtin", "builtin_name": "identity", "params": {"d": 2}}})");
}

#ifdef POSTCAP_CLI_PATH

struct CliResult {
  int code = -1;
  std::string out;
};

CliResult run_cli(const std::string& args) {
  std::string cmd = std::string(POSTCAP_CLI_PATH) + " " + args + " 2>&1";
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  CliResult r;
  char buf[4096];
  std::size_t nread = 0;
  while ((nread = std::fread(buf, 1, sizeof(buf), p)) > 0) r.out.append(buf, nread);
  int st = pclose(p);
  r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

double grab(const std::string& out, const std::string& key) {
  auto pos = out.find(key + " = ");
  REQUIRE(pos != std::string::npos);
  return std::strtod(out.c_str() + pos + key.size() + 3, nullptr);
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::string cur;
  for (char ch : text) {
    if (ch == '\n') {
      lines.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  if (!cur.empty()) lines.push_back(cur);
  return lines;
}

struct CsvRow {
  double eps, q_lo, q_hi, c_lo, c_hi, ac, aq;
};

CsvRow parse_row(const std::string& line) {
  CsvRow r{};
  REQUIRE(std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf,%lf,%lf,%lf", &r.eps, &r.q_lo, &r.q_hi,
                      &r.c_lo, &r.c_hi, &r.ac, &r.aq) == 7);
  return r;
}

#endif

}  // namespace

TEST_CASE("matrix json round trips are exact through serialized text") {
  Rng rng(3);
  Mat m = random_mat(rng, 3, 4);
  json j = io::mat_to_json(m);
  CHECK(max_abs(io::mat_from_json(j) - m) == 0.0);
  json parsed = json::parse(j.dump());
  CHECK(max_abs(io::mat_from_json(parsed) - m) == 0.0);
}

TEST_CASE("channel specs load from kraus choi and builtin representations") {
  Channel dep = make_builtin("depolarizing", {{"p", 0.3}});

  json jk = io::channel_to_json(dep, "dep");
  CHECK(jk.at("rep").at("kind") == "kraus");
  Channel back = io::channel_from_json(jk);
  CHECK(max_abs(choi_of(back) - choi_of(dep)) <= 1e-14);

  json jc;
  jc["rep"]["kind"] = "choi";
  jc["rep"]["normalization"] = "state";
  jc["rep"]["matrix"] = io::mat_to_json(choi_of(dep));
  jc["d_in"] = 2;
  jc["d_out"] = 2;
  Channel back_c = io::channel_from_json(jc);
  CHECK(max_abs(choi_of(back_c) - choi_of(dep)) <= 1e-9);

  json jb;
  jb["rep"]["kind"] = "builtin";
  jb["rep"]["builtin_name"] = "amplitude_damping";
  jb["rep"]["params"]["gamma"] = 0.25;
  Channel ad = io::channel_from_json(jb);
  CHECK(max_abs(choi_of(ad) - choi_of(make_builtin("amplitude_damping", {{"gamma", 0.25}}))) ==
        0.0);
}

TEST_CASE("channel spec validation rejects inconsistent declarations") {
  Channel dep = make_builtin("depolarizing", {{"p", 0.3}});
  json jk = io::channel_to_json(dep, "dep");
  jk["d_in"] = 3;
  CHECK_THROWS_AS(io::channel_from_json(jk), DimensionMismatch);

  json bad_kind;
  bad_kind["rep"]["kind"] = "stinespring";
  CHECK_THROWS_AS(io::channel_from_json(bad_kind), UnknownName);

  json bad_norm;
  bad_norm["rep"]["kind"] = "choi";
  bad_norm["rep"]["normalization"] = "dynamical";
  bad_norm["rep"]["matrix"] = io::mat_to_json(choi_of(dep));
  bad_norm["d_in"] = 2;
  bad_norm["d_out"] = 2;
  CHECK_THROWS_AS(io::channel_from_json(bad_norm), ParamOutOfRange);

  json no_dims;
  no_dims["rep"]["kind"] = "choi";
  no_dims["rep"]["matrix"] = io::mat_to_json(choi_of(dep));
  CHECK_THROWS_AS(io::channel_from_json(no_dims), DimensionMismatch);
}

TEST_CASE("supermap json round trips preserve dimensions and action") {
  Channel probe = make_builtin("depolarizing", {{"p", 0.3}});

  Supermap sm = depolarising_supermap(2, 2, 2, 2);
  Supermap back = io::supermap_from_json(json::parse(io::supermap_to_json(sm).dump()));
  CHECK(back.d_M == sm.d_M);
  CHECK(back.d_E == sm.d_E);
  Mat want = choi_of(apply_supermap(sm, probe));
  Mat got = choi_of(apply_supermap(back, probe));
  CHECK(max_abs(got - want) <= 1e-12);

  Supermap loop = bell_loop_supermap(2);
  Supermap loop_back = io::supermap_from_json(io::supermap_to_json(loop));
  Mat lw = choi_of(apply_supermap(loop, probe));
  Mat lg = choi_of(apply_supermap(loop_back, probe));
  CHECK(max_abs(lg - lw) <= 1e-12);
}

TEST_CASE("report json embeds certificates that re-validate") {
  Channel n = make_builtin("depolarizing", {{"p", 0.5}});
  IomegaResult res = iomega_channel(n);
  REQUIRE(res.finite);
  CapacityReport rep = report_from_iomega(res.value(), 0.5);

  json j = io::report_to_json(rep, res, {});
  CHECK(j.at("finite").get<bool>());
  CHECK(j.at("iomega").at("lower_bits").get<double>() == res.lower_bits);
  CHECK(j.contains("timestamp_ms"));

  io::ReportMeta det;
  det.deterministic = true;
  CHECK(!io::report_to_json(rep, res, det).contains("timestamp_ms"));

  json round = json::parse(j.dump());
  PrimalCertificate pc = io::primal_from_json(round.at("certificates").at("primal"));
  DualCertificate dc = io::dual_from_json(round.at("certificates").at("dual"));
  CHECK(validate_primal(choi_of(n), identity(2), pc));
  CHECK(validate_dual(choi_of(n), identity(2), dc));
}

TEST_CASE("csv header and value formatting are stable") {
  CHECK(io::csv_header() == std::string("eps,q_lower,q_upper,c_lower,c_upper,asym_c,asym_q"));
  CHECK(io::format_real(0.5) == std::string("0.5"));
  double third = 1.0 / 3.0;
  CHECK(std::strtod(io::format_real(third).c_str(), nullptr) == third);

  CapacityReport r = report_from_iomega(std::log2(5.0), 0.5);
  double eps = 0, qlo = 0, qhi = 0, clo = 0, chi = 0, ac = 0, aq = 0;
  CHECK(std::sscanf(io::csv_row(r).c_str(), "%lf,%lf,%lf,%lf,%lf,%lf,%lf", &eps, &qlo, &qhi,
                    &clo, &chi, &ac, &aq) == 7);
  CHECK(eps == 0.5);
  CHECK(qlo == r.q_lower_bits);
  CHECK(chi == r.c_upper_bits);
  CHECK(aq == r.asymptotic_q_bits);
}

#ifdef POSTCAP_CLI_PATH

TEST_CASE("cli iomega prints a certified interval enclosing the true value") {
  CliResult r = run_cli("iomega --channel " + depol05_file());
  CHECK(r.code == 0);
  double lo = 0, hi = 0;
  REQUIRE(std::sscanf(r.out.c_str(), "I_omega in [%lf, %lf] bits", &lo, &hi) == 2);
  double truth = std::log2(5.0);
  CHECK(lo <= truth + 1e-12);
  CHECK(hi >= truth - 1e-12);
  CHECK(hi - lo <= 1e-5);

  CliResult csv = run_cli("iomega --channel " + depol05_file() + " --csv");
  auto lines = split_lines(csv.out);
  REQUIRE(lines.size() == 2);
  CHECK(lines[0] == "lower_bits,upper_bits,finite");
  double flo = 0, fhi = 0;
  int fin = 0;
  REQUIRE(std::sscanf(lines[1].c_str(), "%lf,%lf,%d", &flo, &fhi, &fin) == 3);
  CHECK(fin == 1);
  CHECK(std::abs(flo - truth) <= 1e-5);
}

TEST_CASE("cli iomega flags unbounded channels and rejects malformed input") {
  CliResult r = run_cli("iomega --channel " + identity_file());
  CHECK(r.code == 0);
  CHECK(split_lines(r.out).at(0) == "I_omega = +inf (support obstruction)");

  std::string bad = fixture("bad.json", "{not json");
  CHECK(run_cli("iomega --channel " + bad).code == 1);
  CHECK(run_cli("iomega --channel " + (scratch() / "missing.json").string()).code == 1);
  CHECK(run_cli("--help").code == 0);
  CHECK(run_cli("frobnicate").code == 1);
}

TEST_CASE("cli capacity emits csv rows over an eps grid") {
  CliResult single = run_cli("capacity --channel " + depol05_file() + " --eps 0.5");
  CHECK(single.code == 0);
  auto lines = split_lines(single.out);
  REQUIRE(lines.size() == 2);
  CHECK(lines[0] == io::csv_header());
  CsvRow row = parse_row(lines[1]);
  CHECK(row.eps == 0.5);
  CHECK(row.q_lo == 1.0);
  CHECK(row.q_hi == 1.0);
  CHECK(row.c_lo == 2.0);
  CHECK(std::abs(row.c_hi - std::log2(6.0)) <= 1e-8);
  CHECK(std::abs(row.ac - std::log2(5.0)) <= 1e-8);

  CliResult grid = run_cli("capacity --channel " + depol05_file() + " --eps-grid 0.1:0.9:0.1");
  auto glines = split_lines(grid.out);
  REQUIRE(glines.size() == 10);
  double prev_eps = 0.0, prev_c = -1.0, prev_q = -1.0;
  for (std::size_t i = 1; i < glines.size(); ++i) {
    CsvRow g = parse_row(glines[i]);
    CHECK(g.eps > prev_eps);
    CHECK(g.c_hi >= prev_c - 1e-12);
    CHECK(g.q_hi >= prev_q - 1e-12);
    prev_eps = g.eps;
    prev_c = g.c_hi;
    prev_q = g.q_hi;
  }

  std::string rep = fixture(
      "replacement.json",
      R"({"rep": {"kind": "builtin", "builtin_name": "replacement", "params": {"d_in": 2}}})");
  CsvRow rrow = parse_row(split_lines(run_cli("capacity --channel " + rep + " --eps 0.5").out).at(1));
  CHECK(rrow.q_lo == 0.0);
  CHECK(rrow.q_hi == 0.0);
  CHECK(rrow.ac == 0.0);
  CHECK(rrow.aq == 0.0);

  CliResult unb = run_cli("capacity --channel " + identity_file() + " --eps 0.5");
  CHECK(unb.code == 0);
  CHECK(split_lines(unb.out).at(0) == "unbounded (postselected CTC regime)");

  CHECK(run_cli("capacity --channel " + depol05_file()).code == 1);
  CHECK(run_cli("capacity --channel " + depol05_file() + " --eps 1.5").code == 1);
}

TEST_CASE("cli simulate certifies error bounds and rejects infeasible rates") {
  CliResult tele = run_cli("simulate --channel " + depol05_file() + " --dm 2 --eps 0.5");
  CHECK(tele.code == 0);
  double bound = grab(tele.out, "error_bound");
  double me = grab(tele.out, "me_error");
  CHECK(bound <= 0.375 + 1e-3);
  CHECK(me <= bound + 1e-9);

  CliResult infeasible = run_cli("simulate --channel " + depol05_file() + " --dm 3 --eps 0.5");
  CHECK(infeasible.code == 3);
  CHECK(infeasible.out.find("rate infeasible") != std::string::npos);

  CliResult unbounded = run_cli("simulate --channel " + identity_file() + " --dm 8 --eps 0.01");
  CHECK(unbounded.code == 0);
  CHECK(grab(unbounded.out, "error_bound") <= 1e-9);
  CHECK(grab(unbounded.out, "me_error") <= 1e-9);

  CliResult pna = run_cli("simulate --channel " + depol05_file() + " --dm 2 --eps 0.5 --scheme pna");
  CHECK(pna.code == 0);
  CHECK(grab(pna.out, "me_error") <= 0.5 + 1e-6);

  CHECK(run_cli("simulate --channel " + identity_file() + " --dm 2 --eps 0.5 --scheme pna").code ==
        1);
  CHECK(run_cli("simulate --channel " + depol05_file() + " --dm 2 --eps 0.5 --scheme warp").code ==
        1);
}

TEST_CASE("cli check reports causality diagnostics for builtin and file supermaps") {
  CliResult loop = run_cli("check --scheme ctc-counterexample");
  CHECK(loop.code == 0);
  CHECK(grab(loop.out, "ab_violation") <= 1e-9);
  CHECK(std::abs(grab(loop.out, "ba_violation") - 0.5) <= 1e-6);

  CliResult tele = run_cli("check --scheme teleport --channel " + depol05_file() + " --dm 2");
  CHECK(tele.code == 0);
  CHECK(grab(tele.out, "ab_violation") <= 1e-9);
  CHECK(grab(tele.out, "replacement_violation") <= 1e-8);

  CliResult dep = run_cli("check --scheme depolarising --direction replacement");
  CHECK(dep.code == 0);
  CHECK(grab(dep.out, "replacement_violation") <= 1e-9);

  std::string sm_file = (scratch() / "loop_sm.json").string();
  io::write_text(sm_file, io::supermap_to_json(bell_loop_supermap(2)).dump());
  CliResult from_file = run_cli("check --supermap " + sm_file);
  CHECK(from_file.code == 0);
  CHECK(std::abs(grab(from_file.out, "ba_violation") - 0.5) <= 1e-6);

  CHECK(run_cli("check").code == 1);
  CHECK(run_cli("check --scheme ctc-counterexample --direction sideways").code == 1);
}

TEST_CASE("cli report files re-validate and deterministic runs are reproducible") {
  std::string f1 = (scratch() / "det1.json").string();
  std::string f2 = (scratch() / "det2.json").string();
  std::string base = "iomega --channel " + depol05_file() + " --deterministic --seed 7 --out ";
  CHECK(run_cli(base + f1).code == 0);
  CHECK(run_cli(base + f2).code == 0);
  CHECK(io::read_text(f1) == io::read_text(f2));

  json j = json::parse(io::read_text(f1));
  CHECK(!j.contains("timestamp_ms"));
  Channel n = make_builtin("depolarizing", {{"p", 0.5}});
  PrimalCertificate pc = io::primal_from_json(j.at("certificates").at("primal"));
  DualCertificate dc = io::dual_from_json(j.at("certificates").at("dual"));
  CHECK(validate_primal(choi_of(n), identity(2), pc));
  CHECK(validate_dual(choi_of(n), identity(2), dc));
  CHECK(std::abs(dc.bits - std::log2(5.0)) <= 1e-5);

  std::string fg = (scratch() / "grid.json").string();
  CHECK(run_cli("capacity --channel " + depol05_file() + " --eps-grid 0.1:0.9:0.1 --out " + fg)
            .code == 0);
  json gj = json::parse(io::read_text(fg));
  CHECK(gj.at("rows").size() == 9);
}

#endif
