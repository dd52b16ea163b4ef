#include "io.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <utility>
#include <vector>

#include "postcap/errors.hpp"
#include "postcap/version.hpp"

namespace postcap::io {

namespace {

json complex_to_json(const cplx& z) { return json::array({z.real(), z.imag()}); }

cplx complex_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2)
    throw ParamOutOfRange("complex entries must be [re, im] pairs");
  return {j[0].get<double>(), j[1].get<double>()};
}

std::vector<Mat> kraus_from_json(const json& j) {
  if (!j.is_array() || j.empty()) throw ParamOutOfRange("operator list must be nonempty");
  std::vector<Mat> out;
  for (const json& e : j) out.push_back(mat_from_json(e));
  return out;
}

json kraus_to_json(const std::vector<Mat>& ks) {
  json out = json::array();
  for (const Mat& k : ks) out.push_back(mat_to_json(k));
  return out;
}

json certificate_to_json(const IomegaResult& res) {
  json c;
  if (res.primal) {
    c["primal"]["s"] = mat_to_json(res.primal->s);
    c["primal"]["bits"] = res.primal->bits;
  }
  if (res.dual) {
    c["dual"]["p"] = mat_to_json(res.dual->p);
    c["dual"]["q"] = mat_to_json(res.dual->q);
    c["dual"]["bits"] = res.dual->bits;
  }
  return c;
}

}  // namespace

json mat_to_json(const Mat& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(complex_to_json(m(i, j)));
    rows.push_back(row);
  }
  return rows;
}

Mat mat_from_json(const json& j) {
  if (!j.is_array() || j.empty() || !j[0].is_array())
    throw ParamOutOfRange("matrix must be a nonempty nested array");
  Eigen::Index rows = Eigen::Index(j.size());
  Eigen::Index cols = Eigen::Index(j[0].size());
  Mat m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (Eigen::Index(j[i].size()) != cols) throw ParamOutOfRange("ragged matrix rows");
    for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = complex_from_json(j[i][k]);
  }
  return m;
}

Channel channel_from_json(const json& j) {
  const json& rep = j.at("rep");
  std::string kind = rep.at("kind").get<std::string>();
  Eigen::Index d_in = j.value("d_in", 0);
  Eigen::Index d_out = j.value("d_out", 0);
  Channel n;
  if (kind == "kraus") {
    n = make_channel(kraus_from_json(rep.at("operators")));
  } else if (kind == "choi") {
    if (rep.value("normalization", "state") != std::string("state"))
      throw ParamOutOfRange("choi representation must use state normalization");
    if (d_in <= 0 || d_out <= 0)
      throw DimensionMismatch("choi representation needs explicit d_in and d_out");
    n = make_channel(choi_to_kraus(mat_from_json(rep.at("matrix")), d_in, d_out));
  } else if (kind == "builtin") {
    std::map<std::string, double> params;
    if (rep.contains("params"))
      for (const auto& [key, val] : rep.at("params").items())
        params[key] = val.get<double>();
    n = make_builtin(rep.at("builtin_name").get<std::string>(), params);
  } else {
    throw UnknownName("unknown channel representation: " + kind);
  }
  if (d_in > 0 && n.d_in != d_in)
    throw DimensionMismatch("declared d_in does not match the representation");
  if (d_out > 0 && n.d_out != d_out)
    throw DimensionMismatch("declared d_out does not match the representation");
  return n;
}

json channel_to_json(const Channel& n, const std::string& name) {
  json j;
  j["name"] = name;
  j["d_in"] = n.d_in;
  j["d_out"] = n.d_out;
  j["rep"]["kind"] = "kraus";
  j["rep"]["operators"] = kraus_to_json(n.kraus);
  return j;
}

Channel load_channel(const std::string& path) {
  return channel_from_json(json::parse(read_text(path)));
}

Supermap supermap_from_json(const json& j) {
  Channel pre = make_channel(kraus_from_json(j.at("pre")));
  Subchannel post = make_subchannel(kraus_from_json(j.at("post")));
  return make_supermap(j.at("d_m").get<Eigen::Index>(), j.at("d_a").get<Eigen::Index>(),
                       j.at("d_b").get<Eigen::Index>(), j.at("d_mhat").get<Eigen::Index>(),
                       j.at("d_e").get<Eigen::Index>(), std::move(pre), std::move(post));
}

json supermap_to_json(const Supermap& sm) {
  json j;
  j["d_m"] = sm.d_M;
  j["d_a"] = sm.d_A;
  j["d_b"] = sm.d_B;
  j["d_mhat"] = sm.d_Mhat;
  j["d_e"] = sm.d_E;
  j["pre"] = kraus_to_json(sm.pre.kraus);
  j["post"] = kraus_to_json(sm.post.kraus);
  return j;
}

Supermap load_supermap(const std::string& path) {
  return supermap_from_json(json::parse(read_text(path)));
}

json report_to_json(const CapacityReport& r, const IomegaResult& res, const ReportMeta& meta) {
  json j;
  j["version"] = kVersion;
  j["seed"] = meta.seed;
  j["tolerances"]["gap_bits"] = meta.gap_bits;
  j["tolerances"]["psd_tol"] = meta.psd_tol;
  j["tolerances"]["rank_tol"] = meta.rank_tol;
  if (!meta.deterministic) {
    auto now = std::chrono::system_clock::now().time_since_epoch();
    j["timestamp_ms"] = std::chrono::duration_cast<std::chrono::milliseconds>(now).count();
  }
  j["finite"] = r.finite;
  j["iomega"]["lower_bits"] = res.lower_bits;
  j["iomega"]["upper_bits"] = res.upper_bits;
  j["iomega"]["iterations"] = res.iterations;
  j["eps"] = r.eps;
  j["one_shot"]["q_lower_bits"] = r.q_lower_bits;
  j["one_shot"]["q_upper_bits"] = r.q_upper_bits;
  j["one_shot"]["c_lower_bits"] = r.c_lower_bits;
  j["one_shot"]["c_upper_bits"] = r.c_upper_bits;
  j["one_shot"]["edge_case"] = r.edge_case;
  j["asymptotic"]["c_bits"] = r.asymptotic_c_bits;
  j["asymptotic"]["q_bits"] = r.asymptotic_q_bits;
  j["certificates"] = certificate_to_json(res);
  return j;
}

PrimalCertificate primal_from_json(const json& j) {
  PrimalCertificate c;
  c.s = mat_from_json(j.at("s"));
  c.bits = j.at("bits").get<double>();
  return c;
}

DualCertificate dual_from_json(const json& j) {
  DualCertificate c;
  c.p = mat_from_json(j.at("p"));
  c.q = mat_from_json(j.at("q"));
  c.bits = j.at("bits").get<double>();
  return c;
}

std::string csv_header() { return "eps,q_lower,q_upper,c_lower,c_upper,asym_c,asym_q"; }

std::string csv_row(const CapacityReport& r) {
  std::ostringstream out;
  out << format_real(r.eps) << ',' << format_real(r.q_lower_bits) << ','
      << format_real(r.q_upper_bits) << ',' << format_real(r.c_lower_bits) << ','
      << format_real(r.c_upper_bits) << ',' << format_real(r.asymptotic_c_bits) << ','
      << format_real(r.asymptotic_q_bits);
  return out.str();
}

std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open for writing: " + path);
  f << text;
}

std::string read_text(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace postcap::io
