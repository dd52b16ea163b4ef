#pragma once

#include <json.hpp>

#include <string>

#include "postcap/capacity.hpp"
#include "postcap/channel.hpp"
#include "postcap/projective.hpp"

namespace postcap::io {

using nlohmann::json;

// Complex entries serialize as [re, im]; matrices as row-major nested arrays.
json mat_to_json(const Mat& m);
Mat mat_from_json(const json& j);

// Channel spec: {name, d_in, d_out, rep: {kind: kraus|choi|builtin, ...}}.
Channel channel_from_json(const json& j);
json channel_to_json(const Channel& n, const std::string& name);
Channel load_channel(const std::string& path);

// Supermap spec: {d_m, d_a, d_b, d_mhat, d_e, pre: <kraus list>, post: <kraus list>}.
Supermap supermap_from_json(const json& j);
json supermap_to_json(const Supermap& sm);
Supermap load_supermap(const std::string& path);

struct ReportMeta {
  std::uint64_t seed = 0;
  double gap_bits = kGapBits;
  double psd_tol = kPsdTol;
  double rank_tol = kRankTol;
  bool deterministic = false;
};

// Full report: capacity numbers plus certificate payloads and tool metadata.
json report_to_json(const CapacityReport& r, const IomegaResult& res, const ReportMeta& meta);

// Reconstructs the certificates stored by report_to_json.
PrimalCertificate primal_from_json(const json& j);
DualCertificate dual_from_json(const json& j);

std::string csv_header();
std::string csv_row(const CapacityReport& r);

std::string format_real(double v);
void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

}  // namespace postcap::io
