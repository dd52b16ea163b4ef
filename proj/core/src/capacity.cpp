#include "postcap/capacity.hpp"

#include <cmath>

#include "postcap/errors.hpp"

namespace postcap {

namespace {

constexpr double kLogBand = 1e-9;

// Integer part in log space. Above 52 bits the spacing of doubles exceeds 1,
// so the floor is the value itself.
struct LogFloor {
  Bits bits = 0.0;
  bool edge = false;
};

LogFloor floor_bits(Bits lg) {
  if (std::isinf(lg)) return {kInfBits, false};
  if (lg > 52.0) return {lg, false};
  double g = std::max(std::exp2(lg), 1.0);
  double near = std::round(g);
  if (near >= 1.0 && std::abs(lg - std::log2(near)) <= kLogBand)
    return {std::log2(near), true};
  return {std::log2(std::floor(g)), false};
}

// log2 of max(ceil(2^lg - 1), 1) with the same band convention.
LogFloor ceil_minus_one_bits(Bits lg) {
  if (std::isinf(lg)) return {kInfBits, false};
  if (lg > 52.0) return {lg, false};
  double g = std::max(std::exp2(lg), 1.0);
  double near = std::round(g);
  double m;
  bool edge = false;
  if (near >= 1.0 && std::abs(lg - std::log2(near)) <= kLogBand) {
    m = near - 1.0;
    edge = true;
  } else {
    m = std::ceil(g - 1.0);
  }
  m = std::max(m, 1.0);
  return {std::log2(m), edge};
}

}  // namespace

BoundPair oneshot_quantum_bounds(Bits iomega, double eps) {
  Bits lg_arg = dph_closed(iomega, eps);
  LogFloor lo = ceil_minus_one_bits(0.5 * lg_arg);
  LogFloor hi = floor_bits(0.5 * lg_arg);
  return {lo.bits, hi.bits, lo.edge || hi.edge};
}

BoundPair oneshot_classical_bounds(Bits iomega, double eps) {
  Bits lg_arg = dph_closed(iomega, eps);
  LogFloor lo = ceil_minus_one_bits(0.5 * lg_arg);
  LogFloor hi = floor_bits(lg_arg);
  return {2.0 * lo.bits, hi.bits, lo.edge || hi.edge};
}

CapacityReport report_from_iomega(Bits iomega, double eps) {
  BoundPair q = oneshot_quantum_bounds(iomega, eps);
  BoundPair c = oneshot_classical_bounds(iomega, eps);
  CapacityReport r;
  r.eps = eps;
  r.iomega_bits = iomega;
  r.q_lower_bits = q.lower;
  r.q_upper_bits = q.upper;
  r.c_lower_bits = c.lower;
  r.c_upper_bits = c.upper;
  r.asymptotic_c_bits = iomega;
  r.asymptotic_q_bits = std::isinf(iomega) ? kInfBits : 0.5 * iomega;
  r.edge_case = q.edge_case || c.edge_case;
  r.finite = !std::isinf(iomega);
  return r;
}

CapacityReport capacity_report(const Channel& n, double eps, const IomegaOptions& opts) {
  if (!(eps > 0.0 && eps < 1.0)) throw EpsOutOfRange("capacity_report: eps must be in (0,1)");
  return report_from_iomega(iomega_channel(n, opts).value(), eps);
}

CapacityReport asymptotic_report(const Channel& n, double gap_bits) {
  IomegaOptions opts;
  opts.gap_bits = gap_bits;
  return report_from_iomega(iomega_channel(n, opts).value(), 0.5);
}

bool asymptotic_sandwich_check(const Channel& n, double eps, int n_copies) {
  if (n_copies < 1 || n_copies > 3)
    throw ParamOutOfRange("asymptotic_sandwich_check: copies must be 1..3");
  if (!(eps > 0.0 && eps < 1.0))
    throw EpsOutOfRange("asymptotic_sandwich_check: eps must be in (0,1)");
  Bits base = iomega_channel(n).value();
  if (std::isinf(base)) return true;

  Bits multi;
  if (n_copies == 1) {
    multi = base;
  } else if (n_copies == 2) {
    multi = iomega_channel(tensor_channels(n, n)).value();
  } else {
    multi = 3.0 * base;
  }
  BoundPair c = oneshot_classical_bounds(multi, eps);
  double inv_n = 1.0 / static_cast<double>(n_copies);
  double lhs = inv_n * std::log2(eps / (4.0 * (1.0 - eps))) + base;
  double rhs = inv_n * std::log2(1.0 / (1.0 - eps)) + base;
  return lhs <= inv_n * c.lower + 1e-9 && inv_n * c.upper <= rhs + 1e-9;
}

}  // namespace postcap
