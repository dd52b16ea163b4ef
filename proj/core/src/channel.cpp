#include "postcap/channel.hpp"

#include <cmath>
#include <sstream>

namespace postcap {

namespace {

constexpr double kPi = 3.14159265358979323846;

void check_kraus_shapes(const std::vector<Mat>& kraus) {
  if (kraus.empty()) throw DimensionMismatch("empty Kraus list");
  for (const Mat& k : kraus)
    if (k.rows() != kraus[0].rows() || k.cols() != kraus[0].cols())
      throw DimensionMismatch("inconsistent Kraus shapes");
}

// sum K^dag K for completeness checks
Mat kraus_gram(const std::vector<Mat>& kraus) {
  Mat g = Mat::Zero(kraus[0].cols(), kraus[0].cols());
  for (const Mat& k : kraus) g += k.adjoint() * k;
  return g;
}

std::vector<Mat> drop_zero_kraus(std::vector<Mat> kraus) {
  Eigen::Index rows = kraus[0].rows(), cols = kraus[0].cols();
  std::vector<Mat> out;
  for (Mat& k : kraus)
    if (max_abs(k) > 0.0) out.push_back(std::move(k));
  if (out.empty()) out.push_back(Mat::Zero(rows, cols));
  return out;
}

double get_param(const std::map<std::string, double>& params, const std::string& key,
                 double fallback) {
  auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

void require_unit_interval(double v, const char* name) {
  if (!(v >= 0.0 && v <= 1.0)) {
    std::ostringstream os;
    os << "parameter " << name << " = " << v << " outside [0, 1]";
    throw ParamOutOfRange(os.str());
  }
}

Eigen::Index dim_param(const std::map<std::string, double>& params, const std::string& key,
                       Eigen::Index fallback) {
  double v = get_param(params, key, double(fallback));
  auto d = static_cast<Eigen::Index>(v);
  if (double(d) != v || d < 1) throw ParamOutOfRange("dimension parameter must be a positive integer");
  return d;
}

}  // namespace

Channel make_channel(std::vector<Mat> kraus, double tol) {
  check_kraus_shapes(kraus);
  Channel ch;
  ch.d_out = kraus[0].rows();
  ch.d_in = kraus[0].cols();
  Mat g = kraus_gram(kraus);
  if (max_abs(g - identity(ch.d_in)) > tol * std::max(1.0, max_abs(g)))
    throw NotPsd("Kraus set is not trace preserving");
  ch.kraus = std::move(kraus);
  return ch;
}

Subchannel make_subchannel(std::vector<Mat> kraus, double tol) {
  check_kraus_shapes(kraus);
  Subchannel s;
  s.d_out = kraus[0].rows();
  s.d_in = kraus[0].cols();
  Mat g = kraus_gram(kraus);
  if (!is_psd(identity(s.d_in) - g, tol))
    throw NotPsd("Kraus set is not trace nonincreasing");
  s.kraus = std::move(kraus);
  return s;
}

Subchannel as_subchannel(const Channel& ch) {
  Subchannel s;
  s.d_in = ch.d_in;
  s.d_out = ch.d_out;
  s.kraus = ch.kraus;
  return s;
}

Subchannel scale_subchannel(const Subchannel& s, double c) {
  if (!(c >= 0.0 && c <= 1.0)) throw ParamOutOfRange("subchannel scale outside [0, 1]");
  Subchannel out = s;
  for (Mat& k : out.kraus) k *= std::sqrt(c);
  return out;
}

Channel make_builtin(const std::string& name, const std::map<std::string, double>& params) {
  if (name == "depolarizing") {
    double p = get_param(params, "p", 0.0);
    require_unit_interval(p, "p");
    Eigen::Index d = dim_param(params, "d", 2);
    std::vector<Mat> kraus;
    kraus.push_back(std::sqrt(1.0 - p) * identity(d));
    for (Eigen::Index a = 0; a < d; ++a)
      for (Eigen::Index b = 0; b < d; ++b)
        kraus.push_back((std::sqrt(p) / double(d)) * heisenberg_weyl(d, a, b));
    return make_channel(drop_zero_kraus(std::move(kraus)));
  }
  if (name == "dephasing") {
    double q = get_param(params, "q", 0.0);
    require_unit_interval(q, "q");
    Mat z(2, 2);
    z << 1, 0, 0, -1;
    std::vector<Mat> kraus{std::sqrt(1.0 - q) * identity(2), std::sqrt(q) * z};
    return make_channel(drop_zero_kraus(std::move(kraus)));
  }
  if (name == "amplitude_damping") {
    double g = get_param(params, "gamma", 0.0);
    require_unit_interval(g, "gamma");
    Mat k0(2, 2), k1(2, 2);
    k0 << 1, 0, 0, std::sqrt(1.0 - g);
    k1 << 0, std::sqrt(g), 0, 0;
    return make_channel(drop_zero_kraus({k0, k1}));
  }
  if (name == "erasure") {
    double p = get_param(params, "p", 0.0);
    require_unit_interval(p, "p");
    Eigen::Index d = dim_param(params, "d", 2);
    std::vector<Mat> kraus;
    Mat embed = Mat::Zero(d + 1, d);
    embed.topLeftCorner(d, d) = identity(d);
    kraus.push_back(std::sqrt(1.0 - p) * embed);
    for (Eigen::Index k = 0; k < d; ++k) {
      Mat e = Mat::Zero(d + 1, d);
      e(d, k) = std::sqrt(p);
      kraus.push_back(e);
    }
    return make_channel(drop_zero_kraus(std::move(kraus)));
  }
  if (name == "bsc_embed") {
    double f = get_param(params, "f", 0.0);
    require_unit_interval(f, "f");
    Mat a = Mat::Zero(2, 2), b = Mat::Zero(2, 2), c = Mat::Zero(2, 2), e = Mat::Zero(2, 2);
    a(0, 0) = std::sqrt(1.0 - f);
    b(1, 1) = std::sqrt(1.0 - f);
    c(1, 0) = std::sqrt(f);
    e(0, 1) = std::sqrt(f);
    return make_channel(drop_zero_kraus({a, b, c, e}));
  }
  if (name == "identity") {
    Eigen::Index d = dim_param(params, "d", 2);
    return make_channel({identity(d)});
  }
  if (name == "replacement") {
    Eigen::Index d_in = dim_param(params, "d_in", 2);
    Eigen::Index d_out = dim_param(params, "d_out", d_in);
    return replacement_channel(d_in, identity(d_out) / double(d_out));
  }
  throw UnknownName("unknown builtin channel: " + name);
}

Channel replacement_channel(Eigen::Index d_in, const Mat& sigma) {
  Mat s = require_hermitian(sigma, kHermTol, "replacement target");
  require_psd(s, kPsdTol, "replacement target");
  Spectrum sp = eig_hermitian(s);
  std::vector<Mat> kraus;
  for (Eigen::Index k = 0; k < sp.values.size(); ++k) {
    if (sp.values(k) <= 0.0) continue;
    for (Eigen::Index i = 0; i < d_in; ++i) {
      Mat m = std::sqrt(sp.values(k)) * sp.vectors.col(k) * basis_ket(d_in, i).adjoint();
      kraus.push_back(m);
    }
  }
  return make_channel(std::move(kraus));
}

Channel haar_channel(Rng& rng, Eigen::Index d_in, Eigen::Index d_out, Eigen::Index d_env) {
  Mat v = random_isometry(rng, d_out * d_env, d_in);
  std::vector<Mat> kraus;
  for (Eigen::Index e = 0; e < d_env; ++e) {
    Mat k(d_out, d_in);
    for (Eigen::Index b = 0; b < d_out; ++b) k.row(b) = v.row(b * d_env + e);
    kraus.push_back(k);
  }
  return make_channel(std::move(kraus));
}

Mat heisenberg_weyl(Eigen::Index d, Eigen::Index a, Eigen::Index b) {
  Mat w = Mat::Zero(d, d);
  for (Eigen::Index k = 0; k < d; ++k) {
    cplx phase = std::exp(cplx(0.0, 2.0 * kPi * double(b) * double(k) / double(d)));
    w((k + a) % d, k) = phase;
  }
  return w;
}

Mat choi_from_kraus(const std::vector<Mat>& kraus, Eigen::Index d_in, Eigen::Index d_out) {
  Mat choi = Mat::Zero(d_in * d_out, d_in * d_out);
  for (const Mat& k : kraus) {
    Vec v = Vec::Zero(d_in * d_out);
    for (Eigen::Index i = 0; i < d_in; ++i)
      for (Eigen::Index b = 0; b < d_out; ++b) v(i * d_out + b) = k(b, i);
    choi += v * v.adjoint();
  }
  return choi / double(d_in);
}

Mat choi_of(const Channel& ch) { return choi_from_kraus(ch.kraus, ch.d_in, ch.d_out); }
Mat choi_of(const Subchannel& s) { return choi_from_kraus(s.kraus, s.d_in, s.d_out); }

std::vector<Mat> choi_to_kraus(const Mat& choi, Eigen::Index d_in, Eigen::Index d_out,
                               double rank_tol) {
  if (choi.rows() != d_in * d_out)
    throw DimensionMismatch("choi_to_kraus: matrix size does not match dims");
  Spectrum s = eig_hermitian(choi);
  double scale = s.values.cwiseAbs().maxCoeff();
  std::vector<Mat> kraus;
  for (Eigen::Index j = 0; j < s.values.size(); ++j) {
    double lam = s.values(j);
    if (scale == 0.0 || lam <= rank_tol * scale) continue;
    Mat k(d_out, d_in);
    double w = std::sqrt(lam * double(d_in));
    for (Eigen::Index i = 0; i < d_in; ++i)
      for (Eigen::Index b = 0; b < d_out; ++b) k(b, i) = w * s.vectors(i * d_out + b, j);
    kraus.push_back(k);
  }
  if (kraus.empty()) kraus.push_back(Mat::Zero(d_out, d_in));
  return kraus;
}

Subchannel subchannel_from_choi(const Mat& choi, Eigen::Index d_in, Eigen::Index d_out,
                                double rank_tol) {
  Mat h = require_hermitian(choi, kHermTol, "subchannel Choi");
  require_psd(h, kPsdTol, "subchannel Choi");
  Mat marg = partial_trace(h, {d_in, d_out}, {0});
  if (!is_psd(identity(d_in) / double(d_in) - marg, kPsdTol))
    throw NotPsd("subchannel Choi marginal exceeds I/d_in");
  Subchannel s;
  s.d_in = d_in;
  s.d_out = d_out;
  s.kraus = choi_to_kraus(h, d_in, d_out, rank_tol);
  return s;
}

Channel channel_from_choi(const Mat& choi, Eigen::Index d_in, Eigen::Index d_out,
                          double rank_tol) {
  Mat h = require_hermitian(choi, kHermTol, "channel Choi");
  require_psd(h, kPsdTol, "channel Choi");
  Mat marg = partial_trace(h, {d_in, d_out}, {0});
  if (max_abs(marg - identity(d_in) / double(d_in)) > kPsdTol)
    throw NotPsd("channel Choi marginal is not I/d_in");
  Channel ch;
  ch.d_in = d_in;
  ch.d_out = d_out;
  ch.kraus = choi_to_kraus(h, d_in, d_out, rank_tol);
  return ch;
}

Mat apply_kraus(const std::vector<Mat>& kraus, const Mat& x) {
  Mat out = Mat::Zero(kraus[0].rows(), kraus[0].rows());
  for (const Mat& k : kraus) out += k * x * k.adjoint();
  return out;
}

Mat apply_channel(const Channel& ch, const Mat& x) {
  if (x.rows() != ch.d_in || x.cols() != ch.d_in)
    throw DimensionMismatch("apply_channel: input size mismatch");
  return apply_kraus(ch.kraus, x);
}

Mat apply_subchannel(const Subchannel& s, const Mat& x) {
  if (x.rows() != s.d_in || x.cols() != s.d_in)
    throw DimensionMismatch("apply_subchannel: input size mismatch");
  return apply_kraus(s.kraus, x);
}

Mat apply_adjoint(const Subchannel& s, const Mat& x) {
  if (x.rows() != s.d_out || x.cols() != s.d_out)
    throw DimensionMismatch("apply_adjoint: input size mismatch");
  Mat out = Mat::Zero(s.d_in, s.d_in);
  for (const Mat& k : s.kraus) out += k.adjoint() * x * k;
  return out;
}

Mat apply_on_factor(const Mat& x, const std::vector<Eigen::Index>& dims, int factor,
                    const std::vector<Mat>& kraus, Eigen::Index d_new) {
  Eigen::Index pre = 1, post = 1;
  for (int k = 0; k < factor; ++k) pre *= dims[k];
  for (int k = factor + 1; k < static_cast<int>(dims.size()); ++k) post *= dims[k];
  if (kraus[0].cols() != dims[factor] || kraus[0].rows() != d_new)
    throw DimensionMismatch("apply_on_factor: Kraus shape does not match target factor");
  Mat out = Mat::Zero(pre * d_new * post, pre * d_new * post);
  Mat ipre = identity(pre), ipost = identity(post);
  for (const Mat& k : kraus) {
    Mat full = kron(ipre, kron(k, ipost));
    out += full * x * full.adjoint();
  }
  return out;
}

Channel tensor_channels(const Channel& a, const Channel& b) {
  std::vector<Mat> kraus;
  for (const Mat& ka : a.kraus)
    for (const Mat& kb : b.kraus) kraus.push_back(kron(ka, kb));
  return make_channel(std::move(kraus));
}

namespace {

std::vector<Mat> composed_kraus(const std::vector<Mat>& second, const std::vector<Mat>& first,
                                Eigen::Index d_in, Eigen::Index d_out) {
  std::vector<Mat> kraus;
  for (const Mat& k2 : second)
    for (const Mat& k1 : first) kraus.push_back(k2 * k1);
  // prune redundant operators through the Choi form when the list gets long
  if (static_cast<Eigen::Index>(kraus.size()) > d_in * d_out)
    return choi_to_kraus(choi_from_kraus(kraus, d_in, d_out), d_in, d_out);
  return kraus;
}

}  // namespace

Channel compose(const Channel& second, const Channel& first) {
  if (first.d_out != second.d_in) throw DimensionMismatch("compose: dimension chain broken");
  Channel out;
  out.d_in = first.d_in;
  out.d_out = second.d_out;
  out.kraus = composed_kraus(second.kraus, first.kraus, out.d_in, out.d_out);
  return out;
}

Subchannel compose(const Subchannel& second, const Channel& first) {
  if (first.d_out != second.d_in) throw DimensionMismatch("compose: dimension chain broken");
  Subchannel out;
  out.d_in = first.d_in;
  out.d_out = second.d_out;
  out.kraus = composed_kraus(second.kraus, first.kraus, out.d_in, out.d_out);
  return out;
}

Subchannel compose(const Subchannel& second, const Subchannel& first) {
  if (first.d_out != second.d_in) throw DimensionMismatch("compose: dimension chain broken");
  Subchannel out;
  out.d_in = first.d_in;
  out.d_out = second.d_out;
  out.kraus = composed_kraus(second.kraus, first.kraus, out.d_in, out.d_out);
  return out;
}

Supermap make_supermap(Eigen::Index d_M, Eigen::Index d_A, Eigen::Index d_B,
                       Eigen::Index d_Mhat, Eigen::Index d_E, Channel pre, Subchannel post) {
  if (pre.d_in != d_M || pre.d_out != d_A * d_E)
    throw DimensionMismatch("supermap pre must map M to A (x) E");
  if (post.d_in != d_B * d_E || post.d_out != d_Mhat)
    throw DimensionMismatch("supermap post must map B (x) E to Mhat");
  Supermap sm;
  sm.d_M = d_M;
  sm.d_A = d_A;
  sm.d_B = d_B;
  sm.d_Mhat = d_Mhat;
  sm.d_E = d_E;
  sm.pre = std::move(pre);
  sm.post = std::move(post);
  return sm;
}

Subchannel apply_supermap(const Supermap& sm, const Channel& n) {
  if (n.d_in != sm.d_A || n.d_out != sm.d_B)
    throw DimensionMismatch("apply_supermap: channel does not fit the slot");
  Mat x = max_entangled_state(sm.d_M);
  x = apply_on_factor(x, {sm.d_M, sm.d_M}, 1, sm.pre.kraus, sm.d_A * sm.d_E);
  x = apply_on_factor(x, {sm.d_M, sm.d_A, sm.d_E}, 1, n.kraus, sm.d_B);
  x = apply_on_factor(x, {sm.d_M, sm.d_B * sm.d_E}, 1, sm.post.kraus, sm.d_Mhat);
  return subchannel_from_choi(x, sm.d_M, sm.d_Mhat);
}

BipartiteChoi supermap_to_bipartite(const Supermap& sm) {
  Mat x = kron(max_entangled_state(sm.d_M), max_entangled_state(sm.d_B));
  // factors [M', M, B', B]
  x = apply_on_factor(x, {sm.d_M, sm.d_M, sm.d_B, sm.d_B}, 1, sm.pre.kraus, sm.d_A * sm.d_E);
  // factors [M', A, E, B', B] -> [M', A, B', B, E]
  x = permute_systems(x, {sm.d_M, sm.d_A, sm.d_E, sm.d_B, sm.d_B}, {0, 1, 3, 4, 2});
  x = apply_on_factor(x, {sm.d_M, sm.d_A, sm.d_B, sm.d_B * sm.d_E}, 3, sm.post.kraus,
                      sm.d_Mhat);
  // factors [M', A, B', Mhat] -> [M', B', A, Mhat]
  x = permute_systems(x, {sm.d_M, sm.d_A, sm.d_B, sm.d_Mhat}, {0, 2, 1, 3});
  BipartiteChoi bc;
  bc.d_M = sm.d_M;
  bc.d_B = sm.d_B;
  bc.d_A = sm.d_A;
  bc.d_Mhat = sm.d_Mhat;
  bc.choi = x;
  return bc;
}

Subchannel action_from_bipartite(const BipartiteChoi& bc, const Channel& n) {
  if (n.d_in != bc.d_A || n.d_out != bc.d_B)
    throw DimensionMismatch("action_from_bipartite: channel does not fit the slot");
  // unnormalized comb Choi, reordered so the open-slot wires (A, B') trail
  Mat j = double(bc.d_M * bc.d_B) *
          permute_systems(bc.choi, {bc.d_M, bc.d_B, bc.d_A, bc.d_Mhat}, {0, 3, 2, 1});
  Mat jn = double(bc.d_A) * choi_of(n);  // unnormalized, factors [A, B]
  Mat link = kron(identity(bc.d_M * bc.d_Mhat), jn.transpose());
  Mat out = partial_trace(link * j, {bc.d_M, bc.d_Mhat, bc.d_A * bc.d_B}, {0, 1});
  return subchannel_from_choi(out / double(bc.d_M), bc.d_M, bc.d_Mhat);
}

}  // namespace postcap
