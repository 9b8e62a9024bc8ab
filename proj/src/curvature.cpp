#include "curv/curvature.hpp"

#include <cmath>
#include <stdexcept>

#include "curv/rng.hpp"

namespace curv {

namespace {

constexpr std::uint64_t kPowerSeed = 0x9e3779b97f4a7c15ull;

Eigen::VectorXd final_row_diff(const Mlp& net, int label, int target) {
  if (label == target) throw std::invalid_argument("curvature bounds: label == target");
  const DenseLayer& last = net.layer(net.depth() - 1);
  if (label < 0 || target < 0 || label >= last.weight.rows() || target >= last.weight.rows())
    throw std::invalid_argument("curvature bounds: class index out of range");
  return last.weight.row(label) - last.weight.row(target);
}

struct EnvelopePair {
  Eigen::MatrixXd P;  // upper envelope, H <= P for all x in scope
  Eigen::MatrixXd N;  // lower envelope, N <= H for all x in scope
};

// Rank-one envelope sums: per hidden unit pick the extreme of sigma'' that
// maximizes (resp. minimizes) wdiff_i * sigma''(z_i).
EnvelopePair envelope_matrices(const Eigen::MatrixXd& W1, const Eigen::VectorXd& wdiff,
                               const Eigen::VectorXd& spp_lo, const Eigen::VectorXd& spp_hi) {
  Eigen::VectorXd upper(wdiff.size()), lower(wdiff.size());
  for (Eigen::Index i = 0; i < wdiff.size(); ++i) {
    double p = wdiff[i] >= 0.0 ? spp_hi[i] : spp_lo[i];
    double n = wdiff[i] >= 0.0 ? spp_lo[i] : spp_hi[i];
    upper[i] = p * wdiff[i];
    lower[i] = n * wdiff[i];
  }
  EnvelopePair e;
  e.P = W1.transpose() * upper.asDiagonal() * W1;
  e.N = W1.transpose() * lower.asDiagonal() * W1;
  return e;
}

}  // namespace

PowerResult power_iteration(const Eigen::MatrixXd& A, int iters) {
  if (A.rows() != A.cols()) throw std::invalid_argument("power_iteration: matrix not square");
  if (iters < 1) throw std::invalid_argument("power_iteration: iters must be >= 1");
  Rng rng(kPowerSeed);
  Eigen::VectorXd v = rng.unit_vector(A.rows());
  for (int k = 0; k < iters; ++k) {
    Eigen::VectorXd w = A * v;
    double norm = w.norm();
    if (norm == 0.0) return {0.0, v};
    v = w / norm;
  }
  // ||A v|| rather than the Rayleigh quotient: it converges to the dominant
  // magnitude even when two extreme eigenvalues of opposite sign nearly tie
  // (the iterate then oscillates between the eigenspaces).
  return {(A * v).norm(), v};
}

double spectral_norm(const Eigen::MatrixXd& W, int iters) {
  if (W.size() == 0) return 0.0;
  Eigen::MatrixXd gram = W.transpose() * W;
  return std::sqrt(power_iteration(gram, iters).magnitude);
}

double deep_bound(const Mlp& net, int label, int target, int power_iters) {
  const int L = net.depth();
  const ActivationProfile prof = profile(net.activation());
  Eigen::VectorXd wdiff = final_row_diff(net, label, target);

  // r^(I): operator-norm bound on d z^(I) / d x, I = 1..L-1.
  std::vector<double> r(static_cast<std::size_t>(L - 1));
  r[0] = spectral_norm(net.layer(0).weight, power_iters);
  for (int I = 2; I <= L - 1; ++I)
    r[static_cast<std::size_t>(I - 1)] = prof.g *
                                         spectral_norm(net.layer(I - 1).weight, power_iters) *
                                         r[static_cast<std::size_t>(I - 2)];

  // s^(I): entrywise bound on the margin's sensitivity row w.r.t. a^(I),
  // accumulated from the top with the final row replaced by |wdiff|.
  Eigen::RowVectorXd s = wdiff.cwiseAbs().transpose();
  double sum = 0.0;
  for (int I = L - 1; I >= 1; --I) {
    sum += r[static_cast<std::size_t>(I - 1)] * r[static_cast<std::size_t>(I - 1)] * s.maxCoeff();
    if (I > 1) s = prof.g * s * net.layer(I - 1).weight.cwiseAbs();
  }
  return prof.h * sum;
}

CurvatureBounds two_layer_bounds(const Mlp& net, int label, int target, int power_iters) {
  if (net.depth() != 2)
    throw std::invalid_argument("two_layer_bounds: network must have exactly 2 layers");
  const ActivationProfile prof = profile(net.activation());
  const Eigen::Index n1 = net.layer(0).weight.rows();
  EnvelopePair e = envelope_matrices(net.layer(0).weight, final_row_diff(net, label, target),
                                     Eigen::VectorXd::Constant(n1, prof.h_min),
                                     Eigen::VectorXd::Constant(n1, prof.h_max));
  CurvatureBounds b;
  b.label = label;
  b.target = target;
  // Global coefficients make P PSD and N NSD, so the dominant magnitude is
  // the extreme eigenvalue in both cases.
  b.M = power_iteration(e.P, power_iters).magnitude;
  double n_mag = power_iteration(e.N, power_iters).magnitude;
  b.m = n_mag == 0.0 ? 0.0 : -n_mag;
  b.K = deep_bound(net, label, target, power_iters);
  return b;
}

CurvatureBounds local_two_layer_bounds(const Mlp& net, int label, int target,
                                       const Eigen::VectorXd& center, double radius,
                                       int power_iters) {
  if (net.depth() != 2)
    throw std::invalid_argument("local_two_layer_bounds: network must have exactly 2 layers");
  if (!(radius >= 0.0)) throw std::invalid_argument("local_two_layer_bounds: radius must be >= 0");
  if (center.size() != net.input_dim())
    throw std::invalid_argument("local_two_layer_bounds: center has wrong dimension");

  const DenseLayer& first = net.layer(0);
  const Eigen::Index n1 = first.weight.rows();

  // Pre-activation interval of each hidden unit over the ball, then the
  // exact sigma'' range on that interval.
  Eigen::VectorXd spp_lo(n1), spp_hi(n1);
  for (Eigen::Index i = 0; i < n1; ++i) {
    double mid = first.weight.row(i).dot(center) + first.bias[i];
    double half = radius * first.weight.row(i).norm();
    SecondDerivRange range = second_deriv_range(net.activation(), mid - half, mid + half);
    spp_lo[i] = range.lo;
    spp_hi[i] = range.hi;
  }

  CurvatureBounds global = two_layer_bounds(net, label, target, power_iters);
  EnvelopePair e =
      envelope_matrices(first.weight, final_row_diff(net, label, target), spp_lo, spp_hi);

  // The local envelopes need not be sign-definite; shift by the global
  // bounds so the power iteration sees a PSD matrix whose top eigenvalue
  // recovers the extreme one.
  const Eigen::Index d = e.P.rows();
  Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(d, d);
  double local_M = global.m + power_iteration(e.P - global.m * identity, power_iters).magnitude;
  double local_m = global.M - power_iteration(global.M * identity - e.N, power_iters).magnitude;

  CurvatureBounds b;
  b.label = label;
  b.target = target;
  // Clamp to the solver contract m <= 0 <= M (widening toward zero is
  // always sound) and never report looser than global.
  b.M = std::min(std::max(local_M, 0.0), global.M);
  b.m = std::max(std::min(local_m, 0.0), global.m);
  b.K = global.K;
  b.scope = BoundScope::Local;
  b.radius = radius;
  b.center = center;
  return b;
}

CurvatureBounds margin_bounds(const Mlp& net, int label, int target, int power_iters) {
  if (net.depth() == 2) return two_layer_bounds(net, label, target, power_iters);
  CurvatureBounds b;
  b.label = label;
  b.target = target;
  b.K = deep_bound(net, label, target, power_iters);
  b.M = b.K;
  b.m = -b.K;
  return b;
}

}  // namespace curv
