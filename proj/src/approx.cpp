#include "dlab/approx.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "dlab/parallel.hpp"

namespace dlab {

namespace {

// Places an isometry C^n -> C^n (x) C^{n^2} into copy `copy` of
// C^n (x) (C^{n^2} (+) C^{n^2}).
CMatrix embed_in_copy(const CMatrix& v, int n, int copy) {
  const int block = n * n;
  const int d = 2 * block;
  CMatrix out = CMatrix::Zero(n * d, n);
  for (int a = 0; a < n; ++a)
    for (int i = 0; i < block; ++i) out.row(a * d + copy * block + i) = v.row(a * block + i);
  return out;
}

CMatrix rotation(const ApproxSegment& seg, double s) {
  const auto m = seg.from_isometry.rows();
  if (seg.stationary) return CMatrix::Identity(m, m);
  const double theta = 0.5 * std::numbers::pi * s;
  const CMatrix& a = seg.from_isometry;
  const CMatrix& b = seg.to_isometry;
  const CMatrix g = b * a.adjoint() - a * b.adjoint();
  const CMatrix proj = a * a.adjoint() + b * b.adjoint();
  return CMatrix::Identity(m, m) + std::sin(theta) * g - (1.0 - std::cos(theta)) * proj;
}

}  // namespace

double mesh_for_epsilon(double lipschitz, double epsilon) {
  if (!(lipschitz > 0.0) || !(epsilon > 0.0)) {
    throw ValidationError(fmt::format("mesh_for_epsilon: need K > 0 and epsilon > 0 (got {}, {})", lipschitz, epsilon));
  }
  return epsilon / lipschitz;
}

std::pair<std::size_t, double> ApproxDilation::locate(double t) const {
  const double slack = 1e-12 * std::max(1.0, horizon);
  if (!(t >= -slack) || !(t <= horizon + slack)) {
    throw ValidationError(fmt::format("approximate dilation: t={} outside [0, {}]", t, horizon));
  }
  const double clamped = std::clamp(t, 0.0, horizon);
  auto j = static_cast<std::size_t>(std::floor(clamped / mesh));
  j = std::min(j, segments.size() - 1);
  const double s = std::clamp((clamped - segments[j].t_start) / mesh, 0.0, 1.0);
  return {j, s};
}

CMatrix ApproxDilation::unitary_at(double t) const {
  const auto [j, s] = locate(t);
  return rotation(segments[j], s) * segments[j].start_unitary;
}

StinespringDilation evaluate(const ApproxDilation& apx, double t) {
  return StinespringDilation{apx.system_dim, apx.ancilla_dim, apx.omega_index, apx.unitary_at(t)};
}

ApproxVerification verify_approx(const ApproxDilation& apx, const CurveSource& src, int refinement) {
  if (refinement < 1) throw ValidationError("verify_approx: refinement must be >= 1");
  const int points = static_cast<int>(apx.segments.size()) * refinement + 1;
  const TimeGrid grid = TimeGrid::uniform(0.0, apx.horizon, points);

  struct Point {
    double upper;
    double lower;
    double unitarity;
    CMatrix unitary;
  };
  const auto evals = parallel_map<Point>(grid.size(), [&](std::size_t k) {
    const double t = grid.points[k];
    const StinespringDilation dil = evaluate(apx, t);
    const ChannelDistance dist = channel_distance(channel_at(src, t), reduced_channel(dil));
    return Point{dist.diamond_upper, dist.diamond_lower, unitarity_residual(dil.unitary), dil.unitary};
  });

  ApproxVerification v;
  v.times = grid.points;
  for (std::size_t k = 0; k < evals.size(); ++k) {
    v.errors_upper.push_back(evals[k].upper);
    v.errors_lower.push_back(evals[k].lower);
    v.measured_sup_error = std::max(v.measured_sup_error, evals[k].upper);
    v.measured_sup_lower = std::max(v.measured_sup_lower, evals[k].lower);
    v.max_unitarity_residual = std::max(v.max_unitarity_residual, evals[k].unitarity);
    if (k > 0) v.max_unitary_jump = std::max(v.max_unitary_jump, (evals[k].unitary - evals[k - 1].unitary).norm());
  }
  return v;
}

ApproxDilation approx_dilation(const CurveSource& src, double horizon, double epsilon, const ApproxOptions& options) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw ValidationError("approx_dilation: horizon must be finite and > 0");
  if (!(epsilon > 0.0)) throw ValidationError("approx_dilation: epsilon must be > 0");
  if (options.pilot_points < 2) throw ValidationError("approx_dilation: pilot grid needs at least 2 points");

  ApproxDilation apx;
  const int n = src.dim();
  apx.system_dim = n;
  apx.ancilla_dim = 2 * n * n;
  apx.omega_index = 0;
  apx.horizon = horizon;

  const double k_pilot = lipschitz_estimate(sample_curve(src, TimeGrid::uniform(0.0, horizon, options.pilot_points)));
  const double k_fine =
      lipschitz_estimate(sample_curve(src, TimeGrid::uniform(0.0, horizon, 2 * options.pilot_points - 1)));
  if (k_pilot > 0.0 && k_fine > options.divergence_ratio * k_pilot) {
    throw ValidationError(fmt::format(
        "approx_dilation: Lipschitz estimate grows under pilot refinement ({:.6g} -> {:.6g}); the curve does not "
        "look Lipschitz",
        k_pilot, k_fine));
  }
  apx.lipschitz_raw = std::max(k_pilot, k_fine);
  apx.lipschitz_used = options.safety_factor * apx.lipschitz_raw;

  double target = horizon;
  if (options.mesh) {
    if (!(*options.mesh > 0.0)) throw ValidationError("approx_dilation: mesh override must be > 0");
    target = *options.mesh;
  } else if (apx.lipschitz_used > 0.0) {
    target = mesh_for_epsilon(apx.lipschitz_used, epsilon);
  }
  const auto segments = static_cast<int>(std::max(1.0, std::ceil(horizon / target - 1e-9)));
  apx.mesh = horizon / segments;
  apx.grid = TimeGrid::uniform(0.0, horizon, segments + 1);
  apx.certified_error = apx.lipschitz_used * apx.mesh;
  if (!options.mesh && apx.certified_error > epsilon * (1.0 + 1e-12)) {
    throw NumericalError("approx_dilation: certified error exceeds epsilon");
  }

  const CurveSamples samples = sample_curve(src, apx.grid);
  ExactDilationOptions kopts;
  const KrausCurve kc = build_kraus_curve(samples, n * n, kopts, &apx.warnings);
  for (const auto& s : samples) apx.mesh_channels.push_back(s.second);

  const int d = apx.ancilla_dim;
  std::vector<CMatrix> base(samples.size());
  for (std::size_t j = 0; j < samples.size(); ++j) base[j] = isometry_from_kraus(kc.families[j], n * n);

  // Start of the curve: the identity when V_0 is the trivial embedding.
  CMatrix start;
  const CMatrix a0 = embed_in_copy(base[0], n, 0);
  CMatrix trivial = CMatrix::Zero(n * d, n);
  for (int x = 0; x < n; ++x) trivial(x * d + apx.omega_index, x) = 1.0;
  if ((a0 - trivial).norm() <= 1e-12) {
    start = CMatrix::Identity(n * d, n * d);
  } else {
    start = embed_completion(complete_isometry(a0), n, d, apx.omega_index);
  }

  int copy = 0;
  apx.segments.reserve(static_cast<std::size_t>(segments));
  for (int j = 0; j < segments; ++j) {
    ApproxSegment seg;
    seg.t_start = apx.grid.points[static_cast<std::size_t>(j)];
    seg.from_copy = copy;
    seg.stationary = (base[static_cast<std::size_t>(j) + 1] - base[static_cast<std::size_t>(j)]).norm() <= 1e-12;
    const int to_copy = seg.stationary ? copy : 1 - copy;
    seg.from_isometry = embed_in_copy(base[static_cast<std::size_t>(j)], n, copy);
    seg.to_isometry = embed_in_copy(base[static_cast<std::size_t>(j) + 1], n, to_copy);
    seg.start_unitary = start;
    start = rotation(seg, 1.0) * start;
    copy = to_copy;
    apx.segments.push_back(std::move(seg));
  }

  if (options.verify) {
    apx.verification = verify_approx(apx, src, options.verify_refinement);
    if (apx.verification.measured_sup_error > apx.certified_error) {
      apx.warnings.push_back(fmt::format("measured sup error {:.6g} exceeds certified error {:.6g}",
                                         apx.verification.measured_sup_error, apx.certified_error));
    }
  }
  return apx;
}

}  // namespace dlab
