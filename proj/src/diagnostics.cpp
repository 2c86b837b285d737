#include "dlab/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace dlab {

std::vector<HamiltonianSample> hamiltonian_extract(const UnitaryCurve& curve) {
  const auto& t = curve.grid.points;
  const auto& u = curve.unitaries;
  if (t.size() < 3 || u.size() != t.size()) {
    throw ValidationError("hamiltonian_extract: need at least 3 grid points with one unitary each");
  }
  const std::size_t last = t.size() - 1;
  std::vector<HamiltonianSample> out;
  out.reserve(t.size());
  for (std::size_t i = 0; i <= last; ++i) {
    CMatrix du;
    if (i == 0) {
      const double h1 = t[1] - t[0];
      const double h2 = t[2] - t[1];
      du = -(2 * h1 + h2) / (h1 * (h1 + h2)) * u[0] + (h1 + h2) / (h1 * h2) * u[1] - h1 / (h2 * (h1 + h2)) * u[2];
    } else if (i == last) {
      const double h1 = t[last - 1] - t[last - 2];
      const double h2 = t[last] - t[last - 1];
      du = h2 / (h1 * (h1 + h2)) * u[last - 2] - (h1 + h2) / (h1 * h2) * u[last - 1] +
           (2 * h2 + h1) / (h2 * (h1 + h2)) * u[last];
    } else {
      const double h1 = t[i] - t[i - 1];
      const double h2 = t[i + 1] - t[i];
      du = -h2 / (h1 * (h1 + h2)) * u[i - 1] + (h2 - h1) / (h1 * h2) * u[i] + h1 / (h2 * (h1 + h2)) * u[i + 1];
    }
    CMatrix h = kI * du * u[i].adjoint();
    HamiltonianSample s;
    s.time = t[i];
    const double hn = h.norm();
    s.antihermitian_residual = hn > 0.0 ? (h - h.adjoint()).norm() / hn : 0.0;
    s.hamiltonian = 0.5 * (h + h.adjoint());
    out.push_back(std::move(s));
  }
  return out;
}

SingularityReport singularity_scan(const CurveSource& src, double t_min, double t_max, int points_per_decade,
                                   int ancilla_dim, const SingularityOptions& options) {
  if (!(t_min > 0.0) || !(t_max > t_min)) throw ValidationError("singularity_scan: need 0 < t_min < t_max");
  const int n = src.dim();
  const ChannelRep phi0 = channel_at(src, 0.0);
  const double dist0 = (phi0.choi_matrix() - ChannelRep::identity(n).choi_matrix()).norm();
  if (dist0 > 1e-9) {
    throw ValidationError(fmt::format("singularity_scan: curve does not start at the identity (||J0 - J_id||_F = {:.3e})", dist0));
  }

  const TimeGrid grid = TimeGrid::per_decade(t_min, t_max, points_per_decade);
  if (grid.size() < 5) throw ValidationError("singularity_scan: need at least 5 grid points for the fit");
  ExactDilationOptions dopts = options.dilation;
  dopts.ancilla_dim = ancilla_dim;
  const ExactDilation dil = exact_dilation_curve(src, grid, dopts);
  const auto hs = hamiltonian_extract(dil.unitaries);

  SingularityReport report;
  report.times = grid.points;
  report.warnings = dil.report.warnings;
  for (const auto& s : hs) report.h_norms.push_back(norms(s.hamiltonian).op);

  // Least squares on interior points only.
  const std::size_t first = 1;
  const std::size_t last = grid.size() - 2;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  bool degenerate = false;
  for (std::size_t i = first; i <= last; ++i) {
    if (!(report.h_norms[i] > 0.0)) {
      degenerate = true;
      continue;
    }
    const double x = std::log(report.times[i]);
    const double y = std::log(report.h_norms[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++m;
  }
  if (degenerate) report.warnings.push_back("singularity_scan: zero Hamiltonian norms excluded from the fit");
  report.fit_points = m;
  if (m >= 2) {
    const double denom = m * sxx - sx * sx;
    report.fitted_exponent = (m * sxy - sx * sy) / denom;
    report.fit_intercept = (sy - report.fitted_exponent * sx) / m;
    double ss = 0.0;
    for (std::size_t i = first; i <= last; ++i) {
      if (!(report.h_norms[i] > 0.0)) continue;
      const double r = std::log(report.h_norms[i]) - (report.fit_intercept + report.fitted_exponent * std::log(report.times[i]));
      ss += r * r;
    }
    report.fit_residual = std::sqrt(ss / m);
  }

  const RVector ev0 = herm_eigenvalues(channel_at(src, grid.points[0]).choi_matrix());
  const RVector ev1 = herm_eigenvalues(channel_at(src, grid.points[1]).choi_matrix());
  const double lmax = ev0.maxCoeff();
  const double gap = grid.points[1] - grid.points[0];
  for (Eigen::Index j = 0; j < ev0.size(); ++j) {
    report.choi_eigenvalues_tmin.push_back(ev0(j));
    report.choi_eigenvalue_slopes.push_back((ev1(j) - ev0(j)) / gap);
    const double lam = ev0(j);
    if (lam < options.flag_threshold && lam > dopts.rank_tol * lmax) {
      FlaggedEigenvalue f;
      f.index = static_cast<int>(j);
      f.value_at_tmin = lam;
      f.slope_estimate = lam / t_min;
      f.lambda0 = lam - report.choi_eigenvalue_slopes.back() * t_min;
      report.flagged_eigenvalues.push_back(f);
    }
  }
  return report;
}

double curve_distance_sup(const CurveSamples& a, const CurveSamples& b) {
  if (a.size() != b.size()) throw ValidationError("curve_distance_sup: sample lists differ in length");
  double sup = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k].first != b[k].first) {
      throw ValidationError(fmt::format("curve_distance_sup: time lists differ at index {} ({} vs {})", k, a[k].first,
                                        b[k].first));
    }
    sup = std::max(sup, channel_distance(a[k].second, b[k].second).diamond_upper);
  }
  return sup;
}

}  // namespace dlab
