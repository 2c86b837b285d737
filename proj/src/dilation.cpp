#include "dlab/dilation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "dlab/parallel.hpp"
#include "dlab/random.hpp"

namespace dlab {

namespace {

void check_layout(int n, int d, int omega) {
  if (n <= 0 || d <= 0) throw DimensionError(fmt::format("dilation: invalid dimensions n={}, d={}", n, d));
  if (omega < 0 || omega >= d) throw DimensionError(fmt::format("dilation: omega_index {} outside [0, {})", omega, d));
}

std::vector<int> complement_columns(int n, int d, int omega) {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(n * d - n));
  for (int c = 0; c < n * d; ++c)
    if (c % d != omega) out.push_back(c);
  return out;
}

}  // namespace

std::vector<int> omega_columns(int n, int d, int omega) {
  check_layout(n, d, omega);
  std::vector<int> cols(static_cast<std::size_t>(n));
  for (int x = 0; x < n; ++x) cols[static_cast<std::size_t>(x)] = x * d + omega;
  return cols;
}

CMatrix embed_completion(const CMatrix& u_first, int n, int d, int omega) {
  check_layout(n, d, omega);
  if (u_first.rows() != n * d || u_first.cols() != n * d) {
    throw DimensionError(fmt::format("embed_completion: expected {}x{}, got {}x{}", n * d, n * d, u_first.rows(),
                                     u_first.cols()));
  }
  CMatrix u(n * d, n * d);
  const auto iso = omega_columns(n, d, omega);
  const auto rest = complement_columns(n, d, omega);
  for (int x = 0; x < n; ++x) u.col(iso[static_cast<std::size_t>(x)]) = u_first.col(x);
  for (std::size_t r = 0; r < rest.size(); ++r) u.col(rest[r]) = u_first.col(n + static_cast<Eigen::Index>(r));
  return u;
}

CMatrix extract_completion(const CMatrix& u, int n, int d, int omega) {
  check_layout(n, d, omega);
  CMatrix u_first(n * d, n * d);
  const auto iso = omega_columns(n, d, omega);
  const auto rest = complement_columns(n, d, omega);
  for (int x = 0; x < n; ++x) u_first.col(x) = u.col(iso[static_cast<std::size_t>(x)]);
  for (std::size_t r = 0; r < rest.size(); ++r) u_first.col(n + static_cast<Eigen::Index>(r)) = u.col(rest[r]);
  return u_first;
}

CMatrix dilation_isometry(const StinespringDilation& dil) {
  const int n = dil.system_dim;
  const int d = dil.ancilla_dim;
  const auto iso = omega_columns(n, d, dil.omega_index);
  CMatrix v(n * d, n);
  for (int x = 0; x < n; ++x) v.col(x) = dil.unitary.col(iso[static_cast<std::size_t>(x)]);
  return v;
}

CMatrix reduced_action(const StinespringDilation& dil, const CMatrix& rho) {
  const int n = dil.system_dim;
  const int d = dil.ancilla_dim;
  if (rho.rows() != n || rho.cols() != n) {
    throw DimensionError(fmt::format("reduced_action: state is {}x{}, system dimension {}", rho.rows(), rho.cols(), n));
  }
  CMatrix w = CMatrix::Zero(d, d);
  w(dil.omega_index, dil.omega_index) = 1.0;
  const CMatrix joint = dil.unitary * kron(rho, w) * dil.unitary.adjoint();
  return partial_trace_env(joint, n, d);
}

KrausSet kraus_from_isometry(const CMatrix& v, int n, int d) {
  if (v.rows() != n * d || v.cols() != n) {
    throw DimensionError(fmt::format("kraus_from_isometry: expected {}x{}, got {}x{}", n * d, n, v.rows(), v.cols()));
  }
  KrausSet k{n, {}};
  for (int i = 0; i < d; ++i) {
    CMatrix op(n, n);
    for (int a = 0; a < n; ++a) op.row(a) = v.row(a * d + i);
    k.operators.push_back(std::move(op));
  }
  return k;
}

ChannelRep reduced_channel(const StinespringDilation& dil) {
  return ChannelRep::from_kraus(kraus_from_isometry(dilation_isometry(dil), dil.system_dim, dil.ancilla_dim));
}

CMatrix isometry_from_kraus(const KrausSet& k, int ancilla_dim) {
  if (k.operators.empty()) throw ValidationError("isometry_from_kraus: empty Kraus set");
  if (ancilla_dim < static_cast<int>(k.operators.size())) {
    throw ValidationError(fmt::format("isometry_from_kraus: ancilla dimension {} < {} Kraus operators", ancilla_dim,
                                      k.operators.size()));
  }
  const double resid = k.completeness_residual();
  if (resid > kCompletenessTol) {
    throw ValidationError(fmt::format("isometry_from_kraus: completeness relation violated (residual {:.3e})", resid));
  }
  const int n = k.dim;
  const int d = ancilla_dim;
  CMatrix v = CMatrix::Zero(n * d, n);
  for (std::size_t i = 0; i < k.operators.size(); ++i) {
    for (int a = 0; a < n; ++a) v.row(a * d + static_cast<int>(i)) = k.operators[i].row(a);
  }
  return v;
}

StinespringDilation static_dilation(const ChannelRep& rep, int ancilla_dim, int omega_index) {
  const int n = rep.dim();
  const int d = ancilla_dim > 0 ? ancilla_dim : n * n;
  check_layout(n, d, omega_index);
  const KrausSet k = choi_to_kraus(choi_of(rep));
  if (static_cast<int>(k.operators.size()) > d) {
    throw NumericalError(
        fmt::format("static_dilation: Kraus rank {} exceeds ancilla dimension {}", k.operators.size(), d));
  }
  const CMatrix v = isometry_from_kraus(k, d);
  return StinespringDilation{n, d, omega_index, embed_completion(complete_isometry(v), n, d, omega_index)};
}

VerifyReport verify_dilation(const StinespringDilation& dil, const ChannelRep& rep, int trials, std::uint64_t seed) {
  const int n = dil.system_dim;
  if (rep.dim() != n || dil.unitary.rows() != n * dil.ancilla_dim || dil.unitary.cols() != n * dil.ancilla_dim) {
    throw DimensionError(fmt::format("verify_dilation: channel dimension {} does not match dilation {}x{} (n={}, d={})",
                                     rep.dim(), dil.unitary.rows(), dil.unitary.cols(), n, dil.ancilla_dim));
  }
  VerifyReport report;
  report.unitarity_residual = unitarity_residual(dil.unitary);
  auto check = [&](const CMatrix& rho) {
    const double r = (reduced_action(dil, rho) - apply(rep, rho)).norm();
    report.max_residual = std::max(report.max_residual, r);
    ++report.checks;
  };
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) check(matrix_unit(n, a, b));
  Rng rng(seed);
  for (int t = 0; t < trials; ++t) check(random_density(n, rng));
  return report;
}

MatchResult eigenpath_match(const HermEig& prev, const HermEig& next, const MatchOptions& options) {
  const auto size = next.eigenvalues.size();
  if (prev.eigenvalues.size() != size || prev.eigenvectors.rows() != next.eigenvectors.rows() ||
      prev.eigenvectors.cols() != size || next.eigenvectors.cols() != size) {
    throw DimensionError("eigenpath_match: spectral data of different sizes");
  }
  MatchResult result;
  const auto n_slots = static_cast<std::size_t>(size);
  if (size == 0) return result;

  // Clusters of `next`, in descending eigenvalue order.
  std::vector<int> order(n_slots);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return next.eigenvalues(a) > next.eigenvalues(b); });
  const double scale = next.eigenvalues.cwiseAbs().maxCoeff();
  std::vector<std::vector<int>> clusters;
  for (std::size_t r = 0; r < n_slots; ++r) {
    const int idx = order[r];
    if (!clusters.empty()) {
      const int last = clusters.back().back();
      if (next.eigenvalues(last) - next.eigenvalues(idx) <= options.degeneracy_gap * scale) {
        clusters.back().push_back(idx);
        continue;
      }
    }
    clusters.push_back({idx});
  }
  const std::size_t n_clusters = clusters.size();
  std::vector<CMatrix> bases(n_clusters);
  for (std::size_t c = 0; c < n_clusters; ++c) {
    bases[c].resize(next.eigenvectors.rows(), static_cast<Eigen::Index>(clusters[c].size()));
    for (std::size_t r = 0; r < clusters[c].size(); ++r)
      bases[c].col(static_cast<Eigen::Index>(r)) = next.eigenvectors.col(clusters[c][r]);
  }

  struct Candidate {
    double weight;
    std::size_t slot;
    std::size_t cluster;
  };
  std::vector<Candidate> cands;
  cands.reserve(n_slots * n_clusters);
  std::vector<std::vector<double>> weight(n_slots, std::vector<double>(n_clusters));
  for (std::size_t i = 0; i < n_slots; ++i) {
    for (std::size_t c = 0; c < n_clusters; ++c) {
      const double w = (bases[c].adjoint() * prev.eigenvectors.col(static_cast<Eigen::Index>(i))).norm();
      weight[i][c] = w;
      cands.push_back({w, i, c});
    }
  }
  std::stable_sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) { return a.weight > b.weight; });

  std::vector<std::size_t> slot_cluster(n_slots, n_clusters);
  std::vector<std::size_t> load(n_clusters, 0);
  for (const auto& cand : cands) {
    if (slot_cluster[cand.slot] != n_clusters) continue;
    if (load[cand.cluster] >= clusters[cand.cluster].size()) continue;
    slot_cluster[cand.slot] = cand.cluster;
    ++load[cand.cluster];
  }

  const double prev_max = prev.eigenvalues.maxCoeff();
  auto is_null = [&](std::size_t i) { return prev.eigenvalues(static_cast<Eigen::Index>(i)) <= options.rank_tol * prev_max; };

  for (std::size_t i = 0; i < n_slots; ++i) {
    if (is_null(i) || n_clusters < 2) continue;
    std::vector<double> w = weight[i];
    std::partial_sort(w.begin(), w.begin() + 2, w.end(), std::greater<>());
    if (w[0] > options.ambiguity_tol && w[0] - w[1] < options.ambiguity_tol) {
      result.warnings.push_back(
          fmt::format("eigenpath_match: ambiguous assignment for slot {} (overlaps {:.12f} vs {:.12f})", i, w[0], w[1]));
    }
  }

  // Null slots carry zero Kraus operators, so their labels are free:
  // hand them out in descending order of the incoming eigenvalues.
  {
    std::vector<std::size_t> null_slots;
    for (std::size_t i = 0; i < n_slots; ++i)
      if (is_null(i)) null_slots.push_back(i);
    std::vector<std::size_t> assigned;
    for (auto i : null_slots) assigned.push_back(slot_cluster[i]);
    std::stable_sort(assigned.begin(), assigned.end());  // clusters are already in descending eigenvalue order
    for (std::size_t r = 0; r < null_slots.size(); ++r) slot_cluster[null_slots[r]] = assigned[r];
  }

  result.matched.eigenvalues.resize(size);
  result.matched.eigenvectors.resize(next.eigenvectors.rows(), size);
  result.permutation.assign(n_slots, -1);
  for (std::size_t c = 0; c < n_clusters; ++c) {
    std::vector<std::size_t> slots;
    for (std::size_t i = 0; i < n_slots; ++i)
      if (slot_cluster[i] == c) slots.push_back(i);
    const auto m = static_cast<Eigen::Index>(slots.size());
    CMatrix p(prev.eigenvectors.rows(), m);
    for (Eigen::Index r = 0; r < m; ++r) p.col(r) = prev.eigenvectors.col(static_cast<Eigen::Index>(slots[static_cast<std::size_t>(r)]));
    const CMatrix rotated = bases[c] * polar_unitary(bases[c].adjoint() * p);
    for (Eigen::Index r = 0; r < m; ++r) {
      const auto slot = static_cast<Eigen::Index>(slots[static_cast<std::size_t>(r)]);
      const int member = clusters[c][static_cast<std::size_t>(r)];
      result.matched.eigenvectors.col(slot) = rotated.col(r);
      result.matched.eigenvalues(slot) = next.eigenvalues(member);
      result.permutation[static_cast<std::size_t>(slot)] = member;
    }
  }
  return result;
}

StinespringDilation UnitaryCurve::at(std::size_t k) const {
  return StinespringDilation{system_dim, ancilla_dim, omega_index, unitaries.at(k)};
}

KrausCurve build_kraus_curve(const CurveSamples& samples, int ancilla_dim, const ExactDilationOptions& options,
                             std::vector<std::string>* warnings) {
  if (samples.empty()) throw ValidationError("build_kraus_curve: no samples");
  const int n = samples.front().second.dim();
  const int slots = n * n;
  const int d = ancilla_dim > 0 ? ancilla_dim : slots;

  KrausCurve curve;
  curve.grid.points.reserve(samples.size());
  for (const auto& s : samples) curve.grid.points.push_back(s.first);

  const auto raw = parallel_map<HermEig>(samples.size(), [&](std::size_t k) {
    const CptpReport r = is_cptp(samples[k].second);
    if (r.min_choi_eig < -kCpTol) {
      throw NumericalError(fmt::format("Choi matrix at t={} has eigenvalue {:.3e} (not CP)", samples[k].first,
                                       r.min_choi_eig));
    }
    return herm_eig(samples[k].second.choi_matrix());
  });

  curve.spectra.reserve(samples.size());
  curve.spectra.push_back(raw.front());
  for (std::size_t k = 1; k < samples.size(); ++k) {
    MatchResult m = eigenpath_match(curve.spectra.back(), raw[k], options.match);
    if (warnings) {
      for (auto& w : m.warnings) warnings->push_back(fmt::format("t={}: {}", samples[k].first, w));
    }
    curve.spectra.push_back(std::move(m.matched));
  }

  curve.families.reserve(samples.size());
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const HermEig& spec = curve.spectra[k];
    const double lmax = spec.eigenvalues.maxCoeff();
    KrausSet family{n, std::vector<CMatrix>(static_cast<std::size_t>(d), CMatrix::Zero(n, n))};
    for (int s = 0; s < slots; ++s) {
      const double lam = spec.eigenvalues(s);
      if (lam <= options.rank_tol * lmax) continue;
      if (s >= d) {
        throw NumericalError(fmt::format("Kraus rank at t={} exceeds ancilla dimension {} (eigenvalue {:.3e} in slot {})",
                                         samples[k].first, d, lam, s));
      }
      family.operators[static_cast<std::size_t>(s)] = unvec(std::sqrt(lam) * spec.eigenvectors.col(s));
    }
    curve.families.push_back(std::move(family));
  }
  return curve;
}

ExactDilation exact_dilation_curve(const CurveSource& src, const TimeGrid& grid, const ExactDilationOptions& options) {
  grid.validate();
  const int n = src.dim();
  const int d = options.ancilla_dim > 0 ? options.ancilla_dim : n * n;
  check_layout(n, d, options.omega_index);

  ExactDilation out;
  DilationReport& report = out.report;
  report.times = grid.points;
  report.verify_tol = options.verify_tol;
  report.ancilla_dim = d;
  report.starts_at_zero = grid.points.front() <= 0.0;
  if (report.starts_at_zero) {
    report.warnings.push_back(
        "grid starts at t=0: Kraus operators built from square roots of Choi eigenvalues need not be "
        "differentiable there, so the dilating unitary curve may fail to be smooth at t=0");
  }

  const CurveSamples samples = sample_curve(src, grid);
  out.kraus = build_kraus_curve(samples, d, options, &report.warnings);
  out.kraus.grid.kind = grid.kind;

  const std::size_t count = samples.size();
  std::vector<CMatrix> isometries(count);
  for (std::size_t k = 0; k < count; ++k) {
    const KrausSet& fam = out.kraus.families[k];
    isometries[k] = isometry_from_kraus(fam, d);
    int rank = 0;
    for (const auto& op : fam.operators)
      if (op.norm() > 0.0) ++rank;
    report.max_kraus_rank = std::max(report.max_kraus_rank, rank);
  }

  UnitaryCurve& uc = out.unitaries;
  uc.grid = grid;
  uc.system_dim = n;
  uc.ancilla_dim = d;
  uc.omega_index = options.omega_index;
  uc.unitaries.reserve(count);
  CMatrix u_first = complete_isometry(isometries.front());
  uc.unitaries.push_back(embed_completion(u_first, n, d, options.omega_index));
  for (std::size_t k = 1; k < count; ++k) {
    try {
      u_first = realign_complement(u_first, isometries[k], options.realign_tol);
    } catch (const NumericalError& e) {
      throw NumericalError(fmt::format("between t={} and t={}: {}", grid.points[k - 1], grid.points[k], e.what()));
    }
    uc.unitaries.push_back(embed_completion(u_first, n, d, options.omega_index));
  }

  const auto verified = parallel_map<VerifyReport>(count, [&](std::size_t k) {
    return verify_dilation(uc.at(k), samples[k].second, options.verify_trials, options.seed + k);
  });
  report.all_verified = true;
  for (const auto& v : verified) {
    report.verify_residuals.push_back(v.max_residual);
    report.unitarity_residuals.push_back(v.unitarity_residual);
    report.max_verify_residual = std::max(report.max_verify_residual, v.max_residual);
    report.max_unitarity_residual = std::max(report.max_unitarity_residual, v.unitarity_residual);
    if (v.max_residual > options.verify_tol || v.unitarity_residual > 1e-10) report.all_verified = false;
  }

  report.continuity_ok = true;
  for (std::size_t k = 0; k + 1 < count; ++k) {
    const double ujump = (uc.unitaries[k + 1] - uc.unitaries[k]).norm();
    report.unitary_jumps.push_back(ujump);
    report.max_unitary_jump = std::max(report.max_unitary_jump, ujump);

    double kjump = 0.0;
    const auto& a = out.kraus.families[k].operators;
    const auto& b = out.kraus.families[k + 1].operators;
    for (std::size_t j = 0; j < a.size(); ++j) kjump = std::max(kjump, (b[j] - a[j]).norm());
    const double dj = channel_distance(samples[k + 1].second, samples[k].second).choi_trace_dist;
    const double bound = options.path_jump_factor * std::sqrt(dj) + 1e-12;
    report.kraus_jumps.push_back(kjump);
    report.kraus_jump_bounds.push_back(bound);
    if (kjump > bound) {
      report.continuity_ok = false;
      report.warnings.push_back(fmt::format("Kraus path jump {:.3e} exceeds bound {:.3e} between t={} and t={}", kjump,
                                            bound, grid.points[k], grid.points[k + 1]));
    }
  }
  return out;
}

}  // namespace dlab
