#pragma once

#include <string>
#include <vector>

#include "dlab/dilation.hpp"

namespace dlab {

struct HamiltonianSample {
  double time = 0.0;
  CMatrix hamiltonian;               // Hermitized i dU/dt U^H
  double antihermitian_residual = 0.0;  // ||H - H^H||_F / ||H||_F before Hermitizing
};

/// Effective Hamiltonian H(t) = i U'(t) U(t)^H. U' uses the three-point
/// second-order stencil for non-uniform grids (central in the interior,
/// one-sided at the ends).
std::vector<HamiltonianSample> hamiltonian_extract(const UnitaryCurve& curve);

struct FlaggedEigenvalue {
  int index = 0;              // position in the descending Choi spectrum at t_min
  double value_at_tmin = 0.0;
  double lambda0 = 0.0;       // linear extrapolation to t = 0 from the first two grid points
  double slope_estimate = 0.0;  // lambda(t_min) / t_min
};

struct SingularityReport {
  std::vector<double> times;
  std::vector<double> h_norms;  // operator norm of H(t)
  double fitted_exponent = 0.0;
  double fit_intercept = 0.0;
  double fit_residual = 0.0;    // RMS residual of the log-log fit
  int fit_points = 0;
  std::vector<double> choi_eigenvalues_tmin;
  std::vector<double> choi_eigenvalue_slopes;  // finite differences between the first two grid points
  std::vector<FlaggedEigenvalue> flagged_eigenvalues;
  std::vector<std::string> warnings;
};

struct SingularityOptions {
  double flag_threshold = 0.01;
  ExactDilationOptions dilation;
};

/// Builds the exact dilation on a geometric grid in [t_min, t_max], fits
/// log ||H(t)||_op = c + p log t (endpoints excluded) and flags Choi
/// eigenvalues that start at zero with nonzero slope.
SingularityReport singularity_scan(const CurveSource& src, double t_min, double t_max, int points_per_decade,
                                   int ancilla_dim = 0, const SingularityOptions& options = {});

/// sup over shared times of the diamond_upper surrogate.
double curve_distance_sup(const CurveSamples& a, const CurveSamples& b);

}  // namespace dlab
