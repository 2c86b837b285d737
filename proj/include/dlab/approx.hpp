#pragma once

// Approximate Stinespring dilation of a Lipschitz channel curve on [0, T].
//
// Construction. Sample the curve at t_j = j delta and take matched
// canonical Kraus isometries V_j : C^n -> C^n (x) C^{n^2}. The ancilla is
// doubled, E = C^{n^2} (+) C^{n^2}, and each sample is placed in one of the
// two copies, alternating from one sample to the next. On segment j with
// local coordinate s in [0, 1], theta = pi s / 2,
//
//   W(s) = cos(theta) A_j + sin(theta) B_j,
//
// where A_j embeds V_j in one copy and B_j embeds V_{j+1} in the other.
// Because the two copies use disjoint ancilla basis vectors, A^H B = 0, so
// W(s) is an isometry and the cross terms vanish under the ancilla partial
// trace:
//
//   Tr_E(W rho W^H) = cos^2(theta) Phi_j(rho) + sin^2(theta) Phi_{j+1}(rho).
//
// Error bound. With K the Lipschitz constant of t -> Phi_t and
// t = t_j + s delta,
//   ||Phi_t - Phi^e_t|| <= cos^2 ||Phi_t - Phi_j|| + sin^2 ||Phi_t - Phi_{j+1}||
//                       <= K delta (cos^2 s + sin^2 (1 - s)) <= K delta / 2,
// in any norm satisfying the triangle inequality; the certificate reports
// K delta with K the inflated estimate.
//
// Completion. G_j = B A^H - A B^H is anti-Hermitian with G A = B and
// G B = -A, and vanishes off span(A, B). Hence
//   R_j(s) = exp(theta G_j) = I + sin(theta) G_j - (1 - cos(theta)) (A A^H + B B^H)
// rotates A into W(s), and U(t) = R_j(s) U_j with U_{j+1} = R_j(1) U_j is a
// continuous unitary curve, smooth inside each segment. Segments whose
// endpoint isometries coincide are held constant. Alternating copies is
// the fixed relabeling permutation between segments, absorbed into U; it
// acts on the ancilla only and so leaves every reduced channel unchanged.

#include <optional>
#include <vector>

#include "dlab/dilation.hpp"

namespace dlab {

/// delta = epsilon / K.
double mesh_for_epsilon(double lipschitz, double epsilon);

struct ApproxSegment {
  double t_start = 0.0;
  bool stationary = false;
  int from_copy = 0;  // copy holding V_j (0 or 1)
  CMatrix start_unitary;
  CMatrix from_isometry;  // A_j, (n * 2n^2) x n
  CMatrix to_isometry;    // B_j
};

struct ApproxVerification {
  std::vector<double> times;
  std::vector<double> errors_upper;  // diamond_upper surrogate
  std::vector<double> errors_lower;  // diamond_lower surrogate
  double measured_sup_error = 0.0;
  double measured_sup_lower = 0.0;
  double max_unitarity_residual = 0.0;
  double max_unitary_jump = 0.0;
};

struct ApproxDilation {
  double mesh = 0.0;
  double horizon = 0.0;
  TimeGrid grid;  // uniform, step mesh
  int system_dim = 0;
  int ancilla_dim = 0;  // 2 n^2
  int omega_index = 0;  // basis vector of the first copy
  double certified_error = 0.0;
  double lipschitz_raw = 0.0;   // pilot-grid estimate
  double lipschitz_used = 0.0;  // after the safety factor
  std::vector<ApproxSegment> segments;
  std::vector<ChannelRep> mesh_channels;
  ApproxVerification verification;
  std::vector<std::string> warnings;

  /// Index of the segment containing t and the local coordinate s.
  std::pair<std::size_t, double> locate(double t) const;

  CMatrix unitary_at(double t) const;
};

struct ApproxOptions {
  int pilot_points = 64;
  double safety_factor = 1.5;
  /// Ratio of the Lipschitz estimates on a doubled pilot grid above which
  /// the curve is rejected as not Lipschitz.
  double divergence_ratio = 1.25;
  /// Overrides the mesh derived from epsilon (rounded down to divide T).
  std::optional<double> mesh;
  int verify_refinement = 10;
  bool verify = true;
};

ApproxDilation approx_dilation(const CurveSource& src, double horizon, double epsilon,
                               const ApproxOptions& options = {});

/// Dilation at time t in [0, T], evaluated exactly inside its segment.
StinespringDilation evaluate(const ApproxDilation& apx, double t);

/// Samples source and approximation on a uniform grid with
/// `refinement` points per mesh interval.
ApproxVerification verify_approx(const ApproxDilation& apx, const CurveSource& src, int refinement);

}  // namespace dlab
