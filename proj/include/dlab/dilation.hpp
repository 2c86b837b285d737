#pragma once

// Stinespring dilations of single channels and of channel curves on a
// time grid.
//
// A dilation lives on C^n (x) C^d (system first). The fixed ancilla state
// is the basis vector |omega> of C^d, and U(x (x) omega) = V x where
// V x = sum_i K_i x (x) f_i is the Kraus isometry.
//
// The curve pipeline follows the chain
//   Phi_t -> J(Phi_t) -> spectral data -> Kraus -> V_t -> U_t
// with two continuity devices: eigenpath matching of the Choi spectral data
// between neighbouring grid points, and realignment of the complement
// columns of U_t to the previous point.

#include <cstdint>
#include <string>
#include <vector>

#include "dlab/dynamics.hpp"

namespace dlab {

struct StinespringDilation {
  int system_dim = 0;
  int ancilla_dim = 0;
  int omega_index = 0;
  CMatrix unitary;
};

/// Column indices x*d + omega of U that carry the isometry.
std::vector<int> omega_columns(int n, int d, int omega);

/// Maps U_first = [V | C] (isometry in the leading n columns) to the
/// system (x) ancilla layout: column x of V goes to x*d + omega, the
/// complement columns fill the remaining positions in ascending order.
CMatrix embed_completion(const CMatrix& u_first, int n, int d, int omega);

/// Inverse of embed_completion.
CMatrix extract_completion(const CMatrix& u, int n, int d, int omega);

/// The isometry U(. (x) omega).
CMatrix dilation_isometry(const StinespringDilation& dil);

/// Tr_E(U (rho (x) |omega><omega|) U^H).
CMatrix reduced_action(const StinespringDilation& dil, const CMatrix& rho);

/// The channel realized by the dilation, as a Kraus set read off the
/// isometry blocks.
ChannelRep reduced_channel(const StinespringDilation& dil);

/// Kraus blocks of an isometry C^n -> C^n (x) C^d.
KrausSet kraus_from_isometry(const CMatrix& v, int n, int d);

/// V = sum_i K_i (x) f_i, padded with zero operators up to ancilla_dim.
CMatrix isometry_from_kraus(const KrausSet& k, int ancilla_dim);

/// ancilla_dim <= 0 selects n^2.
StinespringDilation static_dilation(const ChannelRep& rep, int ancilla_dim = 0, int omega_index = 0);

struct VerifyReport {
  double max_residual = 0.0;  // Frobenius, over matrix units and random states
  double unitarity_residual = 0.0;
  int checks = 0;
};

/// Checks Tr_E(U (rho (x) w w^H) U^H) == Phi(rho) on all n^2 matrix units
/// plus `trials` random density matrices drawn from `seed`.
VerifyReport verify_dilation(const StinespringDilation& dil, const ChannelRep& rep, int trials = 0,
                             std::uint64_t seed = 0);

struct MatchOptions {
  double degeneracy_gap = 1e-8;  // relative to the largest |eigenvalue|
  double ambiguity_tol = 1e-8;
  double rank_tol = 1e-12;
};

struct MatchResult {
  HermEig matched;                 // slot order follows `prev`
  std::vector<int> permutation;    // slot -> column index of `next`
  std::vector<std::string> warnings;
};

/// Labels the spectral data `next` consistently with `prev`.
///
/// Eigenvalues of `next` are grouped into clusters (relative gap below
/// degeneracy_gap). Each prev slot is assigned to a cluster greedily by
/// descending overlap weight ||Q_c^H p_i|| subject to cluster capacity.
/// Within a cluster the basis is rotated by the polar factor of Q_c^H P,
/// which for a singleton cluster is just the phase making <p_i, v_i>
/// real positive. Slots whose prev eigenvalue is numerically zero are
/// refilled in descending order of the new eigenvalues.
MatchResult eigenpath_match(const HermEig& prev, const HermEig& next, const MatchOptions& options = {});

struct KrausCurve {
  TimeGrid grid;
  std::vector<KrausSet> families;  // equal length along the grid
  std::vector<HermEig> spectra;    // matched Choi spectral data
};

struct UnitaryCurve {
  TimeGrid grid;
  int system_dim = 0;
  int ancilla_dim = 0;
  int omega_index = 0;
  std::vector<CMatrix> unitaries;

  StinespringDilation at(std::size_t k) const;
};

struct DilationReport {
  std::vector<double> times;
  std::vector<double> verify_residuals;     // reduced action vs channel, Frobenius
  std::vector<double> unitarity_residuals;  // ||U^H U - I||_F
  std::vector<double> unitary_jumps;        // ||U_{k+1} - U_k||_F
  std::vector<double> kraus_jumps;          // max_j ||K_j(t_{k+1}) - K_j(t_k)||_F
  std::vector<double> kraus_jump_bounds;    // path_jump_factor * sqrt(||J_{k+1} - J_k||_1)
  std::vector<std::string> warnings;
  double verify_tol = 1e-9;
  double max_verify_residual = 0.0;
  double max_unitarity_residual = 0.0;
  double max_unitary_jump = 0.0;
  bool all_verified = false;
  bool continuity_ok = false;
  bool starts_at_zero = false;
  int ancilla_dim = 0;
  int max_kraus_rank = 0;
};

struct ExactDilationOptions {
  int ancilla_dim = 0;  // <= 0 selects n^2
  int omega_index = 0;
  double rank_tol = 1e-12;
  double realign_tol = 1e-6;
  double path_jump_factor = 10.0;
  double verify_tol = 1e-9;
  int verify_trials = 0;
  std::uint64_t seed = 0;
  MatchOptions match;
};

struct ExactDilation {
  KrausCurve kraus;
  UnitaryCurve unitaries;
  DilationReport report;
};

/// Kraus families with matched ordering and phases along sampled channels.
/// Throws NumericalError when a nonzero Kraus operator would need a slot
/// beyond ancilla_dim.
KrausCurve build_kraus_curve(const CurveSamples& samples, int ancilla_dim, const ExactDilationOptions& options,
                             std::vector<std::string>* warnings = nullptr);

ExactDilation exact_dilation_curve(const CurveSource& src, const TimeGrid& grid,
                                   const ExactDilationOptions& options = {});

}  // namespace dlab
