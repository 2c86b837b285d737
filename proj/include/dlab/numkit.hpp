#pragma once

// Dense complex linear algebra used throughout the library.
//
// Conventions:
//   * vec() stacks columns: vec(K)[i*n + a] == K(a, i), so that
//     vec(K) = sum_i e_i (x) K e_i.
//   * Bipartite spaces are ordered system (x) environment; the index of
//     |a> (x) |k> is a*d + k.

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace dlab {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

inline constexpr cplx kI{0.0, 1.0};

/// Shape or dimension mismatch between arguments.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Input that is well-shaped but violates a mathematical precondition
/// (not Hermitian, not an isometry, not trace preserving, ...).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical procedure could not meet its contract (rank deficiency,
/// residual over tolerance, divergence).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct HermEig {
  RVector eigenvalues;   // descending for herm_eig output; slot order after matching
  CMatrix eigenvectors;  // columns
};

struct Norms {
  double frobenius = 0.0;
  double op = 0.0;
  double trace = 0.0;
};

CVector vec(const CMatrix& k);
CMatrix unvec(const CVector& v);

CMatrix kron(const CMatrix& a, const CMatrix& b);

/// Tr_E over the second factor of C^n (x) C^d.
CMatrix partial_trace_env(const CMatrix& m, int n, int d);

/// Multiplies v by a unit phase so that its largest-magnitude entry
/// (earliest index on near-ties) is real and positive.
void fix_phase(Eigen::Ref<CVector> v);

/// Eigendecomposition of a Hermitian matrix, eigenvalues descending,
/// eigenvectors phase-fixed. Throws ValidationError when
/// ||A - A^H||_F > 1e-10 (1 + ||A||_F).
HermEig herm_eig(const CMatrix& a);

/// Eigenvalues only, descending.
RVector herm_eigenvalues(const CMatrix& a);

/// Matrix exponential by scaling and squaring with diagonal Pade
/// approximants of degree 3..13.
CMatrix expm(const CMatrix& a);

/// Extends an m x k isometry to an m x m unitary. The first k columns are
/// copied verbatim; the rest come from column-pivoted Gram-Schmidt on
/// (I - V V^H) e_j, each phase-fixed.
CMatrix complete_isometry(const CMatrix& v);

/// Returns [v_new | Q] where Q is the closest orthonormal frame (polar
/// factor) to the projection of u_prev's trailing columns onto
/// range(v_new)^perp. Throws NumericalError when the projected frame has a
/// singular value below rank_tol.
CMatrix realign_complement(const CMatrix& u_prev, const CMatrix& v_new, double rank_tol = 1e-6);

/// Unitary polar factor W Z^H of A = W S Z^H.
CMatrix polar_unitary(const CMatrix& a);

Norms norms(const CMatrix& a);

/// Sum of absolute eigenvalues of a Hermitian matrix.
double hermitian_trace_norm(const CMatrix& a);

/// ||U^H U - I||_F.
double unitarity_residual(const CMatrix& u);

CMatrix matrix_unit(int n, int row, int col);

/// Permutation taking C^n (x) C^d to C^d (x) C^n: |a>|b> -> |b>|a>.
CMatrix swap_operator(int n, int d);

namespace pauli {
CMatrix x();
CMatrix y();
CMatrix z();
}  // namespace pauli

}  // namespace dlab
