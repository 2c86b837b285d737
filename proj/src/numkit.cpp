#include "dlab/numkit.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include <fmt/format.h>

namespace dlab {

namespace {

bool is_perfect_square(Eigen::Index len, int& root) {
  const auto r = static_cast<int>(std::lround(std::sqrt(static_cast<double>(len))));
  root = r;
  return static_cast<Eigen::Index>(r) * r == len;
}

double one_norm(const CMatrix& a) {
  return a.cwiseAbs().colwise().sum().maxCoeff();
}

}  // namespace

CVector vec(const CMatrix& k) {
  if (k.rows() != k.cols()) {
    throw DimensionError(fmt::format("vec: expected square matrix, got {}x{}", k.rows(), k.cols()));
  }
  const auto n = k.rows();
  CVector v(n * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index a = 0; a < n; ++a) v(i * n + a) = k(a, i);
  }
  return v;
}

CMatrix unvec(const CVector& v) {
  int n = 0;
  if (v.size() == 0 || !is_perfect_square(v.size(), n)) {
    throw DimensionError(fmt::format("unvec: length {} is not a perfect square", v.size()));
  }
  CMatrix k(n, n);
  for (int i = 0; i < n; ++i) {
    for (int a = 0; a < n; ++a) k(a, i) = v(i * n + a);
  }
  return k;
}

CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

CMatrix partial_trace_env(const CMatrix& m, int n, int d) {
  if (n <= 0 || d <= 0 || m.rows() != m.cols() || m.rows() != static_cast<Eigen::Index>(n) * d) {
    throw DimensionError(
        fmt::format("partial_trace_env: {}x{} matrix is not (n*d)-square for n={}, d={}", m.rows(),
                    m.cols(), n, d));
  }
  CMatrix out = CMatrix::Zero(n, n);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      cplx acc = 0.0;
      for (int k = 0; k < d; ++k) acc += m(a * d + k, b * d + k);
      out(a, b) = acc;
    }
  }
  return out;
}

void fix_phase(Eigen::Ref<CVector> v) {
  if (v.size() == 0) return;
  const double max_abs = v.cwiseAbs().maxCoeff();
  if (max_abs == 0.0) return;
  Eigen::Index pivot = 0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) >= max_abs * (1.0 - 1e-8)) {
      pivot = i;
      break;
    }
  }
  const cplx phase = std::conj(v(pivot)) / std::abs(v(pivot));
  v *= phase;
  v(pivot) = cplx(v(pivot).real(), 0.0);
}

HermEig herm_eig(const CMatrix& a) {
  if (a.rows() != a.cols()) {
    throw DimensionError(fmt::format("herm_eig: expected square matrix, got {}x{}", a.rows(), a.cols()));
  }
  const double asym = (a - a.adjoint()).norm();
  if (asym > 1e-10 * (1.0 + a.norm())) {
    throw ValidationError(fmt::format("herm_eig: matrix is not Hermitian (||A - A^H||_F = {:.3e})", asym));
  }
  const CMatrix h = 0.5 * (a + a.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(h);
  if (solver.info() != Eigen::Success) throw NumericalError("herm_eig: eigensolver did not converge");

  const auto n = a.rows();
  HermEig out;
  out.eigenvalues = solver.eigenvalues().reverse();
  out.eigenvectors = solver.eigenvectors().rowwise().reverse();
  for (Eigen::Index j = 0; j < n; ++j) fix_phase(out.eigenvectors.col(j));
  return out;
}

RVector herm_eigenvalues(const CMatrix& a) {
  const CMatrix h = 0.5 * (a + a.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(h, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().reverse();
}

CMatrix expm(const CMatrix& a) {
  if (a.rows() != a.cols()) {
    throw DimensionError(fmt::format("expm: expected square matrix, got {}x{}", a.rows(), a.cols()));
  }
  const auto n = a.rows();
  const CMatrix ident = CMatrix::Identity(n, n);
  if (!a.allFinite()) throw ValidationError("expm: non-finite input");

  static constexpr std::array<double, 4> b3{120., 60., 12., 1.};
  static constexpr std::array<double, 6> b5{30240., 15120., 3360., 420., 30., 1.};
  static constexpr std::array<double, 8> b7{17297280., 8648640., 1995840., 277200.,
                                            25200.,    1512.,    56.,      1.};
  static constexpr std::array<double, 10> b9{17643225600., 8821612800., 2075673600., 302702400., 30270240.,
                                             2162160.,     110880.,     3960.,       90.,        1.};
  static constexpr std::array<double, 14> b13{
      64764752532480000., 32382376266240000., 7771770303897600., 1187353796428800., 129060195264000.,
      10559470521600.,    670442572800.,      33522128640.,      1323241920.,      40840800.,
      960960.,            16380.,             182.,              1.};
  static constexpr std::array<double, 4> theta{1.495585217958292e-2, 2.539398330063230e-1,
                                               9.504178996162932e-1, 2.097847961257068e0};
  static constexpr double theta13 = 5.371920351148152;

  const double norm1 = one_norm(a);

  auto solve = [&](const CMatrix& u, const CMatrix& v) -> CMatrix {
    return (v - u).partialPivLu().solve(v + u);
  };

  auto low_degree = [&](const auto& b) -> CMatrix {
    const CMatrix a2 = a * a;
    CMatrix power = ident;
    CMatrix u_even = CMatrix::Zero(n, n);
    CMatrix v = CMatrix::Zero(n, n);
    for (std::size_t k = 0; 2 * k < b.size(); ++k) {
      v += b[2 * k] * power;
      if (2 * k + 1 < b.size()) u_even += b[2 * k + 1] * power;
      power = power * a2;
    }
    return solve(a * u_even, v);
  };

  if (norm1 <= theta[0]) return low_degree(b3);
  if (norm1 <= theta[1]) return low_degree(b5);
  if (norm1 <= theta[2]) return low_degree(b7);
  if (norm1 <= theta[3]) return low_degree(b9);

  int squarings = std::max(0, static_cast<int>(std::ceil(std::log2(norm1 / theta13))));
  const CMatrix as = a / std::ldexp(1.0, squarings);
  const CMatrix a2 = as * as;
  const CMatrix a4 = a2 * a2;
  const CMatrix a6 = a4 * a2;
  const CMatrix u =
      as * (a6 * (b13[13] * a6 + b13[11] * a4 + b13[9] * a2) + b13[7] * a6 + b13[5] * a4 + b13[3] * a2 +
            b13[1] * ident);
  const CMatrix v = a6 * (b13[12] * a6 + b13[10] * a4 + b13[8] * a2) + b13[6] * a6 + b13[4] * a4 +
                    b13[2] * a2 + b13[0] * ident;
  CMatrix r = solve(u, v);
  for (int s = 0; s < squarings; ++s) r = r * r;
  return r;
}

CMatrix complete_isometry(const CMatrix& v) {
  const auto m = v.rows();
  const auto k = v.cols();
  if (k > m) throw DimensionError(fmt::format("complete_isometry: {}x{} has more columns than rows", m, k));
  const double resid = (v.adjoint() * v - CMatrix::Identity(k, k)).norm();
  if (resid > 1e-10) {
    throw ValidationError(fmt::format("complete_isometry: input is not an isometry (||V^H V - I||_F = {:.3e})", resid));
  }

  CMatrix u(m, m);
  u.leftCols(k) = v;
  // Residuals of every canonical basis vector against the current basis.
  CMatrix cand = CMatrix::Identity(m, m) - v * v.adjoint();
  std::vector<bool> used(static_cast<std::size_t>(m), false);
  for (Eigen::Index col = k; col < m; ++col) {
    Eigen::Index best = -1;
    double best_norm = -1.0;
    for (Eigen::Index j = 0; j < m; ++j) {
      if (used[static_cast<std::size_t>(j)]) continue;
      const double nj = cand.col(j).norm();
      if (nj > best_norm * (1.0 + 1e-12)) {
        best_norm = nj;
        best = j;
      }
    }
    if (best < 0 || best_norm < 1e-8) throw NumericalError("complete_isometry: complement basis collapsed");
    used[static_cast<std::size_t>(best)] = true;

    CVector q = cand.col(best);
    // Re-orthogonalize against everything accumulated so far (CGS2).
    for (int pass = 0; pass < 2; ++pass) q -= u.leftCols(col) * (u.leftCols(col).adjoint() * q);
    q.normalize();
    fix_phase(q);
    u.col(col) = q;
    cand -= q * (q.adjoint() * cand);
  }
  return u;
}

CMatrix polar_unitary(const CMatrix& a) {
  Eigen::JacobiSVD<CMatrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return svd.matrixU() * svd.matrixV().adjoint();
}

CMatrix realign_complement(const CMatrix& u_prev, const CMatrix& v_new, double rank_tol) {
  const auto m = u_prev.rows();
  const auto k = v_new.cols();
  if (u_prev.cols() != m || v_new.rows() != m || k > m) {
    throw DimensionError(fmt::format("realign_complement: shapes {}x{} and {}x{} are incompatible",
                                     u_prev.rows(), u_prev.cols(), v_new.rows(), v_new.cols()));
  }
  CMatrix u(m, m);
  u.leftCols(k) = v_new;
  if (k == m) return u;

  CMatrix c = u_prev.rightCols(m - k);
  c -= v_new * (v_new.adjoint() * c);
  Eigen::JacobiSVD<CMatrix> svd(c, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const double smin = svd.singularValues().minCoeff();
  if (smin < rank_tol) {
    throw NumericalError(
        fmt::format("realign_complement: projected complement is rank deficient (sigma_min = {:.3e}); refine the grid",
                    smin));
  }
  CMatrix q = svd.matrixU() * svd.matrixV().adjoint();
  u.rightCols(m - k) = q;
  return u;
}

Norms norms(const CMatrix& a) {
  Norms out;
  out.frobenius = a.norm();
  if (a.size() == 0) return out;
  Eigen::JacobiSVD<CMatrix> svd(a);
  const auto& s = svd.singularValues();
  out.op = s.size() > 0 ? s(0) : 0.0;
  out.trace = s.sum();
  return out;
}

double hermitian_trace_norm(const CMatrix& a) {
  return herm_eigenvalues(a).cwiseAbs().sum();
}

double unitarity_residual(const CMatrix& u) {
  return (u.adjoint() * u - CMatrix::Identity(u.cols(), u.cols())).norm();
}

CMatrix matrix_unit(int n, int row, int col) {
  CMatrix e = CMatrix::Zero(n, n);
  e(row, col) = 1.0;
  return e;
}

CMatrix swap_operator(int n, int d) {
  CMatrix s = CMatrix::Zero(n * d, n * d);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < d; ++b) s(b * n + a, a * d + b) = 1.0;
  return s;
}

namespace pauli {
CMatrix x() {
  CMatrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}
CMatrix y() {
  CMatrix m(2, 2);
  m << 0, -kI, kI, 0;
  return m;
}
CMatrix z() {
  CMatrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}
}  // namespace pauli

}  // namespace dlab
