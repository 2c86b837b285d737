#include "dlab/channels.hpp"

#include <cmath>

#include <fmt/format.h>

namespace dlab {

namespace {

int sqrt_dim(Eigen::Index side, const char* what) {
  const auto n = static_cast<int>(std::lround(std::sqrt(static_cast<double>(side))));
  if (static_cast<Eigen::Index>(n) * n != side || n <= 0) {
    throw DimensionError(fmt::format("{}: side {} is not n^2", what, side));
  }
  return n;
}

CMatrix kraus_superop(const KrausSet& k) {
  const int n = k.dim;
  CMatrix s = CMatrix::Zero(n * n, n * n);
  for (const auto& op : k.operators) s += kron(op.conjugate(), op);
  return s;
}

void check_square(const CMatrix& m, int n, const char* what) {
  if (m.rows() != n || m.cols() != n) {
    throw DimensionError(fmt::format("{}: expected {}x{}, got {}x{}", what, n, n, m.rows(), m.cols()));
  }
}

}  // namespace

double KrausSet::completeness_residual() const {
  CMatrix acc = CMatrix::Zero(dim, dim);
  for (const auto& op : operators) acc += op.adjoint() * op;
  return (acc - CMatrix::Identity(dim, dim)).norm();
}

const char* to_string(RepKind kind) {
  switch (kind) {
    case RepKind::superop: return "superop";
    case RepKind::choi: return "choi";
    case RepKind::kraus: return "kraus";
    case RepKind::unitary: return "unitary";
  }
  return "?";
}

CMatrix superop_to_choi(const CMatrix& s) {
  const int n = sqrt_dim(s.rows(), "superop_to_choi");
  check_square(s, n * n, "superop_to_choi");
  // J[(i,a),(j,b)] = Phi(E_ij)[a,b] = S[b*n + a, j*n + i]
  CMatrix j(n * n, n * n);
  for (int i = 0; i < n; ++i)
    for (int a = 0; a < n; ++a)
      for (int jj = 0; jj < n; ++jj)
        for (int b = 0; b < n; ++b) j(i * n + a, jj * n + b) = s(b * n + a, jj * n + i);
  return j;
}

CMatrix choi_to_superop(const CMatrix& j) {
  const int n = sqrt_dim(j.rows(), "choi_to_superop");
  check_square(j, n * n, "choi_to_superop");
  CMatrix s(n * n, n * n);
  for (int i = 0; i < n; ++i)
    for (int a = 0; a < n; ++a)
      for (int jj = 0; jj < n; ++jj)
        for (int b = 0; b < n; ++b) s(b * n + a, jj * n + i) = j(i * n + a, jj * n + b);
  return s;
}

ChannelRep::ChannelRep(Form form, int dim, CMatrix superop)
    : form_(std::move(form)), dim_(dim), superop_(std::move(superop)), choi_(superop_to_choi(superop_)) {
  if (!superop_.allFinite()) throw ValidationError("ChannelRep: non-finite entries");
}

ChannelRep ChannelRep::from_superop(CMatrix s) {
  const int n = sqrt_dim(s.rows(), "ChannelRep::from_superop");
  check_square(s, n * n, "ChannelRep::from_superop");
  CMatrix copy = s;
  return ChannelRep(Superoperator{std::move(s)}, n, std::move(copy));
}

ChannelRep ChannelRep::from_choi(ChoiMatrix j) {
  const int n = sqrt_dim(j.matrix.rows(), "ChannelRep::from_choi");
  if (j.dim != n) throw DimensionError(fmt::format("ChannelRep::from_choi: dim {} vs side {}", j.dim, j.matrix.rows()));
  check_square(j.matrix, n * n, "ChannelRep::from_choi");
  CMatrix s = choi_to_superop(j.matrix);
  return ChannelRep(std::move(j), n, std::move(s));
}

ChannelRep ChannelRep::from_kraus(KrausSet k) {
  if (k.operators.empty()) throw ValidationError("ChannelRep::from_kraus: empty Kraus set");
  for (const auto& op : k.operators) check_square(op, k.dim, "ChannelRep::from_kraus");
  CMatrix s = kraus_superop(k);
  const int n = k.dim;
  return ChannelRep(std::move(k), n, std::move(s));
}

ChannelRep ChannelRep::from_unitary(CMatrix u) {
  if (u.rows() != u.cols() || u.rows() == 0) {
    throw DimensionError(fmt::format("ChannelRep::from_unitary: {}x{} is not square", u.rows(), u.cols()));
  }
  CMatrix s = kron(u.conjugate(), u);
  const auto n = static_cast<int>(u.rows());
  return ChannelRep(UnitaryConjugation{std::move(u)}, n, std::move(s));
}

ChannelRep ChannelRep::identity(int n) {
  return from_unitary(CMatrix::Identity(n, n));
}

RepKind ChannelRep::kind() const {
  return static_cast<RepKind>(form_.index());
}

KrausSet ChannelRep::kraus(double rank_tol) const {
  if (const auto* k = std::get_if<KrausSet>(&form_)) return *k;
  if (const auto* u = std::get_if<UnitaryConjugation>(&form_)) return KrausSet{dim_, {u->matrix}};
  return choi_to_kraus(ChoiMatrix{dim_, choi_}, rank_tol);
}

CMatrix apply(const ChannelRep& rep, const CMatrix& rho) {
  check_square(rho, rep.dim(), "apply");
  if (const auto* u = std::get_if<UnitaryConjugation>(&rep.form())) {
    return u->matrix * rho * u->matrix.adjoint();
  }
  if (const auto* k = std::get_if<KrausSet>(&rep.form())) {
    CMatrix out = CMatrix::Zero(rho.rows(), rho.cols());
    for (const auto& op : k->operators) out += op * rho * op.adjoint();
    return out;
  }
  return unvec(rep.superop() * vec(rho));
}

ChoiMatrix choi_of(const ChannelRep& rep) {
  return ChoiMatrix{rep.dim(), rep.choi_matrix()};
}

KrausSet choi_to_kraus(const ChoiMatrix& j, double rank_tol) {
  const HermEig eig = herm_eig(j.matrix);
  const double lmax = eig.eigenvalues(0);
  const double lmin = eig.eigenvalues(eig.eigenvalues.size() - 1);
  if (lmin < -kCpTol) {
    throw NumericalError(fmt::format("choi_to_kraus: Choi matrix has eigenvalue {:.3e} (map is not CP)", lmin));
  }
  KrausSet out{j.dim, {}};
  for (Eigen::Index i = 0; i < eig.eigenvalues.size(); ++i) {
    const double lam = eig.eigenvalues(i);
    if (lam <= rank_tol * lmax) break;
    out.operators.push_back(unvec(std::sqrt(lam) * eig.eigenvectors.col(i)));
  }
  if (out.operators.empty()) out.operators.push_back(CMatrix::Zero(j.dim, j.dim));
  return out;
}

ChoiMatrix kraus_to_choi(const KrausSet& k) {
  if (k.operators.empty()) throw ValidationError("kraus_to_choi: empty Kraus set");
  const double resid = k.completeness_residual();
  if (resid > kCompletenessTol) {
    throw ValidationError(fmt::format("kraus_to_choi: completeness relation violated (residual {:.3e})", resid));
  }
  const int n = k.dim;
  CMatrix j = CMatrix::Zero(n * n, n * n);
  for (const auto& op : k.operators) {
    const CVector v = vec(op);
    j += v * v.adjoint();
  }
  return ChoiMatrix{n, std::move(j)};
}

CptpReport is_cptp(const ChannelRep& rep) {
  const int n = rep.dim();
  const CMatrix& j = rep.choi_matrix();
  CptpReport r;
  const RVector ev = herm_eigenvalues(j);
  r.min_choi_eig = ev(ev.size() - 1);
  // Hermiticity is part of complete positivity.
  const double asym = (j - j.adjoint()).norm();
  r.cp_ok = r.min_choi_eig >= -kCpTol && asym <= kCpTol;
  r.tp_residual = (partial_trace_env(j, n, n) - CMatrix::Identity(n, n)).norm();
  r.tp_ok = r.tp_residual <= kTpTol;
  return r;
}

ChannelRep compose(const ChannelRep& a, const ChannelRep& b) {
  if (a.dim() != b.dim()) throw DimensionError(fmt::format("compose: dimensions {} and {}", a.dim(), b.dim()));
  return ChannelRep::from_superop(a.superop() * b.superop());
}

ChannelDistance channel_distance(const ChannelRep& a, const ChannelRep& b) {
  if (a.dim() != b.dim()) {
    throw DimensionError(fmt::format("channel_distance: dimensions {} and {}", a.dim(), b.dim()));
  }
  ChannelDistance d;
  d.choi_trace_dist = hermitian_trace_norm(a.choi_matrix() - b.choi_matrix());
  d.diamond_upper = d.choi_trace_dist;
  d.diamond_lower = d.choi_trace_dist / a.dim();
  return d;
}

CMatrix project_cptp(const CMatrix& j, int n) {
  const HermEig eig = herm_eig(j);
  const RVector clipped = eig.eigenvalues.cwiseMax(0.0);
  const CMatrix psd = eig.eigenvectors * clipped.cast<cplx>().asDiagonal() * eig.eigenvectors.adjoint();
  const CMatrix x = partial_trace_env(psd, n, n);
  const HermEig xe = herm_eig(x);
  if (xe.eigenvalues.minCoeff() <= 0.0) throw NumericalError("project_cptp: partial trace is singular");
  const RVector inv_sqrt = xe.eigenvalues.cwiseSqrt().cwiseInverse();
  const CMatrix x_is = xe.eigenvectors * inv_sqrt.cast<cplx>().asDiagonal() * xe.eigenvectors.adjoint();
  const CMatrix a = kron(x_is, CMatrix::Identity(n, n));
  CMatrix out = a * psd * a.adjoint();
  return 0.5 * (out + out.adjoint());
}

}  // namespace dlab
