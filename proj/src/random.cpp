#include "dlab/random.hpp"

namespace dlab {

CMatrix random_gaussian(int rows, int cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  CMatrix g(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) {
      const double re = normal(rng);
      const double im = normal(rng);
      g(i, j) = cplx(re, im);
    }
  return g;
}

CMatrix random_hermitian(int n, Rng& rng) {
  const CMatrix g = random_gaussian(n, n, rng);
  return 0.5 * (g + g.adjoint());
}

CMatrix random_density(int n, Rng& rng) {
  const CMatrix g = random_gaussian(n, n, rng);
  CMatrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  return 0.5 * (rho + rho.adjoint());
}

CMatrix random_unitary(int n, Rng& rng) {
  const CMatrix g = random_gaussian(n, n, rng);
  Eigen::HouseholderQR<CMatrix> qr(g);
  CMatrix q = qr.householderQ() * CMatrix::Identity(n, n);
  const CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < n; ++j) {
    const cplx d = r(j, j);
    if (std::abs(d) > 0.0) q.col(j) *= d / std::abs(d);
  }
  return q;
}

KrausSet random_kraus(int n, int count, Rng& rng) {
  const CMatrix stacked = random_gaussian(n * count, n, rng);
  Eigen::HouseholderQR<CMatrix> qr(stacked);
  const CMatrix q = qr.householderQ() * CMatrix::Identity(n * count, n);
  KrausSet k{n, {}};
  for (int i = 0; i < count; ++i) k.operators.push_back(q.block(i * n, 0, n, n));
  return k;
}

ChannelRep random_cptp(int n, Rng& rng) {
  return ChannelRep::from_kraus(random_kraus(n, n * n, rng));
}

LindbladGenerator random_lindblad(int n, int jumps, Rng& rng) {
  LindbladGenerator gen;
  gen.dim = n;
  gen.hamiltonian = random_hermitian(n, rng);
  for (int j = 0; j < jumps; ++j) gen.jumps.push_back(0.5 * random_gaussian(n, n, rng));
  return gen;
}

}  // namespace dlab
