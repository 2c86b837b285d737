// Acceptance suite: one PASS/FAIL line per criterion.

#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "dlab/approx.hpp"
#include "dlab/cli.hpp"
#include "dlab/diagnostics.hpp"
#include "dlab/random.hpp"

using namespace dlab;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

double phase_distance(const CMatrix& a, const CMatrix& b) {
  const cplx overlap = (b.adjoint() * a).trace();
  const cplx phase = std::abs(overlap) > 0.0 ? overlap / std::abs(overlap) : cplx(1.0);
  return (a - phase * b).norm();
}

Outcome dephasing_golden_chain() {
  const double tol = 1e-10;
  const ChannelRep phi = channel_at(CurveSource::builtin(BuiltinKind::dephasing, 1.0), std::numbers::ln2);
  const CMatrix j = choi_of(phi).matrix;

  const RVector ev = herm_eig(j).eigenvalues;
  RVector ev_ref(4);
  ev_ref << 1.5, 0.5, 0.0, 0.0;
  const double d_eig = (ev - ev_ref).cwiseAbs().maxCoeff();

  const KrausSet k = choi_to_kraus(ChoiMatrix{2, j});
  double d_kraus = k.operators.size() == 2 ? 0.0 : 1.0;
  if (k.operators.size() == 2) {
    d_kraus = std::max(phase_distance(k.operators[0], std::sqrt(0.75) * CMatrix::Identity(2, 2)),
                       phase_distance(k.operators[1], 0.5 * pauli::z()));
  }

  const StinespringDilation dil = static_dilation(phi, 2, 0);
  const CMatrix v = dilation_isometry(dil);
  // Row a*d + i of the isometry holds row a of K_i.
  const double alpha = v(0, 0).real();
  const double beta = v(1, 0).real();
  const double d_ab = std::max(std::abs(alpha - std::sqrt(0.75)), std::abs(beta - 0.5));

  CMatrix plus = CMatrix::Constant(2, 2, 0.5);
  const double factor = (reduced_action(dil, plus)(0, 1) / plus(0, 1)).real();
  const double d_factor = std::abs(factor - 0.5);

  const double worst = std::max({d_eig, d_kraus, d_ab, d_factor});
  return {worst <= tol, fmt::format("eig {:.1e}, kraus {:.1e}, alpha/beta {:.1e}, off-diagonal {:.1e} (tol 1e-10)",
                                    d_eig, d_kraus, d_ab, d_factor)};
}

Outcome static_dilation_identity() {
  Rng rng(2024);
  double worst = 0.0;
  for (int n : {2, 3})
    for (int i = 0; i < 50; ++i) {
      const ChannelRep rep = random_cptp(n, rng);
      worst = std::max(worst, verify_dilation(static_dilation(rep), rep).max_residual);
    }
  return {worst <= 1e-9, fmt::format("100 channels, max matrix-unit residual {:.2e} (tol 1e-9)", worst)};
}

Outcome choi_kraus_round_trip() {
  Rng rng(2025);
  double worst = 0.0;
  int rank_mismatch = 0;
  for (int i = 0; i < 100; ++i) {
    const int n = 2 + i % 2;
    const int count = 1 + i % (n * n);  // generic Choi rank equals the number of random operators
    const ChannelRep rep = ChannelRep::from_kraus(random_kraus(n, count, rng));
    const ChoiMatrix j = choi_of(rep);
    const KrausSet k = choi_to_kraus(j);
    worst = std::max(worst, (kraus_to_choi(k).matrix - j.matrix).norm());
    if (static_cast<int>(k.operators.size()) != count) ++rank_mismatch;
  }
  return {worst <= 1e-9 && rank_mismatch == 0,
          fmt::format("max Choi residual {:.2e} (tol 1e-9), rank mismatches {}", worst, rank_mismatch)};
}

Outcome semigroup_law() {
  Rng rng(2026);
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const CurveSource src = CurveSource::semigroup(random_lindblad(2, 2, rng));
    const CMatrix lhs = channel_at(src, 0.8).superop();
    const CMatrix rhs = channel_at(src, 0.1).superop() * channel_at(src, 0.7).superop();
    worst = std::max(worst, (lhs - rhs).norm());
  }
  return {worst <= 1e-9, fmt::format("20 generators, max ||S(t+s) - S(t)S(s)||_F {:.2e} (tol 1e-9)", worst)};
}

Outcome exact_dilation_curve_grid() {
  const CurveSource src = CurveSource::builtin(BuiltinKind::dephasing, 1.0);
  const ExactDilation coarse = exact_dilation_curve(src, TimeGrid::uniform(0.1, 2.0, 40));
  const ExactDilation fine = exact_dilation_curve(src, TimeGrid::uniform(0.1, 2.0, 79));
  double worst = 0.0;
  for (double r : coarse.report.verify_residuals) worst = std::max(worst, r);
  const double ratio = coarse.report.max_unitary_jump / fine.report.max_unitary_jump;
  const bool pass = worst <= 1e-9 && coarse.report.verify_residuals.size() == 40 && ratio >= 1.6 && ratio <= 2.4;
  return {pass, fmt::format("max residual {:.2e} (tol 1e-9), jump ratio {:.3f} for halved spacing (want 2 +- 20%)",
                            worst, ratio)};
}

Outcome singularity_exponent() {
  const SingularityReport dis =
      singularity_scan(CurveSource::builtin(BuiltinKind::dephasing, 1.0), 1e-6, 1e-3, 8);
  const LindbladGenerator closed{2, pauli::x(), {}};
  const SingularityReport ctl = singularity_scan(CurveSource::semigroup(closed), 1e-6, 1e-3, 8);
  const bool pass = dis.fitted_exponent >= -0.55 && dis.fitted_exponent <= -0.45 && dis.fit_residual <= 0.05 &&
                    std::abs(ctl.fitted_exponent) <= 0.1;
  return {pass, fmt::format("dephasing exponent {:.4f} (residual {:.2e}), closed control {:.4f}",
                            dis.fitted_exponent, dis.fit_residual, ctl.fitted_exponent)};
}

Outcome approximate_certificate() {
  const CurveSource src = CurveSource::builtin(BuiltinKind::dephasing, 1.0);
  bool pass = true;
  std::string detail;
  for (double eps : {0.05, 0.02}) {
    const ApproxDilation apx = approx_dilation(src, 2.0, eps);
    const double u0 = (apx.unitary_at(0.0) - CMatrix::Identity(16, 16)).norm();
    const double measured = apx.verification.measured_sup_error;
    pass = pass && measured < eps && apx.ancilla_dim == 8 && u0 <= 1e-12 &&
           apx.verification.times.size() == 10 * apx.segments.size() + 1;
    detail += fmt::format("eps {}: measured {:.4f}, d={}, ||U(0)-I|| {:.1e}; ", eps, measured, apx.ancilla_dim, u0);
  }
  ApproxOptions a;
  a.mesh = 0.1;
  ApproxOptions b;
  b.mesh = 0.05;
  const double ratio = approx_dilation(src, 2.0, 1.0, a).verification.measured_sup_error /
                       approx_dilation(src, 2.0, 1.0, b).verification.measured_sup_error;
  pass = pass && ratio >= 1.5 && ratio <= 2.5;
  detail += fmt::format("error ratio for halved mesh {:.3f} (want 2 +- 25%)", ratio);
  return {pass, detail};
}

Outcome cross_term_cancellation() {
  Rng rng(2027);
  ApproxOptions opts;
  opts.mesh = 1.0;
  opts.verify = false;
  double worst = 0.0;
  for (int pair = 0; pair < 20; ++pair) {
    const ChannelRep a = random_cptp(2, rng);
    const ChannelRep b = random_cptp(2, rng);
    const ApproxDilation apx = approx_dilation(CurveSource::table(ChannelTable{{0.0, 1.0}, {a, b}}), 1.0, 1.0, opts);
    for (double s : {0.25, 0.5, 0.75}) {
      const double c2 = std::pow(std::cos(std::numbers::pi * s / 2), 2);
      const CMatrix expected = c2 * a.choi_matrix() + (1 - c2) * b.choi_matrix();
      worst = std::max(worst, (reduced_channel(evaluate(apx, s)).choi_matrix() - expected).norm());
    }
  }
  return {worst <= 1e-9, fmt::format("20 pairs x 3 parameters, max Choi residual {:.2e} (tol 1e-9)", worst)};
}

Outcome hamiltonian_extraction() {
  auto error_for = [](int points) {
    UnitaryCurve c;
    c.grid = TimeGrid::uniform(0.0, 1.0, points);
    c.system_dim = 2;
    c.ancilla_dim = 1;
    for (double t : c.grid.points) c.unitaries.push_back(expm(-kI * t * pauli::z()));
    double e = 0.0;
    for (const auto& h : hamiltonian_extract(c)) e = std::max(e, (h.hamiltonian - pauli::z()).norm());
    return e;
  };
  const double e1 = error_for(21);
  const double e2 = error_for(41);
  const double e3 = error_for(81);
  const double r1 = e1 / e2;
  const double r2 = e2 / e3;
  const bool pass = r1 >= 3.5 && r1 <= 4.5 && r2 >= 3.5 && r2 <= 4.5;
  return {pass, fmt::format("errors {:.2e}, {:.2e}, {:.2e}; ratios {:.3f}, {:.3f}", e1, e2, e3, r1, r2)};
}

Outcome demo_determinism() {
  namespace fs = std::filesystem;
  const fs::path root = fs::current_path() / "acceptance_determinism";
  fs::remove_all(root);
  std::vector<std::string> files;
  int codes = 0;
  for (const char* run : {"a", "b"}) {
    const std::string out = (root / run).string();
    std::vector<std::string> args{"dilation_lab", "dephasing-demo", "--seed", "12345", "--out", out};
    std::vector<char*> argv;
    for (auto& s : args) argv.push_back(s.data());
    std::ostringstream sink;
    codes += cli::main_entry(static_cast<int>(argv.size()), argv.data(), sink, sink);
    files.push_back(read_file(root / run / "dephasing_demo.json"));
  }
  const bool same = files[0] == files[1];
  return {codes == 0 && same, fmt::format("exit codes sum {}, artifacts byte-identical: {}", codes, same)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"dephasing golden chain", dephasing_golden_chain},
      {"static Stinespring identity", static_dilation_identity},
      {"Choi/Kraus round trip", choi_kraus_round_trip},
      {"semigroup law", semigroup_law},
      {"exact dilation curve", exact_dilation_curve_grid},
      {"singularity exponent", singularity_exponent},
      {"approximate dilation certificate", approximate_certificate},
      {"cross-term cancellation", cross_term_cancellation},
      {"Hamiltonian extraction accuracy", hamiltonian_extraction},
      {"demo determinism", demo_determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, fmt::format("exception: {}", e.what())};
    }
    if (!o.pass) ++failures;
    std::cout << fmt::format("criterion {:>2} {}: {} | {}", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first,
                             o.detail)
              << std::endl;
  }
  std::cout << fmt::format("{} of {} criteria passed", criteria.size() - failures, criteria.size()) << std::endl;
  return failures == 0 ? 0 : 1;
}
