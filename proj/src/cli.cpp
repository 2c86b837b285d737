#include "dlab/cli.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "CLI11.hpp"

#include "dlab/random.hpp"

namespace dlab::cli {

namespace {

constexpr double kDemoTol = 1e-10;

// ---------------------------------------------------------------- config

template <typename T>
T typed(const Json& j, const std::string& key) {
  try {
    return j.get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(fmt::format("config key '{}' has the wrong type", key));
  }
}

double number(const Json& j, const std::string& key) {
  if (!j.is_number()) throw ConfigError(fmt::format("config key '{}' must be a number", key));
  return j.get<double>();
}

int integer(const Json& j, const std::string& key) {
  if (!j.is_number_integer()) throw ConfigError(fmt::format("config key '{}' must be an integer", key));
  return typed<int>(j, key);
}

// ---------------------------------------------------------------- output

std::string format_entry(cplx z) {
  if (std::abs(z.imag()) < 5e-13) return fmt::format("{:>10.6f}", z.real());
  return fmt::format("{:>10.6f}{:+.6f}i", z.real(), z.imag());
}

void print_matrix(std::ostream& out, const std::string& name, const CMatrix& m) {
  fmt::print(out, "  {} =\n", name);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    out << "    [";
    for (Eigen::Index c = 0; c < m.cols(); ++c) out << (c ? " " : "") << format_entry(m(r, c));
    out << " ]\n";
  }
}

void write_json(const std::filesystem::path& dir, const std::string& name, const Json& j) {
  write_file_atomic(dir / name, dump_json(j));
}

Json tolerance_block(double tol, const std::string& norm) {
  Json j;
  j["tol"] = tol;
  j["norm"] = norm;
  return j;
}

// ---------------------------------------------------------------- inputs

CurveSource source_of(const JobConfig& c) {
  if (!c.source) {
    return CurveSource::builtin(BuiltinKind::dephasing, c.gamma.value_or(1.0));
  }
  CurveSource src = decode_source(*c.source);
  if (c.gamma) {
    auto* b = std::get_if<BuiltinFamily>(&src.source);
    if (!b) throw ConfigError("--gamma only applies to builtin sources");
    b->gamma = *c.gamma;
  }
  return src;
}

ChannelRep channel_of(const JobConfig& c) {
  if (c.channel) return decode_channel(*c.channel);
  return channel_at(source_of(c), c.time.value_or(std::numbers::ln2));
}

TimeGrid grid_of(const JobConfig& c, const std::string& fallback) {
  return TimeGrid::parse(c.grid.value_or(fallback));
}

ChannelRep convert_to(const ChannelRep& rep, RepKind kind) {
  switch (kind) {
    case RepKind::superop:
      return ChannelRep::from_superop(rep.superop());
    case RepKind::choi:
      return ChannelRep::from_choi(choi_of(rep));
    case RepKind::kraus:
      return ChannelRep::from_kraus(rep.kraus());
    case RepKind::unitary: {
      const KrausSet k = rep.kraus();
      if (k.operators.size() != 1) {
        throw ValidationError(
            fmt::format("convert: channel has Kraus rank {} and is not a unitary conjugation", k.operators.size()));
      }
      return ChannelRep::from_unitary(k.operators.front());
    }
  }
  throw ConfigError("convert: unknown target");
}

RepKind kind_from_string(const std::string& s) {
  for (RepKind k : {RepKind::superop, RepKind::choi, RepKind::kraus, RepKind::unitary})
    if (s == to_string(k)) return k;
  throw ConfigError(fmt::format("unknown representation '{}' (superop, choi, kraus, unitary)", s));
}

// ---------------------------------------------------------------- commands

int cmd_convert(const JobConfig& c, std::ostream& out) {
  const ChannelRep input = channel_of(c);
  const RepKind target = kind_from_string(c.target);
  const ChannelRep converted = convert_to(input, target);
  const ChannelRep back = convert_to(converted, input.kind());
  const double forward = (converted.choi_matrix() - input.choi_matrix()).norm();
  const double roundtrip = (back.choi_matrix() - input.choi_matrix()).norm();

  Json j;
  j["input_kind"] = to_string(input.kind());
  j["target"] = to_string(target);
  j["forward_residual"] = forward;
  j["roundtrip_residual"] = roundtrip;
  j["tolerance"] = tolerance_block(c.tol, "Choi Frobenius");
  j["converted"] = encode_channel(converted);
  j["roundtrip"] = encode_channel(back);
  write_json(c.out_dir, "convert.json", j);

  fmt::print(out, "convert {} -> {} -> {}: forward residual {:.3e}, round-trip residual {:.3e} (tol {:.1e}, Choi Frobenius)\n",
             to_string(input.kind()), to_string(target), to_string(input.kind()), forward, roundtrip, c.tol);
  return std::max(forward, roundtrip) <= c.tol ? kOk : kNumericalFailure;
}

int cmd_verify(const JobConfig& c, std::ostream& out) {
  const ChannelRep rep = channel_of(c);
  const CptpReport cptp = is_cptp(rep);
  Json j;
  Json jc;
  jc["cp_ok"] = cptp.cp_ok;
  jc["tp_ok"] = cptp.tp_ok;
  jc["min_choi_eig"] = cptp.min_choi_eig;
  jc["tp_residual"] = cptp.tp_residual;
  jc["cp_tol"] = kCpTol;
  jc["tp_tol"] = kTpTol;
  jc["norm"] = "smallest Choi eigenvalue; Frobenius norm of Tr_out J - I";
  j["cptp"] = std::move(jc);
  fmt::print(out, "cptp: cp_ok={} (min Choi eigenvalue {:.3e}), tp_ok={} (residual {:.3e})\n", cptp.cp_ok,
             cptp.min_choi_eig, cptp.tp_ok, cptp.tp_residual);

  int status = kOk;
  if (!cptp.cp_ok || !cptp.tp_ok) {
    j["dilation"] = nullptr;
    status = kNumericalFailure;
  } else {
    const StinespringDilation dil = static_dilation(rep, c.ancilla);
    const VerifyReport v = verify_dilation(dil, rep, c.trials, c.seed);
    Json jd;
    jd["ancilla_dim"] = dil.ancilla_dim;
    jd["checks"] = v.checks;
    jd["max_residual"] = v.max_residual;
    jd["unitarity_residual"] = v.unitarity_residual;
    jd["tolerance"] = tolerance_block(c.tol, "Frobenius (reduced action vs channel)");
    jd["unitary"] = encode_matrix(dil.unitary);
    j["dilation"] = std::move(jd);
    fmt::print(out, "dilation: d={}, {} checks, max residual {:.3e}, unitarity residual {:.3e} (tol {:.1e})\n",
               dil.ancilla_dim, v.checks, v.max_residual, v.unitarity_residual, c.tol);
    if (v.max_residual > c.tol || v.unitarity_residual > c.tol) status = kNumericalFailure;
  }
  write_json(c.out_dir, "verify.json", j);
  return status;
}

int cmd_evolve(const JobConfig& c, std::ostream& out) {
  const CurveSource src = source_of(c);
  const TimeGrid grid = grid_of(c, "0:2:21");
  const CurveSamples samples = sample_curve(src, grid);
  const int n = src.dim();

  std::vector<std::string> header{"time"};
  std::vector<std::vector<double>> cols(1);
  for (int r = 0; r < n * n; ++r)
    for (int q = 0; q < n * n; ++q) {
      header.push_back(fmt::format("choi_re_{}_{}", r, q));
      header.push_back(fmt::format("choi_im_{}_{}", r, q));
    }
  cols.resize(header.size());
  double min_eig = 0.0;
  for (const auto& [t, rep] : samples) {
    cols[0].push_back(t);
    std::size_t k = 1;
    for (int r = 0; r < n * n; ++r)
      for (int q = 0; q < n * n; ++q) {
        cols[k++].push_back(rep.choi_matrix()(r, q).real());
        cols[k++].push_back(rep.choi_matrix()(r, q).imag());
      }
    min_eig = std::min(min_eig, is_cptp(rep).min_choi_eig);
  }
  write_file_atomic(c.out_dir / "evolve.csv", csv_table(header, cols));

  Json j;
  j["source"] = encode_source(src);
  j["points"] = grid.size();
  j["lipschitz_estimate"] = lipschitz_estimate(samples);
  j["min_choi_eigenvalue"] = min_eig;
  j["norm"] = "Lipschitz estimate in the diamond upper surrogate";
  write_json(c.out_dir, "evolve.json", j);
  fmt::print(out, "evolve: {} samples written to evolve.csv\n", grid.size());
  return kOk;
}

int cmd_dilate_exact(const JobConfig& c, std::ostream& out) {
  const CurveSource src = source_of(c);
  const TimeGrid grid = grid_of(c, "0.1:2:40");
  ExactDilationOptions opts;
  opts.ancilla_dim = c.ancilla;
  opts.verify_tol = c.tol;
  opts.verify_trials = c.trials;
  opts.seed = c.seed;
  const ExactDilation ex = exact_dilation_curve(src, grid, opts);

  Json curve;
  curve["source"] = encode_source(src);
  curve["kraus_curve"] = encode_kraus_curve(ex.kraus);
  curve["unitary_curve"] = encode_unitary_curve(ex.unitaries);
  write_json(c.out_dir, "dilation_curve.json", curve);
  write_json(c.out_dir, "dilation_report.json", encode_dilation_report(ex.report));

  const auto& r = ex.report;
  fmt::print(out,
             "dilate-exact: {} points, d={}, max residual {:.3e} (tol {:.1e}), max unitary jump {:.3e}, "
             "verified={}, continuity={}\n",
             grid.size(), r.ancilla_dim, r.max_verify_residual, r.verify_tol, r.max_unitary_jump, r.all_verified,
             r.continuity_ok);
  for (const auto& w : r.warnings) fmt::print(out, "  warning: {}\n", w);
  return r.all_verified && r.continuity_ok ? kOk : kNumericalFailure;
}

int cmd_dilate_approx(const JobConfig& c, std::ostream& out) {
  const CurveSource src = source_of(c);
  double horizon = c.horizon.value_or(2.0);
  if (!c.horizon && c.grid) horizon = TimeGrid::parse(*c.grid).points.back();
  const ApproxDilation apx = approx_dilation(src, horizon, c.epsilon);

  Json j = encode_approx(apx);
  j["epsilon"] = c.epsilon;
  write_json(c.out_dir, "approx_dilation.json", j);
  const auto& v = apx.verification;
  write_file_atomic(c.out_dir / "approx_eval.csv",
                    csv_table({"time", "error_upper", "error_lower"}, {v.times, v.errors_upper, v.errors_lower}));

  fmt::print(out,
             "dilate-approx: T={}, epsilon={}, mesh={:.6g}, d={}, certified {:.6g}, measured sup {:.6g} "
             "(diamond upper surrogate; lower {:.6g})\n",
             horizon, c.epsilon, apx.mesh, apx.ancilla_dim, apx.certified_error, v.measured_sup_error,
             v.measured_sup_lower);
  for (const auto& w : apx.warnings) fmt::print(out, "  warning: {}\n", w);
  return v.measured_sup_error < c.epsilon ? kOk : kNumericalFailure;
}

int cmd_singularity(const JobConfig& c, std::ostream& out) {
  const CurveSource src = source_of(c);
  const TimeGrid grid = grid_of(c, "1e-6:1e-3:25:geom");
  const double t0 = grid.points.front();
  const double t1 = grid.points.back();
  const double decades = std::log10(t1 / t0);
  int ppd = c.points_per_decade;
  if (decades > 0.0) {
    ppd = std::max(ppd, static_cast<int>(std::ceil((static_cast<double>(grid.size()) - 1.0) / decades)));
  }
  SingularityOptions opts;
  opts.dilation.verify_tol = c.tol;
  opts.dilation.seed = c.seed;
  const SingularityReport r = singularity_scan(src, t0, t1, ppd, c.ancilla, opts);

  write_file_atomic(c.out_dir / "singularity.csv", csv_table({"time", "h_norm"}, {r.times, r.h_norms}));
  write_json(c.out_dir, "singularity.json", encode_singularity_report(r));
  fmt::print(out, "singularity: exponent {:.4f} (rms residual {:.3e}, {} fit points), {} flagged eigenvalue(s)\n",
             r.fitted_exponent, r.fit_residual, r.fit_points, r.flagged_eigenvalues.size());
  for (const auto& w : r.warnings) fmt::print(out, "  warning: {}\n", w);
  return kOk;
}

// ---------------------------------------------------------------- demo

struct Golden {
  CMatrix choi;
  RVector eigenvalues;
  CMatrix eigenvectors;  // leading two columns
  std::vector<CMatrix> kraus;
  CMatrix stacked_isometry;  // ancilla-major rows: [K1; K2]
  CMatrix stacked_unitary;   // ancilla-major ordering
  double alpha;
  double beta;
  double off_diagonal_factor;
};

// Dephasing with exp(-gamma t) = 1/2.
Golden golden() {
  Golden g;
  g.choi = CMatrix::Zero(4, 4);
  g.choi(0, 0) = 1.0;
  g.choi(3, 3) = 1.0;
  g.choi(0, 3) = 0.5;
  g.choi(3, 0) = 0.5;
  g.eigenvalues = RVector(4);
  g.eigenvalues << 1.5, 0.5, 0.0, 0.0;
  const double r = 1.0 / std::sqrt(2.0);
  g.eigenvectors = CMatrix::Zero(4, 2);
  g.eigenvectors(0, 0) = r;
  g.eigenvectors(3, 0) = r;
  g.eigenvectors(0, 1) = r;
  g.eigenvectors(3, 1) = -r;
  g.alpha = std::sqrt(0.75);
  g.beta = 0.5;
  g.kraus = {g.alpha * CMatrix::Identity(2, 2), g.beta * pauli::z()};
  g.stacked_isometry = CMatrix::Zero(4, 2);
  g.stacked_isometry.topRows(2) = g.kraus[0];
  g.stacked_isometry.bottomRows(2) = g.kraus[1];
  g.stacked_unitary = CMatrix(4, 4);
  g.stacked_unitary << g.alpha, 0, -g.beta, 0,  //
      0, g.alpha, 0, g.beta,                    //
      g.beta, 0, g.alpha, 0,                    //
      0, -g.beta, 0, g.alpha;
  g.off_diagonal_factor = 0.5;
  return g;
}

// Distance between a and the closest e^{i phi} b.
double phase_distance(const CMatrix& a, const CMatrix& b) {
  const cplx overlap = (b.adjoint() * a).trace();
  const cplx phase = std::abs(overlap) > 0.0 ? overlap / std::abs(overlap) : cplx(1.0);
  return (a - phase * b).norm();
}

int cmd_dephasing_demo(const JobConfig& c, std::ostream& out) {
  const double gamma = c.gamma.value_or(1.0);
  if (!(gamma > 0.0)) throw ConfigError("dephasing-demo: gamma must be > 0");
  const double t = std::numbers::ln2 / gamma;
  const Golden g = golden();
  const CMatrix swap = swap_operator(2, 2);

  Json steps = Json::array();
  double worst = 0.0;
  auto record = [&](Json step, double diff) {
    step["max_diff"] = diff;
    steps.push_back(std::move(step));
    worst = std::max(worst, diff);
    fmt::print(out, "  diff vs golden: {:.3e}\n\n", diff);
  };

  fmt::print(out, "dephasing demo: gamma = {}, t = ln 2 / gamma = {:.17g}, exp(-gamma t) = 1/2\n\n", gamma, t);
  const ChannelRep phi = builtin_channel(BuiltinFamily{BuiltinKind::dephasing, gamma}, t);

  // Step 1
  const CMatrix j = choi_of(phi).matrix;
  fmt::print(out, "Step 1: Choi matrix\n");
  print_matrix(out, "J(Phi_t)", j);
  {
    Json s;
    s["step"] = 1;
    s["name"] = "choi matrix";
    s["choi"] = encode_matrix(j);
    record(std::move(s), (j - g.choi).norm());
  }

  // Step 2
  const HermEig eig = herm_eig(j);
  fmt::print(out, "Step 2: spectral decomposition\n");
  fmt::print(out, "  eigenvalues = [{:.12f}, {:.12f}, {:.12f}, {:.12f}]\n", eig.eigenvalues(0), eig.eigenvalues(1),
             eig.eigenvalues(2), eig.eigenvalues(3));
  print_matrix(out, "v1 v2", eig.eigenvectors.leftCols(2));
  {
    double diff = (eig.eigenvalues - g.eigenvalues).cwiseAbs().maxCoeff();
    for (int k = 0; k < 2; ++k) diff = std::max(diff, phase_distance(eig.eigenvectors.col(k), g.eigenvectors.col(k)));
    Json s;
    s["step"] = 2;
    s["name"] = "spectral decomposition";
    Json ev = Json::array();
    for (Eigen::Index k = 0; k < eig.eigenvalues.size(); ++k) ev.push_back(eig.eigenvalues(k));
    s["eigenvalues"] = std::move(ev);
    s["eigenvectors"] = encode_matrix(eig.eigenvectors.leftCols(2));
    record(std::move(s), diff);
  }

  // Step 3
  const KrausSet kraus = choi_to_kraus(ChoiMatrix{2, j});
  fmt::print(out, "Step 3: Kraus operators\n");
  for (std::size_t k = 0; k < kraus.operators.size(); ++k) print_matrix(out, fmt::format("K{}", k + 1), kraus.operators[k]);
  {
    double diff = kraus.operators.size() == g.kraus.size() ? 0.0 : 1.0;
    Json ops = Json::array();
    for (std::size_t k = 0; k < kraus.operators.size(); ++k) {
      if (k < g.kraus.size()) diff = std::max(diff, phase_distance(kraus.operators[k], g.kraus[k]));
      ops.push_back(encode_matrix(kraus.operators[k]));
    }
    Json s;
    s["step"] = 3;
    s["name"] = "kraus operators";
    s["operators"] = std::move(ops);
    s["completeness_residual"] = kraus.completeness_residual();
    record(std::move(s), diff);
  }

  // Step 4
  const CMatrix v = isometry_from_kraus(kraus, 2);
  fmt::print(out, "Step 4: Kraus isometry (system (x) ancilla ordering; ancilla-major form is [K1; K2])\n");
  print_matrix(out, "V_t", v);
  print_matrix(out, "[K1; K2]", swap * v);
  {
    const double diff = std::max((swap * v - g.stacked_isometry).norm(), unitarity_residual(v));
    Json s;
    s["step"] = 4;
    s["name"] = "isometry";
    s["isometry"] = encode_matrix(v);
    s["isometry_ancilla_major"] = encode_matrix(swap * v);
    record(std::move(s), diff);
  }

  // Step 5
  const StinespringDilation dil = static_dilation(phi, 2, 0);
  const CMatrix vcols = dilation_isometry(dil);
  const double alpha = vcols(0, 0).real();
  const double beta = vcols(1, 0).real();
  const CMatrix u_golden = swap.adjoint() * g.stacked_unitary * swap;
  fmt::print(out, "Step 5: unitary completion, alpha = {:.15f}, beta = {:.15f}\n", alpha, beta);
  print_matrix(out, "U_t", dil.unitary);
  print_matrix(out, "U_t (reference completion, system (x) ancilla)", u_golden);
  {
    double diff = std::max(std::abs(alpha - g.alpha), std::abs(beta - g.beta));
    diff = std::max(diff, (vcols - dilation_isometry(StinespringDilation{2, 2, 0, u_golden})).norm());
    diff = std::max(diff, unitarity_residual(dil.unitary));
    Json s;
    s["step"] = 5;
    s["name"] = "unitary completion";
    s["alpha"] = alpha;
    s["beta"] = beta;
    s["unitary"] = encode_matrix(dil.unitary);
    s["unitarity_residual"] = unitarity_residual(dil.unitary);
    record(std::move(s), diff);
  }

  // Step 6
  const ChannelRep recovered = reduced_channel(dil);
  CMatrix plus = CMatrix::Constant(2, 2, 0.5);
  const CMatrix image = reduced_action(dil, plus);
  const double factor = (image(0, 1) / plus(0, 1)).real();
  const VerifyReport vr = verify_dilation(dil, phi, c.trials, c.seed);
  const VerifyReport vg = verify_dilation(StinespringDilation{2, 2, 0, u_golden}, phi, c.trials, c.seed);
  fmt::print(out, "Step 6: recovered channel, off-diagonal factor = {:.15f}\n", factor);
  print_matrix(out, "Tr_E U (|+><+| (x) |e1><e1|) U^H", image);
  fmt::print(out, "  reduced action residual {:.3e}, reference completion residual {:.3e} ({} checks)\n",
             vr.max_residual, vg.max_residual, vr.checks);
  {
    double diff = std::abs(factor - g.off_diagonal_factor);
    diff = std::max({diff, vr.max_residual, vg.max_residual});
    diff = std::max(diff, (recovered.choi_matrix() - g.choi).norm());
    Json s;
    s["step"] = 6;
    s["name"] = "recovered channel";
    s["off_diagonal_factor"] = factor;
    s["recovered_choi"] = encode_matrix(recovered.choi_matrix());
    s["verify_residual"] = vr.max_residual;
    s["reference_verify_residual"] = vg.max_residual;
    s["checks"] = vr.checks;
    record(std::move(s), diff);
  }

  const bool passed = worst <= kDemoTol;
  Json doc;
  doc["gamma"] = gamma;
  doc["time"] = t;
  doc["seed"] = c.seed;
  doc["tolerance"] = tolerance_block(kDemoTol, "Frobenius / absolute, up to per-operator global phase");
  doc["steps"] = std::move(steps);
  doc["max_diff"] = worst;
  doc["passed"] = passed;
  write_json(c.out_dir, "dephasing_demo.json", doc);
  fmt::print(out, "all steps: max diff {:.3e} (tol {:.0e}) -> {}\n", worst, kDemoTol, passed ? "PASS" : "FAIL");
  return passed ? kOk : kNumericalFailure;
}

}  // namespace

JobConfig config_from_json(const Json& j, JobConfig c) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key == "command") {
      c.command = typed<std::string>(value, key);
    } else if (key == "source") {
      c.source = value;
    } else if (key == "channel") {
      c.channel = value;
    } else if (key == "time") {
      c.time = number(value, key);
    } else if (key == "grid") {
      c.grid = typed<std::string>(value, key);
    } else if (key == "tol") {
      c.tol = number(value, key);
    } else if (key == "gamma") {
      c.gamma = number(value, key);
    } else if (key == "epsilon") {
      c.epsilon = number(value, key);
    } else if (key == "horizon") {
      c.horizon = number(value, key);
    } else if (key == "ancilla") {
      c.ancilla = integer(value, key);
    } else if (key == "points_per_decade") {
      c.points_per_decade = integer(value, key);
    } else if (key == "target") {
      c.target = typed<std::string>(value, key);
    } else if (key == "trials") {
      c.trials = integer(value, key);
    } else if (key == "out") {
      c.out_dir = typed<std::string>(value, key);
    } else if (key == "seed") {
      if (!value.is_number_unsigned()) throw ConfigError("config key 'seed' must be a non-negative integer");
      c.seed = value.get<std::uint64_t>();
    } else {
      throw ConfigError(fmt::format("unknown config key '{}'", key));
    }
  }
  return c;
}

void validate(const JobConfig& c) {
  static const std::vector<std::string> commands{"convert",       "verify",      "evolve",        "dilate-exact",
                                                 "dilate-approx", "singularity", "dephasing-demo"};
  if (std::find(commands.begin(), commands.end(), c.command) == commands.end()) {
    throw ConfigError(fmt::format("unknown command '{}'", c.command));
  }
  auto positive = [](double x, const char* what) {
    if (!(x > 0.0) || !std::isfinite(x)) throw ConfigError(fmt::format("{} must be positive and finite", what));
  };
  positive(c.tol, "tol");
  positive(c.epsilon, "epsilon");
  if (c.gamma) positive(*c.gamma, "gamma");
  if (c.horizon) positive(*c.horizon, "horizon");
  if (c.time && !(*c.time >= 0.0)) throw ConfigError("time must be >= 0");
  if (c.ancilla < 0) throw ConfigError("ancilla must be >= 0");
  if (c.points_per_decade < 1) throw ConfigError("points_per_decade must be >= 1");
  if (c.trials < 0) throw ConfigError("trials must be >= 0");
  if (c.out_dir.empty()) throw ConfigError("output directory must not be empty");
  if (c.grid) {
    try {
      TimeGrid::parse(*c.grid);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(fmt::format("bad grid: {}", e.what()));
    }
  }
}

int run(const JobConfig& c, std::ostream& out, std::ostream& err) {
  try {
    validate(c);
    // Parse the structured inputs up front so malformed ones count as bad config.
    try {
      if (c.source) (void)decode_source(*c.source);
      if (c.channel) (void)decode_channel(*c.channel);
    } catch (const FormatError& e) {
      throw ConfigError(e.what());
    }
    std::error_code ec;
    std::filesystem::create_directories(c.out_dir, ec);
    if (ec) throw IoError(fmt::format("cannot create output directory '{}': {}", c.out_dir.string(), ec.message()));

    if (c.command == "convert") return cmd_convert(c, out);
    if (c.command == "verify") return cmd_verify(c, out);
    if (c.command == "evolve") return cmd_evolve(c, out);
    if (c.command == "dilate-exact") return cmd_dilate_exact(c, out);
    if (c.command == "dilate-approx") return cmd_dilate_approx(c, out);
    if (c.command == "singularity") return cmd_singularity(c, out);
    return cmd_dephasing_demo(c, out);
  } catch (const ConfigError& e) {
    fmt::print(err, "error (config): {}\n", e.what());
    return kBadConfig;
  } catch (const FormatError& e) {
    fmt::print(err, "error (config): {}\n", e.what());
    return kBadConfig;
  } catch (const IoError& e) {
    fmt::print(err, "error (io): {}\n", e.what());
    return kIoFailure;
  } catch (const NumericalError& e) {
    fmt::print(err, "error (numerical): {}\n", e.what());
    return kNumericalFailure;
  } catch (const std::invalid_argument& e) {
    fmt::print(err, "error (validation): {}\n", e.what());
    return kValidationFailure;
  } catch (const std::exception& e) {
    fmt::print(err, "error (numerical): {}\n", e.what());
    return kNumericalFailure;
  }
}

int main_entry(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"dilation_lab: quantum channel representations and Stinespring dilation curves"};
  std::string command;
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
  std::optional<double> gamma;
  std::optional<double> epsilon;
  std::optional<int> ancilla;
  std::string grid;

  app.add_option("command", command,
                 "convert | verify | evolve | dilate-exact | dilate-approx | singularity | dephasing-demo");
  app.add_option("--config", config_path, "JSON job configuration");
  app.add_option("--out", out_dir, "output directory (default: out)");
  app.add_option("--seed", seed, "64-bit RNG seed");
  app.add_option("--tol", tol, "residual tolerance");
  app.add_option("--grid", grid, "time grid t0:t1:N[:geom]");
  app.add_option("--gamma", gamma, "rate of the builtin source");
  app.add_option("--epsilon", epsilon, "target sup error of the approximate dilation");
  app.add_option("--ancilla", ancilla, "ancilla dimension (0 selects n^2)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    fmt::print(err, "error (config): {}\n", e.what());
    return kBadConfig;
  }

  JobConfig config;
  try {
    if (!config_path.empty()) {
      std::string text;
      try {
        text = read_file(config_path);
      } catch (const IoError& e) {
        fmt::print(err, "error (io): {}\n", e.what());
        return kIoFailure;
      }
      config = config_from_json(parse_json(text));
    }
  } catch (const std::invalid_argument& e) {
    fmt::print(err, "error (config): {}\n", e.what());
    return kBadConfig;
  }
  if (!command.empty()) config.command = command;
  if (!out_dir.empty()) config.out_dir = out_dir;
  if (seed) config.seed = *seed;
  if (tol) config.tol = *tol;
  if (!grid.empty()) config.grid = grid;
  if (gamma) config.gamma = *gamma;
  if (epsilon) config.epsilon = *epsilon;
  if (ancilla) config.ancilla = *ancilla;
  return run(config, out, err);
}

}  // namespace dlab::cli
