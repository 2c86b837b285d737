#include "dlab/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <fmt/format.h>

#include "dlab/parallel.hpp"

namespace dlab {

void LindbladGenerator::validate() const {
  if (dim <= 0) throw ValidationError("LindbladGenerator: dimension must be positive");
  if (hamiltonian.rows() != dim || hamiltonian.cols() != dim) {
    throw DimensionError(fmt::format("LindbladGenerator: Hamiltonian is {}x{}, expected {}x{}", hamiltonian.rows(),
                                     hamiltonian.cols(), dim, dim));
  }
  const double asym = (hamiltonian - hamiltonian.adjoint()).norm();
  if (asym > 1e-10) throw ValidationError(fmt::format("LindbladGenerator: Hamiltonian not Hermitian ({:.3e})", asym));
  for (const auto& l : jumps) {
    if (l.rows() != dim || l.cols() != dim) throw DimensionError("LindbladGenerator: jump operator dimension mismatch");
  }
}

const char* to_string(BuiltinKind kind) {
  switch (kind) {
    case BuiltinKind::dephasing: return "dephasing";
    case BuiltinKind::amplitude_damping: return "amplitude_damping";
    case BuiltinKind::depolarizing: return "depolarizing";
  }
  return "?";
}

BuiltinKind builtin_from_string(const std::string& name) {
  if (name == "dephasing") return BuiltinKind::dephasing;
  if (name == "amplitude_damping") return BuiltinKind::amplitude_damping;
  if (name == "depolarizing") return BuiltinKind::depolarizing;
  throw ValidationError(fmt::format("unknown builtin family '{}'", name));
}

CurveSource CurveSource::semigroup(LindbladGenerator gen) {
  gen.validate();
  return CurveSource{std::move(gen)};
}

CurveSource CurveSource::table(ChannelTable table) {
  if (table.times.size() != table.channels.size() || table.times.empty()) {
    throw ValidationError("channel table: times and channels must be non-empty and of equal length");
  }
  for (std::size_t i = 1; i < table.times.size(); ++i) {
    if (!(table.times[i] > table.times[i - 1])) throw ValidationError("channel table: times must strictly increase");
  }
  const int n = table.channels.front().dim();
  for (std::size_t i = 0; i < table.channels.size(); ++i) {
    const auto& ch = table.channels[i];
    if (ch.dim() != n) throw DimensionError("channel table: channels have different dimensions");
    const CptpReport r = is_cptp(ch);
    if (!r.cp_ok || !r.tp_ok) {
      throw ValidationError(fmt::format("channel table: entry at t={} is not CPTP (min eig {:.3e}, tp residual {:.3e})",
                                        table.times[i], r.min_choi_eig, r.tp_residual));
    }
  }
  return CurveSource{std::move(table)};
}

CurveSource CurveSource::builtin(BuiltinKind kind, double gamma) {
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw ValidationError("builtin family: gamma must be finite and >= 0");
  return CurveSource{BuiltinFamily{kind, gamma}};
}

int CurveSource::dim() const {
  if (const auto* g = std::get_if<LindbladGenerator>(&source)) return g->dim;
  if (const auto* t = std::get_if<ChannelTable>(&source)) return t->channels.front().dim();
  return 2;
}

double CurveSource::t_max() const {
  if (const auto* t = std::get_if<ChannelTable>(&source)) return t->times.back();
  return std::numeric_limits<double>::infinity();
}

TimeGrid TimeGrid::uniform(double t0, double t1, int count) {
  if (count < 2 || !(t1 > t0)) throw ValidationError("TimeGrid::uniform: need count >= 2 and t1 > t0");
  TimeGrid g;
  g.kind = GridKind::uniform;
  g.points.resize(static_cast<std::size_t>(count));
  const double step = (t1 - t0) / (count - 1);
  for (int k = 0; k < count; ++k) g.points[static_cast<std::size_t>(k)] = t0 + k * step;
  g.points.back() = t1;
  return g;
}

TimeGrid TimeGrid::geometric(double t0, double t1, int count) {
  if (count < 2 || !(t0 > 0.0) || !(t1 > t0)) {
    throw ValidationError("TimeGrid::geometric: need count >= 2 and 0 < t0 < t1");
  }
  TimeGrid g;
  g.kind = GridKind::geometric;
  g.points.resize(static_cast<std::size_t>(count));
  const double log_ratio = std::log(t1 / t0);
  for (int k = 0; k < count; ++k) {
    g.points[static_cast<std::size_t>(k)] = t0 * std::exp(log_ratio * k / (count - 1));
  }
  g.points.front() = t0;
  g.points.back() = t1;
  return g;
}

TimeGrid TimeGrid::per_decade(double t0, double t1, int per_decade) {
  if (per_decade < 1 || !(t0 > 0.0) || !(t1 > t0)) {
    throw ValidationError("TimeGrid::per_decade: need per_decade >= 1 and 0 < t0 < t1");
  }
  const double decades = std::log10(t1 / t0);
  const int count = static_cast<int>(std::ceil(decades * per_decade - 1e-9)) + 1;
  return geometric(t0, t1, std::max(count, 2));
}

TimeGrid TimeGrid::parse(const std::string& spec) {
  std::vector<std::string> parts;
  std::stringstream ss(spec);
  for (std::string item; std::getline(ss, item, ':');) parts.push_back(item);
  if (parts.size() < 3 || parts.size() > 4) {
    throw ValidationError(fmt::format("grid spec '{}' must be t0:t1:N[:geom]", spec));
  }
  try {
    const double t0 = std::stod(parts[0]);
    const double t1 = std::stod(parts[1]);
    const int count = std::stoi(parts[2]);
    if (parts.size() == 4) {
      if (parts[3] != "geom") throw ValidationError(fmt::format("grid spec '{}': unknown kind '{}'", spec, parts[3]));
      return geometric(t0, t1, count);
    }
    return uniform(t0, t1, count);
  } catch (const std::logic_error& e) {
    if (dynamic_cast<const ValidationError*>(&e)) throw;
    throw ValidationError(fmt::format("grid spec '{}' is malformed", spec));
  }
}

void TimeGrid::validate() const {
  if (points.size() < 2) throw ValidationError("TimeGrid: need at least 2 points");
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (!(points[i] > points[i - 1])) throw ValidationError("TimeGrid: points must strictly increase");
  }
}

CMatrix gkls_apply(const LindbladGenerator& gen, const CMatrix& rho) {
  if (rho.rows() != gen.dim || rho.cols() != gen.dim) {
    throw DimensionError(fmt::format("gkls_apply: state is {}x{}, generator dimension {}", rho.rows(), rho.cols(),
                                     gen.dim));
  }
  CMatrix out = -kI * (gen.hamiltonian * rho - rho * gen.hamiltonian);
  for (const auto& l : gen.jumps) {
    const CMatrix ldl = l.adjoint() * l;
    out += l * rho * l.adjoint() - 0.5 * (ldl * rho + rho * ldl);
  }
  return out;
}

CMatrix gkls_superop(const LindbladGenerator& gen) {
  const int n = gen.dim;
  const CMatrix id = CMatrix::Identity(n, n);
  // vec(A X B) = (B^T (x) A) vec(X)
  CMatrix s = -kI * (kron(id, gen.hamiltonian) - kron(gen.hamiltonian.transpose(), id));
  for (const auto& l : gen.jumps) {
    const CMatrix ldl = l.adjoint() * l;
    s += kron(l.conjugate(), l) - 0.5 * kron(id, ldl) - 0.5 * kron(ldl.transpose(), id);
  }
  return s;
}

LindbladGenerator builtin_generator(const BuiltinFamily& family) {
  LindbladGenerator gen;
  gen.dim = 2;
  gen.hamiltonian = CMatrix::Zero(2, 2);
  const double g = family.gamma;
  switch (family.kind) {
    case BuiltinKind::dephasing:
      // gamma/2 (sz rho sz - rho)
      gen.jumps.push_back(std::sqrt(g / 2.0) * pauli::z());
      break;
    case BuiltinKind::amplitude_damping:
      gen.jumps.push_back(std::sqrt(g) * matrix_unit(2, 0, 1));
      break;
    case BuiltinKind::depolarizing:
      // gamma (Tr(rho) I/2 - rho) = gamma/4 sum_k (s_k rho s_k - rho)
      gen.jumps.push_back(std::sqrt(g / 4.0) * pauli::x());
      gen.jumps.push_back(std::sqrt(g / 4.0) * pauli::y());
      gen.jumps.push_back(std::sqrt(g / 4.0) * pauli::z());
      break;
  }
  return gen;
}

ChannelRep builtin_channel(const BuiltinFamily& family, double t) {
  const double a = std::exp(-family.gamma * t);
  switch (family.kind) {
    case BuiltinKind::dephasing: {
      CMatrix s = CMatrix::Zero(4, 4);
      s(0, 0) = 1.0;
      s(1, 1) = a;
      s(2, 2) = a;
      s(3, 3) = 1.0;
      return ChannelRep::from_superop(std::move(s));
    }
    case BuiltinKind::amplitude_damping: {
      const double p = -std::expm1(-family.gamma * t);
      CMatrix k0 = CMatrix::Zero(2, 2);
      k0(0, 0) = 1.0;
      k0(1, 1) = std::sqrt(1.0 - p);
      CMatrix k1 = CMatrix::Zero(2, 2);
      k1(0, 1) = std::sqrt(p);
      return ChannelRep::from_kraus(KrausSet{2, {k0, k1}});
    }
    case BuiltinKind::depolarizing: {
      const CVector vid = vec(CMatrix::Identity(2, 2));
      CMatrix s = a * CMatrix::Identity(4, 4) + 0.5 * (1.0 - a) * vid * vid.transpose();
      return ChannelRep::from_superop(std::move(s));
    }
  }
  throw ValidationError("builtin_channel: unknown family");
}

TableEvaluation evaluate_table(const ChannelTable& table, double t) {
  const auto& ts = table.times;
  const double span = ts.back() - ts.front();
  const double slack = 1e-12 * std::max(1.0, span);
  if (t < ts.front() - slack || t > ts.back() + slack) {
    throw ValidationError(fmt::format("table source: t={} outside [{}, {}]", t, ts.front(), ts.back()));
  }
  auto hi = std::lower_bound(ts.begin(), ts.end(), t);
  if (hi == ts.end()) return {table.channels.back(), 0.0};
  auto idx = static_cast<std::size_t>(hi - ts.begin());
  if (std::abs(*hi - t) <= slack) return {table.channels[idx], 0.0};
  if (idx == 0) return {table.channels.front(), 0.0};
  const std::size_t lo = idx - 1;
  const double w = (t - ts[lo]) / (ts[idx] - ts[lo]);
  const int n = table.channels[lo].dim();
  const CMatrix j = (1.0 - w) * table.channels[lo].choi_matrix() + w * table.channels[idx].choi_matrix();
  const CMatrix proj = project_cptp(j, n);
  return {ChannelRep::from_choi(ChoiMatrix{n, proj}), (proj - j).norm()};
}

ChannelRep channel_at(const CurveSource& src, double t) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw ValidationError(fmt::format("channel_at: invalid time {}", t));
  if (const auto* g = std::get_if<LindbladGenerator>(&src.source)) {
    return ChannelRep::from_superop(expm(t * gkls_superop(*g)));
  }
  if (const auto* tab = std::get_if<ChannelTable>(&src.source)) return evaluate_table(*tab, t).channel;
  return builtin_channel(std::get<BuiltinFamily>(src.source), t);
}

CurveSamples sample_curve(const CurveSource& src, const TimeGrid& grid) {
  grid.validate();
  const auto& pts = grid.points;
  return parallel_map<std::pair<double, ChannelRep>>(pts.size(), [&](std::size_t i) {
    return std::pair<double, ChannelRep>{pts[i], channel_at(src, pts[i])};
  });
}

double lipschitz_estimate(const CurveSamples& samples) {
  if (samples.size() < 2) throw ValidationError("lipschitz_estimate: need at least 2 samples");
  double best = 0.0;
  for (std::size_t k = 0; k + 1 < samples.size(); ++k) {
    const double gap = samples[k + 1].first - samples[k].first;
    if (!(gap > 0.0)) throw ValidationError("lipschitz_estimate: sample times must strictly increase");
    const double dist = channel_distance(samples[k + 1].second, samples[k].second).diamond_upper;
    best = std::max(best, dist / gap);
  }
  return best;
}

}  // namespace dlab
