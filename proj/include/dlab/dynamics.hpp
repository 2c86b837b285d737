#pragma once

// GKLS generators, channel curves and time grids. Times are in seconds
// with hbar = 1; rates (gamma) are in 1/s.

#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "dlab/channels.hpp"

namespace dlab {

/// L(rho) = -i[H, rho] + sum_j (L_j rho L_j^H - 1/2 {L_j^H L_j, rho}).
struct LindbladGenerator {
  int dim = 0;
  CMatrix hamiltonian;
  std::vector<CMatrix> jumps;

  void validate() const;
};

enum class BuiltinKind { dephasing, amplitude_damping, depolarizing };

const char* to_string(BuiltinKind kind);
BuiltinKind builtin_from_string(const std::string& name);

/// Qubit families with closed forms:
///   dephasing          coherences scaled by exp(-gamma t)
///   amplitude_damping  decay |1> -> |0> with p = 1 - exp(-gamma t)
///   depolarizing       rho -> a rho + (1 - a) Tr(rho) I/2, a = exp(-gamma t)
struct BuiltinFamily {
  BuiltinKind kind = BuiltinKind::dephasing;
  double gamma = 1.0;
};

struct ChannelTable {
  std::vector<double> times;
  std::vector<ChannelRep> channels;
};

struct CurveSource {
  std::variant<LindbladGenerator, ChannelTable, BuiltinFamily> source;

  static CurveSource semigroup(LindbladGenerator gen);
  static CurveSource table(ChannelTable table);
  static CurveSource builtin(BuiltinKind kind, double gamma);

  int dim() const;
  /// Largest admissible time (infinite for semigroups and builtins).
  double t_max() const;
};

enum class GridKind { uniform, geometric };

struct TimeGrid {
  std::vector<double> points;
  GridKind kind = GridKind::uniform;

  static TimeGrid uniform(double t0, double t1, int count);
  static TimeGrid geometric(double t0, double t1, int count);
  /// Geometric grid with at least `per_decade` points per decade.
  static TimeGrid per_decade(double t0, double t1, int per_decade);
  /// "t0:t1:N" or "t0:t1:N:geom".
  static TimeGrid parse(const std::string& spec);

  std::size_t size() const { return points.size(); }
  void validate() const;
};

using CurveSamples = std::vector<std::pair<double, ChannelRep>>;

CMatrix gkls_apply(const LindbladGenerator& gen, const CMatrix& rho);

/// Matrix of the generator acting on vec(rho).
CMatrix gkls_superop(const LindbladGenerator& gen);

/// Generator whose semigroup equals the builtin family.
LindbladGenerator builtin_generator(const BuiltinFamily& family);

/// Closed-form channel of a builtin family at time t.
ChannelRep builtin_channel(const BuiltinFamily& family, double t);

struct TableEvaluation {
  ChannelRep channel;
  double projection_residual = 0.0;  // ||J_projected - J_linear||_F
};

/// Linear interpolation in Choi space between bracketing table entries
/// followed by projection onto CPTP. Exact table times return the stored
/// channel.
TableEvaluation evaluate_table(const ChannelTable& table, double t);

ChannelRep channel_at(const CurveSource& src, double t);

CurveSamples sample_curve(const CurveSource& src, const TimeGrid& grid);

/// max_k diamond_upper(Phi_{k+1}, Phi_k) / (t_{k+1} - t_k): an estimate of
/// the Lipschitz constant measured in the Choi trace-norm surrogate.
double lipschitz_estimate(const CurveSamples& samples);

}  // namespace dlab
