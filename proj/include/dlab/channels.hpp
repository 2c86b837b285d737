#pragma once

// Quantum channels on C^n in superoperator, Choi, Kraus and unitary form.
//
// The superoperator S acts on vec(rho) (column stacking, see numkit.hpp).
// The Choi matrix is J = sum_ij |i><j| (x) Phi(|i><j|); its first tensor
// factor is the input index, the second the output index, so trace
// preservation reads Tr_out J = I.

#include <variant>
#include <vector>

#include "dlab/numkit.hpp"

namespace dlab {

inline constexpr double kCompletenessTol = 1e-10;
inline constexpr double kCpTol = 1e-10;
inline constexpr double kTpTol = 1e-10;

struct KrausSet {
  int dim = 0;
  std::vector<CMatrix> operators;

  /// ||sum K^H K - I||_F.
  double completeness_residual() const;
};

struct ChoiMatrix {
  int dim = 0;
  CMatrix matrix;
};

struct Superoperator {
  CMatrix matrix;
};

struct UnitaryConjugation {
  CMatrix matrix;
};

enum class RepKind { superop, choi, kraus, unitary };

const char* to_string(RepKind kind);

/// A channel held in the form it was given in. The superoperator and Choi
/// matrix are computed eagerly at construction, so a value is immutable
/// and safe to share across threads.
class ChannelRep {
 public:
  using Form = std::variant<Superoperator, ChoiMatrix, KrausSet, UnitaryConjugation>;

  static ChannelRep from_superop(CMatrix s);
  static ChannelRep from_choi(ChoiMatrix j);
  static ChannelRep from_kraus(KrausSet k);
  static ChannelRep from_unitary(CMatrix u);
  static ChannelRep identity(int n);

  int dim() const { return dim_; }
  RepKind kind() const;
  const Form& form() const { return form_; }

  const CMatrix& superop() const { return superop_; }
  const CMatrix& choi_matrix() const { return choi_; }

  /// The stored Kraus set, or the canonical spectral one derived from the
  /// Choi matrix for other forms.
  KrausSet kraus(double rank_tol = 1e-12) const;

 private:
  ChannelRep(Form form, int dim, CMatrix superop);

  Form form_;
  int dim_ = 0;
  CMatrix superop_;
  CMatrix choi_;
};

struct CptpReport {
  bool cp_ok = false;
  bool tp_ok = false;
  double min_choi_eig = 0.0;
  double tp_residual = 0.0;
};

/// Distances between channels. diamond_lower <= ||a - b||_diamond <=
/// diamond_upper follows from the Choi trace norm sandwich.
struct ChannelDistance {
  double choi_trace_dist = 0.0;
  double diamond_lower = 0.0;
  double diamond_upper = 0.0;
};

CMatrix apply(const ChannelRep& rep, const CMatrix& rho);

ChoiMatrix choi_of(const ChannelRep& rep);

/// Spectral Kraus set: K_j = unvec(sqrt(lambda_j) v_j) for
/// lambda_j > rank_tol * lambda_max, in descending eigenvalue order.
KrausSet choi_to_kraus(const ChoiMatrix& j, double rank_tol = 1e-12);

ChoiMatrix kraus_to_choi(const KrausSet& k);

CptpReport is_cptp(const ChannelRep& rep);

/// a o b: b acts first.
ChannelRep compose(const ChannelRep& a, const ChannelRep& b);

ChannelDistance channel_distance(const ChannelRep& a, const ChannelRep& b);

CMatrix superop_to_choi(const CMatrix& s);
CMatrix choi_to_superop(const CMatrix& j);

/// Projects a Hermitian Choi matrix onto the CPTP set: negative
/// eigenvalues clipped to zero, then J -> (X^{-1/2} (x) I) J (X^{-1/2} (x) I)
/// with X = Tr_out J.
CMatrix project_cptp(const CMatrix& j, int n);

}  // namespace dlab
