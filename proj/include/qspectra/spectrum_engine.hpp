#ifndef QSPECTRA_SPECTRUM_ENGINE_HPP
#define QSPECTRA_SPECTRUM_ENGINE_HPP

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qspectra/types.hpp"

namespace qspectra {

/// A state, a positive reference operator and a scale s = e^{n gamma}.
/// n and gamma are carried as metadata; the engine works in s directly.
struct ScaledPair {
  DensityMatrix rho;
  PositiveOperator omega;
  double s;
  int n = 1;
  double gamma = 0.0;

  ScaledPair(DensityMatrix r, PositiveOperator w, double scale, int block = 1,
             double g = 0.0);
  /// s = exp(n * gamma), computed with saturation at exp(+-700).
  static ScaledPair from_gamma(DensityMatrix r, PositiveOperator w, int n,
                               double gamma);
};

/// exp(x) clamped to exp(+-700); tails saturate monotonically beyond.
double exp_clamped(double x);

enum class TailFunctional { Positive, Rho, Omega };

const char* tail_name(TailFunctional t);

struct TailValues {
  double positive;  // Tr[(rho - s omega)_+]
  double rho;       // Tr[{rho >= s omega} rho]
  double omega;     // Tr[{rho >= s omega} omega]
};

/// All three tail functionals from a single eigendecomposition of
/// rho - s*omega; the same tie-broken projector backs all of them, so
/// rho == positive + s * omega holds to floating-point accuracy.
TailValues all_tails(const ScaledPair& pair);

double positive_tail(const ScaledPair& pair);
double rho_tail(const ScaledPair& pair);
double omega_tail(const ScaledPair& pair);

// -- type-class engine ---------------------------------------------------
// Polynomial-in-n evaluation for commuting pairs: rho_n = diag(p)^{x n},
// omega_n = diag(q)^{x n}, one term per type class, accumulated with a
// running-maximum log-sum-exp.

/// Number of type classes C(n+d-1, d-1); returns -1 on overflow past cap.
std::int64_t typeclass_count(int n, int d);
inline constexpr std::int64_t kTypeclassCap = 10'000'000;

TailValues typeclass_all(const RealVector& p, const RealVector& q, int n,
                         double gamma);
double typeclass_tail(const RealVector& p, const RealVector& q, int n,
                      double gamma, TailFunctional which);
/// Exact rank of {rho_n >= e^{n gamma} omega_n}: the number of
/// product-basis strings whose log-domain comparison is nonnegative.
/// Unlike the tails, no floating tie band is applied, so the count is
/// sharp even for eigenvalues that underflow in linear space.
std::int64_t typeclass_projector_rank(const RealVector& p, const RealVector& q,
                                      int n, double gamma);

// -- pair sequences --------------------------------------------------------

/// A blocklength-indexed family (rho_n, omega_n) with structural hints.
class PairSequence {
public:
  enum class Kind { IidQuantum, IidClassical, Explicit };

  struct Entry {
    int n;
    DensityMatrix rho;
    std::optional<PositiveOperator> omega;
  };

  static PairSequence iid_quantum(DensityMatrix rho1,
                                  std::optional<PositiveOperator> omega1,
                                  std::optional<SubsystemShape> copy_shape = {});
  static PairSequence iid_classical(RealVector p, RealVector q);
  static PairSequence explicit_table(std::vector<Entry> entries);

  Kind kind() const { return kind_; }
  bool has_omega() const;
  bool commuting() const { return commuting_; }

  const DensityMatrix& rho1() const;
  const PositiveOperator& omega1() const;
  const SubsystemShape& copy_shape() const { return copy_shape_; }

  const RealVector& p() const { return p_; }
  const RealVector& q() const { return q_; }

  DensityMatrix rho_n(int n, Index dim_cap = kDefaultDimCap) const;
  PositiveOperator omega_n(int n, Index dim_cap = kDefaultDimCap) const;

  /// Joint diagonal data (p, q) when the pair commutes; empty otherwise.
  const std::optional<std::pair<RealVector, RealVector>>& classical_reduction() const {
    return reduction_;
  }

private:
  PairSequence() = default;
  void detect_reduction();

  Kind kind_ = Kind::Explicit;
  std::optional<DensityMatrix> rho1_;
  std::optional<PositiveOperator> omega1_;
  SubsystemShape copy_shape_;
  RealVector p_, q_;
  std::vector<Entry> entries_;
  bool commuting_ = false;
  std::optional<std::pair<RealVector, RealVector>> reduction_;
};

/// Simultaneous diagonalization of a commuting Hermitian pair by
/// eigenvalue-cluster refinement. Returns the paired diagonals, or
/// nothing if the pair does not commute within tolerance.
std::optional<std::pair<RealVector, RealVector>> joint_diagonalize(
    const Matrix& a, const Matrix& b);

// -- evaluation -------------------------------------------------------------

enum class EnginePreference { Auto, Dense, Typeclass };

/// Binds (sequence, n) and evaluates the tail functionals at any gamma.
/// Dispatches to the type-class engine for classical or commuting
/// sequences (including omega = identity), dense otherwise. Dense
/// evaluations are memoized per gamma.
class TailEvaluator {
public:
  TailEvaluator(const PairSequence& seq, int n,
                EnginePreference pref = EnginePreference::Auto,
                Index dim_cap = kDefaultDimCap);

  TailValues all(double gamma) const;
  /// The positive tail alone; on the dense path this needs eigenvalues
  /// only, which is several times cheaper than the full decomposition.
  double positive(double gamma) const;
  double operator()(double gamma, TailFunctional which) const;
  const char* engine() const { return typeclass_ ? "typeclass" : "dense"; }
  int n() const { return n_; }

private:
  int n_;
  bool typeclass_ = false;
  RealVector p_, q_;
  std::optional<DensityMatrix> rho_n_;
  std::optional<PositiveOperator> omega_n_;
  mutable std::map<double, TailValues> memo_;
  mutable std::map<double, double> memo_pos_;
};

struct SpectrumPoint {
  double gamma;
  double f;
};

struct CurveCaps {
  Index dim_cap = kDefaultDimCap;
  std::int64_t type_cap = kTypeclassCap;
};

struct SpectrumCurve {
  int n = 0;
  TailFunctional tag = TailFunctional::Positive;
  std::string engine;
  std::vector<SpectrumPoint> points;
};

/// Samples the selected tail functional over a strictly increasing gamma
/// grid. Verifies the monotonicity invariant for the positive and rho
/// functionals (non-increasing within 1e-12).
SpectrumCurve spectrum_curve(const PairSequence& seq, int n,
                             const std::vector<double>& gammas,
                             TailFunctional tag = TailFunctional::Positive,
                             EnginePreference pref = EnginePreference::Auto,
                             CurveCaps caps = {});

}  // namespace qspectra

#endif
