#ifndef QSPECTRA_RATE_ESTIMATOR_HPP
#define QSPECTRA_RATE_ESTIMATOR_HPP

#include <string>
#include <vector>

#include "qspectra/spectrum_engine.hpp"
#include "qspectra/types.hpp"

namespace qspectra {

struct SearchOptions {
  double lo = -2.0;
  double hi = 2.0;
  double tol = 1e-4;
  TailFunctional functional = TailFunctional::Positive;
  int max_doublings = 60;
};

/// Bisection for gamma with f_n(gamma) = target, f_n the selected monotone
/// nonincreasing tail functional. The bracket is expanded geometrically
/// (up to max_doublings) when it does not straddle the target.
double threshold_search(const TailEvaluator& f, double target,
                        const SearchOptions& opts = {});
double threshold_search(const PairSequence& seq, int n, double target,
                        const SearchOptions& opts = {},
                        EnginePreference pref = EnginePreference::Auto,
                        Index dim_cap = kDefaultDimCap);

struct RateQuery {
  PairSequence seq;
  std::vector<int> n_grid;
  double epsilon = 0.01;
  double gamma_lo = -2.0;
  double gamma_hi = 2.0;
  double gamma_tol = 1e-4;
  EnginePreference engine = EnginePreference::Auto;
  Index dim_cap = kDefaultDimCap;
  /// When false, only the primary functional's thresholds are searched and
  /// the rho_* record fields are NaN.
  bool include_rho_functional = true;
};

/// Per-blocklength thresholds. The primary columns come from the
/// difference-operator tail Tr[(rho_n - e^{n gamma} omega_n)_+]; the rho_*
/// columns are the level sets of Tr[{rho_n >= e^{n gamma} omega_n} rho_n],
/// the equivalent historical form. At finite n the two differ and both are
/// reported. For entropic kinds all values carry the entropy sign
/// convention (sup_thresh is the sup-rate estimate, and so on).
struct RateRecord {
  int n = 0;
  double sup_thresh = 0.0;  // level epsilon
  double inf_thresh = 0.0;  // level 1 - epsilon
  double midpoint = 0.0;    // level 1/2
  double rho_sup = 0.0;
  double rho_inf = 0.0;
  double rho_mid = 0.0;
  std::string engine;
};

struct RateEstimate {
  std::vector<RateRecord> per_n;
  double epsilon = 0.01;
  std::string kind = "divergence";
};

RateEstimate estimate_divergence_rates(const RateQuery& q);

enum class EntropicKindTag { Entropy, Conditional, Mutual };

/// Which entropic rate to derive and how the reference operator is built
/// from the state: entropy uses the identity; conditional S(rest | given)
/// uses I (x) rho^given; mutual S(part_a : part_b) uses rho^a (x) rho^b.
struct EntropicKind {
  EntropicKindTag tag = EntropicKindTag::Entropy;
  SubsystemShape shape;  // single-copy shape for i.i.d. sequences
  std::vector<std::string> given;
  std::vector<std::string> part_a, part_b;

  static EntropicKind entropy(SubsystemShape shape = {});
  static EntropicKind conditional(SubsystemShape shape,
                                  std::vector<std::string> given);
  static EntropicKind mutual(SubsystemShape shape, std::vector<std::string> a,
                             std::vector<std::string> b);
};

/// Reference operator for an entropic kind, built from the state on the
/// given shape by partial tracing and re-embedding.
PositiveOperator entropic_omega(const DensityMatrix& rho,
                                const SubsystemShape& shape,
                                const EntropicKind& kind);

/// Runs the divergence estimator against the derived reference sequence
/// and applies the entropy sign conventions. The query's sequence must
/// have no omega of its own.
RateEstimate entropic_rates(const RateQuery& q, const EntropicKind& kind);

// -- von Neumann oracles ------------------------------------------------
// Convergence targets for i.i.d. sequences, in nats.

double vn_entropy(const DensityMatrix& rho);
double vn_entropy_of_spectrum(const RealVector& eigenvalues);
/// Tr[rho (ln rho - ln omega)]; +infinity when supp rho exceeds supp omega.
double vn_relative_entropy(const DensityMatrix& rho, const PositiveOperator& omega);
double vn_conditional_entropy(const DensityMatrix& rho, const SubsystemShape& shape,
                              const std::vector<std::string>& given);
double vn_mutual_information(const DensityMatrix& rho, const SubsystemShape& shape,
                             const std::vector<std::string>& part_a,
                             const std::vector<std::string>& part_b);

}  // namespace qspectra

#endif
