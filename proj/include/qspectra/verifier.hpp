#ifndef QSPECTRA_VERIFIER_HPP
#define QSPECTRA_VERIFIER_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qspectra/types.hpp"

namespace qspectra {

/// Parameters of a registered check. Members left empty use the check's
/// own defaults (chosen so that the full suite runs in minutes).
struct CheckParams {
  std::optional<int> trials;
  std::vector<Index> dims;
  std::vector<int> n_grid;
  std::uint64_t seed = 42;
  std::optional<double> tolerance;
};

struct Witness {
  std::uint64_t seed = 0;  // per-trial derived seed, enough to rebuild inputs
  int trial = 0;
};

/// Outcome of one check. For level "exact" worst_slack is the most
/// negative normalized inequality margin and the pass condition is
/// worst_slack >= -tolerance. For level "estimate" the margins already
/// include the estimator-resolution allowance slack(n) and tolerance is 0.
struct CheckReport {
  std::string check_id;
  int trials = 0;
  double worst_slack = std::numeric_limits<double>::infinity();
  bool pass = false;
  double tolerance = 0.0;
  std::string level;  // "exact" or "estimate"
  std::vector<Witness> witnesses;
  double wall_time_ms = 0.0;
};

/// Estimator-resolution allowance for inequalities between finite-n
/// estimates: 2 (|ln eps| / n + gamma_tol).
double estimate_slack(int n, double epsilon = 0.01, double gamma_tol = 1e-4);

std::vector<std::string> registered_checks();

/// Runs one named check deterministically from its seed.
CheckReport run_check(const std::string& check_id, const CheckParams& params = {});

nlohmann::ordered_json report_to_json(const CheckReport& report);
nlohmann::ordered_json reports_to_json(const std::vector<CheckReport>& reports);

// -- chain-bound replay ---------------------------------------------------

enum class ChainVariant { Prop9, Prop12 };

/// One replay instance of the chain-rule master inequalities: the state,
/// its bipartite split, the blocklength and the two threshold exponents.
struct ChainBoundSpec {
  DensityMatrix rho_ab;
  SubsystemShape shape;
  int n = 1;
  double alpha = 0.0;
  double beta = 0.0;
  ChainVariant variant = ChainVariant::Prop9;
};

/// Verifies, for the given replay instance, that the projected difference
/// trace is nonnegative and dominated by the three-term bound. Valid for
/// every (alpha, beta).
CheckReport replay_chain_bound(const ChainBoundSpec& spec);

}  // namespace qspectra

#endif
