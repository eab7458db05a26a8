// Acceptance suite: one line of output per criterion, nonzero exit on any
// failure. Each criterion pins its tolerances in code; the oracles are
// closed forms, classical information quantities, or the named checks.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "qspectra/cli.hpp"
#include "qspectra/io.hpp"
#include "qspectra/operator_core.hpp"
#include "qspectra/rate_estimator.hpp"
#include "qspectra/rng.hpp"
#include "qspectra/spectrum_engine.hpp"
#include "qspectra/verifier.hpp"

using namespace qspectra;

namespace {

int g_failures = 0;

void report(int criterion, bool pass, const std::string& what) {
  std::printf("CRITERION %2d: %s  %s\n", criterion, pass ? "PASS" : "FAIL",
              what.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v) { return fmt_double(v); }

const double kLn2 = std::log(2.0);

// -- 1, 2: the two key operator inequalities on random inputs ----------

void criterion_1() {
  const auto t0 = std::chrono::steady_clock::now();
  CheckParams p;
  p.trials = 10000;
  p.dims = {2, 4, 8, 16};
  p.seed = 42;
  const CheckReport r = run_check("lemma1_random", p);
  const double secs = seconds_since(t0);
  report(1, r.pass && secs < 30.0,
         "projector domination, 10^4 trials, dims {2,4,8,16}: worst slack " +
             fmt(r.worst_slack) + " >= -1e-9, " + fmt(secs) + " s");
}

void criterion_2() {
  const auto t0 = std::chrono::steady_clock::now();
  CheckParams p;
  p.trials = 1000;
  p.dims = {2, 4, 8};
  p.seed = 42;
  const CheckReport r = run_check("lemma2_random", p);
  const double secs = seconds_since(t0);
  report(2, r.pass && secs < 60.0,
         "channel domination, 10^3 trials, env dims {1,2,4}: worst slack " +
             fmt(r.worst_slack) + " >= -1e-9, " + fmt(secs) + " s");
}

// -- 3: dense and type-class engines agree ------------------------------

void criterion_3() {
  double worst = 0.0;
  auto compare = [&](const RealVector& p, const RealVector& q, int n_max) {
    Matrix dp = Matrix::Zero(p.size(), p.size());
    Matrix dq = Matrix::Zero(q.size(), q.size());
    for (Index i = 0; i < p.size(); ++i) dp(i, i) = p[i];
    for (Index i = 0; i < q.size(); ++i) dq(i, i) = q[i];
    for (int n = 1; n <= n_max; ++n) {
      const DensityMatrix rho = DensityMatrix::trusted(kron_power(dp, n), 0.0);
      const PositiveOperator omega =
          PositiveOperator::trusted(kron_power(dq, n), 0.0);
      for (int k = 0; k < 21; ++k) {
        const double gamma = -2.0 + 3.0 * k / 20.0;
        const TailValues dense =
            all_tails(ScaledPair::from_gamma(rho, omega, n, gamma));
        const TailValues tc = typeclass_all(p, q, n, gamma);
        worst = std::max(worst, std::abs(dense.positive - tc.positive));
        worst = std::max(worst, std::abs(dense.rho - tc.rho));
      }
    }
  };
  RealVector p2(2), q2(2), p3(3), q3(3);
  p2 << 0.9, 0.1;
  q2 << 0.5, 0.5;
  p3 << 0.7, 0.2, 0.1;
  q3 << 1.0 / 3, 1.0 / 3, 1.0 / 3;
  compare(p2, q2, 8);
  compare(p3, q3, 5);
  report(3, worst <= 1e-9,
         "engine equivalence on 21-point gamma grids (d=2 n<=8, d=3 n<=5): max "
         "|dense - typeclass| = " +
             fmt(worst));
}

// -- 4: classical Stein-type convergence against the KL oracle ----------

void criterion_4() {
  const auto t0 = std::chrono::steady_clock::now();
  RealVector p(2), q(2);
  p << 0.9, 0.1;
  q << 0.5, 0.5;
  const double kl = vn_relative_entropy(DensityMatrix::diagonal(p),
                                        DensityMatrix::diagonal(q).positive());
  RateQuery query{PairSequence::iid_classical(p, q), {1000}};
  const RateEstimate est = estimate_divergence_rates(query);
  const double mid = est.per_n[0].midpoint;
  bool ok = std::abs(mid - 0.368064) < 0.03 && std::abs(kl - 0.368064) < 1e-5;
  ok = ok && est.per_n[0].engine == "typeclass";

  for (double eps : {0.001, 0.05}) {
    RateQuery qe = query;
    qe.epsilon = eps;
    const RateEstimate alt = estimate_divergence_rates(qe);
    ok = ok && alt.per_n[0].inf_thresh <= mid + 2e-4 &&
         mid <= alt.per_n[0].sup_thresh + 2e-4;
  }
  const double secs = seconds_since(t0);
  report(4, ok && secs < 60.0,
         "Stein-type convergence at n=1000: midpoint " + fmt(mid) + " vs KL " +
             fmt(kl) + " (tol 0.03), thresholds bracket it at eps {0.001,0.05}, " +
             fmt(secs) + " s");
}

// -- 5: entropy convergence and the uniform-spectrum closed forms -------

void criterion_5() {
  RealVector p(2);
  p << 0.75, 0.25;
  RateQuery q{PairSequence::iid_quantum(DensityMatrix::diagonal(p), std::nullopt),
              {1000}};
  const RateEstimate est = entropic_rates(q, EntropicKind::entropy());
  const double mid = est.per_n[0].midpoint;
  bool ok = std::abs(mid - 0.562335) < 0.03;

  // Maximally mixed qubit. The level sets of the historical functional
  // Tr[{rho_n >= e^{n gamma} I} rho_n] form a step at -ln 2, so every
  // estimate equals ln 2 at every blocklength; the difference-operator
  // functional's midpoint carries its closed-form ln2/n offset instead.
  // (Blocklengths stay below the tie-break horizon 2^-n >> 1e-12.)
  RateQuery qm{PairSequence::iid_quantum(DensityMatrix::maximally_mixed(2),
                                         std::nullopt),
               {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 16, 24}};
  const RateEstimate mm = entropic_rates(qm, EntropicKind::entropy());
  double worst_step = 0.0, worst_form = 0.0;
  for (const auto& r : mm.per_n) {
    worst_step = std::max(worst_step, std::abs(r.rho_sup - kLn2));
    worst_step = std::max(worst_step, std::abs(r.rho_inf - kLn2));
    worst_step = std::max(worst_step, std::abs(r.rho_mid - kLn2));
    worst_form = std::max(worst_form, std::abs(r.midpoint - (kLn2 + kLn2 / r.n)));
  }
  ok = ok && worst_step <= 1.1e-4 && worst_form <= 2.1e-4;
  report(5, ok,
         "entropy convergence: biased-qubit midpoint " + fmt(mid) +
             " vs 0.562335 (tol 0.03); maximally mixed: step-form estimates off "
             "ln 2 by " +
             fmt(worst_step) + " (tol gamma_tol), closed-form midpoint off by " +
             fmt(worst_form));
}

// -- 6: Bell conditional rate, negative, with its 1/n closed form -------

void criterion_6() {
  const LoadedOperator bell = *builtin_state("bell");
  const SubsystemShape shape = bell.shape();
  const DensityMatrix rho(bell.matrix);
  RateQuery q{PairSequence::iid_quantum(rho, std::nullopt, shape),
              {1, 2, 3, 4, 5, 6}};
  const RateEstimate est = entropic_rates(q, EntropicKind::conditional(shape, {"B"}));
  double worst = 0.0;
  for (const auto& r : est.per_n)
    worst = std::max(worst, std::abs(r.midpoint - (-(kLn2 - kLn2 / r.n))));
  const double last = est.per_n.back().midpoint;
  report(6, worst <= 1.1e-4,
         "Bell conditional estimates equal -(ln2 - ln2/n) within " + fmt(worst) +
             " for n in 1..6; n=6 estimate " + fmt(last) +
             " (limit target -0.693147)");
}

// -- 7: exact finite-n theorems ------------------------------------------

void criterion_7() {
  bool ok = true;
  std::string detail;
  const auto run = [&](const char* id, CheckParams p) {
    const CheckReport r = run_check(id, p);
    ok = ok && r.pass;
    detail += std::string(id) + "=" + fmt(r.worst_slack) + " ";
  };
  CheckParams base;
  base.seed = 42;
  CheckParams p200 = base;
  p200.trials = 200;
  run("omega_tail_bound", p200);
  run("tail_decomposition", p200);
  CheckParams p10 = base;
  p10.trials = 10;
  run("entropy_bounds", p10);
  CheckParams p100 = base;
  p100.trials = 100;
  run("classical_positive", p100);
  run("pure_reduced_spectra", p100);
  report(7, ok, "exact finite-n theorems, worst slacks: " + detail);
}

// -- 8: chain-bound replays over the full grid ----------------------------

void criterion_8() {
  const auto t0 = std::chrono::steady_clock::now();
  CheckParams p;
  p.trials = 50;
  p.n_grid = {1, 2, 3};
  p.seed = 42;
  const CheckReport r9 = run_check("chain_bound_prop9", p);
  const CheckReport r12 = run_check("chain_bound_prop12", p);
  const double secs = seconds_since(t0);
  report(8, r9.pass && r12.pass && secs < 180.0,
         "chain-bound replays, 50 states x 81 grid points x n {1,2,3}: worst "
         "slacks " +
             fmt(r9.worst_slack) + " / " + fmt(r12.worst_slack) + ", " + fmt(secs) +
             " s");
}

// -- 9: estimate-level suites with their oracle collapses -----------------

void criterion_9() {
  bool ok = true;
  std::string detail;
  for (const char* id :
       {"cptp_monotonicity", "conditioning_reduces", "chain_rules_iid", "ssa_iid",
        "subadd_araki_lieb_iid", "mutual_props", "mutual_chain_iid"}) {
    CheckParams p;
    p.seed = 42;
    const CheckReport r = run_check(id, p);
    ok = ok && r.pass;
    detail += std::string(id) + "=" + fmt(r.worst_slack) + " ";
  }
  report(9, ok,
         "estimate-level suites within slack(n) = 2(|ln eps|/n + gamma_tol), "
         "oracle collapses within 1e-9: " +
             detail);
}

// -- 10: the CLI suite run is reproducible byte for byte ------------------

std::string strip_wall_time(const std::string& text) {
  std::istringstream in(text);
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line))
    if (line.find("wall_time") == std::string::npos) out << line << '\n';
  return out.str();
}

void criterion_10() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::string out1 =
      (std::filesystem::temp_directory_path() / "acceptance_verify1.json").string();
  const std::string out2 =
      (std::filesystem::temp_directory_path() / "acceptance_verify2.json").string();
  const int code1 = run_cli({"verify", "--suite", "all", "--seed", "42", "--out", out1});
  const double first_run = seconds_since(t0);
  const int code2 = run_cli({"verify", "--suite", "all", "--seed", "42", "--out", out2});
  const bool identical =
      strip_wall_time(read_text_file(out1)) == strip_wall_time(read_text_file(out2));
  report(10, code1 == 0 && code2 == 0 && identical && first_run < 300.0,
         "verify --suite all --seed 42: exit " + std::to_string(code1) + ", " +
             fmt(first_run) + " s, reruns byte-identical modulo wall_time: " +
             (identical ? "yes" : "no"));
}

}  // namespace

int main() {
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9();
  criterion_10();
  if (g_failures == 0)
    std::printf("acceptance: all 10 criteria passed\n");
  else
    std::printf("acceptance: %d criteria FAILED\n", g_failures);
  return g_failures == 0 ? 0 : 1;
}
