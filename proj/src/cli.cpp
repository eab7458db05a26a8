#include "qspectra/cli.hpp"

#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "qspectra/io.hpp"
#include "qspectra/operator_core.hpp"
#include "qspectra/rate_estimator.hpp"
#include "qspectra/spectrum_engine.hpp"
#include "qspectra/verifier.hpp"

namespace qspectra {

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailure = 1;
constexpr int kExitUsage = 2;
constexpr int kExitCapacity = 3;

std::vector<int> parse_int_list(const std::string& text, const char* flag) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      out.push_back(std::stoi(item));
    } catch (const std::exception&) {
      throw std::invalid_argument(std::string(flag) + ": cannot parse '" + item + "'");
    }
  }
  if (out.empty()) throw std::invalid_argument(std::string(flag) + ": empty list");
  return out;
}

// Replaces any `--args-file F` occurrence with the whitespace-separated
// tokens read from F (one flag per line, '#' comments allowed).
std::vector<std::string> expand_args_file(std::vector<std::string> args) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--args-file") {
      if (i + 1 >= args.size())
        throw std::invalid_argument("--args-file: missing file name");
      const std::string text = read_text_file(args[i + 1]);
      std::stringstream lines(text);
      std::string line;
      while (std::getline(lines, line)) {
        std::stringstream words(line);
        std::string w;
        while (words >> w) {
          if (w[0] == '#') break;
          out.push_back(w);
        }
      }
      ++i;
    } else {
      out.push_back(args[i]);
    }
  }
  return out;
}

DensityMatrix state_from(const std::string& spec_str, std::vector<Index>* dims_out) {
  const LoadedOperator op = resolve_state(spec_str);
  if (dims_out) *dims_out = op.dims;
  return DensityMatrix(PositiveOperator(HermitianOperator(op.matrix)));
}

PositiveOperator omega_from(const std::string& spec_str, Index rho_dim) {
  if (spec_str == "identity") return PositiveOperator::identity(rho_dim);
  const LoadedOperator op = resolve_state(spec_str);
  return PositiveOperator(HermitianOperator(op.matrix));
}

struct SpectrumArgs {
  std::string rho, omega, out, functional = "positive";
  std::string n_list;
  double gamma_min = 0.0, gamma_max = 0.0;
  int gamma_steps = 0;
};

int cmd_spectrum(const SpectrumArgs& a) {
  const DensityMatrix rho = state_from(a.rho, nullptr);
  PositiveOperator omega = a.omega.empty() ? rho.positive()
                                           : omega_from(a.omega, rho.dim());
  if (omega.dim() != rho.dim())
    throw std::invalid_argument("--omega: dimension " + std::to_string(omega.dim()) +
                                " does not match --rho dimension " +
                                std::to_string(rho.dim()));
  TailFunctional tag;
  if (a.functional == "positive")
    tag = TailFunctional::Positive;
  else if (a.functional == "rho")
    tag = TailFunctional::Rho;
  else if (a.functional == "omega")
    tag = TailFunctional::Omega;
  else
    throw std::invalid_argument("--functional: expected positive, rho or omega");

  if (!(a.gamma_max > a.gamma_min))
    throw std::invalid_argument("--gamma-max must exceed --gamma-min");
  if (a.gamma_steps < 2) throw std::invalid_argument("--gamma-steps: need >= 2");
  std::vector<double> grid;
  for (int k = 0; k < a.gamma_steps; ++k)
    grid.push_back(a.gamma_min +
                   (a.gamma_max - a.gamma_min) * k / (a.gamma_steps - 1));

  const PairSequence seq = PairSequence::iid_quantum(rho, omega);
  std::vector<SpectrumCurve> curves;
  for (int n : parse_int_list(a.n_list, "--n"))
    curves.push_back(spectrum_curve(seq, n, grid, tag));
  write_text_file(a.out, curve_csv(curves));
  return kExitOk;
}

struct RateArgs {
  std::string rho, omega, kind, split, out;
  std::string n_list;
  double epsilon = 0.01;
};

int cmd_rate(const RateArgs& a) {
  std::vector<Index> dims;
  const DensityMatrix rho = state_from(a.rho, &dims);

  RateQuery q{PairSequence::iid_quantum(rho, std::nullopt),
              parse_int_list(a.n_list, "--n")};
  q.epsilon = a.epsilon;

  RateEstimate est;
  if (a.kind.empty()) {
    PositiveOperator omega = a.omega.empty() ? rho.positive()
                                             : omega_from(a.omega, rho.dim());
    q.seq = PairSequence::iid_quantum(rho, std::move(omega));
    est = estimate_divergence_rates(q);
  } else {
    if (!a.omega.empty())
      throw std::invalid_argument("--omega cannot be combined with --kind");
    SubsystemShape shape;
    if (!a.split.empty()) {
      const auto colon = a.split.find(':');
      if (colon == std::string::npos)
        throw std::invalid_argument("--split: expected <dimA>:<dimB>");
      const Index da = std::stoi(a.split.substr(0, colon));
      const Index db = std::stoi(a.split.substr(colon + 1));
      shape = SubsystemShape({da, db}, {"A", "B"});
    } else if (dims.size() == 2) {
      shape = SubsystemShape(dims, {"A", "B"});
    } else if (a.kind != "entropy") {
      throw std::invalid_argument("--split is required for --kind " + a.kind +
                                  " unless the state file declares two factors");
    }
    if (shape.factors() && shape.dim() != rho.dim())
      throw std::invalid_argument("--split: product of dims does not match the state");

    EntropicKind kind;
    if (a.kind == "entropy")
      kind = EntropicKind::entropy(shape.factors() ? shape
                                                   : SubsystemShape::single(rho.dim()));
    else if (a.kind == "conditional")
      kind = EntropicKind::conditional(shape, {"B"});
    else if (a.kind == "mutual")
      kind = EntropicKind::mutual(shape, {"A"}, {"B"});
    else
      throw std::invalid_argument("--kind: expected entropy, conditional or mutual");

    q.seq = PairSequence::iid_quantum(rho, std::nullopt,
                                      kind.shape.factors() ? kind.shape
                                                           : SubsystemShape::single(rho.dim()));
    est = entropic_rates(q, kind);
  }
  write_text_file(a.out, rate_csv(est));
  return kExitOk;
}

struct VerifyArgs {
  std::string suite = "all";
  std::optional<int> trials;
  std::uint64_t seed = 42;
  std::string dims, out;
};

void print_report_table(const std::vector<CheckReport>& reports) {
  std::printf("%-24s %-9s %7s %14s %11s %10s %s\n", "check", "level", "trials",
              "worst_slack", "tolerance", "time_ms", "result");
  for (const auto& r : reports)
    std::printf("%-24s %-9s %7d %14.4e %11.1e %10.1f %s\n", r.check_id.c_str(),
                r.level.c_str(), r.trials, r.worst_slack, r.tolerance,
                r.wall_time_ms, r.pass ? "PASS" : "FAIL");
}

int cmd_verify(const VerifyArgs& a) {
  CheckParams params;
  params.seed = a.seed;
  params.trials = a.trials;
  if (!a.dims.empty())
    for (int d : parse_int_list(a.dims, "--dims")) params.dims.push_back(d);

  std::vector<std::string> ids;
  if (a.suite == "all")
    ids = registered_checks();
  else
    ids.push_back(a.suite);

  std::vector<CheckReport> reports;
  for (const auto& id : ids) reports.push_back(run_check(id, params));

  print_report_table(reports);
  const std::string json_text = reports_to_json(reports).dump(2) + "\n";
  if (!a.out.empty())
    write_text_file(a.out, json_text);
  else
    std::fputs(json_text.c_str(), stdout);

  for (const auto& r : reports)
    if (!r.pass) return kExitCheckFailure;
  return kExitOk;
}

struct ConvergeArgs {
  std::string preset, out;
  int n_max = 100;
};

std::vector<int> converge_grid(int n_max, int hard_cap) {
  static const int base[] = {1,  2,  3,  4,  5,  6,  8,  10,  13,  16,  20,  26,
                             32, 40, 50, 64, 80, 100, 128, 160, 200, 256, 320,
                             400, 500, 640, 800, 1000};
  std::vector<int> out;
  for (int n : base)
    if (n <= n_max && n <= hard_cap) out.push_back(n);
  if (out.empty()) out.push_back(1);
  return out;
}

int cmd_converge(const ConvergeArgs& a) {
  RateQuery q{PairSequence::iid_classical(RealVector::Ones(2) / 2,
                                          RealVector::Ones(2) / 2),
              {1}};
  double oracle = 0.0;
  std::optional<EntropicKind> kind;

  if (a.preset == "stein-classical") {
    RealVector p(2), u(2);
    p << 0.9, 0.1;
    u << 0.5, 0.5;
    q.seq = PairSequence::iid_classical(p, u);
    q.n_grid = converge_grid(a.n_max, 1000000);
    oracle = vn_relative_entropy(DensityMatrix::diagonal(p),
                                 DensityMatrix::diagonal(u).positive());
  } else if (a.preset == "entropy-qubit") {
    RealVector p(2);
    p << 0.75, 0.25;
    q.seq = PairSequence::iid_quantum(DensityMatrix::diagonal(p), std::nullopt);
    q.n_grid = converge_grid(a.n_max, 1000000);
    kind = EntropicKind::entropy();
    oracle = vn_entropy(DensityMatrix::diagonal(p));
  } else if (a.preset == "maxmixed-qubit") {
    q.seq = PairSequence::iid_quantum(DensityMatrix::maximally_mixed(2), std::nullopt);
    q.n_grid = converge_grid(a.n_max, 1000000);
    kind = EntropicKind::entropy();
    oracle = std::log(2.0);
  } else if (a.preset == "bell-conditional") {
    const LoadedOperator bell = *builtin_state("bell");
    const SubsystemShape shape = bell.shape();
    q.seq = PairSequence::iid_quantum(DensityMatrix(bell.matrix), std::nullopt, shape);
    // d = 4 type classes: keep C(n+3,3) under the enumeration cap.
    q.n_grid = converge_grid(a.n_max, 300);
    kind = EntropicKind::conditional(shape, {"B"});
    oracle = vn_conditional_entropy(DensityMatrix(bell.matrix), shape, {"B"});
  } else {
    throw std::invalid_argument(
        "--preset: expected stein-classical, entropy-qubit, maxmixed-qubit or "
        "bell-conditional");
  }

  const RateEstimate est = kind ? entropic_rates(q, *kind)
                                : estimate_divergence_rates(q);
  write_text_file(a.out, rate_csv_with_oracle(est, oracle));
  return kExitOk;
}

}  // namespace

int run_cli(std::vector<std::string> args) {
  CLI::App app{"Finite-blocklength information-spectrum toolkit"};
  app.require_subcommand(1);

  SpectrumArgs sp;
  CLI::App* spectrum = app.add_subcommand(
      "spectrum", "Sample a tail functional over a gamma grid");
  spectrum->add_option("--rho", sp.rho, "State file or builtin name")->required();
  spectrum->add_option("--omega", sp.omega,
                       "Reference operator file, builtin, or 'identity' "
                       "(default: same as --rho)");
  spectrum->add_option("--n", sp.n_list, "Comma-separated blocklengths")->required();
  spectrum->add_option("--gamma-min", sp.gamma_min, "Grid start")->required();
  spectrum->add_option("--gamma-max", sp.gamma_max, "Grid end")->required();
  spectrum->add_option("--gamma-steps", sp.gamma_steps, "Grid size")->required();
  spectrum->add_option("--functional", sp.functional, "positive, rho or omega");
  spectrum->add_option("--out", sp.out, "Output CSV path")->required();

  RateArgs ra;
  CLI::App* rate = app.add_subcommand("rate", "Estimate spectral rates per n");
  rate->add_option("--rho", ra.rho, "State file or builtin name")->required();
  rate->add_option("--omega", ra.omega, "Reference operator (default: same as --rho)");
  rate->add_option("--kind", ra.kind, "entropy, conditional or mutual");
  rate->add_option("--split", ra.split, "Bipartite split <dimA>:<dimB>");
  rate->add_option("--n", ra.n_list, "Comma-separated blocklengths")->required();
  rate->add_option("--epsilon", ra.epsilon, "Threshold level in (0, 1/2)");
  rate->add_option("--out", ra.out, "Output CSV path")->required();

  VerifyArgs va;
  CLI::App* verify = app.add_subcommand("verify", "Run named checks");
  verify->add_option("--suite", va.suite, "Check id or 'all'");
  int trials_flag = -1;
  verify->add_option("--trials", trials_flag, "Trial count override");
  verify->add_option("--seed", va.seed, "Master seed");
  verify->add_option("--dims", va.dims, "Comma-separated dimension cycle");
  verify->add_option("--out", va.out, "Report JSON path (stdout if omitted)");

  ConvergeArgs ca;
  CLI::App* converge = app.add_subcommand("converge", "Run a named convergence study");
  converge->add_option("--preset", ca.preset, "Experiment name")->required();
  converge->add_option("--n-max", ca.n_max, "Largest blocklength");
  converge->add_option("--out", ca.out, "Output CSV path")->required();

  try {
    args = expand_args_file(std::move(args));
    std::vector<const char*> argv;
    argv.push_back("qspectra");
    for (const auto& a : args) argv.push_back(a.c_str());
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  }

  try {
    if (spectrum->parsed()) return cmd_spectrum(sp);
    if (rate->parsed()) return cmd_rate(ra);
    if (verify->parsed()) {
      if (trials_flag > 0) va.trials = trials_flag;
      return cmd_verify(va);
    }
    if (converge->parsed()) return cmd_converge(ca);
    std::fprintf(stderr, "error: no command given\n");
    return kExitUsage;
  } catch (const capacity_error& e) {
    std::fprintf(stderr, "capacity error: %s\n", e.what());
    return kExitCapacity;
  } catch (const bracket_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  }
}

}  // namespace qspectra
