#include "qspectra/verifier.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <sstream>

#include "qspectra/channels.hpp"
#include "qspectra/operator_core.hpp"
#include "qspectra/rate_estimator.hpp"
#include "qspectra/rng.hpp"
#include "qspectra/spectrum_engine.hpp"

namespace qspectra {

double estimate_slack(int n, double epsilon, double gamma_tol) {
  return 2.0 * (std::abs(std::log(epsilon)) / n + gamma_tol);
}

namespace {

constexpr double kExactTol = 1e-9;
constexpr double kEpsilon = 0.01;
constexpr double kGammaTol = 1e-4;
constexpr double kOracleTol = 1e-9;

// Collects inequality margins; failing trials are fingerprinted.
class MarginTracker {
public:
  explicit MarginTracker(double tolerance) : tolerance_(tolerance) {}

  void add(double margin, std::uint64_t trial_seed, int trial) {
    worst_ = std::min(worst_, margin);
    if (margin < -tolerance_) {
      if (witnesses_.size() < 5 &&
          (witnesses_.empty() || witnesses_.back().trial != trial))
        witnesses_.push_back({trial_seed, trial});
    }
  }

  CheckReport finish(std::string check_id, int trials, std::string level) const {
    CheckReport r;
    r.check_id = std::move(check_id);
    r.trials = trials;
    r.worst_slack = worst_;
    r.tolerance = tolerance_;
    r.level = std::move(level);
    r.witnesses = witnesses_;
    r.pass = worst_ >= -tolerance_;
    return r;
  }

private:
  double tolerance_;
  double worst_ = std::numeric_limits<double>::infinity();
  std::vector<Witness> witnesses_;
};

Index pick(const std::vector<Index>& v, int i) {
  return v[static_cast<std::size_t>(i) % v.size()];
}

// Single-n estimate records, primary functional only.

RateQuery base_query(PairSequence seq, int n) {
  RateQuery q{std::move(seq), {n}};
  q.epsilon = kEpsilon;
  q.gamma_tol = kGammaTol;
  q.include_rho_functional = false;
  return q;
}

RateRecord divergence_record(const DensityMatrix& rho1, const PositiveOperator& w1,
                             int n) {
  RateQuery q = base_query(PairSequence::iid_quantum(rho1, w1), n);
  return estimate_divergence_rates(q).per_n.at(0);
}

RateRecord entropic_record(const DensityMatrix& rho1, const SubsystemShape& shape,
                           const EntropicKind& kind, int n) {
  RateQuery q = base_query(PairSequence::iid_quantum(rho1, std::nullopt, shape), n);
  return entropic_rates(q, kind).per_n.at(0);
}

RateRecord entropy_record(const DensityMatrix& rho1, int n) {
  return entropic_record(rho1, SubsystemShape::single(rho1.dim()),
                         EntropicKind::entropy(), n);
}

SubsystemShape bipartite_shape(Index da, Index db) {
  return SubsystemShape({da, db}, {"A", "B"});
}

SubsystemShape tripartite_shape(Index da, Index db, Index dc) {
  return SubsystemShape({da, db, dc}, {"A", "B", "C"});
}

// ---------------------------------------------------------------------
// Operator-level checks (exact finite-n theorems).
// ---------------------------------------------------------------------

CheckReport check_lemma1(const CheckParams& p) {
  const int trials = p.trials.value_or(10000);
  const std::vector<Index> dims =
      p.dims.empty() ? std::vector<Index>{2, 4, 8, 16} : p.dims;
  MarginTracker t(p.tolerance.value_or(kExactTol));
  for (int i = 0; i < trials; ++i) {
    const std::uint64_t s = split_seed(p.seed, i);
    Rng rng(s);
    const Index d = pick(dims, i);
    const HermitianOperator a = hermitian_unit(d, rng);
    const HermitianOperator b = hermitian_unit(d, rng);
    const PositiveOperator proj = contraction(d, rng);

    const Matrix diff = a.matrix() - b.matrix();
    const RealVector ev = eigvals_hermitian(HermitianOperator(diff));
    double rhs = 0.0;
    for (Index k = 0; k < ev.size(); ++k) rhs += std::max(ev[k], 0.0);
    const double lhs = (proj.matrix() * diff).trace().real();
    const double scale = 1.0 + ev.cwiseAbs().maxCoeff();
    t.add((rhs - lhs) / scale, s, i);
  }
  return t.finish("lemma1_random", trials, "exact");
}

CheckReport check_lemma2(const CheckParams& p) {
  const int trials = p.trials.value_or(1000);
  const std::vector<Index> dims = p.dims.empty() ? std::vector<Index>{2, 4, 8} : p.dims;
  const std::vector<Index> envs{1, 2, 4};
  MarginTracker t(p.tolerance.value_or(kExactTol));
  for (int i = 0; i < trials; ++i) {
    const std::uint64_t s = split_seed(p.seed, i);
    Rng rng(s);
    const Index d = pick(dims, i);
    const Index de = pick(envs, i / static_cast<int>(dims.size()));
    const HermitianOperator a = hermitian_unit(d, rng);
    const HermitianOperator b = hermitian_unit(d, rng);
    const KrausChannel ch = random_channel(d, de, rng.next_u64());

    const HermitianOperator ta = apply_channel(ch, a);
    const HermitianOperator tb = apply_channel(ch, b);
    const double lhs = positive_part_trace(ta, tb);
    const Matrix diff = a.matrix() - b.matrix();
    const RealVector ev = eigvals_hermitian(HermitianOperator(diff));
    double rhs = 0.0;
    for (Index k = 0; k < ev.size(); ++k) rhs += std::max(ev[k], 0.0);
    const double scale = 1.0 + ev.cwiseAbs().maxCoeff();
    t.add((rhs - lhs) / scale, s, i);
  }
  return t.finish("lemma2_random", trials, "exact");
}

std::pair<DensityMatrix, PositiveOperator> random_pair(Rng& rng, Index d) {
  DensityMatrix rho = density_hs(d, rng);
  DensityMatrix base = density_hs(d, rng);
  const double scale = rng.uniform(0.5, 2.0);
  PositiveOperator omega = PositiveOperator::trusted(scale * base.matrix(), 0.0);
  return {std::move(rho), std::move(omega)};
}

CheckReport check_tail_decomposition(const CheckParams& p) {
  const int trials = p.trials.value_or(200);
  const std::vector<Index> dims =
      p.dims.empty() ? std::vector<Index>{2, 3, 4, 8} : p.dims;
  const std::vector<double> scales{0.5, 1.0, 2.0, 10.0};
  MarginTracker t(p.tolerance.value_or(kExactTol));
  for (int i = 0; i < trials; ++i) {
    const std::uint64_t s = split_seed(p.seed, i);
    Rng rng(s);
    const Index d = pick(dims, i);
    auto [rho, omega] = random_pair(rng, d);
    std::vector<TailValues> tails;
    for (double sc : scales) tails.push_back(all_tails(ScaledPair(rho, omega, sc)));
    for (std::size_t a = 0; a < scales.size(); ++a)
      for (std::size_t b = 0; b < scales.size(); ++b) {
        const double rhs = tails[a].positive + scales[a] * tails[b].omega;
        const double lhs = tails[b].rho;
        t.add((rhs - lhs) / (1.0 + std::abs(rhs)), s, i);
      }
  }
  return t.finish("tail_decomposition", trials, "exact");
}

CheckReport check_omega_tail_bound(const CheckParams& p) {
  const int trials = p.trials.value_or(200);
  const std::vector<Index> dims =
      p.dims.empty() ? std::vector<Index>{2, 3, 4, 8} : p.dims;
  const std::vector<double> scales{0.5, 1.0, 2.0, 10.0};
  MarginTracker t(p.tolerance.value_or(1e-12));
  for (int i = 0; i < trials; ++i) {
    const std::uint64_t s = split_seed(p.seed, i);
    Rng rng(s);
    const Index d = pick(dims, i);
    auto [rho, omega] = random_pair(rng, d);
    for (double sc : scales) {
      const double w = omega_tail(ScaledPair(rho, omega, sc));
      t.add(rho.trace() / sc - w, s, i);
    }
  }
  return t.finish("omega_tail_bound", trials, "exact");
}

CheckReport check_entropy_bounds(const CheckParams& p) {
  const int trials = p.trials.value_or(10);
  const std::vector<Index> dims = p.dims.empty() ? std::vector<Index>{2, 3, 4} : p.dims;
  const std::vector<int> n_grid =
      p.n_grid.empty() ? std::vector<int>{1, 2, 3, 4, 6} : p.n_grid;
  const std::vector<double> gammas{0.01, 0.1, 1.0};
  MarginTracker t(p.tolerance.value_or(kExactTol));
  for (int i = 0; i < trials; ++i) {
    const std::uint64_t s = split_seed(p.seed, i);
    Rng rng(s);
    const Index d = pick(dims, i);
    const DensityMatrix rho = density_hs(d, rng);
    const RealVector spec_rho = eigvals_hermitian(rho.hermitian());
    const RealVector ones = RealVector::Ones(d);

    for (int n : n_grid) {
      // {rho_n >= e^{n gamma} I} vanishes exactly for gamma > 0.
      for (double g : gammas) {
        const std::int64_t rank = typeclass_projector_rank(spec_rho, ones, n, g);
        t.add(-static_cast<double>(rank), s, i);
        if (std::pow(static_cast<double>(d), n) <= 64.0) {
          const DensityMatrix rn = tensor_power(rho, n);
          const HermitianOperator scaled(exp_clamped(n * g) *
                                         Matrix::Identity(rn.dim(), rn.dim()));
          const PositiveOperator proj =
              spectral_projector(rn.hermitian(), scaled, Relation::Geq);
          t.add(-std::round(proj.trace()), s, i);
        }
      }
      // Estimates confined to [-|ln eps|/n, ln d + |ln eps|/n].
      const RateRecord r = entropy_record(rho, n);
      const double band = std::abs(std::log(kEpsilon)) / n;
      const double fuzz = 2.0 * kGammaTol;
      t.add(r.inf_thresh + band + fuzz, s, i);
      t.add(r.sup_thresh + band + fuzz, s, i);
      t.add(std::log(static_cast<double>(d)) + band + fuzz - r.sup_thresh, s, i);
      t.add(std::log(static_cast<double>(d)) + band + fuzz - r.inf_thresh, s, i);
    }
  }
  return t.finish("entropy_bounds", trials, "exact");
}

CheckReport check_pure_reduced_spectra(const CheckParams& p) {
  const int trials = p.trials.value_or(100);
  const Index da = p.dims.size() > 0 ? p.dims[0] : 3;
  const Index db = p.dims.size() > 1 ? p.dims[1] : 3;
  MarginTracker t(p.tolerance.value_or(1e-10));
  const SubsystemShape shape = bipartite_shape(da, db);
  for (int i = 0; i < trials; ++i) {
    const std::uint64_t s = split_seed(p.seed, i);
    Rng rng(s);
    const DensityMatrix psi = pure_haar(da * db, rng);
    const RealVector ea = eigvals_hermitian(
        HermitianOperator(partial_trace(psi.matrix(), shape, {"A"})));
    const RealVector eb = eigvals_hermitian(
        HermitianOperator(partial_trace(psi.matrix(), shape, {"B"})));
    // Compare descending; the shorter spectrum is padded with zeros.
    std::vector<double> va(ea.data(), ea.data() + ea.size());
    std::vector<double> vb(eb.data(), eb.data() + eb.size());
    std::sort(va.rbegin(), va.rend());
    std::sort(vb.rbegin(), vb.rend());
    const std::size_t m = std::max(va.size(), vb.size());
    va.resize(m, 0.0);
    vb.resize(m, 0.0);
    double gap = 0.0;
    for (std::size_t k = 0; k < m; ++k) gap = std::max(gap, std::abs(va[k] - vb[k]));
    t.add(-gap, s, i);
  }
  return t.finish("pure_reduced_spectra", trials, "exact");
}

CheckReport check_classical_positive(const CheckParams& p) {
  const int trials = p.trials.value_or(100);
  const Index da = p.dims.size() > 0 ? p.dims[0] : 2;
  const Index db = p.dims.size() > 1 ? p.dims[1] : 2;
  const std::vector<int> n_grid =
      p.n_grid.empty() ? std::vector<int>{1, 2, 3, 4, 5, 6} : p.n_grid;
  const std::vector<double> deltas{0.5, 0.1, 0.01};  // gamma = -delta < 0
  MarginTracker t(p.tolerance.value_or(kExactTol));
  for (int i = 0; i < trials; ++i) {
    const std::uint64_t s = split_seed(p.seed, i);
    Rng rng(s);
    const RealVector joint = dirichlet_uniform(da * db, rng);
    // q holds the diagonal of I (x) rho_B in the same cell order.
    RealVector q(da * db);
    for (Index x = 0; x < da; ++x)
      for (Index y = 0; y < db; ++y) {
        double col = 0.0;
        for (Index k = 0; k < da; ++k) col += joint[k * db + y];
        q[x * db + y] = col;
      }
    for (int n : n_grid)
      for (double delta : deltas) {
        const std::int64_t rank = typeclass_projector_rank(joint, q, n, delta);
        t.add(-static_cast<double>(rank), s, i);
        if (std::pow(static_cast<double>(da * db), n) <= 64.0) {
          const DensityMatrix rho = DensityMatrix::diagonal(joint);
          const DensityMatrix rn = tensor_power(rho, n);
          Matrix w1 = Matrix::Zero(da * db, da * db);
          for (Index c = 0; c < da * db; ++c) w1(c, c) = q[c];
          const Matrix wn = kron_power(w1, n);
          const HermitianOperator scaled(exp_clamped(n * delta) * wn);
          const PositiveOperator proj =
              spectral_projector(rn.hermitian(), scaled, Relation::Geq);
          t.add(-std::round(proj.trace()), s, i);
        }
      }
  }
  return t.finish("classical_positive", trials, "exact");
}

// ---------------------------------------------------------------------
// Chain-bound replays.
// ---------------------------------------------------------------------

double tie_tol_for(const RealVector& diffs) {
  return 1e-12 * (1.0 + (diffs.size() ? diffs.cwiseAbs().maxCoeff() : 0.0));
}

struct ChainMargins {
  double lhs_margin;    // Tr[P1 Pi] >= 0, normalized
  double bound_margin;  // bound - Tr[P1 Pi], normalized
};

// Shared state for one (rho_AB, n): the block state, the reference
// operator I (x) rho_B, their eigendecompositions, and caches keyed by
// the scale values appearing in the grid.
class ChainBoundWorkspace {
public:
  ChainBoundWorkspace(const DensityMatrix& rho_ab, const SubsystemShape& shape, int n)
      : n_(n), shapeN_(shape.power(n)) {
    if (shape.factors() != 2)
      throw std::invalid_argument("chain bound: shape must be bipartite");
    rhoN_ = tensor_power(rho_ab, n).matrix();
    const Matrix rho_b1 = partial_trace(rho_ab.matrix(), shape, {shape.labels[1]});
    rhoBN_ = kron_power(rho_b1, n);
    w_ = embed_with_identity(rhoBN_, shapeN_, {shape.labels[1]});
    rho_spec_ = eig_hermitian(HermitianOperator(rhoN_));
    b_spec_ = eig_hermitian(HermitianOperator(rhoBN_));
  }

  ChainMargins evaluate(double alpha, double beta, ChainVariant variant) {
    const double c_beta = exp_clamped(-n_ * beta);
    const Matrix& p2 = p2_for(c_beta);

    if (variant == ChainVariant::Prop9) {
      const double c1 = exp_clamped(-n_ * (alpha - beta));
      const Spectrum& pi = pi_for(c1);
      const double tau = tie_tol_for(pi.eigenvalues);
      double lhs = 0.0;
      std::vector<Index> sel;
      for (Index i = 0; i < pi.eigenvalues.size(); ++i)
        if (pi.eigenvalues[i] >= -tau) {
          lhs += pi.eigenvalues[i];
          sel.push_back(i);
        }

      const double c2 = exp_clamped(-n_ * alpha);
      double term_a = 0.0;
      for (Index i = 0; i < rho_spec_.eigenvalues.size(); ++i)
        term_a += std::max(rho_spec_.eigenvalues[i] - c2, 0.0);

      const double term_b = b_mass(c_beta, false);

      const Matrix m = p2 * rhoN_ * p2;
      double term_c = 0.0;
      for (Index i : sel) {
        const auto v = pi.eigenvectors.col(i);
        term_c += (v.adjoint() * m * v).real()(0, 0);
      }

      const double bound =
          term_a + term_b +
          2.0 * std::sqrt(std::max(term_b, 0.0) * std::max(term_c, 0.0));
      const double norm1 = 1.0 + pi.eigenvalues.cwiseAbs().maxCoeff();
      return {lhs / norm1, (bound - lhs) / (1.0 + std::abs(bound) + std::abs(lhs))};
    }

    // Prop12: P1 = {rho_AB >= c12 I}; the reference operator moves into
    // the positive-part term.
    const double c12 = exp_clamped(-n_ * (alpha + beta));
    const RealVector diff = rho_spec_.eigenvalues.array() - c12;
    const double tau = tie_tol_for(diff);
    double lhs = 0.0;
    std::vector<Index> sel;
    for (Index i = 0; i < diff.size(); ++i)
      if (diff[i] >= -tau) {
        lhs += diff[i];
        sel.push_back(i);
      }

    const double c_alpha = exp_clamped(-n_ * alpha);
    double term_a = 0.0;
    {
      const RealVector& ev = pos_for(c_alpha);
      for (Index i = 0; i < ev.size(); ++i) term_a += std::max(ev[i], 0.0);
    }

    const double term_b = b_mass(c_beta, true);

    const Matrix p2bar = Matrix::Identity(w_.rows(), w_.cols()) - p2;
    const Matrix m = p2bar * rhoN_ * p2bar;
    double term_c = 0.0;
    for (Index i : sel) {
      const auto v = rho_spec_.eigenvectors.col(i);
      term_c += (v.adjoint() * m * v).real()(0, 0);
    }

    const double bound = term_b + term_a +
                         2.0 * std::sqrt(std::max(term_b, 0.0) * std::max(term_c, 0.0));
    const double norm1 = 1.0 + diff.cwiseAbs().maxCoeff();
    return {lhs / norm1, (bound - lhs) / (1.0 + std::abs(bound) + std::abs(lhs))};
  }

  // Projector invariants: P2 idempotent (so P2 and I - P2 are a
  // complementary pair by construction).
  double projector_defect(double beta) {
    const double c_beta = exp_clamped(-n_ * beta);
    const Matrix& p2 = p2_for(c_beta);
    return max_abs(p2 * p2 - p2);
  }

private:
  const Spectrum& pi_for(double c1) {
    auto it = pi_cache_.find(c1);
    if (it == pi_cache_.end())
      it = pi_cache_.emplace(c1, eig_hermitian(HermitianOperator(rhoN_ - c1 * w_)))
               .first;
    return it->second;
  }

  const RealVector& pos_for(double c) {
    auto it = pos_cache_.find(c);
    if (it == pos_cache_.end())
      it = pos_cache_.emplace(c, eigvals_hermitian(HermitianOperator(rhoN_ - c * w_)))
               .first;
    return it->second;
  }

  const Matrix& p2_for(double c_beta) {
    auto it = p2_cache_.find(c_beta);
    if (it != p2_cache_.end()) return it->second;
    const RealVector diff = b_spec_.eigenvalues.array() - c_beta;
    const double tau = tie_tol_for(diff);
    Matrix pb = Matrix::Zero(rhoBN_.rows(), rhoBN_.cols());
    for (Index i = 0; i < diff.size(); ++i)
      if (diff[i] >= -tau)
        pb += b_spec_.eigenvectors.col(i) * b_spec_.eigenvectors.col(i).adjoint();
    Matrix p2 = embed_with_identity(pb, shapeN_, {shapeN_.labels[1]});
    return p2_cache_.emplace(c_beta, std::move(p2)).first->second;
  }

  // Tr[{rho_B >= c} rho_B] (at_least) or Tr[{rho_B < c} rho_B].
  double b_mass(double c_beta, bool at_least) const {
    const RealVector diff = b_spec_.eigenvalues.array() - c_beta;
    const double tau = tie_tol_for(diff);
    double mass = 0.0;
    for (Index i = 0; i < diff.size(); ++i) {
      const bool in = diff[i] >= -tau;
      if (in == at_least) mass += b_spec_.eigenvalues[i];
    }
    return mass;
  }

  int n_;
  SubsystemShape shapeN_;
  Matrix rhoN_, rhoBN_, w_;
  Spectrum rho_spec_, b_spec_;
  std::map<double, Spectrum> pi_cache_;
  std::map<double, RealVector> pos_cache_;
  std::map<double, Matrix> p2_cache_;
};

CheckReport chain_bound_check(const CheckParams& p, ChainVariant variant,
                              const char* id) {
  const int trials = p.trials.value_or(50);
  const std::vector<int> n_grid = p.n_grid.empty() ? std::vector<int>{1, 2, 3} : p.n_grid;
  const Index da = p.dims.size() > 0 ? p.dims[0] : 2;
  const Index db = p.dims.size() > 1 ? p.dims[1] : 2;
  MarginTracker t(p.tolerance.value_or(kExactTol));
  std::vector<double> axis;
  for (int k = 0; k < 9; ++k) axis.push_back(-1.0 + 0.25 * k);
  const SubsystemShape shape = bipartite_shape(da, db);
  for (int i = 0; i < trials; ++i) {
    const std::uint64_t s = split_seed(p.seed, i);
    Rng rng(s);
    const DensityMatrix rho = density_hs(da * db, rng);
    for (int n : n_grid) {
      ChainBoundWorkspace ws(rho, shape, n);
      for (double alpha : axis)
        for (double beta : axis) {
          const ChainMargins m = ws.evaluate(alpha, beta, variant);
          t.add(m.lhs_margin, s, i);
          t.add(m.bound_margin, s, i);
        }
    }
  }
  return t.finish(id, trials, "exact");
}

// ---------------------------------------------------------------------
// Estimate-level checks.
// ---------------------------------------------------------------------

CheckReport check_divergence_order(const CheckParams& p) {
  const int trials = p.trials.value_or(10);
  const std::vector<Index> dims = p.dims.empty() ? std::vector<Index>{2, 3} : p.dims;
  const std::vector<int> n_grid =
      p.n_grid.empty() ? std::vector<int>{1, 2, 3, 4} : p.n_grid;
  MarginTracker t(p.tolerance.value_or(0.0));
  const double fuzz = 2.0 * kGammaTol + 1e-12;
  for (int i = 0; i < trials; ++i) {
    const std::uint64_t s = split_seed(p.seed, i);
    Rng rng(s);
    const Index d = pick(dims, i);
    const DensityMatrix rho = density_hs(d, rng);
    const DensityMatrix omega = density_hs(d, rng);
    for (int n : n_grid) {
      const RateRecord r = divergence_record(rho, omega.positive(), n);
      t.add(r.sup_thresh - r.midpoint + fuzz, s, i);
      t.add(r.midpoint - r.inf_thresh + fuzz, s, i);
    }
  }
  return t.finish("divergence_order", trials, "estimate");
}

CheckReport check_cptp_monotonicity(const CheckParams& p) {
  const int trials = p.trials.value_or(5);
  const std::vector<Index> dims = p.dims.empty() ? std::vector<Index>{2, 4} : p.dims;
  const std::vector<int> n_grid = p.n_grid.empty() ? std::vector<int>{1, 2, 3} : p.n_grid;
  MarginTracker t(p.tolerance.value_or(0.0));
  for (int i = 0; i < trials; ++i) {
    const std::uint64_t s = split_seed(p.seed, i);
    Rng rng(s);
    const Index d = pick(dims, i);
    const DensityMatrix rho = density_hs(d, rng);
    const DensityMatrix omega = density_hs(d, rng);
    const KrausChannel ch = random_channel(d, 2, rng.next_u64());
    const DensityMatrix rho_img = apply_channel(ch, rho);
    const PositiveOperator omega_img = apply_channel(ch, omega.positive());
    for (int n : n_grid) {
      const RateRecord orig = divergence_record(rho, omega.positive(), n);
      const RateRecord img = divergence_record(rho_img, omega_img, n);
      t.add(orig.midpoint + estimate_slack(n) - img.midpoint, s, i);
    }
  }
  return t.finish("cptp_monotonicity", trials, "estimate");
}

CheckReport check_divergence_nonneg(const CheckParams& p) {
  const int trials = p.trials.value_or(10);
  const std::vector<Index> dims = p.dims.empty() ? std::vector<Index>{2, 3, 4} : p.dims;
  const std::vector<int> n_grid = p.n_grid.empty() ? std::vector<int>{1, 2, 3} : p.n_grid;
  MarginTracker t(p.tolerance.value_or(0.0));
  for (int i = 0; i < trials; ++i) {
    const std::uint64_t s = split_seed(p.seed, i);
    Rng rng(s);
    const Index d = pick(dims, i);
    const DensityMatrix rho = density_hs(d, rng);
    const DensityMatrix omega = density_hs(d, rng);
    for (int n : n_grid) {
      const RateRecord r = divergence_record(rho, omega.positive(), n);
      t.add(r.midpoint + std::abs(std::log(kEpsilon)) / n + kGammaTol, s, i);
    }
  }
  return t.finish("divergence_nonneg", trials, "estimate");
}

CheckReport check_unital_increase(const CheckParams& p) {
  const int trials = p.trials.value_or(5);
  const std::vector<Index> dims = p.dims.empty() ? std::vector<Index>{2, 3, 4} : p.dims;
  const std::vector<int> n_grid =
      p.n_grid.empty() ? std::vector<int>{1, 2, 3, 4} : p.n_grid;
  MarginTracker t(p.tolerance.value_or(0.0));
  for (int i = 0; i < trials; ++i) {
    const std::uint64_t s = split_seed(p.seed, i);
    Rng rng(s);
    const Index d = pick(dims, i);
    const DensityMatrix rho = density_hs(d, rng);
    const KrausChannel ch = random_mixed_unitary(d, 3, rng.next_u64());
    if (!is_unital(ch).unital)
      throw std::logic_error("unital_increase: sampled channel is not unital");
    const DensityMatrix img = apply_channel(ch, rho);
    t.add(vn_entropy(img) - vn_entropy(rho) + kOracleTol, s, i);
    for (int n : n_grid) {
      const RateRecord a = entropy_record(rho, n);
      const RateRecord b = entropy_record(img, n);
      t.add(b.sup_thresh - a.sup_thresh + estimate_slack(n), s, i);
      t.add(b.inf_thresh - a.inf_thresh + estimate_slack(n), s, i);
    }
  }
  return t.finish("unital_increase", trials, "estimate");
}

CheckReport check_conditioning_reduces(const CheckParams& p) {
  const int trials = p.trials.value_or(3);
  const std::vector<int> n_grid = p.n_grid.empty() ? std::vector<int>{1, 2} : p.n_grid;
  MarginTracker t(p.tolerance.value_or(0.0));
  const SubsystemShape shape3 = tripartite_shape(2, 2, 2);
  const SubsystemShape shape2 = bipartite_shape(2, 2);
  for (int i = 0; i < trials; ++i) {
    const std::uint64_t s = split_seed(p.seed, i);
    Rng rng(s);
    const DensityMatrix rho_abc = density_hs(8, rng);
    const DensityMatrix rho_ab = partial_trace(rho_abc, shape3, {"A", "B"});
    const DensityMatrix rho_a = partial_trace(rho_abc, shape3, {"A"});

    const double o_abc = vn_conditional_entropy(rho_abc, shape3, {"B", "C"});
    const double o_ab = vn_conditional_entropy(rho_ab, shape2, {"B"});
    const double o_a = vn_entropy(rho_a);
    t.add(o_ab - o_abc + kOracleTol, s, i);
    t.add(o_a - o_ab + kOracleTol, s, i);

    for (int n : n_grid) {
      const RateRecord c_abc = entropic_record(
          rho_abc, shape3, EntropicKind::conditional(shape3, {"B", "C"}), n);
      const RateRecord c_ab =
          entropic_record(rho_ab, shape2, EntropicKind::conditional(shape2, {"B"}), n);
      const RateRecord e_a = entropy_record(rho_a, n);
      const double slack = estimate_slack(n);
      t.add(c_ab.sup_thresh - c_abc.sup_thresh + slack, s, i);
      t.add(c_ab.inf_thresh - c_abc.inf_thresh + slack, s, i);
      t.add(e_a.sup_thresh - c_ab.sup_thresh + slack, s, i);
      t.add(e_a.inf_thresh - c_ab.inf_thresh + slack, s, i);
    }
  }
  return t.finish("conditioning_reduces", trials, "estimate");
}

CheckReport check_chain_rules_iid(const CheckParams& p) {
  const int trials = p.trials.value_or(3);
  const std::vector<int> n_grid =
      p.n_grid.empty() ? std::vector<int>{1, 2, 3, 4} : p.n_grid;
  MarginTracker t(p.tolerance.value_or(0.0));
  const SubsystemShape shape = bipartite_shape(2, 2);
  for (int i = 0; i < trials; ++i) {
    const std::uint64_t s = split_seed(p.seed, i);
    Rng rng(s);
    const DensityMatrix rho_ab = density_hs(4, rng);
    const DensityMatrix rho_a = partial_trace(rho_ab, shape, {"A"});
    const DensityMatrix rho_b = partial_trace(rho_ab, shape, {"B"});

    // Oracle identity S(A|B) = S(AB) - S(B).
    const double o_cond = vn_conditional_entropy(rho_ab, shape, {"B"});
    const double o_ab = vn_entropy(rho_ab);
    const double o_b = vn_entropy(rho_b);
    t.add(kOracleTol - std::abs(o_cond - (o_ab - o_b)), s, i);

    for (int n : n_grid) {
      const RateRecord cond =
          entropic_record(rho_ab, shape, EntropicKind::conditional(shape, {"B"}), n);
      const RateRecord ab = entropy_record(rho_ab, n);
      const RateRecord a = entropy_record(rho_a, n);
      const RateRecord b = entropy_record(rho_b, n);
      const double slack = estimate_slack(n);
      // sup_thresh holds the sup-rate estimate, inf_thresh the inf-rate.
      t.add(cond.inf_thresh - (ab.inf_thresh - b.sup_thresh) + slack, s, i);
      t.add(cond.sup_thresh - (ab.sup_thresh - b.sup_thresh) + slack, s, i);
      t.add(cond.sup_thresh - (ab.inf_thresh - b.inf_thresh) + slack, s, i);
      t.add((ab.sup_thresh - b.inf_thresh) - cond.sup_thresh + slack, s, i);
      t.add((ab.inf_thresh - b.inf_thresh) - cond.inf_thresh + slack, s, i);
      t.add((ab.sup_thresh - b.sup_thresh) - cond.inf_thresh + slack, s, i);
      t.add(cond.inf_thresh + a.sup_thresh + slack, s, i);
      t.add(std::log(2.0) + slack - cond.sup_thresh, s, i);
    }
  }
  return t.finish("chain_rules_iid", trials, "estimate");
}

CheckReport check_ssa_iid(const CheckParams& p) {
  const int trials = p.trials.value_or(4);
  const std::vector<int> n_grid =
      p.n_grid.empty() ? std::vector<int>{1, 2, 3, 4} : p.n_grid;
  MarginTracker t(p.tolerance.value_or(0.0));
  const SubsystemShape shape3 = tripartite_shape(2, 2, 2);
  for (int i = 0; i < trials; ++i) {
    const std::uint64_t s = split_seed(p.seed, i);
    Rng rng(s);
    const DensityMatrix rho_abc = density_hs(8, rng);
    const DensityMatrix rho_ab = partial_trace(rho_abc, shape3, {"A", "B"});
    const DensityMatrix rho_bc = partial_trace(rho_abc, shape3, {"B", "C"});
    const DensityMatrix rho_b = partial_trace(rho_abc, shape3, {"B"});

    const double o = vn_entropy(rho_ab) + vn_entropy(rho_bc) - vn_entropy(rho_abc) -
                     vn_entropy(rho_b);
    t.add(o + kOracleTol, s, i);

    for (int n : n_grid) {
      const RateRecord abc = entropy_record(rho_abc, n);
      const RateRecord ab = entropy_record(rho_ab, n);
      const RateRecord bc = entropy_record(rho_bc, n);
      const RateRecord b = entropy_record(rho_b, n);
      const double slack = estimate_slack(n);
      t.add(ab.sup_thresh + bc.sup_thresh - abc.inf_thresh - b.sup_thresh + slack, s, i);
      t.add(ab.sup_thresh + bc.sup_thresh - abc.sup_thresh - b.inf_thresh + slack, s, i);
      t.add(ab.sup_thresh + bc.inf_thresh - abc.inf_thresh - b.inf_thresh + slack, s, i);
      t.add(ab.inf_thresh + bc.sup_thresh - abc.inf_thresh - b.inf_thresh + slack, s, i);
    }
  }
  return t.finish("ssa_iid", trials, "estimate");
}

CheckReport check_subadd_araki_lieb(const CheckParams& p) {
  const int trials = p.trials.value_or(4);
  const std::vector<int> n_grid =
      p.n_grid.empty() ? std::vector<int>{1, 2, 3, 4} : p.n_grid;
  MarginTracker t(p.tolerance.value_or(0.0));
  const SubsystemShape shape = bipartite_shape(2, 2);
  for (int i = 0; i < trials; ++i) {
    const std::uint64_t s = split_seed(p.seed, i);
    Rng rng(s);
    const DensityMatrix rho_ab = density_hs(4, rng);
    const DensityMatrix rho_a = partial_trace(rho_ab, shape, {"A"});
    const DensityMatrix rho_b = partial_trace(rho_ab, shape, {"B"});

    const double s_ab = vn_entropy(rho_ab);
    const double s_a = vn_entropy(rho_a);
    const double s_b = vn_entropy(rho_b);
    t.add(s_a + s_b - s_ab + kOracleTol, s, i);
    t.add(s_ab - std::abs(s_a - s_b) + kOracleTol, s, i);

    for (int n : n_grid) {
      const RateRecord ab = entropy_record(rho_ab, n);
      const RateRecord a = entropy_record(rho_a, n);
      const RateRecord b = entropy_record(rho_b, n);
      const double slack = estimate_slack(n);
      t.add(a.sup_thresh + b.sup_thresh - ab.sup_thresh + slack, s, i);
      t.add(a.inf_thresh + b.sup_thresh - ab.inf_thresh + slack, s, i);
      t.add(a.sup_thresh + b.inf_thresh - ab.inf_thresh + slack, s, i);
      t.add(ab.sup_thresh - std::abs(a.sup_thresh - b.sup_thresh) + slack, s, i);
      t.add(ab.inf_thresh - (a.inf_thresh - b.sup_thresh) + slack, s, i);
      t.add(ab.inf_thresh - (b.inf_thresh - a.sup_thresh) + slack, s, i);
    }
  }
  return t.finish("subadd_araki_lieb_iid", trials, "estimate");
}

CheckReport check_classical_max(const CheckParams& p) {
  const int trials = p.trials.value_or(10);
  const Index da = p.dims.size() > 0 ? p.dims[0] : 2;
  const Index db = p.dims.size() > 1 ? p.dims[1] : 2;
  const std::vector<int> n_grid =
      p.n_grid.empty() ? std::vector<int>{1, 2, 3, 4} : p.n_grid;
  MarginTracker t(p.tolerance.value_or(0.0));
  const SubsystemShape shape = bipartite_shape(da, db);
  for (int i = 0; i < trials; ++i) {
    const std::uint64_t s = split_seed(p.seed, i);
    Rng rng(s);
    const DensityMatrix rho_ab = DensityMatrix::diagonal(dirichlet_uniform(da * db, rng));
    const DensityMatrix rho_a = partial_trace(rho_ab, shape, {"A"});
    const DensityMatrix rho_b = partial_trace(rho_ab, shape, {"B"});

    const double s_ab = vn_entropy(rho_ab);
    t.add(s_ab - std::max(vn_entropy(rho_a), vn_entropy(rho_b)) + kOracleTol, s, i);

    for (int n : n_grid) {
      const RateRecord ab = entropy_record(rho_ab, n);
      const RateRecord a = entropy_record(rho_a, n);
      const RateRecord b = entropy_record(rho_b, n);
      const double slack = estimate_slack(n);
      t.add(ab.sup_thresh - std::max(a.sup_thresh, b.sup_thresh) + slack, s, i);
      t.add(ab.inf_thresh - std::max(a.inf_thresh, b.inf_thresh) + slack, s, i);
    }
  }
  return t.finish("classical_max", trials, "estimate");
}

KrausChannel lift_to_part_b(const KrausChannel& ch, Index da) {
  std::vector<Matrix> ks;
  const Matrix id = Matrix::Identity(da, da);
  for (const auto& k : ch.ops()) ks.push_back(kron(id, k));
  return KrausChannel(da * ch.dim_in(), da * ch.dim_out(), std::move(ks));
}

CheckReport check_mutual_props(const CheckParams& p) {
  const int trials = p.trials.value_or(3);
  const std::vector<int> n_grid = p.n_grid.empty() ? std::vector<int>{1, 2, 3} : p.n_grid;
  MarginTracker t(p.tolerance.value_or(0.0));
  const SubsystemShape shape = bipartite_shape(2, 2);
  const SubsystemShape shape3 = tripartite_shape(2, 2, 2);
  const EntropicKind mut = EntropicKind::mutual(shape, {"A"}, {"B"});
  const EntropicKind mut3 = EntropicKind::mutual(shape3, {"A"}, {"B", "C"});
  for (int i = 0; i < trials; ++i) {
    const std::uint64_t s = split_seed(p.seed, i);
    Rng rng(s);
    const DensityMatrix rho_ab = density_hs(4, rng);
    const KrausChannel ch = random_channel(2, 2, rng.next_u64());
    const DensityMatrix rho_img = apply_channel(lift_to_part_b(ch, 2), rho_ab);
    const DensityMatrix rho_abc = density_hs(8, rng);
    const DensityMatrix rho_ab_red = partial_trace(rho_abc, shape3, {"A", "B"});

    const double o = vn_mutual_information(rho_ab, shape, {"A"}, {"B"});
    const double o_img = vn_mutual_information(rho_img, shape, {"A"}, {"B"});
    const double o_abc = vn_mutual_information(rho_abc, shape3, {"A"}, {"B", "C"});
    const double o_red = vn_mutual_information(rho_ab_red, shape, {"A"}, {"B"});
    t.add(o + kOracleTol, s, i);
    t.add(o - o_img + kOracleTol, s, i);
    t.add(o_abc - o_red + kOracleTol, s, i);

    for (int n : n_grid) {
      const double slack = estimate_slack(n);
      const RateRecord m = entropic_record(rho_ab, shape, mut, n);
      const RateRecord mi = entropic_record(rho_img, shape, mut, n);
      t.add(m.inf_thresh + std::abs(std::log(kEpsilon)) / n + kGammaTol, s, i);
      t.add(m.sup_thresh - m.inf_thresh + 2.0 * kGammaTol, s, i);
      t.add(m.sup_thresh - mi.sup_thresh + slack, s, i);
      t.add(m.inf_thresh - mi.inf_thresh + slack, s, i);
      if (n <= 2) {
        const RateRecord big = entropic_record(rho_abc, shape3, mut3, n);
        const RateRecord small = entropic_record(rho_ab_red, shape, mut, n);
        t.add(big.sup_thresh - small.sup_thresh + slack, s, i);
        t.add(big.inf_thresh - small.inf_thresh + slack, s, i);
      }
    }
  }
  return t.finish("mutual_props", trials, "estimate");
}

CheckReport check_mutual_chain_iid(const CheckParams& p) {
  const int trials = p.trials.value_or(3);
  const std::vector<int> n_grid = p.n_grid.empty() ? std::vector<int>{1, 2, 3} : p.n_grid;
  MarginTracker t(p.tolerance.value_or(0.0));
  const SubsystemShape shape = bipartite_shape(2, 2);
  const EntropicKind mut = EntropicKind::mutual(shape, {"A"}, {"B"});
  const EntropicKind cond = EntropicKind::conditional(shape, {"B"});
  for (int i = 0; i < trials; ++i) {
    const std::uint64_t s = split_seed(p.seed, i);
    Rng rng(s);
    const DensityMatrix rho_ab = density_hs(4, rng);
    const DensityMatrix rho_a = partial_trace(rho_ab, shape, {"A"});

    const double o_m = vn_mutual_information(rho_ab, shape, {"A"}, {"B"});
    const double o_a = vn_entropy(rho_a);
    const double o_c = vn_conditional_entropy(rho_ab, shape, {"B"});
    t.add(kOracleTol - std::abs(o_m - (o_a - o_c)), s, i);

    for (int n : n_grid) {
      const RateRecord m = entropic_record(rho_ab, shape, mut, n);
      const RateRecord c = entropic_record(rho_ab, shape, cond, n);
      const RateRecord a = entropy_record(rho_a, n);
      const double slack = estimate_slack(n);
      t.add((a.sup_thresh - c.inf_thresh) - m.sup_thresh + slack, s, i);
      t.add(m.sup_thresh - (a.sup_thresh - c.sup_thresh) + slack, s, i);
      t.add(m.sup_thresh - (a.inf_thresh - c.inf_thresh) + slack, s, i);
      t.add(m.inf_thresh - (a.inf_thresh - c.sup_thresh) + slack, s, i);
      t.add((a.sup_thresh - c.sup_thresh) - m.inf_thresh + slack, s, i);
      t.add((a.inf_thresh - c.inf_thresh) - m.inf_thresh + slack, s, i);
    }
  }
  return t.finish("mutual_chain_iid", trials, "estimate");
}

using CheckFn = std::function<CheckReport(const CheckParams&)>;

const std::vector<std::pair<std::string, CheckFn>>& registry() {
  static const std::vector<std::pair<std::string, CheckFn>> reg = {
      {"lemma1_random", check_lemma1},
      {"lemma2_random", check_lemma2},
      {"tail_decomposition", check_tail_decomposition},
      {"omega_tail_bound", check_omega_tail_bound},
      {"divergence_order", check_divergence_order},
      {"cptp_monotonicity", check_cptp_monotonicity},
      {"divergence_nonneg", check_divergence_nonneg},
      {"entropy_bounds", check_entropy_bounds},
      {"unital_increase", check_unital_increase},
      {"pure_reduced_spectra", check_pure_reduced_spectra},
      {"conditioning_reduces", check_conditioning_reduces},
      {"chain_bound_prop9",
       [](const CheckParams& p) {
         return chain_bound_check(p, ChainVariant::Prop9, "chain_bound_prop9");
       }},
      {"chain_bound_prop12",
       [](const CheckParams& p) {
         return chain_bound_check(p, ChainVariant::Prop12, "chain_bound_prop12");
       }},
      {"chain_rules_iid", check_chain_rules_iid},
      {"ssa_iid", check_ssa_iid},
      {"subadd_araki_lieb_iid", check_subadd_araki_lieb},
      {"classical_positive", check_classical_positive},
      {"classical_max", check_classical_max},
      {"mutual_props", check_mutual_props},
      {"mutual_chain_iid", check_mutual_chain_iid},
  };
  return reg;
}

}  // namespace

std::vector<std::string> registered_checks() {
  std::vector<std::string> out;
  for (const auto& [id, fn] : registry()) out.push_back(id);
  return out;
}

CheckReport run_check(const std::string& check_id, const CheckParams& params) {
  for (const auto& [id, fn] : registry()) {
    if (id == check_id) {
      const auto start = std::chrono::steady_clock::now();
      CheckReport r = fn(params);
      const auto end = std::chrono::steady_clock::now();
      r.wall_time_ms = std::chrono::duration<double, std::milli>(end - start).count();
      return r;
    }
  }
  std::ostringstream os;
  os << "run_check: unknown check '" << check_id << "'; known:";
  for (const auto& [id, fn] : registry()) os << " " << id;
  throw std::invalid_argument(os.str());
}

CheckReport replay_chain_bound(const ChainBoundSpec& spec) {
  const auto start = std::chrono::steady_clock::now();
  ChainBoundWorkspace ws(spec.rho_ab, spec.shape, spec.n);
  if (ws.projector_defect(spec.beta) > kExactTol)
    throw std::logic_error("replay_chain_bound: projector not idempotent");
  const ChainMargins m = ws.evaluate(spec.alpha, spec.beta, spec.variant);
  MarginTracker t(kExactTol);
  t.add(m.lhs_margin, 0, 0);
  t.add(m.bound_margin, 0, 0);
  CheckReport r = t.finish(
      spec.variant == ChainVariant::Prop9 ? "chain_bound_prop9" : "chain_bound_prop12",
      1, "exact");
  const auto end = std::chrono::steady_clock::now();
  r.wall_time_ms = std::chrono::duration<double, std::milli>(end - start).count();
  return r;
}

nlohmann::ordered_json report_to_json(const CheckReport& report) {
  nlohmann::ordered_json j;
  j["check_id"] = report.check_id;
  j["pass"] = report.pass;
  j["trials"] = report.trials;
  j["worst_slack"] = report.worst_slack;
  j["tolerance"] = report.tolerance;
  j["level"] = report.level;
  j["witnesses"] = nlohmann::ordered_json::array();
  for (const auto& w : report.witnesses) {
    nlohmann::ordered_json jw;
    jw["seed"] = w.seed;
    jw["trial"] = w.trial;
    j["witnesses"].push_back(std::move(jw));
  }
  j["wall_time_ms"] = report.wall_time_ms;
  return j;
}

nlohmann::ordered_json reports_to_json(const std::vector<CheckReport>& reports) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& r : reports) arr.push_back(report_to_json(r));
  return arr;
}

}  // namespace qspectra
