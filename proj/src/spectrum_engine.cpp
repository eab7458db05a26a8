#include "qspectra/spectrum_engine.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "qspectra/operator_core.hpp"

namespace qspectra {

namespace {
constexpr double kExpClamp = 700.0;
constexpr double kCommuteTol = 1e-12;
}  // namespace

double exp_clamped(double x) {
  return std::exp(std::clamp(x, -kExpClamp, kExpClamp));
}

ScaledPair::ScaledPair(DensityMatrix r, PositiveOperator w, double scale, int block,
                       double g)
    : rho(std::move(r)), omega(std::move(w)), s(scale), n(block), gamma(g) {
  if (rho.dim() != omega.dim())
    throw std::invalid_argument("ScaledPair: rho and omega dims differ");
  if (!(s > 0.0) || !std::isfinite(s))
    throw std::invalid_argument("ScaledPair: scale must be finite and positive");
}

ScaledPair ScaledPair::from_gamma(DensityMatrix r, PositiveOperator w, int n,
                                  double gamma) {
  return ScaledPair(std::move(r), std::move(w), exp_clamped(n * gamma), n, gamma);
}

const char* tail_name(TailFunctional t) {
  switch (t) {
    case TailFunctional::Positive: return "positive_tail";
    case TailFunctional::Rho: return "rho_tail";
    case TailFunctional::Omega: return "omega_tail";
  }
  return "?";
}

// -- dense tails ---------------------------------------------------------

TailValues all_tails(const ScaledPair& pair) {
  const Matrix pi = pair.rho.matrix() - pair.s * pair.omega.matrix();
  const Spectrum spec = eig_hermitian(HermitianOperator(pi));
  const double tau = projector_tie_tol(spec.eigenvalues);

  TailValues out{0.0, 0.0, 0.0};
  for (Index i = 0; i < spec.eigenvalues.size(); ++i) {
    const double lambda = spec.eigenvalues[i];
    out.positive += std::max(lambda, 0.0);
    if (lambda >= -tau) {
      const auto v = spec.eigenvectors.col(i);
      out.rho += (v.adjoint() * pair.rho.matrix() * v).real()(0, 0);
      out.omega += (v.adjoint() * pair.omega.matrix() * v).real()(0, 0);
    }
  }
  return out;
}

double positive_tail(const ScaledPair& pair) {
  const RealVector ev = eigvals_hermitian(
      HermitianOperator(pair.rho.matrix() - pair.s * pair.omega.matrix()));
  double sum = 0.0;
  for (Index i = 0; i < ev.size(); ++i) sum += std::max(ev[i], 0.0);
  return sum;
}

double rho_tail(const ScaledPair& pair) { return all_tails(pair).rho; }
double omega_tail(const ScaledPair& pair) { return all_tails(pair).omega; }

// -- type-class engine -----------------------------------------------------

std::int64_t typeclass_count(int n, int d) {
  // C(n+d-1, d-1), bailing out once past the cap.
  double acc = 1.0;
  for (int i = 1; i <= d - 1; ++i)
    acc *= static_cast<double>(n + i) / static_cast<double>(i);
  if (acc > 2.0 * static_cast<double>(kTypeclassCap)) return -1;
  std::int64_t count = 1;
  for (int i = 1; i <= d - 1; ++i)
    count = count * static_cast<std::int64_t>(n + i) / i;
  return count;
}

namespace {

struct LogSumExp {
  double max = -std::numeric_limits<double>::infinity();
  double sum = 0.0;

  void add(double x) {
    if (x == -std::numeric_limits<double>::infinity()) return;
    if (x > max) {
      sum = sum * std::exp(max - x) + 1.0;
      max = x;
    } else {
      sum += std::exp(x - max);
    }
  }
  double value() const {
    if (sum == 0.0) return 0.0;
    return std::exp(max) * sum;
  }
};

// Per-type log-weights under p and q; -inf marks zero mass.
struct TypeWeights {
  double lm;  // log multinomial coefficient
  double lp;  // lm excluded: log prod p_i^{t_i}
  double lq;
};

template <typename Visit>
void for_each_type(int n, int d, Visit&& visit) {
  // Colex enumeration: the last coordinate advances slowest.
  std::vector<int> t(d, 0);
  t[0] = n;
  while (true) {
    visit(t);
    int j = 0;
    while (j < d - 1 && t[j] == 0) ++j;
    if (j == d - 1) break;
    const int v = t[j];
    t[j] = 0;
    t[0] = v - 1;
    t[j + 1] += 1;
  }
}

struct TypeclassProblem {
  int n, d;
  std::vector<double> log_p, log_q, lgamma_cache;
  double ngamma;

  TypeclassProblem(const RealVector& p, const RealVector& q, int n_, double gamma)
      : n(n_), d(static_cast<int>(p.size())) {
    if (p.size() != q.size())
      throw std::invalid_argument("typeclass: p and q lengths differ");
    if (d < 1) throw std::invalid_argument("typeclass: empty vectors");
    if (n < 1) throw std::invalid_argument("typeclass: n < 1");
    for (Index i = 0; i < p.size(); ++i) {
      if (p[i] < 0.0 || q[i] < 0.0)
        throw std::invalid_argument("typeclass: negative entries");
    }
    const std::int64_t count = typeclass_count(n, d);
    if (count < 0 || count > kTypeclassCap) {
      std::ostringstream os;
      os << "typeclass: C(" << n << "+" << d - 1 << "," << d - 1 << ") type classes"
         << " exceed cap " << kTypeclassCap;
      throw capacity_error(os.str());
    }
    log_p.resize(d);
    log_q.resize(d);
    for (int i = 0; i < d; ++i) {
      log_p[i] = p[i] > 0.0 ? std::log(p[i]) : -std::numeric_limits<double>::infinity();
      log_q[i] = q[i] > 0.0 ? std::log(q[i]) : -std::numeric_limits<double>::infinity();
    }
    lgamma_cache.resize(n + 2);
    for (int i = 0; i <= n + 1; ++i) lgamma_cache[i] = std::lgamma(i + 1.0);
    ngamma = n * gamma;
  }

  TypeWeights weights(const std::vector<int>& t) const {
    TypeWeights w;
    w.lm = lgamma_cache[n];
    w.lp = 0.0;
    w.lq = 0.0;
    for (int i = 0; i < d; ++i) {
      if (t[i] == 0) continue;
      w.lm -= lgamma_cache[t[i]];
      w.lp += t[i] * log_p[i];
      w.lq += t[i] * log_q[i];
    }
    return w;
  }

  // Signed magnitude of the type's eigenvalue p^t - s q^t, in a form safe
  // against underflow: log of |value| plus its sign.
  double eigen_log_abs(const TypeWeights& w, bool* negative) const {
    const double a = w.lp;                 // log p^t
    const double b = ngamma + w.lq;        // log s q^t
    const bool a_inf = std::isinf(a), b_inf = std::isinf(b);
    if (a_inf && b_inf) {
      *negative = false;
      return -std::numeric_limits<double>::infinity();
    }
    if (b_inf) {
      *negative = false;
      return a;
    }
    if (a_inf) {
      *negative = true;
      return b;
    }
    const double hi = std::max(a, b), lo = std::min(a, b);
    *negative = b > a;
    const double factor = -std::expm1(lo - hi);  // in [0,1]
    return factor > 0.0 ? hi + std::log(factor)
                        : -std::numeric_limits<double>::infinity();
  }
};

}  // namespace

TailValues typeclass_all(const RealVector& p, const RealVector& q, int n,
                         double gamma) {
  const TypeclassProblem prob(p, q, n, gamma);

  // Pass 1: the largest eigenvalue magnitude, fixing the tie tolerance the
  // same way the dense projector does.
  double max_log_abs = -std::numeric_limits<double>::infinity();
  for_each_type(n, prob.d, [&](const std::vector<int>& t) {
    const TypeWeights w = prob.weights(t);
    bool neg = false;
    max_log_abs = std::max(max_log_abs, prob.eigen_log_abs(w, &neg));
  });
  const double tau =
      1e-12 * (1.0 + (std::isinf(max_log_abs) ? 0.0 : exp_clamped(max_log_abs)));
  const double log_tau = std::log(tau);

  // Pass 2: accumulate the selected set {p^t - s q^t >= -tau}.
  LogSumExp pos, rho, omg;
  for_each_type(n, prob.d, [&](const std::vector<int>& t) {
    const TypeWeights w = prob.weights(t);
    bool neg = false;
    const double la = prob.eigen_log_abs(w, &neg);
    const bool in_set = !neg || la <= log_tau;
    if (!in_set) return;
    rho.add(w.lm + w.lp);
    omg.add(w.lm + w.lq);
    if (!neg) pos.add(w.lm + la);
  });
  return TailValues{pos.value(), rho.value(), omg.value()};
}

double typeclass_tail(const RealVector& p, const RealVector& q, int n, double gamma,
                      TailFunctional which) {
  const TailValues v = typeclass_all(p, q, n, gamma);
  switch (which) {
    case TailFunctional::Positive: return v.positive;
    case TailFunctional::Rho: return v.rho;
    case TailFunctional::Omega: return v.omega;
  }
  return 0.0;
}

std::int64_t typeclass_projector_rank(const RealVector& p, const RealVector& q,
                                      int n, double gamma) {
  // Exact rank of the true projector: membership decided by the sign of
  // the log-domain comparison, which stays sharp even when the product
  // eigenvalues underflow toward zero. (The tails above instead mirror
  // the dense engine's floating tie band, which deliberately absorbs
  // numerically-zero eigenvalues.)
  const TypeclassProblem prob(p, q, n, gamma);
  double rank = 0.0;
  for_each_type(n, prob.d, [&](const std::vector<int>& t) {
    const TypeWeights w = prob.weights(t);
    bool neg = false;
    prob.eigen_log_abs(w, &neg);
    if (!neg) rank += std::round(std::exp(w.lm));
  });
  // Multiplicities can dwarf the int64 range at large n; saturate.
  const double cap = 9.0e18;
  return static_cast<std::int64_t>(std::min(rank, cap));
}

// -- joint diagonalization ---------------------------------------------------

std::optional<std::pair<RealVector, RealVector>> joint_diagonalize(const Matrix& a,
                                                                   const Matrix& b) {
  const double scale =
      (1.0 + max_abs(a)) * (1.0 + max_abs(b));
  if (max_abs(a * b - b * a) > kCommuteTol * scale) return std::nullopt;

  const Spectrum sa = eig_hermitian(HermitianOperator(a));
  const Index d = a.rows();
  Matrix basis = sa.eigenvectors;

  // Refine degenerate clusters of a's spectrum against b.
  const double gap = 1e-9 * (1.0 + sa.eigenvalues.cwiseAbs().maxCoeff());
  Index start = 0;
  while (start < d) {
    Index end = start + 1;
    while (end < d && sa.eigenvalues[end] - sa.eigenvalues[end - 1] <= gap) ++end;
    const Index len = end - start;
    if (len > 1) {
      const Matrix block = basis.middleCols(start, len);
      const Matrix b_small = block.adjoint() * b * block;
      const Spectrum sb = eig_hermitian(HermitianOperator(b_small));
      basis.middleCols(start, len) = block * sb.eigenvectors;
    }
    start = end;
  }

  RealVector pa(d), pb(d);
  double offdiag = 0.0;
  const Matrix da = basis.adjoint() * a * basis;
  const Matrix db = basis.adjoint() * b * basis;
  for (Index i = 0; i < d; ++i) {
    pa[i] = da(i, i).real();
    pb[i] = db(i, i).real();
  }
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j)
      if (i != j) offdiag = std::max(offdiag, std::max(std::abs(da(i, j)), std::abs(db(i, j))));
  if (offdiag > 1e-9 * scale) return std::nullopt;
  return std::make_pair(std::move(pa), std::move(pb));
}

// -- PairSequence -------------------------------------------------------------

PairSequence PairSequence::iid_quantum(DensityMatrix rho1,
                                       std::optional<PositiveOperator> omega1,
                                       std::optional<SubsystemShape> copy_shape) {
  PairSequence seq;
  seq.kind_ = Kind::IidQuantum;
  if (omega1 && rho1.dim() != omega1->dim())
    throw std::invalid_argument("PairSequence: rho/omega dims differ");
  seq.copy_shape_ = copy_shape ? *copy_shape : SubsystemShape::single(rho1.dim());
  if (seq.copy_shape_.dim() != rho1.dim())
    throw std::invalid_argument("PairSequence: shape inconsistent with state dim");
  seq.rho1_ = std::move(rho1);
  seq.omega1_ = std::move(omega1);
  seq.detect_reduction();
  return seq;
}

PairSequence PairSequence::iid_classical(RealVector p, RealVector q) {
  if (p.size() != q.size() || p.size() < 1)
    throw std::invalid_argument("PairSequence: p and q must have equal length >= 1");
  double sum = 0.0;
  for (Index i = 0; i < p.size(); ++i) {
    if (p[i] < 0.0 || q[i] < 0.0)
      throw std::invalid_argument("PairSequence: negative entries");
    sum += p[i];
  }
  if (std::abs(sum - 1.0) > 1e-10)
    throw std::invalid_argument("PairSequence: p must sum to 1");
  PairSequence seq;
  seq.kind_ = Kind::IidClassical;
  seq.p_ = std::move(p);
  seq.q_ = std::move(q);
  seq.commuting_ = true;
  seq.reduction_ = std::make_pair(seq.p_, seq.q_);
  seq.copy_shape_ = SubsystemShape::single(seq.p_.size());
  return seq;
}

PairSequence PairSequence::explicit_table(std::vector<Entry> entries) {
  if (entries.empty()) throw std::invalid_argument("PairSequence: empty table");
  PairSequence seq;
  seq.kind_ = Kind::Explicit;
  seq.entries_ = std::move(entries);
  return seq;
}

void PairSequence::detect_reduction() {
  if (kind_ != Kind::IidQuantum || !rho1_ || !omega1_) return;
  reduction_ = joint_diagonalize(rho1_->matrix(), omega1_->matrix());
  commuting_ = reduction_.has_value();
}

bool PairSequence::has_omega() const {
  switch (kind_) {
    case Kind::IidQuantum: return omega1_.has_value();
    case Kind::IidClassical: return true;
    case Kind::Explicit:
      return !entries_.empty() && entries_.front().omega.has_value();
  }
  return false;
}

const DensityMatrix& PairSequence::rho1() const {
  if (!rho1_) throw std::logic_error("PairSequence: no single-copy rho");
  return *rho1_;
}

const PositiveOperator& PairSequence::omega1() const {
  if (!omega1_) throw std::logic_error("PairSequence: no single-copy omega");
  return *omega1_;
}

DensityMatrix PairSequence::rho_n(int n, Index dim_cap) const {
  switch (kind_) {
    case Kind::IidQuantum:
      return tensor_power(rho1(), n, dim_cap);
    case Kind::IidClassical: {
      Matrix d1 = Matrix::Zero(p_.size(), p_.size());
      for (Index i = 0; i < p_.size(); ++i) d1(i, i) = p_[i];
      Matrix m = kron_power(d1, n, dim_cap);
      return DensityMatrix::trusted(std::move(m), 0.0);
    }
    case Kind::Explicit:
      for (const auto& e : entries_)
        if (e.n == n) return e.rho;
      throw std::invalid_argument("PairSequence: no entry for n=" + std::to_string(n));
  }
  throw std::logic_error("PairSequence: bad kind");
}

PositiveOperator PairSequence::omega_n(int n, Index dim_cap) const {
  switch (kind_) {
    case Kind::IidQuantum:
      return tensor_power(omega1(), n, dim_cap);
    case Kind::IidClassical: {
      Matrix d1 = Matrix::Zero(q_.size(), q_.size());
      for (Index i = 0; i < q_.size(); ++i) d1(i, i) = q_[i];
      Matrix m = kron_power(d1, n, dim_cap);
      return PositiveOperator::trusted(std::move(m), 0.0);
    }
    case Kind::Explicit:
      for (const auto& e : entries_)
        if (e.n == n) {
          if (!e.omega)
            throw std::invalid_argument("PairSequence: entry n=" + std::to_string(n) +
                                        " has no omega");
          return *e.omega;
        }
      throw std::invalid_argument("PairSequence: no entry for n=" + std::to_string(n));
  }
  throw std::logic_error("PairSequence: bad kind");
}

// -- evaluator ---------------------------------------------------------------

TailEvaluator::TailEvaluator(const PairSequence& seq, int n, EnginePreference pref,
                             Index dim_cap)
    : n_(n) {
  if (n < 1) throw std::invalid_argument("TailEvaluator: n < 1");
  if (!seq.has_omega())
    throw std::invalid_argument("TailEvaluator: sequence has no omega");

  const bool reducible = seq.classical_reduction().has_value();
  std::int64_t types = -1;
  if (reducible) {
    const int d = static_cast<int>(seq.classical_reduction()->first.size());
    types = typeclass_count(n, d);
  }
  const bool typeclass_ok = reducible && types >= 0 && types <= kTypeclassCap;

  double dense_dim = 1.0;
  bool dense_ok = seq.kind() == PairSequence::Kind::Explicit;
  if (!dense_ok) {
    const double d1 = static_cast<double>(
        seq.kind() == PairSequence::Kind::IidClassical ? seq.p().size()
                                                       : seq.rho1().dim());
    dense_dim = std::pow(d1, n);
    dense_ok = dense_dim <= static_cast<double>(dim_cap);
  }

  bool use_typeclass;
  switch (pref) {
    case EnginePreference::Typeclass:
      if (!typeclass_ok)
        throw capacity_error("TailEvaluator: typeclass engine unavailable here");
      use_typeclass = true;
      break;
    case EnginePreference::Dense:
      if (!dense_ok)
        throw capacity_error("TailEvaluator: dense engine exceeds dim cap " +
                             std::to_string(dim_cap));
      use_typeclass = false;
      break;
    case EnginePreference::Auto:
    default:
      if (typeclass_ok)
        use_typeclass = true;
      else if (dense_ok)
        use_typeclass = false;
      else {
        std::ostringstream os;
        os << "TailEvaluator: n=" << n << " exceeds both engine caps (dense dim "
           << dense_dim << " > " << dim_cap << "; type classes";
        if (types >= 0)
          os << " " << types;
        os << " > " << kTypeclassCap << " or pair not commuting)";
        throw capacity_error(os.str());
      }
  }

  typeclass_ = use_typeclass;
  if (typeclass_) {
    p_ = seq.classical_reduction()->first;
    q_ = seq.classical_reduction()->second;
  } else {
    rho_n_ = seq.rho_n(n, dim_cap);
    omega_n_ = seq.omega_n(n, dim_cap);
  }
}

TailValues TailEvaluator::all(double gamma) const {
  auto it = memo_.find(gamma);
  if (it != memo_.end()) return it->second;
  TailValues v{};
  if (typeclass_) {
    v = typeclass_all(p_, q_, n_, gamma);
  } else {
    v = all_tails(ScaledPair::from_gamma(*rho_n_, *omega_n_, n_, gamma));
  }
  memo_.emplace(gamma, v);
  memo_pos_.emplace(gamma, v.positive);
  return v;
}

double TailEvaluator::positive(double gamma) const {
  auto it = memo_pos_.find(gamma);
  if (it != memo_pos_.end()) return it->second;
  double v;
  if (typeclass_) {
    v = all(gamma).positive;
  } else {
    v = positive_tail(ScaledPair::from_gamma(*rho_n_, *omega_n_, n_, gamma));
    memo_pos_.emplace(gamma, v);
  }
  return v;
}

double TailEvaluator::operator()(double gamma, TailFunctional which) const {
  if (which == TailFunctional::Positive) return positive(gamma);
  const TailValues v = all(gamma);
  switch (which) {
    case TailFunctional::Positive: return v.positive;
    case TailFunctional::Rho: return v.rho;
    case TailFunctional::Omega: return v.omega;
  }
  return 0.0;
}

SpectrumCurve spectrum_curve(const PairSequence& seq, int n,
                             const std::vector<double>& gammas, TailFunctional tag,
                             EnginePreference pref, CurveCaps caps) {
  if (gammas.empty()) throw std::invalid_argument("spectrum_curve: empty grid");
  for (std::size_t i = 1; i < gammas.size(); ++i)
    if (!(gammas[i] > gammas[i - 1]))
      throw std::invalid_argument("spectrum_curve: grid not strictly increasing");

  const TailEvaluator eval(seq, n, pref, caps.dim_cap);
  SpectrumCurve curve;
  curve.n = n;
  curve.tag = tag;
  curve.engine = eval.engine();
  curve.points.reserve(gammas.size());
  for (double g : gammas) curve.points.push_back({g, eval(g, tag)});

  if (tag != TailFunctional::Omega) {
    for (std::size_t i = 1; i < curve.points.size(); ++i) {
      if (curve.points[i].f > curve.points[i - 1].f + 1e-12) {
        std::ostringstream os;
        os << "spectrum_curve: " << tail_name(tag) << " increased by "
           << curve.points[i].f - curve.points[i - 1].f << " at gamma "
           << curve.points[i].gamma;
        throw std::logic_error(os.str());
      }
    }
  }
  return curve;
}

}  // namespace qspectra
