#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "qspectra/operator_core.hpp"
#include "qspectra/rng.hpp"
#include "qspectra/spectrum_engine.hpp"

using namespace qspectra;

namespace {

DensityMatrix diag_state(std::initializer_list<double> probs) {
  RealVector p(static_cast<Index>(probs.size()));
  Index i = 0;
  for (double v : probs) p[i++] = v;
  return DensityMatrix::diagonal(p);
}

// Dense reference for i.i.d. classical inputs: explicit tensor powers.
TailValues dense_classical(const RealVector& p, const RealVector& q, int n,
                           double gamma) {
  Matrix dp = Matrix::Zero(p.size(), p.size());
  Matrix dq = Matrix::Zero(q.size(), q.size());
  for (Index i = 0; i < p.size(); ++i) dp(i, i) = p[i];
  for (Index i = 0; i < q.size(); ++i) dq(i, i) = q[i];
  const DensityMatrix rho = DensityMatrix::trusted(kron_power(dp, n), 0.0);
  const PositiveOperator omega = PositiveOperator::trusted(kron_power(dq, n), 0.0);
  return all_tails(ScaledPair::from_gamma(rho, omega, n, gamma));
}

}  // namespace

TEST_CASE("positive_tail closed forms") {
  Rng rng(1);
  const DensityMatrix rho = density_hs(4, rng);
  for (double s : {0.3, 1.0, 2.0}) {
    const double f = positive_tail(ScaledPair(rho, rho.positive(), s));
    CHECK(f == doctest::Approx(std::max(0.0, 1.0 - s)).epsilon(1e-12));
  }
  const DensityMatrix d = diag_state({0.75, 0.25});
  const double f =
      positive_tail(ScaledPair(d, PositiveOperator::identity(2), 0.5));
  CHECK(f == doctest::Approx(0.25));
}

TEST_CASE("rho_tail closed forms") {
  const DensityMatrix d = diag_state({0.75, 0.25});
  CHECK(rho_tail(ScaledPair(d, PositiveOperator::identity(2), 0.5)) ==
        doctest::Approx(0.75));
  Rng rng(2);
  const DensityMatrix rho = density_hs(3, rng);
  CHECK(rho_tail(ScaledPair(rho, rho.positive(), 1e-300)) == doctest::Approx(1.0));
  CHECK(rho_tail(ScaledPair(rho, rho.positive(), 2.0)) == doctest::Approx(0.0));
}

TEST_CASE("omega_tail closed forms and the 1/s bound") {
  Rng rng(3);
  const DensityMatrix rho = density_hs(3, rng);
  CHECK(omega_tail(ScaledPair(rho, rho.positive(), 1.0)) == doctest::Approx(1.0));
  CHECK(omega_tail(ScaledPair(rho, rho.positive(), 2.0)) == doctest::Approx(0.0));

  for (int trial = 0; trial < 200; ++trial) {
    Rng r(split_seed(11, trial));
    const Index d = 2 + trial % 3;
    const DensityMatrix a = density_hs(d, r);
    const DensityMatrix b = density_hs(d, r);
    for (double s : {0.5, 1.0, 2.0, 10.0}) {
      const double w = omega_tail(ScaledPair(a, b.positive(), s));
      CHECK(w <= 1.0 / s + 1e-12);
    }
  }
}

TEST_CASE("the three tails share one projector: rho = positive + s * omega") {
  for (int trial = 0; trial < 30; ++trial) {
    Rng rng(split_seed(17, trial));
    const Index d = 2 + trial % 4;
    const DensityMatrix a = density_hs(d, rng);
    const DensityMatrix b = density_hs(d, rng);
    for (double s : {0.4, 1.0, 3.0}) {
      const TailValues v = all_tails(ScaledPair(a, b.positive(), s));
      CHECK(std::abs(v.rho - (v.positive + s * v.omega)) < 1e-10);
    }
  }
}

TEST_CASE("positive and rho tails are nonincreasing in the scale") {
  Rng rng(19);
  const DensityMatrix a = density_hs(4, rng);
  const DensityMatrix b = density_hs(4, rng);
  double prev_pos = 2.0, prev_rho = 2.0;
  for (double s = 0.05; s < 40.0; s *= 1.7) {
    const TailValues v = all_tails(ScaledPair(a, b.positive(), s));
    CHECK(v.positive <= prev_pos + 1e-12);
    CHECK(v.rho <= prev_rho + 1e-12);
    prev_pos = v.positive;
    prev_rho = v.rho;
  }
  // Endpoints: ->1 as s->0 and ->0 for full-rank omega at large s.
  CHECK(positive_tail(ScaledPair(a, b.positive(), 1e-9)) ==
        doctest::Approx(1.0).epsilon(1e-6));
  CHECK(positive_tail(ScaledPair(a, b.positive(), 1e9)) == doctest::Approx(0.0));
}

TEST_CASE("tail decomposition inequality holds for mismatched scales") {
  for (int trial = 0; trial < 40; ++trial) {
    Rng rng(split_seed(23, trial));
    const DensityMatrix a = density_hs(3, rng);
    const DensityMatrix b = density_hs(3, rng);
    for (double s : {0.5, 1.0, 2.0})
      for (double sp : {0.5, 1.0, 2.0}) {
        const TailValues at_s = all_tails(ScaledPair(a, b.positive(), s));
        const TailValues at_sp = all_tails(ScaledPair(a, b.positive(), sp));
        CHECK(at_sp.rho <= at_s.positive + s * at_sp.omega + 1e-9);
      }
  }
}

TEST_CASE("typeclass engine: n = 1 equals the dense diagonal evaluation") {
  RealVector p(3), q(3);
  p << 0.5, 0.3, 0.2;
  q << 0.2, 0.3, 0.5;
  for (double g : {-0.5, 0.0, 0.3}) {
    const TailValues tc = typeclass_all(p, q, 1, g);
    const TailValues dn = dense_classical(p, q, 1, g);
    CHECK(tc.positive == doctest::Approx(dn.positive).epsilon(1e-12));
    CHECK(tc.rho == doctest::Approx(dn.rho).epsilon(1e-12));
    CHECK(tc.omega == doctest::Approx(dn.omega).epsilon(1e-12));
  }
}

TEST_CASE("typeclass engine: uniform p = q collapses to max(0, 1 - e^{n gamma})") {
  RealVector u(2);
  u << 0.5, 0.5;
  for (int n : {1, 4, 20, 200})
    for (double g : {-0.6, -0.1, -0.01, 0.02}) {
      const double f = typeclass_tail(u, u, n, g, TailFunctional::Positive);
      CHECK(f == doctest::Approx(std::max(0.0, 1.0 - std::exp(n * g))).epsilon(1e-11));
    }
}

TEST_CASE("typeclass engine matches dense tensor powers for skewed classical pairs") {
  RealVector p(2), q(2);
  p << 0.9, 0.1;
  q << 0.5, 0.5;
  for (int n = 2; n <= 8; ++n)
    for (double g = -2.0; g <= 1.0; g += 0.15) {
      const TailValues tc = typeclass_all(p, q, n, g);
      const TailValues dn = dense_classical(p, q, n, g);
      CHECK(std::abs(tc.positive - dn.positive) <= 1e-9);
      CHECK(std::abs(tc.rho - dn.rho) <= 1e-9);
      CHECK(std::abs(tc.omega - dn.omega) <= 1e-9);
    }
}

TEST_CASE("typeclass handles zero entries in either vector") {
  RealVector p(2), q(2);
  p << 1.0, 0.0;
  q << 0.5, 0.5;
  // Strings using symbol 2 carry no rho-mass; the ratio on symbol 1 is 2.
  const double f = typeclass_tail(p, q, 3, 0.5, TailFunctional::Rho);
  CHECK(f == doctest::Approx(1.0));  // ln 2 > 0.5
  const double f2 = typeclass_tail(p, q, 3, 0.8, TailFunctional::Rho);
  CHECK(f2 == doctest::Approx(0.0));  // ln 2 < 0.8

  RealVector q0(2);
  q0 << 0.0, 1.0;
  // q vanishes exactly where p lives: the ratio is +inf, always selected.
  CHECK(typeclass_tail(p, q0, 2, 5.0, TailFunctional::Rho) == doctest::Approx(1.0));
}

TEST_CASE("typeclass projector rank matches the dense projector") {
  RealVector p(4), q(4);
  p << 0.4, 0.3, 0.2, 0.1;
  q << 0.25, 0.25, 0.25, 0.25;
  const SubsystemShape shape({4}, {"X"});
  for (int n : {1, 2, 3})
    for (double g : {-0.4, 0.05, 0.4}) {
      const std::int64_t rank = typeclass_projector_rank(p, q, n, g);
      const TailValues dn = dense_classical(p, q, n, g);
      // Dense rank from the projector trace.
      Matrix dp = Matrix::Zero(4, 4), dq = Matrix::Zero(4, 4);
      for (Index i = 0; i < 4; ++i) {
        dp(i, i) = p[i];
        dq(i, i) = q[i];
      }
      const HermitianOperator rn(kron_power(dp, n));
      const HermitianOperator wn(std::exp(n * g) * kron_power(dq, n));
      const PositiveOperator proj = spectral_projector(rn, wn, Relation::Geq);
      CHECK(rank == static_cast<std::int64_t>(std::llround(proj.trace())));
      (void)dn;
    }
}

TEST_CASE("typeclass_count respects the enumeration cap") {
  CHECK(typeclass_count(5, 2) == 6);
  CHECK(typeclass_count(4, 3) == 15);
  CHECK(typeclass_count(1000, 4) < 0);  // 1.68e8 classes, over the cap
  RealVector p = RealVector::Ones(4) / 4, q = RealVector::Ones(4);
  CHECK_THROWS_AS(typeclass_all(p, q, 1000, 0.0), capacity_error);
}

TEST_CASE("joint_diagonalize reduces commuting pairs and rejects others") {
  Rng rng(29);
  const DensityMatrix rho = density_hs(3, rng);
  const Spectrum s = eig_hermitian(rho.hermitian());
  // Build a commuting partner with permuted eigenvalues in the same basis.
  RealVector other(3);
  other << 0.2, 0.9, 0.4;
  const Matrix b = s.eigenvectors * other.asDiagonal() * s.eigenvectors.adjoint();
  const auto red = joint_diagonalize(rho.matrix(), b);
  REQUIRE(red.has_value());
  double dot = 0.0;
  for (Index i = 0; i < 3; ++i) dot += red->first[i] * red->second[i];
  const double expect_dot = (rho.matrix() * b).trace().real();
  CHECK(dot == doctest::Approx(expect_dot).epsilon(1e-9));

  const DensityMatrix nc = density_hs(3, rng);
  CHECK_FALSE(joint_diagonalize(rho.matrix(), nc.matrix()).has_value());

  // Degenerate spectrum: identity commutes with everything, and the
  // cluster refinement must diagonalize the partner inside the block.
  const auto red_id = joint_diagonalize(Matrix::Identity(3, 3), nc.matrix());
  REQUIRE(red_id.has_value());
  double sum_q = 0.0;
  for (Index i = 0; i < 3; ++i) sum_q += red_id->second[i];
  CHECK(sum_q == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("spectrum_curve: rho = omega collapses to the uniform closed form") {
  Rng rng(31);
  const DensityMatrix rho = density_hs(3, rng);
  const PairSequence seq = PairSequence::iid_quantum(rho, rho.positive());
  CHECK(seq.commuting());
  std::vector<double> grid;
  for (double g = -1.0; g <= 0.52; g += 0.1) grid.push_back(g);
  for (int n : {1, 3, 6}) {
    const SpectrumCurve c = spectrum_curve(seq, n, grid);
    CHECK(c.engine == "typeclass");
    for (const auto& pt : c.points)
      CHECK(pt.f ==
            doctest::Approx(std::max(0.0, 1.0 - std::exp(n * pt.gamma))).epsilon(1e-9));
  }
}

TEST_CASE("spectrum_curve: Bell conditional pair has the rank-one closed form") {
  Vector bell = Vector::Zero(4);
  bell[0] = bell[3] = 1.0 / std::sqrt(2.0);
  const DensityMatrix rho = DensityMatrix::pure(bell);
  const PositiveOperator omega =
      PositiveOperator::trusted(0.5 * Matrix::Identity(4, 4), 0.5);
  const PairSequence seq = PairSequence::iid_quantum(rho, omega);
  CHECK(seq.commuting());
  std::vector<double> grid;
  for (double g = -0.5; g <= 1.3; g += 0.1) grid.push_back(g);
  const SpectrumCurve c = spectrum_curve(seq, 3, grid);
  for (const auto& pt : c.points) {
    const double expect = std::max(0.0, 1.0 - std::pow(std::exp(pt.gamma) / 2.0, 3));
    CHECK(pt.f == doctest::Approx(expect).epsilon(1e-9));
  }
}

TEST_CASE("spectrum_curve: skewed classical source transitions near the KL rate") {
  RealVector p(2), q(2);
  p << 0.9, 0.1;
  q << 0.5, 0.5;
  const PairSequence seq = PairSequence::iid_classical(p, q);
  std::vector<double> grid;
  for (double g = 0.1; g < 0.65; g += 0.025) grid.push_back(g);
  const SpectrumCurve c = spectrum_curve(seq, 500, grid);
  CHECK(c.engine == "typeclass");
  // Monotone 1 -> 0 with the crossing close to KL(p||q) = 0.368.
  CHECK(c.points.front().f > 0.99);
  CHECK(c.points.back().f < 0.01);
  for (std::size_t i = 0; i + 1 < c.points.size(); ++i) {
    if (c.points[i].f >= 0.5 && c.points[i + 1].f < 0.5) {
      CHECK(c.points[i].gamma > 0.3);
      CHECK(c.points[i + 1].gamma < 0.45);
    }
  }
}

TEST_CASE("typeclass reduction of a non-diagonal commuting quantum pair matches dense") {
  // omega is a polynomial in rho, so the pair commutes in a generic
  // (non-computational) eigenbasis and the cluster reduction must find it.
  Rng rng(53);
  const DensityMatrix rho = density_hs(3, rng);
  Matrix w = 0.4 * Matrix::Identity(3, 3) + 1.3 * rho.matrix() -
             0.9 * rho.matrix() * rho.matrix();
  const PositiveOperator omega = PositiveOperator(HermitianOperator(w));
  const PairSequence seq = PairSequence::iid_quantum(rho, omega);
  REQUIRE(seq.commuting());

  for (int n : {1, 2, 3, 4}) {
    const TailEvaluator tc(seq, n, EnginePreference::Typeclass);
    const TailEvaluator dn(seq, n, EnginePreference::Dense);
    for (double g : {-0.8, -0.2, 0.0, 0.3, 0.9}) {
      const TailValues a = tc.all(g);
      const TailValues b = dn.all(g);
      CHECK(std::abs(a.positive - b.positive) <= 1e-9);
      CHECK(std::abs(a.rho - b.rho) <= 1e-9);
      CHECK(std::abs(a.omega - b.omega) <= 1e-9);
    }
  }
}

TEST_CASE("spectrum_curve dispatches dense for noncommuting pairs and caps n") {
  Rng rng(37);
  const DensityMatrix rho = density_hs(2, rng);
  const DensityMatrix omega = density_hs(2, rng);
  const PairSequence seq = PairSequence::iid_quantum(rho, omega.positive());
  CHECK_FALSE(seq.commuting());
  const SpectrumCurve c = spectrum_curve(seq, 2, {-0.5, 0.0, 0.5});
  CHECK(c.engine == "dense");

  CurveCaps caps;
  caps.dim_cap = 64;
  CHECK_THROWS_AS(spectrum_curve(seq, 7, {-0.5, 0.0, 0.5}, TailFunctional::Positive,
                                 EnginePreference::Auto, caps),
                  capacity_error);
  try {
    spectrum_curve(seq, 7, {-0.5, 0.0, 0.5}, TailFunctional::Positive,
                   EnginePreference::Auto, caps);
  } catch (const capacity_error& e) {
    const std::string msg = e.what();
    CHECK(msg.find("dense") != std::string::npos);
    CHECK(msg.find("cap") != std::string::npos);
  }
}

TEST_CASE("spectrum_curve validates its grid") {
  Rng rng(41);
  const DensityMatrix rho = density_hs(2, rng);
  const PairSequence seq = PairSequence::iid_quantum(rho, rho.positive());
  CHECK_THROWS_AS(spectrum_curve(seq, 1, {0.5, 0.5}), std::invalid_argument);
  CHECK_THROWS_AS(spectrum_curve(seq, 1, {}), std::invalid_argument);
}

TEST_CASE("ScaledPair validates its inputs") {
  Rng rng(43);
  const DensityMatrix rho = density_hs(2, rng);
  const DensityMatrix w3 = density_hs(3, rng);
  CHECK_THROWS_AS(ScaledPair(rho, w3.positive(), 1.0), std::invalid_argument);
  CHECK_THROWS_AS(ScaledPair(rho, rho.positive(), -1.0), std::invalid_argument);
  CHECK_THROWS_AS(ScaledPair(rho, rho.positive(), 0.0), std::invalid_argument);
}

TEST_CASE("PairSequence validates classical inputs") {
  RealVector p(2), q(2), bad(2), neg(2);
  p << 0.5, 0.5;
  q << 1.0, 1.0;
  bad << 0.5, 0.6;
  neg << 1.1, -0.1;
  CHECK_NOTHROW(PairSequence::iid_classical(p, q));
  CHECK_THROWS_AS(PairSequence::iid_classical(bad, q), std::invalid_argument);
  CHECK_THROWS_AS(PairSequence::iid_classical(neg, q), std::invalid_argument);
  RealVector q3(3);
  q3 << 1, 1, 1;
  CHECK_THROWS_AS(PairSequence::iid_classical(p, q3), std::invalid_argument);
}

TEST_CASE("exp_clamped saturates instead of overflowing") {
  CHECK(std::isfinite(exp_clamped(1e6)));
  CHECK(exp_clamped(1e6) == exp_clamped(701.0));
  CHECK(exp_clamped(-1e6) > 0.0);
}
