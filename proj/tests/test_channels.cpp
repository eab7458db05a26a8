#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "qspectra/channels.hpp"
#include "qspectra/operator_core.hpp"
#include "qspectra/rng.hpp"

using namespace qspectra;

TEST_CASE("identity channel leaves inputs unchanged") {
  Rng rng(1);
  const HermitianOperator a = hermitian_unit(3, rng);
  const KrausChannel id = KrausChannel::identity(3);
  CHECK(max_abs(apply_channel(id, a).matrix() - a.matrix()) < 1e-14);
}

TEST_CASE("full dephasing keeps the diagonal") {
  Matrix m(2, 2);
  m << Complex(0.7, 0.0), Complex(0.1, 0.2), Complex(0.1, -0.2), Complex(0.3, 0.0);
  const KrausChannel dephase = KrausChannel::dephasing(2);
  const Matrix out = apply_channel(dephase, HermitianOperator(m)).matrix();
  Matrix expect = Matrix::Zero(2, 2);
  expect(0, 0) = 0.7;
  expect(1, 1) = 0.3;
  CHECK(max_abs(out - expect) < 1e-14);
}

TEST_CASE("random channels are CPTP and deterministic in the seed") {
  for (int trial = 0; trial < 10; ++trial) {
    const Index d = 2 + trial % 3;
    const KrausChannel ch = random_channel(d, 2 + trial % 2, 1000 + trial);
    CHECK(ch.cptp_defect() <= 1e-10);
    Rng rng(trial);
    const DensityMatrix rho = density_hs(d, rng);
    const DensityMatrix out = apply_channel(ch, rho);
    CHECK(std::abs(out.trace() - 1.0) < 1e-10);
    CHECK(eigvals_hermitian(out.hermitian()).minCoeff() >= -1e-10);
  }

  const KrausChannel a = random_channel(3, 2, 77);
  const KrausChannel b = random_channel(3, 2, 77);
  REQUIRE(a.ops().size() == b.ops().size());
  for (std::size_t k = 0; k < a.ops().size(); ++k)
    CHECK(max_abs(a.ops()[k] - b.ops()[k]) == 0.0);
}

TEST_CASE("environment dimension one gives a unitary channel") {
  const KrausChannel ch = random_channel(4, 1, 5);
  REQUIRE(ch.ops().size() == 1);
  const Matrix& k = ch.ops()[0];
  CHECK(max_abs(k.adjoint() * k - Matrix::Identity(4, 4)) < 1e-12);
}

TEST_CASE("apply_channel is linear") {
  Rng rng(8);
  const KrausChannel ch = random_channel(3, 2, 4);
  const HermitianOperator a = hermitian_unit(3, rng);
  const HermitianOperator b = hermitian_unit(3, rng);
  const double alpha = 0.3, beta = -1.2;
  const Matrix lhs =
      apply_channel(ch, HermitianOperator(alpha * a.matrix() + beta * b.matrix()))
          .matrix();
  const Matrix rhs = alpha * apply_channel(ch, a).matrix() +
                     beta * apply_channel(ch, b).matrix();
  CHECK(max_abs(lhs - rhs) < 1e-10);
}

TEST_CASE("is_unital flags dephasing, unitaries and amplitude damping correctly") {
  CHECK(is_unital(KrausChannel::dephasing(3)).unital);
  CHECK(is_unital(KrausChannel::dephasing(3)).defect <= 1e-15);
  CHECK(is_unital(random_channel(3, 1, 2)).unital);

  const double gamma = 0.5;
  const KrausChannel ad = KrausChannel::amplitude_damping(gamma);
  const UnitalReport rep = is_unital(ad);
  CHECK_FALSE(rep.unital);
  // Direct 2x2 evaluation of sum K K^dag - I.
  Matrix sum = Matrix::Zero(2, 2);
  for (const auto& k : ad.ops()) sum += k * k.adjoint();
  CHECK(rep.defect == doctest::Approx(max_abs(sum - Matrix::Identity(2, 2))));
  CHECK(rep.defect == doctest::Approx(gamma));
}

TEST_CASE("depolarizing mixes toward the maximally mixed state") {
  Rng rng(3);
  for (Index d : {2, 3}) {
    const double p = 0.4;
    const KrausChannel ch = KrausChannel::depolarizing(d, p);
    const DensityMatrix rho = density_hs(d, rng);
    const Matrix out = apply_channel(ch, rho).matrix();
    const Matrix expect = (1.0 - p) * rho.matrix() +
                          p / static_cast<double>(d) * Matrix::Identity(d, d);
    CHECK(max_abs(out - expect) < 1e-10);
    CHECK(is_unital(ch).unital);
  }
}

TEST_CASE("channel_power combines Kraus families multiplicatively") {
  const KrausChannel ch = random_channel(2, 2, 6);
  CHECK(channel_power(ch, 1).ops().size() == ch.ops().size());
  const KrausChannel sq = channel_power(ch, 2);
  CHECK(sq.ops().size() == ch.ops().size() * ch.ops().size());
  CHECK(sq.dim_in() == 4);

  Rng rng(12);
  const DensityMatrix rho = density_hs(2, rng);
  const Matrix lhs =
      apply_channel(sq, DensityMatrix::trusted(kron(rho.matrix(), rho.matrix()), 0.0))
          .matrix();
  const Matrix one = apply_channel(ch, rho).matrix();
  CHECK(max_abs(lhs - kron(one, one)) < 1e-10);

  CHECK_THROWS_AS(channel_power(ch, 20), capacity_error);
}

TEST_CASE("mixed-unitary channels are unital") {
  const KrausChannel ch = random_mixed_unitary(3, 4, 11);
  CHECK(ch.cptp_defect() <= 1e-10);
  CHECK(is_unital(ch).unital);
}

TEST_CASE("lemma-2 style domination holds under random channels") {
  for (int trial = 0; trial < 300; ++trial) {
    Rng rng(split_seed(7, trial));
    const Index d = (trial % 2) ? 2 : 4;
    const HermitianOperator a = hermitian_unit(d, rng);
    const HermitianOperator b = hermitian_unit(d, rng);
    const KrausChannel ch = random_channel(d, 1 + trial % 3, rng.next_u64());
    const double lhs =
        positive_part_trace(apply_channel(ch, a), apply_channel(ch, b));
    const double rhs = positive_part_trace(a, b);
    CHECK(lhs <= rhs + 1e-9 * (1.0 + max_abs(a.matrix() - b.matrix())));
  }
}

TEST_CASE("KrausChannel validates shapes and the CPTP invariant") {
  std::vector<Matrix> bad{Matrix::Identity(2, 2) * 0.5};
  CHECK_THROWS_AS(KrausChannel(2, 2, bad), std::invalid_argument);
  std::vector<Matrix> wrong_shape{Matrix::Identity(3, 2)};
  CHECK_THROWS_AS(KrausChannel(2, 2, wrong_shape), std::invalid_argument);
  CHECK_THROWS_AS(KrausChannel(2, 2, {}), std::invalid_argument);

  // Embedding isometry 2 -> 3: valid channel, but unitality is undefined.
  Matrix v = Matrix::Zero(3, 2);
  v(0, 0) = v(1, 1) = 1.0;
  const KrausChannel iso(2, 3, {v});
  CHECK_THROWS_AS(is_unital(iso), std::invalid_argument);
}

TEST_CASE("apply_channel rejects dimension mismatches") {
  Rng rng(2);
  const KrausChannel ch = random_channel(2, 2, 3);
  const HermitianOperator a = hermitian_unit(3, rng);
  CHECK_THROWS_AS(apply_channel(ch, a), std::invalid_argument);
}
