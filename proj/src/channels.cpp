#include "qspectra/channels.hpp"

#include <cmath>
#include <sstream>

#include "qspectra/operator_core.hpp"
#include "qspectra/rng.hpp"

namespace qspectra {

namespace {
constexpr double kCptpTol = 1e-9;
constexpr double kUnitalTol = 1e-9;
}  // namespace

KrausChannel::KrausChannel(Index dim_in, Index dim_out, std::vector<Matrix> kraus)
    : dim_in_(dim_in), dim_out_(dim_out), kraus_(std::move(kraus)) {
  if (dim_in_ < 1 || dim_out_ < 1)
    throw std::invalid_argument("KrausChannel: dims must be >= 1");
  if (kraus_.empty()) throw std::invalid_argument("KrausChannel: empty Kraus list");
  for (const auto& k : kraus_) {
    if (k.rows() != dim_out_ || k.cols() != dim_in_) {
      std::ostringstream os;
      os << "KrausChannel: operator is " << k.rows() << "x" << k.cols()
         << ", expected " << dim_out_ << "x" << dim_in_;
      throw std::invalid_argument(os.str());
    }
    if (!all_finite(k)) throw std::invalid_argument("KrausChannel: non-finite entries");
  }
  Matrix sum = Matrix::Zero(dim_in_, dim_in_);
  for (const auto& k : kraus_) sum += k.adjoint() * k;
  cptp_defect_ = max_abs(sum - Matrix::Identity(dim_in_, dim_in_));
  if (cptp_defect_ > kCptpTol) {
    std::ostringstream os;
    os << "KrausChannel: CPTP defect " << cptp_defect_ << " exceeds " << kCptpTol;
    throw std::invalid_argument(os.str());
  }
}

KrausChannel KrausChannel::identity(Index dim) {
  return KrausChannel(dim, dim, {Matrix::Identity(dim, dim)});
}

KrausChannel KrausChannel::dephasing(Index dim) {
  std::vector<Matrix> ks;
  ks.reserve(dim);
  for (Index i = 0; i < dim; ++i) {
    Matrix k = Matrix::Zero(dim, dim);
    k(i, i) = 1.0;
    ks.push_back(std::move(k));
  }
  return KrausChannel(dim, dim, std::move(ks));
}

KrausChannel KrausChannel::depolarizing(Index dim, double p) {
  if (p < 0.0 || p > 1.0)
    throw std::invalid_argument("depolarizing: p must be in [0,1]");
  // Weyl shift X|m> = |m+1 mod d> and clock Z|m> = w^m |m>; averaging over
  // all d^2 products gives the completely depolarizing map.
  Matrix shift = Matrix::Zero(dim, dim);
  for (Index m = 0; m < dim; ++m) shift((m + 1) % dim, m) = 1.0;
  Matrix clock = Matrix::Zero(dim, dim);
  for (Index m = 0; m < dim; ++m)
    clock(m, m) = std::polar(1.0, 2.0 * M_PI * static_cast<double>(m) / dim);

  std::vector<Matrix> ks;
  ks.reserve(dim * dim);
  const double w_id = std::sqrt(1.0 - p + p / (dim * dim));
  const double w_rest = std::sqrt(p / (dim * dim));
  Matrix xj = Matrix::Identity(dim, dim);
  for (Index j = 0; j < dim; ++j) {
    Matrix op = xj;
    for (Index k = 0; k < dim; ++k) {
      if (j == 0 && k == 0)
        ks.push_back(w_id * Matrix::Identity(dim, dim));
      else
        ks.push_back(w_rest * op);
      op = op * clock;
    }
    xj = shift * xj;
  }
  return KrausChannel(dim, dim, std::move(ks));
}

KrausChannel KrausChannel::amplitude_damping(double gamma) {
  if (gamma < 0.0 || gamma > 1.0)
    throw std::invalid_argument("amplitude_damping: gamma must be in [0,1]");
  Matrix k0 = Matrix::Zero(2, 2), k1 = Matrix::Zero(2, 2);
  k0(0, 0) = 1.0;
  k0(1, 1) = std::sqrt(1.0 - gamma);
  k1(0, 1) = std::sqrt(gamma);
  return KrausChannel(2, 2, {std::move(k0), std::move(k1)});
}

HermitianOperator apply_channel(const KrausChannel& t, const HermitianOperator& a) {
  if (a.dim() != t.dim_in())
    throw std::invalid_argument("apply_channel: input dim " + std::to_string(a.dim()) +
                                " != channel dim_in " + std::to_string(t.dim_in()));
  Matrix out = Matrix::Zero(t.dim_out(), t.dim_out());
  for (const auto& k : t.ops()) out += k * a.matrix() * k.adjoint();
  return HermitianOperator(std::move(out));
}

DensityMatrix apply_channel(const KrausChannel& t, const DensityMatrix& rho) {
  HermitianOperator h = apply_channel(t, rho.hermitian());
  return DensityMatrix::trusted(h.matrix(), 0.0);
}

PositiveOperator apply_channel(const KrausChannel& t, const PositiveOperator& w) {
  HermitianOperator h = apply_channel(t, w.hermitian());
  return PositiveOperator::trusted(h.matrix(), 0.0);
}

KrausChannel random_channel(Index dim_in, Index dim_env, std::uint64_t seed) {
  if (dim_in < 1 || dim_env < 1)
    throw std::invalid_argument("random_channel: dims must be >= 1");
  Rng rng(seed);
  const Matrix u = haar_unitary(dim_in * dim_env, rng);
  // Composite index (s, e) -> s * dim_env + e; environment starts in |0>.
  std::vector<Matrix> ks;
  ks.reserve(dim_env);
  for (Index e = 0; e < dim_env; ++e) {
    Matrix k(dim_in, dim_in);
    for (Index i = 0; i < dim_in; ++i)
      for (Index j = 0; j < dim_in; ++j) k(i, j) = u(i * dim_env + e, j * dim_env);
    ks.push_back(std::move(k));
  }
  return KrausChannel(dim_in, dim_in, std::move(ks));
}

KrausChannel random_mixed_unitary(Index dim, int num_unitaries, std::uint64_t seed) {
  if (num_unitaries < 1)
    throw std::invalid_argument("random_mixed_unitary: need >= 1 unitary");
  Rng rng(seed);
  const RealVector w = dirichlet_uniform(num_unitaries, rng);
  std::vector<Matrix> ks;
  ks.reserve(num_unitaries);
  for (int i = 0; i < num_unitaries; ++i)
    ks.push_back(std::sqrt(w[i]) * haar_unitary(dim, rng));
  return KrausChannel(dim, dim, std::move(ks));
}

UnitalReport is_unital(const KrausChannel& t) {
  if (t.dim_in() != t.dim_out())
    throw std::invalid_argument("is_unital: channel is not square (" +
                                std::to_string(t.dim_in()) + " -> " +
                                std::to_string(t.dim_out()) + ")");
  Matrix sum = Matrix::Zero(t.dim_out(), t.dim_out());
  for (const auto& k : t.ops()) sum += k * k.adjoint();
  const double defect = max_abs(sum - Matrix::Identity(t.dim_out(), t.dim_out()));
  return {defect <= kUnitalTol, defect};
}

KrausChannel channel_power(const KrausChannel& t, int n, Index dim_cap) {
  if (n < 1) throw std::invalid_argument("channel_power: n < 1");
  if (n == 1) return t;
  double count = 1.0, din = 1.0, dout = 1.0;
  for (int k = 0; k < n; ++k) {
    count *= static_cast<double>(t.ops().size());
    din *= static_cast<double>(t.dim_in());
    dout *= static_cast<double>(t.dim_out());
    if (count > static_cast<double>(dim_cap) || din > static_cast<double>(dim_cap) ||
        dout > static_cast<double>(dim_cap)) {
      std::ostringstream os;
      os << "channel_power: " << t.ops().size() << "^" << n << " Kraus ops on dims "
         << t.dim_in() << "^" << n << " -> " << t.dim_out() << "^" << n
         << " exceeds cap " << dim_cap;
      throw capacity_error(os.str());
    }
  }
  std::vector<Matrix> acc;
  for (const auto& k : t.ops()) acc.push_back(k);
  for (int step = 1; step < n; ++step) {
    std::vector<Matrix> next;
    next.reserve(acc.size() * t.ops().size());
    for (const auto& a : acc)
      for (const auto& k : t.ops()) next.push_back(kron(a, k));
    acc = std::move(next);
  }
  Index din_i = 1, dout_i = 1;
  for (int k = 0; k < n; ++k) {
    din_i *= t.dim_in();
    dout_i *= t.dim_out();
  }
  return KrausChannel(din_i, dout_i, std::move(acc));
}

}  // namespace qspectra
