#include "qspectra/operator_core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "qspectra/rng.hpp"

namespace qspectra {

namespace {

constexpr double kHermTol = 1e-10;
constexpr double kTraceTol = 1e-10;
constexpr double kPosTol = 1e-10;
constexpr double kRankTol = 1e-12;

std::string dim_mismatch(const char* what, Index a, Index b) {
  std::ostringstream os;
  os << what << ": dimension mismatch (" << a << " vs " << b << ")";
  return os.str();
}

}  // namespace

// -- types -------------------------------------------------------------

HermitianOperator::HermitianOperator(Matrix m) {
  if (m.rows() != m.cols())
    throw std::invalid_argument(dim_mismatch("HermitianOperator", m.rows(), m.cols()));
  if (m.rows() < 1) throw std::invalid_argument("HermitianOperator: empty matrix");
  if (!all_finite(m))
    throw std::invalid_argument("HermitianOperator: non-finite entries");
  const Matrix adj = m.adjoint();
  herm_defect_ = max_abs(m - adj);
  const double scale = 1.0 + max_abs(m);
  if (herm_defect_ > kHermTol * scale) {
    std::ostringstream os;
    os << "HermitianOperator: defect " << herm_defect_ << " exceeds "
       << kHermTol * scale << " (dim " << m.rows() << ")";
    throw std::invalid_argument(os.str());
  }
  mat_ = 0.5 * (m + adj);
}

HermitianOperator HermitianOperator::zero(Index dim) {
  return HermitianOperator(Trusted{}, Matrix::Zero(dim, dim), 0.0);
}

HermitianOperator HermitianOperator::identity(Index dim) {
  return HermitianOperator(Trusted{}, Matrix::Identity(dim, dim), 0.0);
}

PositiveOperator::PositiveOperator(HermitianOperator base) : base_(std::move(base)) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(base_.matrix(),
                                               Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success)
    throw eig_error("PositiveOperator: eigensolver failed");
  min_eig_ = solver.eigenvalues().minCoeff();
  const double spectral_norm = solver.eigenvalues().cwiseAbs().maxCoeff();
  if (min_eig_ < -kPosTol * (1.0 + spectral_norm)) {
    std::ostringstream os;
    os << "PositiveOperator: min eigenvalue " << min_eig_ << " below tolerance "
       << -kPosTol * (1.0 + spectral_norm);
    throw std::invalid_argument(os.str());
  }
}

PositiveOperator PositiveOperator::identity(Index dim) {
  return PositiveOperator(HermitianOperator::identity(dim), 1.0);
}

PositiveOperator PositiveOperator::trusted(Matrix m, double min_eig_bound) {
  HermitianOperator h(std::move(m));
  return PositiveOperator(std::move(h), min_eig_bound);
}

DensityMatrix::DensityMatrix(PositiveOperator op) : op_(std::move(op)) {
  trace_ = op_.trace();
  if (std::abs(trace_ - 1.0) > kTraceTol) {
    std::ostringstream os;
    os << "DensityMatrix: trace " << trace_ << " not 1 within " << kTraceTol;
    throw std::invalid_argument(os.str());
  }
}

DensityMatrix DensityMatrix::maximally_mixed(Index dim) {
  Matrix m = Matrix::Identity(dim, dim) / static_cast<double>(dim);
  return DensityMatrix(PositiveOperator::trusted(std::move(m), 1.0 / dim), 1.0);
}

DensityMatrix DensityMatrix::pure(const Vector& psi) {
  const double norm = psi.norm();
  if (norm <= 0.0) throw std::invalid_argument("DensityMatrix::pure: zero vector");
  Vector v = psi / norm;
  Matrix m = v * v.adjoint();
  return DensityMatrix(PositiveOperator::trusted(std::move(m), 0.0), 1.0);
}

DensityMatrix DensityMatrix::diagonal(const RealVector& probs) {
  if (probs.size() < 1) throw std::invalid_argument("DensityMatrix::diagonal: empty");
  double sum = 0.0;
  for (Index i = 0; i < probs.size(); ++i) {
    if (probs[i] < 0.0)
      throw std::invalid_argument("DensityMatrix::diagonal: negative entry");
    sum += probs[i];
  }
  if (std::abs(sum - 1.0) > kTraceTol)
    throw std::invalid_argument("DensityMatrix::diagonal: probabilities do not sum to 1");
  Matrix m = Matrix::Zero(probs.size(), probs.size());
  for (Index i = 0; i < probs.size(); ++i) m(i, i) = probs[i];
  return DensityMatrix(PositiveOperator::trusted(std::move(m), probs.minCoeff()), sum);
}

DensityMatrix DensityMatrix::trusted(Matrix m, double min_eig_bound) {
  PositiveOperator op = PositiveOperator::trusted(std::move(m), min_eig_bound);
  const double tr = op.trace();
  if (std::abs(tr - 1.0) > kTraceTol)
    throw std::invalid_argument("DensityMatrix::trusted: trace not 1");
  return DensityMatrix(std::move(op), tr);
}

SubsystemShape::SubsystemShape(std::vector<Index> dims, std::vector<std::string> names)
    : factor_dims(std::move(dims)), labels(std::move(names)) {
  if (factor_dims.empty() || factor_dims.size() != labels.size())
    throw std::invalid_argument("SubsystemShape: dims/labels size mismatch");
  for (Index d : factor_dims)
    if (d < 1) throw std::invalid_argument("SubsystemShape: factor dim < 1");
}

Index SubsystemShape::dim() const {
  Index d = 1;
  for (Index f : factor_dims) d *= f;
  return d;
}

std::vector<std::size_t> SubsystemShape::slots(
    const std::vector<std::string>& which) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < labels.size(); ++i)
    for (const auto& w : which)
      if (labels[i] == w) {
        out.push_back(i);
        break;
      }
  return out;
}

SubsystemShape SubsystemShape::power(int n) const {
  if (n < 1) throw std::invalid_argument("SubsystemShape::power: n < 1");
  SubsystemShape out;
  out.factor_dims.reserve(factor_dims.size() * n);
  out.labels.reserve(labels.size() * n);
  for (int k = 0; k < n; ++k) {
    out.factor_dims.insert(out.factor_dims.end(), factor_dims.begin(), factor_dims.end());
    out.labels.insert(out.labels.end(), labels.begin(), labels.end());
  }
  return out;
}

SubsystemShape SubsystemShape::single(Index dim, std::string label) {
  return SubsystemShape({dim}, {std::move(label)});
}

// -- eigendecomposition ------------------------------------------------

Spectrum eig_hermitian(const HermitianOperator& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(a.matrix());
  if (solver.info() != Eigen::Success) {
    std::ostringstream os;
    os << "eig_hermitian: no convergence (dim " << a.dim() << ", max-norm "
       << max_abs(a.matrix()) << ", herm defect " << a.herm_defect() << ")";
    throw eig_error(os.str());
  }
  Spectrum s{solver.eigenvalues(), solver.eigenvectors()};
  const double norm = std::max(s.eigenvalues.cwiseAbs().maxCoeff(), 0.0);
  const Matrix recon =
      s.eigenvectors * s.eigenvalues.asDiagonal() * s.eigenvectors.adjoint();
  if (max_abs(recon - a.matrix()) > 1e-10 * (1.0 + norm) ||
      max_abs(s.eigenvectors.adjoint() * s.eigenvectors -
              Matrix::Identity(a.dim(), a.dim())) > 1e-10) {
    std::ostringstream os;
    os << "eig_hermitian: reconstruction check failed (dim " << a.dim()
       << ", spectral norm " << norm << ")";
    throw eig_error(os.str());
  }
  return s;
}

RealVector eigvals_hermitian(const HermitianOperator& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(a.matrix(), Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    std::ostringstream os;
    os << "eigvals_hermitian: no convergence (dim " << a.dim() << ", max-norm "
       << max_abs(a.matrix()) << ")";
    throw eig_error(os.str());
  }
  return solver.eigenvalues();
}

double projector_tie_tol(const RealVector& eigenvalues) {
  const double norm = eigenvalues.size() ? eigenvalues.cwiseAbs().maxCoeff() : 0.0;
  return 1e-12 * (1.0 + norm);
}

namespace {

bool selected(double lambda, double tau, Relation rel) {
  switch (rel) {
    case Relation::Geq: return lambda >= -tau;
    case Relation::Gt: return lambda > tau;
    case Relation::Leq: return lambda <= tau;
    case Relation::Lt: return lambda < -tau;
  }
  return false;
}

}  // namespace

PositiveOperator spectral_projector(const HermitianOperator& a,
                                    const HermitianOperator& b, Relation rel) {
  if (a.dim() != b.dim())
    throw std::invalid_argument(dim_mismatch("spectral_projector", a.dim(), b.dim()));
  const HermitianOperator diff(a.matrix() - b.matrix());
  const Spectrum s = eig_hermitian(diff);
  const double tau = projector_tie_tol(s.eigenvalues);
  Matrix p = Matrix::Zero(a.dim(), a.dim());
  for (Index i = 0; i < s.eigenvalues.size(); ++i) {
    if (selected(s.eigenvalues[i], tau, rel))
      p += s.eigenvectors.col(i) * s.eigenvectors.col(i).adjoint();
  }
  return PositiveOperator::trusted(std::move(p), 0.0);
}

double positive_part_trace(const HermitianOperator& a, const HermitianOperator& b) {
  if (a.dim() != b.dim())
    throw std::invalid_argument(dim_mismatch("positive_part_trace", a.dim(), b.dim()));
  const RealVector ev = eigvals_hermitian(HermitianOperator(a.matrix() - b.matrix()));
  double sum = 0.0;
  for (Index i = 0; i < ev.size(); ++i) sum += std::max(ev[i], 0.0);
  return sum;
}

// -- tensor algebra ----------------------------------------------------

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

HermitianOperator tensor_product(std::span<const HermitianOperator> ops, Index dim_cap) {
  if (ops.empty()) throw std::invalid_argument("tensor_product: empty list");
  Index total = 1;
  for (const auto& op : ops) {
    total *= op.dim();
    if (total > dim_cap) {
      std::ostringstream os;
      os << "tensor_product: result dim " << total << "+ exceeds cap " << dim_cap;
      throw capacity_error(os.str());
    }
  }
  Matrix acc = ops[0].matrix();
  for (std::size_t k = 1; k < ops.size(); ++k) acc = kron(acc, ops[k].matrix());
  return HermitianOperator(std::move(acc));
}

Matrix kron_power(const Matrix& a, int n, Index dim_cap) {
  if (n < 1) throw std::invalid_argument("kron_power: n < 1");
  Index total = 1;
  for (int k = 0; k < n; ++k) {
    total *= a.rows();
    if (total > dim_cap) {
      std::ostringstream os;
      os << "kron_power: dim " << a.rows() << "^" << n << " exceeds cap " << dim_cap;
      throw capacity_error(os.str());
    }
  }
  Matrix acc = a;
  for (int k = 1; k < n; ++k) acc = kron(acc, a);
  return acc;
}

DensityMatrix tensor_power(const DensityMatrix& rho, int n, Index dim_cap) {
  if (n == 1) return rho;
  Matrix m = kron_power(rho.matrix(), n, dim_cap);
  const double min_bound = std::max(rho.positive().min_eig(), 0.0);
  return DensityMatrix::trusted(std::move(m), std::pow(min_bound, n));
}

PositiveOperator tensor_power(const PositiveOperator& w, int n, Index dim_cap) {
  if (n == 1) return w;
  Matrix m = kron_power(w.matrix(), n, dim_cap);
  const double min_bound = std::max(w.min_eig(), 0.0);
  return PositiveOperator::trusted(std::move(m), std::pow(min_bound, n));
}

namespace {

// Multi-index helpers: factor 0 is the most significant digit, matching
// the Kronecker-product convention above.
std::vector<Index> strides_of(const std::vector<Index>& dims) {
  std::vector<Index> s(dims.size(), 1);
  for (std::size_t i = dims.size(); i-- > 1;) s[i - 1] = s[i] * dims[i];
  return s;
}

}  // namespace

Matrix partial_trace(const Matrix& a, const SubsystemShape& shape,
                     const std::vector<std::string>& keep) {
  if (a.rows() != shape.dim())
    throw std::invalid_argument(dim_mismatch("partial_trace: shape", a.rows(), shape.dim()));
  const auto kept = shape.slots(keep);
  if (kept.empty())
    throw std::invalid_argument(
        "partial_trace: empty keep set (use a plain trace instead)");

  std::vector<bool> is_kept(shape.factors(), false);
  for (auto s : kept) is_kept[s] = true;

  const auto strides = strides_of(shape.factor_dims);
  std::vector<Index> kept_dims, traced_dims;
  std::vector<Index> kept_strides, traced_strides;
  for (std::size_t i = 0; i < shape.factors(); ++i) {
    if (is_kept[i]) {
      kept_dims.push_back(shape.factor_dims[i]);
      kept_strides.push_back(strides[i]);
    } else {
      traced_dims.push_back(shape.factor_dims[i]);
      traced_strides.push_back(strides[i]);
    }
  }

  Index kept_total = 1;
  for (Index d : kept_dims) kept_total *= d;
  Index traced_total = 1;
  for (Index d : traced_dims) traced_total *= d;

  // Offset tables: position in the full index space of each reduced index.
  auto offsets = [](const std::vector<Index>& dims, const std::vector<Index>& strs,
                    Index total) {
    std::vector<Index> out(total, 0);
    for (Index flat = 0; flat < total; ++flat) {
      Index rem = flat, off = 0;
      for (std::size_t i = dims.size(); i-- > 0;) {
        off += (rem % dims[i]) * strs[i];
        rem /= dims[i];
      }
      out[flat] = off;
    }
    return out;
  };
  const auto kept_off = offsets(kept_dims, kept_strides, kept_total);
  const auto traced_off = offsets(traced_dims, traced_strides, traced_total);

  Matrix out = Matrix::Zero(kept_total, kept_total);
  for (Index i = 0; i < kept_total; ++i)
    for (Index j = 0; j < kept_total; ++j) {
      Complex sum = 0.0;
      for (Index t = 0; t < traced_total; ++t)
        sum += a(kept_off[i] + traced_off[t], kept_off[j] + traced_off[t]);
      out(i, j) = sum;
    }
  return out;
}

HermitianOperator partial_trace(const HermitianOperator& a, const SubsystemShape& shape,
                                const std::vector<std::string>& keep) {
  return HermitianOperator(partial_trace(a.matrix(), shape, keep));
}

DensityMatrix partial_trace(const DensityMatrix& a, const SubsystemShape& shape,
                            const std::vector<std::string>& keep) {
  return DensityMatrix::trusted(partial_trace(a.matrix(), shape, keep), 0.0);
}

Matrix embed_with_identity(const Matrix& reduced, const SubsystemShape& shape,
                           const std::vector<std::string>& placed) {
  const auto slots = shape.slots(placed);
  if (slots.empty()) throw std::invalid_argument("embed_with_identity: no slots");
  std::vector<bool> is_placed(shape.factors(), false);
  for (auto s : slots) is_placed[s] = true;

  const auto strides = strides_of(shape.factor_dims);
  std::vector<Index> pl_dims, pl_strides, id_dims, id_strides;
  for (std::size_t i = 0; i < shape.factors(); ++i) {
    if (is_placed[i]) {
      pl_dims.push_back(shape.factor_dims[i]);
      pl_strides.push_back(strides[i]);
    } else {
      id_dims.push_back(shape.factor_dims[i]);
      id_strides.push_back(strides[i]);
    }
  }
  Index pl_total = 1;
  for (Index d : pl_dims) pl_total *= d;
  if (reduced.rows() != pl_total)
    throw std::invalid_argument(
        dim_mismatch("embed_with_identity", reduced.rows(), pl_total));
  Index id_total = 1;
  for (Index d : id_dims) id_total *= d;

  auto offsets = [](const std::vector<Index>& dims, const std::vector<Index>& strs,
                    Index total) {
    std::vector<Index> out(total, 0);
    for (Index flat = 0; flat < total; ++flat) {
      Index rem = flat, off = 0;
      for (std::size_t i = dims.size(); i-- > 0;) {
        off += (rem % dims[i]) * strs[i];
        rem /= dims[i];
      }
      out[flat] = off;
    }
    return out;
  };
  const auto pl_off = offsets(pl_dims, pl_strides, pl_total);
  const auto id_off = offsets(id_dims, id_strides, id_total);

  Matrix out = Matrix::Zero(shape.dim(), shape.dim());
  for (Index i = 0; i < pl_total; ++i)
    for (Index j = 0; j < pl_total; ++j) {
      const Complex v = reduced(i, j);
      if (v == Complex(0.0, 0.0)) continue;
      for (Index e = 0; e < id_total; ++e)
        out(pl_off[i] + id_off[e], pl_off[j] + id_off[e]) = v;
    }
  return out;
}

DensityMatrix purify(const DensityMatrix& rho) {
  const Spectrum s = eig_hermitian(rho.hermitian());
  std::vector<Index> support;
  for (Index i = 0; i < s.eigenvalues.size(); ++i)
    if (s.eigenvalues[i] > kRankTol) support.push_back(i);
  if (support.empty()) throw std::invalid_argument("purify: numerically zero state");
  const Index d = rho.dim();
  const Index r = static_cast<Index>(support.size());
  Vector psi = Vector::Zero(d * r);
  for (Index k = 0; k < r; ++k) {
    const double w = std::sqrt(s.eigenvalues[support[k]]);
    for (Index i = 0; i < d; ++i)
      psi[i * r + k] = w * s.eigenvectors(i, support[k]);
  }
  psi /= psi.norm();
  return DensityMatrix::pure(psi);
}

// -- sampling ----------------------------------------------------------

Matrix ginibre(Index rows, Index cols, Rng& rng) {
  Matrix g(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) g(i, j) = rng.cgaussian();
  return g;
}

Matrix haar_unitary(Index dim, Rng& rng) {
  const Matrix g = ginibre(dim, dim, rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index i = 0; i < dim; ++i) {
    const Complex d = r(i, i);
    const double a = std::abs(d);
    q.col(i) *= (a > 0.0) ? d / a : Complex(1.0, 0.0);
  }
  return q;
}

DensityMatrix density_hs(Index dim, Rng& rng) {
  const Matrix g = ginibre(dim, dim, rng);
  Matrix m = g * g.adjoint();
  m /= m.trace().real();
  return DensityMatrix::trusted(std::move(m), 0.0);
}

DensityMatrix pure_haar(Index dim, Rng& rng) {
  Vector v(dim);
  for (Index i = 0; i < dim; ++i) v[i] = rng.cgaussian();
  return DensityMatrix::pure(v);
}

PositiveOperator contraction(Index dim, Rng& rng) {
  const Matrix u = haar_unitary(dim, rng);
  RealVector vals(dim);
  for (Index i = 0; i < dim; ++i) vals[i] = rng.uniform();
  Matrix m = u * vals.asDiagonal() * u.adjoint();
  return PositiveOperator::trusted(std::move(m), 0.0);
}

RealVector dirichlet_uniform(Index cells, Rng& rng) {
  RealVector v(cells);
  double sum = 0.0;
  for (Index i = 0; i < cells; ++i) {
    v[i] = -std::log(rng.uniform_pos());
    sum += v[i];
  }
  return v / sum;
}

HermitianOperator hermitian_unit(Index dim, Rng& rng) {
  Matrix m(dim, dim);
  for (Index i = 0; i < dim; ++i)
    for (Index j = 0; j < dim; ++j)
      m(i, j) = Complex(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
  return HermitianOperator(0.5 * (m + Matrix(m.adjoint())));
}

DensityMatrix sample_density_hs(Index dim, std::uint64_t seed) {
  Rng rng(seed);
  return density_hs(dim, rng);
}

DensityMatrix sample_pure_haar(Index dim, std::uint64_t seed) {
  Rng rng(seed);
  return pure_haar(dim, rng);
}

PositiveOperator sample_contraction(Index dim, std::uint64_t seed) {
  Rng rng(seed);
  return contraction(dim, rng);
}

Matrix sample_unitary_haar(Index dim, std::uint64_t seed) {
  Rng rng(seed);
  return haar_unitary(dim, rng);
}

DensityMatrix sample_classical_joint(Index dim_a, Index dim_b, std::uint64_t seed) {
  Rng rng(seed);
  const RealVector p = dirichlet_uniform(dim_a * dim_b, rng);
  return DensityMatrix::diagonal(p);
}

HermitianOperator sample_hermitian(Index dim, std::uint64_t seed) {
  Rng rng(seed);
  return hermitian_unit(dim, rng);
}

Matrix sample(const std::string& kind, const std::vector<Index>& dims,
              std::uint64_t seed) {
  if (dims.empty()) throw std::invalid_argument("sample: no dims given");
  for (Index d : dims)
    if (d < 1) throw std::invalid_argument("sample: dims must be >= 1");
  if (kind == "density_hs") return sample_density_hs(dims[0], seed).matrix();
  if (kind == "pure_haar") return sample_pure_haar(dims[0], seed).matrix();
  if (kind == "contraction") return sample_contraction(dims[0], seed).matrix();
  if (kind == "unitary_haar") return sample_unitary_haar(dims[0], seed);
  if (kind == "classical_joint") {
    if (dims.size() < 2)
      throw std::invalid_argument("sample: classical_joint needs two dims");
    return sample_classical_joint(dims[0], dims[1], seed).matrix();
  }
  throw std::invalid_argument("sample: invalid kind '" + kind + "'");
}

}  // namespace qspectra
