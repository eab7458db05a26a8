#ifndef QSPECTRA_TYPES_HPP
#define QSPECTRA_TYPES_HPP

#include <complex>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace qspectra {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;

// Default cap on the dimension of any dense operator we will materialize.
inline constexpr Index kDefaultDimCap = Index{1} << 14;

// Thrown when a requested computation would exceed a configured size cap.
class capacity_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Thrown when a monotone level search cannot bracket its target.
class bracket_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Thrown when the eigensolver fails to converge or its output fails
// the reconstruction checks.
class eig_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

inline double max_abs(const Matrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline bool all_finite(const Matrix& m) {
  for (Index j = 0; j < m.cols(); ++j)
    for (Index i = 0; i < m.rows(); ++i)
      if (!std::isfinite(m(i, j).real()) || !std::isfinite(m(i, j).imag()))
        return false;
  return true;
}

/// Dense Hermitian operator. Construction records the Hermiticity defect
/// of the input (max-norm of M - M^dag), rejects defects above
/// 1e-10 * (1 + max-norm), and stores the Hermitized matrix.
class HermitianOperator {
public:
  explicit HermitianOperator(Matrix m);

  static HermitianOperator zero(Index dim);
  static HermitianOperator identity(Index dim);

  const Matrix& matrix() const { return mat_; }
  Index dim() const { return mat_.rows(); }
  double herm_defect() const { return herm_defect_; }
  double trace() const { return mat_.trace().real(); }

protected:
  struct Trusted {};
  HermitianOperator(Trusted, Matrix m, double defect)
      : mat_(std::move(m)), herm_defect_(defect) {}

private:
  Matrix mat_;
  double herm_defect_;

  friend class PositiveOperator;
};

/// Hermitian operator with a certified lower bound on its spectrum.
/// min_eig is computed exactly for untrusted input and carried through
/// algebraically (tensor products, channel outputs) otherwise.
class PositiveOperator {
public:
  explicit PositiveOperator(HermitianOperator base);

  static PositiveOperator identity(Index dim);
  /// Construction bypassing the eigensolve, for operators positive by
  /// construction (projectors, channel outputs, tensor powers).
  static PositiveOperator trusted(Matrix m, double min_eig_bound);

  const HermitianOperator& hermitian() const { return base_; }
  const Matrix& matrix() const { return base_.matrix(); }
  Index dim() const { return base_.dim(); }
  double min_eig() const { return min_eig_; }
  double trace() const { return base_.trace(); }

private:
  PositiveOperator(HermitianOperator base, double min_eig)
      : base_(std::move(base)), min_eig_(min_eig) {}

  HermitianOperator base_;
  double min_eig_;
};

/// Unit-trace positive operator.
class DensityMatrix {
public:
  explicit DensityMatrix(PositiveOperator op);
  explicit DensityMatrix(Matrix m) : DensityMatrix(PositiveOperator(HermitianOperator(std::move(m)))) {}

  static DensityMatrix maximally_mixed(Index dim);
  static DensityMatrix pure(const Vector& psi);
  static DensityMatrix diagonal(const RealVector& probs);
  static DensityMatrix trusted(Matrix m, double min_eig_bound);

  const PositiveOperator& positive() const { return op_; }
  const HermitianOperator& hermitian() const { return op_.hermitian(); }
  const Matrix& matrix() const { return op_.matrix(); }
  Index dim() const { return op_.dim(); }
  double trace() const { return trace_; }

private:
  DensityMatrix(PositiveOperator op, double trace)
      : op_(std::move(op)), trace_(trace) {}

  PositiveOperator op_;
  double trace_;
};

/// Eigendecomposition of a Hermitian operator: ascending eigenvalues and
/// the unitary of column eigenvectors.
struct Spectrum {
  RealVector eigenvalues;
  Matrix eigenvectors;
};

/// Tensor-factor structure of an operator. Labels may repeat (e.g. the
/// per-copy labels of an i.i.d. block); label-based selections then refer
/// to every factor carrying that label.
struct SubsystemShape {
  std::vector<Index> factor_dims;
  std::vector<std::string> labels;

  SubsystemShape() = default;
  SubsystemShape(std::vector<Index> dims, std::vector<std::string> names);

  Index dim() const;
  std::size_t factors() const { return factor_dims.size(); }
  /// Indices of factors whose label is in `which` (original order).
  std::vector<std::size_t> slots(const std::vector<std::string>& which) const;
  /// Shape replicated n times (per-copy labels repeat).
  SubsystemShape power(int n) const;
  static SubsystemShape single(Index dim, std::string label = "A");
};

enum class Relation { Geq, Gt, Leq, Lt };

}  // namespace qspectra

#endif
