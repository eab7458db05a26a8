#ifndef QSPECTRA_OPERATOR_CORE_HPP
#define QSPECTRA_OPERATOR_CORE_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "qspectra/rng.hpp"
#include "qspectra/types.hpp"

namespace qspectra {

/// Full eigendecomposition, eigenvalues ascending. Verifies the
/// reconstruction U L U^dag against the input and the unitarity of U.
Spectrum eig_hermitian(const HermitianOperator& a);

/// Eigenvalues only (ascending).
RealVector eigvals_hermitian(const HermitianOperator& a);

/// Zero-eigenvalue tie-break half-width for the difference operator:
/// 1e-12 * (1 + max |eigenvalue|).
double projector_tie_tol(const RealVector& eigenvalues);

/// Orthogonal projector onto the eigenspace of A - B selected by
/// `rel` against zero. Non-strict relations include eigenvalues within
/// the tie tolerance of zero; strict ones exclude them, so {>=} and {<}
/// always sum to the identity.
PositiveOperator spectral_projector(const HermitianOperator& a,
                                    const HermitianOperator& b, Relation rel);

/// Tr[(A - B)_+]: the sum of nonnegative eigenvalues of A - B.
double positive_part_trace(const HermitianOperator& a,
                           const HermitianOperator& b);

Matrix kron(const Matrix& a, const Matrix& b);

/// Kronecker product in list order, refused above `dim_cap`.
HermitianOperator tensor_product(std::span<const HermitianOperator> ops,
                                 Index dim_cap = kDefaultDimCap);

Matrix kron_power(const Matrix& a, int n, Index dim_cap = kDefaultDimCap);
DensityMatrix tensor_power(const DensityMatrix& rho, int n,
                           Index dim_cap = kDefaultDimCap);
PositiveOperator tensor_power(const PositiveOperator& w, int n,
                              Index dim_cap = kDefaultDimCap);

/// Partial trace keeping the factors whose labels appear in `keep`
/// (in their original order).
Matrix partial_trace(const Matrix& a, const SubsystemShape& shape,
                     const std::vector<std::string>& keep);
HermitianOperator partial_trace(const HermitianOperator& a,
                                const SubsystemShape& shape,
                                const std::vector<std::string>& keep);
DensityMatrix partial_trace(const DensityMatrix& a, const SubsystemShape& shape,
                            const std::vector<std::string>& keep);

/// Operator acting as `reduced` on the factors labelled `placed` and as
/// the identity elsewhere, in the full space's index order.
Matrix embed_with_identity(const Matrix& reduced, const SubsystemShape& shape,
                           const std::vector<std::string>& placed);

/// Rank-1 purification on dim * rank(rho); eigenvalues below 1e-12 are
/// treated as zero. Partial trace over the second factor returns rho.
DensityMatrix purify(const DensityMatrix& rho);

// -- random sampling ---------------------------------------------------
// All samplers are pure functions of (dims, seed).

DensityMatrix sample_density_hs(Index dim, std::uint64_t seed);
DensityMatrix sample_pure_haar(Index dim, std::uint64_t seed);
/// Random 0 <= P <= I: U diag(u) U^dag with u uniform on [0,1].
PositiveOperator sample_contraction(Index dim, std::uint64_t seed);
Matrix sample_unitary_haar(Index dim, std::uint64_t seed);
/// Diagonal density from a Dirichlet(1,...,1) joint on dim_a * dim_b cells.
DensityMatrix sample_classical_joint(Index dim_a, Index dim_b,
                                     std::uint64_t seed);
/// Hermitized matrix with entries uniform in [-1,1] x [-1,1]i.
HermitianOperator sample_hermitian(Index dim, std::uint64_t seed);

// In-place variants drawing from a caller-provided generator, used when
// several samples must come from one stream.
Matrix ginibre(Index rows, Index cols, Rng& rng);
Matrix haar_unitary(Index dim, Rng& rng);
DensityMatrix density_hs(Index dim, Rng& rng);
DensityMatrix pure_haar(Index dim, Rng& rng);
PositiveOperator contraction(Index dim, Rng& rng);
RealVector dirichlet_uniform(Index cells, Rng& rng);
HermitianOperator hermitian_unit(Index dim, Rng& rng);

/// String-keyed dispatcher over the samplers above. `kind` is one of
/// density_hs, pure_haar, contraction, unitary_haar, classical_joint.
/// Returns the raw matrix (unitary_haar is not Hermitian).
Matrix sample(const std::string& kind, const std::vector<Index>& dims,
              std::uint64_t seed);

}  // namespace qspectra

#endif
