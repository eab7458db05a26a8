#ifndef QSPECTRA_CHANNELS_HPP
#define QSPECTRA_CHANNELS_HPP

#include <cstdint>
#include <vector>

#include "qspectra/types.hpp"

namespace qspectra {

/// CPTP map in Kraus form. Construction records the CPTP defect
/// (max-norm of sum K^dag K - I) and rejects defects above 1e-9;
/// the tolerance is loose enough for deep tensor powers to validate.
class KrausChannel {
public:
  KrausChannel(Index dim_in, Index dim_out, std::vector<Matrix> kraus);

  static KrausChannel identity(Index dim);
  /// Kraus family {|i><i|}: removes off-diagonal entries.
  static KrausChannel dephasing(Index dim);
  /// rho -> (1-p) rho + p I/d tr(rho), via Weyl operators.
  static KrausChannel depolarizing(Index dim, double p);
  static KrausChannel amplitude_damping(double gamma);

  Index dim_in() const { return dim_in_; }
  Index dim_out() const { return dim_out_; }
  const std::vector<Matrix>& ops() const { return kraus_; }
  double cptp_defect() const { return cptp_defect_; }

private:
  Index dim_in_, dim_out_;
  std::vector<Matrix> kraus_;
  double cptp_defect_;
};

HermitianOperator apply_channel(const KrausChannel& t, const HermitianOperator& a);
DensityMatrix apply_channel(const KrausChannel& t, const DensityMatrix& rho);
PositiveOperator apply_channel(const KrausChannel& t, const PositiveOperator& w);

/// Stinespring construction: Haar unitary on system x environment, the
/// environment starting in the first basis vector. dim_env Kraus operators.
KrausChannel random_channel(Index dim_in, Index dim_env, std::uint64_t seed);

/// Mixture of Haar unitaries with Dirichlet weights; unital and CPTP.
KrausChannel random_mixed_unitary(Index dim, int num_unitaries, std::uint64_t seed);

struct UnitalReport {
  bool unital;
  double defect;  // max-norm of sum K K^dag - I
};
UnitalReport is_unital(const KrausChannel& t);

/// Kraus family of all n-fold tensor products.
KrausChannel channel_power(const KrausChannel& t, int n,
                           Index dim_cap = kDefaultDimCap);

}  // namespace qspectra

#endif
