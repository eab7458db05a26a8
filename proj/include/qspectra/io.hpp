#ifndef QSPECTRA_IO_HPP
#define QSPECTRA_IO_HPP

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qspectra/channels.hpp"
#include "qspectra/rate_estimator.hpp"
#include "qspectra/spectrum_engine.hpp"
#include "qspectra/types.hpp"

namespace qspectra {

/// Operator with its tensor-factor dims as stored on disk:
/// {"dims": [d1, ...], "matrix": [[[re, im], ...], ...]} row-major.
struct LoadedOperator {
  Matrix matrix;
  std::vector<Index> dims;

  SubsystemShape shape() const;
};

LoadedOperator load_operator_json(const std::string& text);
LoadedOperator load_operator_file(const std::string& path);
std::string operator_to_json(const Matrix& m, const std::vector<Index>& dims);
void save_operator_file(const std::string& path, const Matrix& m,
                        const std::vector<Index>& dims);

/// Builtin state names: bell, ghz3, maxmixed:<d>, diag:<p1,p2,...>,
/// classical:<p11,p12;p21,p22>. Returns nothing if `name` is not builtin.
std::optional<LoadedOperator> builtin_state(const std::string& name);

/// File if it exists or parses as JSON, builtin name otherwise.
LoadedOperator resolve_state(const std::string& name_or_path);

/// Channel format: {"dim_in": d, "dim_out": d', "kraus": [matrix, ...]}
/// with each Kraus operator a row-major [[[re, im], ...], ...] array.
KrausChannel load_channel_json(const std::string& text);
KrausChannel load_channel_file(const std::string& path);
std::string channel_to_json(const KrausChannel& t);
void save_channel_file(const std::string& path, const KrausChannel& t);

/// Builtin channel names: identity:<d>, dephase:<d>, depolarize:<d>:<p>,
/// amplitude_damping:<gamma>.
std::optional<KrausChannel> builtin_channel(const std::string& name);
KrausChannel resolve_channel(const std::string& name_or_path);

/// 12 significant digits, locale-independent.
std::string fmt_double(double v);

std::string curve_csv(const std::vector<SpectrumCurve>& curves);
std::string rate_csv(const RateEstimate& est);
/// Rate CSV with a trailing oracle column (convergence studies).
std::string rate_csv_with_oracle(const RateEstimate& est, double oracle);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace qspectra

#endif
