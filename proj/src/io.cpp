#include "qspectra/io.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace qspectra {

using nlohmann::json;

SubsystemShape LoadedOperator::shape() const {
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < dims.size(); ++i)
    labels.push_back(std::string(1, static_cast<char>('A' + i)));
  return SubsystemShape(dims, std::move(labels));
}

namespace {

Matrix parse_matrix_rows(const json& rows, const char* what) {
  if (!rows.is_array() || rows.empty())
    throw std::invalid_argument(std::string(what) + ": matrix must be a nonempty array");
  const std::size_t nr = rows.size();
  std::size_t nc = 0;
  Matrix m;
  for (std::size_t i = 0; i < nr; ++i) {
    const json& row = rows[i];
    if (!row.is_array())
      throw std::invalid_argument(std::string(what) + ": row is not an array");
    if (i == 0) {
      nc = row.size();
      m = Matrix::Zero(nr, nc);
    } else if (row.size() != nc) {
      throw std::invalid_argument(std::string(what) + ": ragged rows");
    }
    for (std::size_t j = 0; j < nc; ++j) {
      const json& cell = row[j];
      if (!cell.is_array() || cell.size() != 2)
        throw std::invalid_argument(std::string(what) +
                                    ": entries must be [re, im] pairs");
      m(i, j) = Complex(cell[0].get<double>(), cell[1].get<double>());
    }
  }
  return m;
}

json matrix_rows(const Matrix& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < m.cols(); ++j)
      row.push_back(json::array({m(i, j).real(), m(i, j).imag()}));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<double> parse_number_list(const std::string& text, char sep,
                                      const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) {
    if (item.empty()) continue;
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw std::invalid_argument(what + ": cannot parse number '" + item + "'");
    }
  }
  if (out.empty()) throw std::invalid_argument(what + ": empty list");
  return out;
}

}  // namespace

LoadedOperator load_operator_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("operator JSON: ") + e.what());
  }
  if (!doc.contains("dims") || !doc.contains("matrix"))
    throw std::invalid_argument("operator JSON: needs 'dims' and 'matrix'");
  LoadedOperator out;
  for (const auto& d : doc["dims"]) {
    const auto v = d.get<std::int64_t>();
    if (v < 1) throw std::invalid_argument("operator JSON: dims must be >= 1");
    out.dims.push_back(static_cast<Index>(v));
  }
  if (out.dims.empty()) throw std::invalid_argument("operator JSON: empty dims");
  out.matrix = parse_matrix_rows(doc["matrix"], "operator JSON");
  Index total = 1;
  for (Index d : out.dims) total *= d;
  if (out.matrix.rows() != total || out.matrix.cols() != total)
    throw std::invalid_argument("operator JSON: matrix size " +
                                std::to_string(out.matrix.rows()) +
                                " != product of dims " + std::to_string(total));
  return out;
}

LoadedOperator load_operator_file(const std::string& path) {
  return load_operator_json(read_text_file(path));
}

std::string operator_to_json(const Matrix& m, const std::vector<Index>& dims) {
  json doc;
  doc["dims"] = json::array();
  for (Index d : dims) doc["dims"].push_back(d);
  doc["matrix"] = matrix_rows(m);
  return doc.dump();
}

void save_operator_file(const std::string& path, const Matrix& m,
                        const std::vector<Index>& dims) {
  write_text_file(path, operator_to_json(m, dims));
}

std::optional<LoadedOperator> builtin_state(const std::string& name) {
  LoadedOperator out;
  if (name == "bell") {
    Vector psi = Vector::Zero(4);
    psi[0] = psi[3] = 1.0 / std::sqrt(2.0);
    out.matrix = psi * psi.adjoint();
    out.dims = {2, 2};
    return out;
  }
  if (name == "ghz3") {
    Vector psi = Vector::Zero(8);
    psi[0] = psi[7] = 1.0 / std::sqrt(2.0);
    out.matrix = psi * psi.adjoint();
    out.dims = {2, 2, 2};
    return out;
  }
  if (name.rfind("maxmixed:", 0) == 0) {
    const int d = std::stoi(name.substr(9));
    if (d < 1) throw std::invalid_argument("maxmixed: dim must be >= 1");
    out.matrix = Matrix::Identity(d, d) / static_cast<double>(d);
    out.dims = {d};
    return out;
  }
  if (name.rfind("diag:", 0) == 0) {
    const auto probs = parse_number_list(name.substr(5), ',', "diag");
    double sum = 0.0;
    for (double p : probs) {
      if (p < 0.0) throw std::invalid_argument("diag: negative probability");
      sum += p;
    }
    if (sum <= 0.0) throw std::invalid_argument("diag: zero mass");
    const Index d = static_cast<Index>(probs.size());
    out.matrix = Matrix::Zero(d, d);
    for (Index i = 0; i < d; ++i) out.matrix(i, i) = probs[i] / sum;
    out.dims = {d};
    return out;
  }
  if (name.rfind("classical:", 0) == 0) {
    const std::string body = name.substr(10);
    std::vector<std::vector<double>> rows;
    std::stringstream ss(body);
    std::string row;
    while (std::getline(ss, row, ';'))
      rows.push_back(parse_number_list(row, ',', "classical"));
    if (rows.empty()) throw std::invalid_argument("classical: empty table");
    const std::size_t nc = rows[0].size();
    double sum = 0.0;
    for (const auto& r : rows) {
      if (r.size() != nc) throw std::invalid_argument("classical: ragged rows");
      for (double v : r) {
        if (v < 0.0) throw std::invalid_argument("classical: negative probability");
        sum += v;
      }
    }
    if (sum <= 0.0) throw std::invalid_argument("classical: zero mass");
    const Index da = static_cast<Index>(rows.size());
    const Index db = static_cast<Index>(nc);
    out.matrix = Matrix::Zero(da * db, da * db);
    for (Index i = 0; i < da; ++i)
      for (Index j = 0; j < db; ++j)
        out.matrix(i * db + j, i * db + j) = rows[i][j] / sum;
    out.dims = {da, db};
    return out;
  }
  return std::nullopt;
}

LoadedOperator resolve_state(const std::string& name_or_path) {
  if (std::filesystem::exists(name_or_path)) return load_operator_file(name_or_path);
  if (auto b = builtin_state(name_or_path)) return *b;
  throw std::invalid_argument("state '" + name_or_path +
                              "': no such file and not a builtin name");
}

KrausChannel load_channel_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("channel JSON: ") + e.what());
  }
  if (!doc.contains("dim_in") || !doc.contains("dim_out") || !doc.contains("kraus"))
    throw std::invalid_argument("channel JSON: needs dim_in, dim_out, kraus");
  const Index din = doc["dim_in"].get<Index>();
  const Index dout = doc["dim_out"].get<Index>();
  std::vector<Matrix> ks;
  for (const auto& k : doc["kraus"]) ks.push_back(parse_matrix_rows(k, "channel JSON"));
  return KrausChannel(din, dout, std::move(ks));
}

KrausChannel load_channel_file(const std::string& path) {
  return load_channel_json(read_text_file(path));
}

std::string channel_to_json(const KrausChannel& t) {
  json doc;
  doc["dim_in"] = t.dim_in();
  doc["dim_out"] = t.dim_out();
  doc["kraus"] = json::array();
  for (const auto& k : t.ops()) doc["kraus"].push_back(matrix_rows(k));
  return doc.dump();
}

void save_channel_file(const std::string& path, const KrausChannel& t) {
  write_text_file(path, channel_to_json(t));
}

std::optional<KrausChannel> builtin_channel(const std::string& name) {
  if (name.rfind("identity:", 0) == 0)
    return KrausChannel::identity(std::stoi(name.substr(9)));
  if (name.rfind("dephase:", 0) == 0)
    return KrausChannel::dephasing(std::stoi(name.substr(8)));
  if (name.rfind("depolarize:", 0) == 0) {
    const std::string body = name.substr(11);
    const auto colon = body.find(':');
    if (colon == std::string::npos)
      throw std::invalid_argument("depolarize: expected depolarize:<d>:<p>");
    return KrausChannel::depolarizing(std::stoi(body.substr(0, colon)),
                                      std::stod(body.substr(colon + 1)));
  }
  if (name.rfind("amplitude_damping:", 0) == 0)
    return KrausChannel::amplitude_damping(std::stod(name.substr(18)));
  return std::nullopt;
}

KrausChannel resolve_channel(const std::string& name_or_path) {
  if (std::filesystem::exists(name_or_path)) return load_channel_file(name_or_path);
  if (auto b = builtin_channel(name_or_path)) return *b;
  throw std::invalid_argument("channel '" + name_or_path +
                              "': no such file and not a builtin name");
}

std::string fmt_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 12);
  return std::string(buf, res.ptr);
}

std::string curve_csv(const std::vector<SpectrumCurve>& curves) {
  std::string out = "n,gamma,f,functional,engine\n";
  for (const auto& c : curves)
    for (const auto& pt : c.points) {
      out += std::to_string(c.n);
      out += ',';
      out += fmt_double(pt.gamma);
      out += ',';
      out += fmt_double(pt.f);
      out += ',';
      out += tail_name(c.tag);
      out += ',';
      out += c.engine;
      out += '\n';
    }
  return out;
}

namespace {

void rate_row(std::string& out, const RateEstimate& est, const RateRecord& r) {
  out += std::to_string(r.n);
  out += ',';
  out += fmt_double(est.epsilon);
  out += ',';
  out += fmt_double(r.sup_thresh);
  out += ',';
  out += fmt_double(r.inf_thresh);
  out += ',';
  out += fmt_double(r.midpoint);
  out += ',';
  out += r.engine;
  out += ',';
  out += est.kind;
}

}  // namespace

std::string rate_csv(const RateEstimate& est) {
  std::string out = "n,epsilon,sup_thresh,inf_thresh,midpoint,engine,kind\n";
  for (const auto& r : est.per_n) {
    rate_row(out, est, r);
    out += '\n';
  }
  return out;
}

std::string rate_csv_with_oracle(const RateEstimate& est, double oracle) {
  std::string out = "n,epsilon,sup_thresh,inf_thresh,midpoint,engine,kind,oracle\n";
  for (const auto& r : est.per_n) {
    rate_row(out, est, r);
    out += ',';
    out += fmt_double(oracle);
    out += '\n';
  }
  return out;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f << content;
  if (!f) throw std::runtime_error("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace qspectra
