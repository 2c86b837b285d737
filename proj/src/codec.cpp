#include "dlab/codec.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

#include <fmt/format.h>

namespace dlab {

namespace {

double finite_number(const Json& j, const char* what) {
  if (!j.is_number()) throw FormatError(fmt::format("{}: expected a number", what));
  const double x = j.get<double>();
  if (!std::isfinite(x)) throw FormatError(fmt::format("{}: non-finite value", what));
  return x;
}

const Json& field(const Json& j, const char* key) {
  if (!j.is_object()) throw FormatError(fmt::format("expected an object with key '{}'", key));
  auto it = j.find(key);
  if (it == j.end()) throw FormatError(fmt::format("missing key '{}'", key));
  return *it;
}

int small_int(const Json& j, const char* what) {
  if (!j.is_number_integer()) throw FormatError(fmt::format("{}: expected an integer", what));
  const auto v = j.get<long long>();
  if (v < 0 || v > (1 << 20)) throw FormatError(fmt::format("{}: out of range ({})", what, v));
  return static_cast<int>(v);
}

std::string format_double(double x) {
  if (!std::isfinite(x)) throw FormatError("dump_json: refusing to write a non-finite number");
  std::string s = fmt::format("{:.17g}", x);
  if (s == "-0") s = "-0.0";
  return s;
}

bool is_scalar(const Json& j) { return !j.is_array() && !j.is_object(); }

bool is_flat(const Json& j) {
  for (const auto& e : j) {
    if (is_scalar(e)) continue;
    if (!e.is_array()) return false;
    for (const auto& x : e)
      if (!is_scalar(x)) return false;
  }
  return true;
}

void write(const Json& j, int indent, int depth, bool inline_mode, std::string& out) {
  const auto newline = [&](int level) {
    if (inline_mode || indent < 0) return;
    out += '\n';
    out.append(static_cast<std::size_t>(indent * level), ' ');
  };
  switch (j.type()) {
    case Json::value_t::number_float:
      out += format_double(j.get<double>());
      return;
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      const bool flat = inline_mode || is_flat(j);
      out += '[';
      bool first = true;
      for (const auto& e : j) {
        if (!first) out += flat ? (indent < 0 ? "," : ", ") : ",";
        first = false;
        if (!flat) newline(depth + 1);
        write(e, indent, depth + 1, flat, out);
      }
      if (!flat) newline(depth);
      out += ']';
      return;
    }
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += '{';
      bool first = true;
      for (const auto& [key, value] : j.items()) {
        if (!first) out += ',';
        first = false;
        newline(depth + 1);
        out += Json(key).dump();
        out += (indent < 0 || inline_mode) ? ":" : ": ";
        write(value, indent, depth + 1, inline_mode, out);
      }
      newline(depth);
      out += '}';
      return;
    }
    default:
      out += j.dump();
  }
}

Json encode_doubles(const std::vector<double>& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(x);
  return a;
}

Json encode_doubles(const RVector& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Json encode_strings(const std::vector<std::string>& v) {
  Json a = Json::array();
  for (const auto& s : v) a.push_back(s);
  return a;
}

std::vector<CMatrix> decode_matrix_list(const Json& j, const char* what) {
  if (!j.is_array() || j.empty()) throw FormatError(fmt::format("{}: expected a non-empty list of matrices", what));
  std::vector<CMatrix> out;
  for (const auto& e : j) out.push_back(decode_matrix(e));
  return out;
}

int square_dim(const CMatrix& m, const char* what) {
  if (m.rows() != m.cols()) throw FormatError(fmt::format("{}: expected a square matrix", what));
  return static_cast<int>(m.rows());
}

}  // namespace

Json encode_matrix(const CMatrix& m) {
  Json data = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      const cplx z = m(r, c);
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
        throw FormatError(fmt::format("encode_matrix: non-finite entry at ({}, {})", r, c));
      }
      data.push_back(Json::array({z.real(), z.imag()}));
    }
  }
  Json j;
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  j["data"] = std::move(data);
  return j;
}

CMatrix decode_matrix(const Json& j) {
  const int rows = small_int(field(j, "rows"), "matrix rows");
  const int cols = small_int(field(j, "cols"), "matrix cols");
  const Json& data = field(j, "data");
  if (!data.is_array()) throw FormatError("matrix data: expected a list");
  if (data.size() != static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols)) {
    throw FormatError(fmt::format("matrix data: {} entries for a {}x{} matrix", data.size(), rows, cols));
  }
  CMatrix m(rows, cols);
  std::size_t k = 0;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c, ++k) {
      const Json& e = data[k];
      if (!e.is_array() || e.size() != 2) throw FormatError("matrix data: entries must be [re, im] pairs");
      m(r, c) = cplx(finite_number(e[0], "matrix entry"), finite_number(e[1], "matrix entry"));
    }
  }
  return m;
}

std::string dump_json(const Json& j, int indent) {
  std::string out;
  write(j, indent, 0, false, out);
  if (indent >= 0) out += '\n';
  return out;
}

Json parse_json(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(fmt::format("malformed JSON: {}", e.what()));
  }
}

Json encode_channel(const ChannelRep& rep) {
  Json j;
  j["type"] = to_string(rep.kind());
  j["dim"] = rep.dim();
  std::visit(
      [&](const auto& form) {
        using F = std::decay_t<decltype(form)>;
        if constexpr (std::is_same_v<F, KrausSet>) {
          Json ops = Json::array();
          for (const auto& k : form.operators) ops.push_back(encode_matrix(k));
          j["operators"] = std::move(ops);
        } else {
          j["matrix"] = encode_matrix(form.matrix);
        }
      },
      rep.form());
  return j;
}

ChannelRep decode_channel(const Json& j) {
  const Json& type = field(j, "type");
  if (!type.is_string()) throw FormatError("channel type must be a string");
  const auto t = type.get<std::string>();
  if (t == "superop") return ChannelRep::from_superop(decode_matrix(field(j, "matrix")));
  if (t == "unitary") return ChannelRep::from_unitary(decode_matrix(field(j, "matrix")));
  if (t == "choi") {
    CMatrix m = decode_matrix(field(j, "matrix"));
    const int n2 = square_dim(m, "choi matrix");
    int n = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n2))));
    if (n * n != n2) throw FormatError("choi matrix: size is not a perfect square");
    return ChannelRep::from_choi(ChoiMatrix{n, std::move(m)});
  }
  if (t == "kraus") {
    KrausSet k;
    k.operators = decode_matrix_list(field(j, "operators"), "kraus operators");
    k.dim = square_dim(k.operators.front(), "kraus operator");
    return ChannelRep::from_kraus(std::move(k));
  }
  if (t == "builtin") {
    const auto family = field(j, "family").get<std::string>();
    const double gamma = finite_number(field(j, "gamma"), "gamma");
    const double time = finite_number(field(j, "time"), "time");
    return builtin_channel(BuiltinFamily{builtin_from_string(family), gamma}, time);
  }
  throw FormatError(fmt::format("unknown channel type '{}'", t));
}

Json encode_source(const CurveSource& src) {
  Json j;
  std::visit(
      [&](const auto& s) {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, BuiltinFamily>) {
          j["type"] = "builtin";
          j["family"] = to_string(s.kind);
          j["gamma"] = s.gamma;
        } else if constexpr (std::is_same_v<S, LindbladGenerator>) {
          j["type"] = "lindblad";
          j["hamiltonian"] = encode_matrix(s.hamiltonian);
          Json jumps = Json::array();
          for (const auto& l : s.jumps) jumps.push_back(encode_matrix(l));
          j["jumps"] = std::move(jumps);
        } else {
          j["type"] = "table";
          j["times"] = encode_doubles(s.times);
          Json chans = Json::array();
          for (const auto& c : s.channels) chans.push_back(encode_channel(c));
          j["channels"] = std::move(chans);
        }
      },
      src.source);
  return j;
}

CurveSource decode_source(const Json& j) {
  const Json& type = field(j, "type");
  if (!type.is_string()) throw FormatError("source type must be a string");
  const auto t = type.get<std::string>();
  if (t == "builtin") {
    const Json& family = field(j, "family");
    if (!family.is_string()) throw FormatError("builtin family must be a string");
    const double gamma = j.contains("gamma") ? finite_number(j["gamma"], "gamma") : 1.0;
    return CurveSource::builtin(builtin_from_string(family.get<std::string>()), gamma);
  }
  if (t == "lindblad") {
    LindbladGenerator gen;
    gen.hamiltonian = decode_matrix(field(j, "hamiltonian"));
    gen.dim = square_dim(gen.hamiltonian, "hamiltonian");
    if (j.contains("jumps")) {
      if (!j["jumps"].is_array()) throw FormatError("jumps: expected a list of matrices");
      for (const auto& e : j["jumps"]) gen.jumps.push_back(decode_matrix(e));
    }
    return CurveSource::semigroup(std::move(gen));
  }
  if (t == "table") {
    ChannelTable table;
    const Json& times = field(j, "times");
    const Json& chans = field(j, "channels");
    if (!times.is_array() || !chans.is_array()) throw FormatError("table: times and channels must be lists");
    for (const auto& x : times) table.times.push_back(finite_number(x, "table time"));
    for (const auto& c : chans) table.channels.push_back(decode_channel(c));
    return CurveSource::table(std::move(table));
  }
  throw FormatError(fmt::format("unknown source type '{}'", t));
}

Json encode_kraus_curve(const KrausCurve& curve) {
  Json j;
  j["times"] = encode_doubles(curve.grid.points);
  Json fams = Json::array();
  for (std::size_t k = 0; k < curve.families.size(); ++k) {
    Json f;
    Json ops = Json::array();
    for (const auto& op : curve.families[k].operators) ops.push_back(encode_matrix(op));
    f["operators"] = std::move(ops);
    if (k < curve.spectra.size()) f["choi_eigenvalues"] = encode_doubles(curve.spectra[k].eigenvalues);
    fams.push_back(std::move(f));
  }
  j["families"] = std::move(fams);
  return j;
}

Json encode_unitary_curve(const UnitaryCurve& curve) {
  Json j;
  j["system_dim"] = curve.system_dim;
  j["ancilla_dim"] = curve.ancilla_dim;
  j["omega_index"] = curve.omega_index;
  j["times"] = encode_doubles(curve.grid.points);
  Json us = Json::array();
  for (const auto& u : curve.unitaries) us.push_back(encode_matrix(u));
  j["unitaries"] = std::move(us);
  return j;
}

Json encode_dilation_report(const DilationReport& r) {
  Json j;
  j["norm"] = "Frobenius (reduced action, unitarity, jumps); Choi trace norm (Kraus jump bound)";
  j["verify_tol"] = r.verify_tol;
  j["all_verified"] = r.all_verified;
  j["continuity_ok"] = r.continuity_ok;
  j["starts_at_zero"] = r.starts_at_zero;
  j["ancilla_dim"] = r.ancilla_dim;
  j["max_kraus_rank"] = r.max_kraus_rank;
  j["max_verify_residual"] = r.max_verify_residual;
  j["max_unitarity_residual"] = r.max_unitarity_residual;
  j["max_unitary_jump"] = r.max_unitary_jump;
  j["times"] = encode_doubles(r.times);
  j["verify_residuals"] = encode_doubles(r.verify_residuals);
  j["unitarity_residuals"] = encode_doubles(r.unitarity_residuals);
  j["unitary_jumps"] = encode_doubles(r.unitary_jumps);
  j["kraus_jumps"] = encode_doubles(r.kraus_jumps);
  j["kraus_jump_bounds"] = encode_doubles(r.kraus_jump_bounds);
  j["warnings"] = encode_strings(r.warnings);
  return j;
}

Json encode_singularity_report(const SingularityReport& r) {
  Json j;
  j["norm"] = "operator norm of H(t); log-log least squares fit";
  j["fitted_exponent"] = r.fitted_exponent;
  j["fit_intercept"] = r.fit_intercept;
  j["fit_residual"] = r.fit_residual;
  j["fit_points"] = r.fit_points;
  j["choi_eigenvalues_tmin"] = encode_doubles(r.choi_eigenvalues_tmin);
  j["choi_eigenvalue_slopes"] = encode_doubles(r.choi_eigenvalue_slopes);
  Json flags = Json::array();
  for (const auto& f : r.flagged_eigenvalues) {
    Json e;
    e["index"] = f.index;
    e["value_at_tmin"] = f.value_at_tmin;
    e["lambda0"] = f.lambda0;
    e["slope_estimate"] = f.slope_estimate;
    flags.push_back(std::move(e));
  }
  j["flagged_eigenvalues"] = std::move(flags);
  j["warnings"] = encode_strings(r.warnings);
  return j;
}

Json encode_approx(const ApproxDilation& apx) {
  Json j;
  j["norm"] = "diamond upper surrogate ||J_a - J_b||_1 on unnormalized Choi matrices (lower surrogate, divided by n, reported alongside)";
  j["horizon"] = apx.horizon;
  j["mesh"] = apx.mesh;
  j["system_dim"] = apx.system_dim;
  j["ancilla_dim"] = apx.ancilla_dim;
  j["omega_index"] = apx.omega_index;
  j["lipschitz_raw"] = apx.lipschitz_raw;
  j["lipschitz_used"] = apx.lipschitz_used;
  j["certified_error"] = apx.certified_error;
  const auto& v = apx.verification;
  Json ver;
  ver["points"] = v.times.size();
  ver["measured_sup_error"] = v.measured_sup_error;
  ver["measured_sup_lower"] = v.measured_sup_lower;
  ver["max_unitarity_residual"] = v.max_unitarity_residual;
  ver["max_unitary_jump"] = v.max_unitary_jump;
  j["verification"] = std::move(ver);
  Json segs = Json::array();
  for (const auto& s : apx.segments) {
    Json e;
    e["t_start"] = s.t_start;
    e["stationary"] = s.stationary;
    e["from_copy"] = s.from_copy;
    e["start_unitary"] = encode_matrix(s.start_unitary);
    e["from_isometry"] = encode_matrix(s.from_isometry);
    e["to_isometry"] = encode_matrix(s.to_isometry);
    segs.push_back(std::move(e));
  }
  j["segments"] = std::move(segs);
  j["warnings"] = encode_strings(apx.warnings);
  return j;
}

std::string csv_table(const std::vector<std::string>& header, const std::vector<std::vector<double>>& columns) {
  if (header.size() != columns.size()) throw FormatError("csv_table: header and column counts differ");
  std::string out;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c) out += ',';
    out += header[c];
  }
  out += '\n';
  const std::size_t rows = columns.empty() ? 0 : columns.front().size();
  for (const auto& col : columns)
    if (col.size() != rows) throw FormatError("csv_table: ragged columns");
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < columns.size(); ++c) {
      if (c) out += ',';
      out += format_double(columns[c][r]);
    }
    out += '\n';
  }
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open '{}' for reading", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError(fmt::format("error while reading '{}'", path.string()));
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(fmt::format("cannot open '{}' for writing", tmp.string()));
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw IoError(fmt::format("error while writing '{}'", tmp.string()));
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError(fmt::format("cannot move '{}' into place: {}", path.string(), ec.message()));
  }
}

}  // namespace dlab
