#pragma once

// JSON and CSV formats shared by the command-line tool and the tests.
//
// Matrices are objects {"rows", "cols", "data"} with data a row-major list
// of [re, im] pairs. Doubles are written with 17 significant digits so
// that decode(encode(m)) reproduces m bit for bit.

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "dlab/approx.hpp"
#include "dlab/diagnostics.hpp"
#include "dlab/dilation.hpp"

namespace dlab {

using Json = nlohmann::ordered_json;

/// Malformed or inconsistent serialized data.
class FormatError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// File system failure while reading or writing artifacts.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Json encode_matrix(const CMatrix& m);
CMatrix decode_matrix(const Json& j);

/// Serializes with %.17g doubles. indent < 0 gives a single line; arrays
/// of scalars always stay on one line.
std::string dump_json(const Json& j, int indent = 2);
Json parse_json(const std::string& text);

Json encode_channel(const ChannelRep& rep);
/// Accepts {"type": "superop"|"choi"|"kraus"|"unitary", ...} and
/// {"type": "builtin", "family", "gamma", "time"}.
ChannelRep decode_channel(const Json& j);

Json encode_source(const CurveSource& src);
/// Accepts {"type": "builtin", "family", "gamma"},
/// {"type": "lindblad", "hamiltonian", "jumps"} and
/// {"type": "table", "times", "channels"}.
CurveSource decode_source(const Json& j);

Json encode_kraus_curve(const KrausCurve& curve);
Json encode_unitary_curve(const UnitaryCurve& curve);
Json encode_dilation_report(const DilationReport& report);
Json encode_singularity_report(const SingularityReport& report);
Json encode_approx(const ApproxDilation& apx);

/// Comma separated values with a header row; cells use %.17g.
std::string csv_table(const std::vector<std::string>& header, const std::vector<std::vector<double>>& columns);

std::string read_file(const std::filesystem::path& path);
/// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace dlab
