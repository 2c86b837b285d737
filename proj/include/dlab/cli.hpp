#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>

#include "dlab/codec.hpp"

namespace dlab::cli {

/// Exit statuses of the command-line tool.
enum ExitCode : int {
  kOk = 0,
  kValidationFailure = 1,
  kNumericalFailure = 2,
  kIoFailure = 3,
  kBadConfig = 4,
};

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct JobConfig {
  std::string command;
  std::optional<Json> source;   // curve source (codec schema)
  std::optional<Json> channel;  // single channel (codec schema)
  std::optional<double> time;   // channel time when `channel` is absent
  std::optional<std::string> grid;
  double tol = 1e-9;
  std::optional<double> gamma;
  double epsilon = 0.05;
  std::optional<double> horizon;
  int ancilla = 0;
  int points_per_decade = 8;
  std::string target = "choi";
  int trials = 8;
  std::filesystem::path out_dir = "out";
  std::uint64_t seed = 0;
};

/// Reads the keys of a JSON config file into `base`. Unknown keys and
/// wrongly typed values throw ConfigError.
JobConfig config_from_json(const Json& j, JobConfig base = {});

/// Throws ConfigError when the config cannot be run.
void validate(const JobConfig& config);

/// Runs one job, writing artifacts below config.out_dir and a human
/// readable summary to `out`. Errors are reported on `err` and mapped to
/// an ExitCode.
int run(const JobConfig& config, std::ostream& out, std::ostream& err);

/// Parses argv (including --config) and calls run().
int main_entry(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace dlab::cli
