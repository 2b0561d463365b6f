// Command-line front end: configuration, dispatch and the JSON/CSV report.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "qspectra/types.hpp"

namespace qspectra::cli {

inline constexpr const char* kToolVersion = "0.1.0";

/// Bad flags or a configuration missing a required field; exit status 2.
struct UsageError : Error {
  using Error::Error;
};

enum class Command { spec_a, spec_b, eigvec_b, measure_b, density_grid, verify, oracle };
enum class Format { json, csv };

std::string to_string(Command c);
Command parse_command(const std::string& name);

struct RunConfig {
  Command command = Command::spec_b;
  double q = 0.5;
  std::optional<double> alpha;
  std::optional<ExtensionParam> t;
  std::optional<SpectrumWindow> window;
  std::optional<int> m_max;
  std::optional<int> m;
  int k = 0;
  int l = 0;
  int grid = 64;
  std::string suite;
  std::string set = "R";        ///< "R" or "lo:hi,lo:hi,..."
  std::string op = "b";         ///< oracle target, "a" or "b"
  bool vectors = false;         ///< oracle eigenvectors
  std::optional<double> rel_tol;
  std::optional<int> max_terms;
  std::optional<double> tolerance;  ///< overrides the check tolerance of the command
  std::uint64_t seed = 0x5eed5eedULL;
  std::string output;           ///< empty writes to stdout
  Format format = Format::json;

  /// Throws UsageError when a command-specific field is missing or invalid.
  void validate() const;
  SeriesPolicy policy() const;
};

nlohmann::json to_json(const RunConfig& c);

struct ResidualSummary {
  std::string family;
  double max = 0.0;
  double mean = 0.0;
  double tolerance = 0.0;
  int count = 0;

  bool ok() const { return count == 0 || max <= tolerance; }
};

struct ReportEnvelope {
  std::string tool_version = kToolVersion;
  nlohmann::json config;
  nlohmann::json results;
  std::vector<ResidualSummary> residuals;
  std::int64_t wall_time_ms = 0;
  std::string csv;  ///< density-grid table when the format is csv

  bool ok() const;
  /// First family outside its tolerance, empty if none.
  std::string failing_family() const;
  nlohmann::json to_json() const;
  static ReportEnvelope from_json(const nlohmann::json& j);
  /// Serialized report text in the configured format.
  std::string render(Format f) const;
};

/// Validates, dispatches and writes the output file when one is configured.
ReportEnvelope run(const RunConfig& config);

/// Verification suites accepted by the verify command.
const std::vector<std::string>& suite_names();
std::vector<ResidualSummary> verify_suite(const std::string& suite, double q, std::optional<double> alpha,
                                          const SeriesPolicy& pol, std::uint64_t seed);

/// Parses argv into a RunConfig; throws UsageError. Returns nullopt after --help.
std::optional<RunConfig> parse_args(int argc, const char* const* argv, std::string* help_text = nullptr);

/// Full program: parse, run, print; returns the exit status.
int main(int argc, const char* const* argv);

}  // namespace qspectra::cli
