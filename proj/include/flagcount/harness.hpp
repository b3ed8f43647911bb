// Command-line configuration, output files and cache plumbing.

#ifndef FLAGCOUNT_HARNESS_HPP
#define FLAGCOUNT_HARNESS_HPP

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace flagcount {

inline constexpr int kSchemaVersion = 1;

enum ExitCode : int { kExitOk = 0, kExitRuntime = 1, kExitUsage = 2, kExitValidation = 3 };

/// Bad flags or missing required options (exit code 2).
class UsageError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Values that parse but make no sense together (exit code 3).
class ValidationError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string command;  // enumerate | count | equidist | critical | flow | volume
  std::string model;
  double c = 1.0;
  std::optional<double> tau;
  double tmax = 1024;
  std::size_t ladder_depth = 6;
  std::size_t samples = 100;
  std::uint64_t seed = 0;
  std::vector<double> radii{0.2, 0.4, 0.8};
  std::string output_dir = ".";
  std::string cache_dir = ".flagcount-cache";
  std::string format = "both";  // csv | json | both
  unsigned workers = 0;
  std::string backend = "auto";  // auto | scan | cone
  std::size_t mc_samples = 1u << 20;
  // flow command
  std::string diagnostic = "lambda1";  // lambda1 | sandwich | birkhoff | tessellation
  int ell = 100;
  double c0 = 8;
  std::size_t perturbations = 16;
  std::size_t points = 100000;
  int steps = 32;

  /// The effective configuration, echoed into every output.
  nlohmann::ordered_json to_json() const;
};

/// Parses argv (with an optional flat TOML file given by --config). Flags
/// override file values, which override defaults. Throws UsageError or
/// ValidationError. `help` is set when --help was requested.
RunConfig parse_config(int argc, const char* const* argv, bool* help = nullptr, std::string* help_text = nullptr);

/// Runs a parsed configuration; diagnostics go to `err`, the short result
/// summary to `out`. Returns the process exit code.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

/// parse_config + run with exit-code mapping.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace flagcount

#endif
