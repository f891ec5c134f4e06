#pragma once

// Run configuration, command dispatch and report emission for the ymflow tool.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ymf/harness.hpp"

namespace ymf::cli {

inline constexpr const char *monitor_names[] = {"local_energy", "eps_regularity", "singular", "bianchi",
                                                "weitzenboeck"};

struct MonitorSettings
{
  std::vector<std::string> selected{"local_energy", "eps_regularity", "singular", "bianchi"};
  std::optional<double> radius; ///< physical radius of the monitor balls; default length / 8
  std::optional<double> r0;     ///< eps-regularity window radius; default length / 8
  double eps0 = 0.5;
  std::vector<double> radii;    ///< singular detector radii; default {radius / 2, radius}
  double late_fraction = 0.25;
  std::map<std::string, double> bounds;
};

struct RunConfig
{
  harness::ExperimentSpec spec;
  std::vector<double> deltas{0.0, 1e-2, 1e-3, 1e-4};
  MonitorSettings monitors;
  std::filesystem::path output{"ymf_out"};
  std::size_t snapshot_every = 0;
  std::optional<std::filesystem::path> input;
  bool serial = false;
};

/// Every violation found while parsing, in document order.
class ConfigError : public std::runtime_error
{
public:
  explicit ConfigError(std::vector<std::string> violations);
  const std::vector<std::string> &violations() const noexcept { return violations_; }

private:
  std::vector<std::string> violations_;
};

/// Candidate with the smallest edit distance to `key`.
std::string nearest_key(const std::string &key, const std::vector<std::string> &candidates);

/// Relative input paths resolve against `base`.
RunConfig parse_config(const nlohmann::json &document, const std::filesystem::path &base = {});
RunConfig parse_config(const std::filesystem::path &path);

struct Overrides
{
  std::optional<std::filesystem::path> output;
  std::optional<int> levels;
  bool serial = false;
};

/// Applies command-line overrides and revalidates.
void apply(RunConfig &config, const Overrides &overrides);

inline constexpr const char *commands[] = {"flow-run",        "gauge-fix",   "verify-equivalence", "verify-uniqueness",
                                           "verify-energy",   "verify-gauge", "monitors"};

/// Runs `command`, writes its outputs under config.output and returns the
/// exit code: 0 when every rule passes, 1 when a rule fails, 2 on an error.
int run(const std::string &command, const RunConfig &config, std::ostream &log);

} // namespace ymf::cli
