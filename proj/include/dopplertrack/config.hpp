#pragma once

// Experiment configuration: a JSON document whose sweep keys (profiles,
// fd_hz, snr_db, duration_ms) may be scalars or lists and expand into the
// cartesian product of scenarios. Built-in presets cover the standard grids.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dopplertrack/channel.hpp"
#include "dopplertrack/tracker.hpp"

namespace dopplertrack {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Scenario {
  std::string id;
  ChannelProfile profile;
  double fd_hz = 400.0;
  double snr_db = 15.0;
  double duration_ms = 40.0;
  TrackerConfig tracker{};
  int trials = 20;
  std::uint64_t master_seed = 1;
  double delay_drift_ns_per_s = 0.0;
  int oscillators = 64;
  int avg_samples = 64;

  const OfdmGeometry& geometry() const { return tracker.geometry; }
  /// floor(duration / T_s)
  long symbol_count() const;
  /// Throws ConfigError.
  void validate() const;
  /// Non-fatal remarks, e.g. f_d T_s above 0.1.
  std::vector<std::string> warnings() const;
};

/// "<profile>_fd<hz>_snr<db>_dur<ms>"
std::string make_scenario_id(const Scenario& s);

struct RunConfig {
  std::string name;
  std::vector<Scenario> scenarios;  // sorted by (profile, fd, snr, duration)
};

std::vector<std::string> preset_names();

/// JSON text of a built-in preset; throws ConfigError for unknown names.
std::string preset_text(const std::string& name);

/// Parses a config document. When `base_preset` is given the document is
/// merged over that preset (RFC 7386 merge patch).
RunConfig parse_config(std::string_view json_text,
                       const std::optional<std::string>& base_preset = std::nullopt);

RunConfig load_config(const std::optional<std::string>& path,
                      const std::optional<std::string>& preset,
                      std::optional<std::uint64_t> seed_override = std::nullopt);

/// Shortest round-trip decimal representation; "inf"/"-inf"/"nan" otherwise.
std::string format_number(double v);

}  // namespace dopplertrack
