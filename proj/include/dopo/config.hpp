#pragma once

// Plain-text key=value configuration.
//
// One assignment per line; '#' starts a comment; blank lines are ignored.
// Keys are case-sensitive and must be known: a misspelt key is rejected with
// the nearest valid key in the message. Command-line overrides use the same
// keys (--f=1.1) and take precedence over file values.

#include "dopo/params.hpp"

#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace dopo {

using KeyValues = std::vector<std::pair<std::string, std::string>>;

/// Run-level options shared by the subcommands. Zero-valued cadences disable
/// the corresponding output.
struct RunOptions {
    double duration = 2500.0;
    /// Near-field frame cadence for spacetime output.
    double spacetime_interval = 1.0;
    /// Checkpoint cadence in time units.
    double checkpoint_interval = 0.0;
    /// Noise stream of the trajectory (the reference uses its own stream).
    std::uint64_t stream = 0;
    /// Recorded wavenumbers in units of k_c; each gets its mirror bin too.
    std::vector<double> targets_kc = {1.0, 1.04};
    bool record_dominant = true;
    /// Column stride for the down-sampled plot tables.
    std::size_t plot_stride = 4;
    std::size_t theta_points = 128;
    std::size_t histogram_bins = 256;
};

struct Config {
    SimParams params;
    RunOptions run;
};

/// Every key accepted by apply_setting.
const std::vector<std::string>& config_keys();

/// Closest known key by edit distance.
std::string nearest_key(const std::string& key);

/// Sets one key. Throws dopo::Error on unknown keys or malformed values.
void apply_setting(Config& config, const std::string& key, const std::string& value);

/// Parses key=value lines. `source` labels error messages.
KeyValues parse_key_values(std::istream& in, const std::string& source);
KeyValues read_key_values(const std::filesystem::path& path);

/// Turns "--key=value" or "key=value" arguments into assignments.
KeyValues parse_overrides(const std::vector<std::string>& args);

/// File values (if any), then overrides, then validation.
Config load_config(const std::optional<std::filesystem::path>& file, const KeyValues& overrides);

/// Canonical assignments for every parameter key, in a fixed order, with
/// round-trip exact number formatting.
KeyValues to_key_values(const SimParams& params);
KeyValues to_key_values(const RunOptions& run);

/// Parses a parameter block written by to_key_values.
SimParams params_from_key_values(const KeyValues& kv);

/// Shortest decimal form that parses back to the same double.
std::string format_number(double x);

}  // namespace dopo
