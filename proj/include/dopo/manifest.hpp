#pragma once

// Run provenance. A manifest records the command, resolved parameters,
// options and inputs of a run; its hash covers exactly those fields (not the
// telemetry or the output list), so it is known before any file is written
// and every output can carry it in its header.

#include "dopo/config.hpp"
#include "dopo/params.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace dopo {

inline constexpr const char* kSoftwareVersion = "0.3.0";

struct RunManifest {
    std::string command;
    SimParams params;
    /// Command options as key=value pairs, in emission order.
    KeyValues options;
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    double wall_seconds = 0.0;
    std::uint64_t steps = 0;
    bool complete = false;
    std::string software_version = kSoftwareVersion;
    std::string convention;

    /// 16 hex digits of FNV-1a over the identity fields.
    std::string hash() const;
    std::string to_json() const;
    static RunManifest from_json(const std::string& text);

    void write(const std::filesystem::path& path) const;
    static RunManifest read(const std::filesystem::path& path);

    /// Header block for emitted files: hash, command, version, convention and
    /// the full parameter set.
    KeyValues provenance() const;
};

bool operator==(const RunManifest& a, const RunManifest& b);

std::uint64_t fnv1a(const std::string& bytes);

}  // namespace dopo
