#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

namespace lcmatch {

inline constexpr const char* kToolName = "lcmatch";
inline constexpr const char* kToolVersion = "0.1.0";

/// FNV-1a 64-bit hash as lowercase hex; used to fingerprint effective configs.
std::string fnv1a_hex(const std::string& text);

std::string iso8601_utc_now();

/// Record of how an output directory was produced. The effective config is
/// embedded verbatim, so a run is reproducible from the manifest alone.
struct RunManifest {
    std::string command;
    std::string config_path; // empty when no config file was given
    nlohmann::json effective_config = nlohmann::json::object();
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    nlohmann::json extra = nlohmann::json::object();
};

/// Write <directory>/manifest.json (tool version, timestamp, config hash).
void write_manifest(const std::filesystem::path& directory, const RunManifest& manifest);

} // namespace lcmatch
