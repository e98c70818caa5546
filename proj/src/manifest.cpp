#include "lcmatch/manifest.hpp"

#include "lcmatch/errors.hpp"

#include <cstdint>
#include <cstdio>
#include <ctime>
#include <fstream>

namespace lcmatch {

std::string fnv1a_hex(const std::string& text) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string iso8601_utc_now() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_manifest(const std::filesystem::path& directory, const RunManifest& manifest) {
    nlohmann::json doc;
    doc["schema_version"] = 1;
    doc["tool"] = kToolName;
    doc["tool_version"] = kToolVersion;
    doc["command"] = manifest.command;
    doc["timestamp_utc"] = iso8601_utc_now();
    doc["config_path"] = manifest.config_path;
    doc["effective_config"] = manifest.effective_config;
    doc["config_hash"] = fnv1a_hex(manifest.effective_config.dump());
    doc["inputs"] = manifest.inputs;
    doc["outputs"] = manifest.outputs;
    doc["extra"] = manifest.extra;
    const auto path = directory / "manifest.json";
    std::ofstream os(path);
    if (!os) throw ParseError("cannot open for writing: " + path.string());
    os << doc.dump(2) << "\n";
}

} // namespace lcmatch
