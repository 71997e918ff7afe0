#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace qpack {

/// Write `content` to `path` atomically: temp file in the same directory,
/// fsync-free rename. No partial outputs on failure.
void atomic_write(const std::string& path, const std::string& content);

/// FNV-1a 64-bit, used for config/input digests embedded in manifests.
std::uint64_t fnv1a64(const std::string& bytes, std::uint64_t h = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t v);

/// Provenance block embedded at the top of every report. With a fixed seed a
/// manifest is a pure function of the inputs, so reports are byte-identical
/// across reruns; unseeded runs record the entropy seed and wall-clock time.
struct RunManifest {
    std::string subcommand;
    std::vector<std::string> inputs;   // paths, flag strings
    std::uint64_t config_hash = 0;     // over input file bytes + flags
    std::uint64_t seed = 0;
    bool seed_fixed = false;
    std::string tool_version;
    std::string timestamp;  // "deterministic" for seeded runs

    /// '# '-prefixed comment block for CSV reports.
    std::string csv_block() const;
};

RunManifest make_manifest(const std::string& subcommand, const std::vector<std::string>& inputs,
                          const std::vector<std::string>& flags, std::uint64_t seed,
                          bool seed_fixed);

extern const char* kToolVersion;

}  // namespace qpack
