#include "qpack/report.hpp"

#include <unistd.h>

#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "qpack/error.hpp"

namespace qpack {

const char* kToolVersion = "qpack-lab 1.0.0";

void atomic_write(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(target.parent_path(), ec);
    }
    const fs::path tmp = target.string() + ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) fail("cannot open '" + tmp.string() + "' for writing");
        out << content;
        out.flush();
        if (!out) fail("write failed for '" + tmp.string() + "'");
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp, ec);
        fail("cannot move report into place at '" + path + "'");
    }
}

std::uint64_t fnv1a64(const std::string& bytes, std::uint64_t h) {
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string RunManifest::csv_block() const {
    std::ostringstream out;
    out << "# manifest subcommand=" << subcommand << '\n';
    for (const auto& in : inputs) out << "# manifest input=" << in << '\n';
    out << "# manifest config_hash=" << hex64(config_hash) << '\n';
    out << "# manifest seed=" << seed << (seed_fixed ? " (fixed)" : " (entropy)") << '\n';
    out << "# manifest tool=" << tool_version << '\n';
    out << "# manifest timestamp=" << timestamp << '\n';
    return out.str();
}

RunManifest make_manifest(const std::string& subcommand, const std::vector<std::string>& inputs,
                          const std::vector<std::string>& flags, std::uint64_t seed,
                          bool seed_fixed) {
    RunManifest m;
    m.subcommand = subcommand;
    m.inputs = inputs;
    std::uint64_t h = fnv1a64(subcommand);
    for (const auto& path : inputs) {
        h = fnv1a64(path, h);
        std::ifstream in(path, std::ios::binary);
        if (in) {
            std::ostringstream buf;
            buf << in.rdbuf();
            h = fnv1a64(buf.str(), h);
        }
    }
    for (const auto& f : flags) h = fnv1a64(f, h);
    m.config_hash = h;
    m.seed = seed;
    m.seed_fixed = seed_fixed;
    m.tool_version = kToolVersion;
    if (seed_fixed) {
        // Reports of seeded runs must be byte-identical across executions.
        m.timestamp = "deterministic";
    } else {
        std::time_t now = std::time(nullptr);
        char buf[32];
        std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
        m.timestamp = buf;
    }
    return m;
}

}  // namespace qpack
