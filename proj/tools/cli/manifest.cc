#include "cli/manifest.h"

#include <fstream>

#include <fmt/format.h>
#include <json.hpp>

#include "driftqec/errors.h"

namespace driftqec::cli {

std::string manifest_json(const RunManifest &m) {
    nlohmann::ordered_json j;
    j["subcommand"] = m.subcommand;
    j["config_path"] = m.config_path;
    j["seed"] = m.seed;
    j["output_dir"] = m.output_dir;
    j["tool_version"] = m.tool_version;
    j["runtime_s"] = m.runtime_s;
    j["arguments"] = m.arguments;
    j["outputs"] = m.outputs;
    return j.dump(2) + "\n";
}

void write_file_atomic(const std::filesystem::path &dir, const std::string &name, const std::string &contents) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        throw ConfigError(fmt::format("cannot create output directory {}: {}", dir.string(), ec.message()));
    }
    const auto final_path = dir / name;
    const auto tmp_path = dir / (name + ".tmp");
    {
        std::ofstream out(tmp_path, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw ConfigError(fmt::format("cannot write {}", tmp_path.string()));
        }
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        if (!out) {
            throw ConfigError(fmt::format("short write to {}", tmp_path.string()));
        }
    }
    std::filesystem::rename(tmp_path, final_path, ec);
    if (ec) {
        throw ConfigError(fmt::format("cannot move {} into place: {}", final_path.string(), ec.message()));
    }
}

std::string tool_version() {
    return DRIFTQEC_VERSION;
}

}  // namespace driftqec::cli
