#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace driftqec::cli {

struct RunManifest {
    std::string subcommand;
    std::string config_path;
    std::uint64_t seed = 0;
    std::string output_dir;
    std::string tool_version;
    double runtime_s = 0.0;
    std::map<std::string, std::string> arguments;
    std::vector<std::string> outputs;
};

std::string manifest_json(const RunManifest &m);

/// Writes `contents` to dir/name through a temporary file and a rename.
void write_file_atomic(const std::filesystem::path &dir, const std::string &name, const std::string &contents);

std::string tool_version();

}  // namespace driftqec::cli
