#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace slc {

// One JSON document per line; blank lines are skipped. Malformed lines are a
// data error naming path and line.
std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& path);

// Writes to a temporary sibling and renames it over `path`.
void write_jsonl(const std::filesystem::path& path,
                 std::span<const nlohmann::json> records);
void write_file_atomic(const std::filesystem::path& path, const std::string& bytes);

}  // namespace slc
