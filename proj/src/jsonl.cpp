#include "slc/jsonl.hpp"

#include <unistd.h>

#include <atomic>
#include <fstream>

#include "slc/error.hpp"

namespace fs = std::filesystem;

namespace slc {

std::vector<nlohmann::json> read_jsonl(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::data, "missing input file " + path.string());
  std::vector<nlohmann::json> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    try {
      out.push_back(nlohmann::json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::data,
                  path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

void write_file_atomic(const fs::path& path, const std::string& bytes) {
  static std::atomic<unsigned> counter{0};
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid()) + "." + std::to_string(counter++);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::data, "cannot write " + tmp.string());
    out << bytes;
    out.flush();
    if (!out) throw Error(ErrorKind::data, "short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

void write_jsonl(const fs::path& path, std::span<const nlohmann::json> records) {
  std::string bytes;
  for (const auto& r : records) {
    bytes += r.dump();
    bytes.push_back('\n');
  }
  write_file_atomic(path, bytes);
}

}  // namespace slc
