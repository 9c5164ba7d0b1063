#include "slc/annotation_store.hpp"

#include <unistd.h>

#include <algorithm>
#include <fstream>
#include <sstream>

#include "slc/error.hpp"
#include "slc/gloss.hpp"
#include "slc/jsonl.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace slc::annotation {

std::string_view status_name(TaskStatus s) {
  switch (s) {
    case TaskStatus::unannotated: return "unannotated";
    case TaskStatus::draft: return "draft";
    case TaskStatus::done: return "done";
    case TaskStatus::flagged: return "flagged";
  }
  return "?";
}

TaskStatus parse_status(std::string_view name) {
  for (TaskStatus s : {TaskStatus::unannotated, TaskStatus::draft, TaskStatus::done,
                       TaskStatus::flagged})
    if (status_name(s) == name) return s;
  throw Error(ErrorKind::data, "unknown task status '" + std::string(name) + "'");
}

json to_json(const AnnotationTask& t) {
  return {{"sample_id", t.sample_id},
          {"signer_id", t.signer_id},
          {"episode_id", t.episode_id},
          {"start_frame", t.start_frame},
          {"media", t.media},
          {"subtitle_text", t.subtitle_text},
          {"status", status_name(t.status)},
          {"raw_annotation", t.raw_annotation ? json(*t.raw_annotation) : json(nullptr)},
          {"version", t.version}};
}

AnnotationTask task_from_json(const json& j) {
  AnnotationTask t;
  try {
    t.sample_id = j.at("sample_id").get<std::string>();
    t.signer_id = j.value("signer_id", "");
    t.episode_id = j.value("episode_id", "");
    t.start_frame = j.value("start_frame", std::int64_t{0});
    t.media = j.value("media", "");
    t.subtitle_text = j.value("subtitle_text", "");
    t.status = parse_status(j.value("status", "unannotated"));
    if (j.contains("raw_annotation") && j["raw_annotation"].is_string())
      t.raw_annotation = j["raw_annotation"].get<std::string>();
    t.version = j.value("version", std::uint64_t{0});
  } catch (const json::exception& e) {
    throw Error(ErrorKind::data, std::string("bad task record: ") + e.what());
  }
  if (t.sample_id.empty()) throw Error(ErrorKind::data, "task without sample_id");
  return t;
}

void AnnotationStore::init(const fs::path& dir, std::span<const AnnotationTask> seed) {
  if (fs::exists(dir / kSeedFile))
    throw Error(ErrorKind::usage, "annotation store already exists in " + dir.string());
  fs::create_directories(dir);
  std::vector<json> rows;
  std::vector<std::string> ids;
  for (const auto& t : seed) {
    if (std::find(ids.begin(), ids.end(), t.sample_id) != ids.end())
      throw Error(ErrorKind::data, "duplicate task " + t.sample_id);
    ids.push_back(t.sample_id);
    rows.push_back(to_json(t));
  }
  write_jsonl(dir / kSeedFile, rows);
  write_file_atomic(dir / kLogFile, "");
}

std::unique_ptr<AnnotationStore> AnnotationStore::open(const fs::path& dir, bool read_only) {
  if (!fs::exists(dir / kSeedFile))
    throw Error(ErrorKind::data, "no annotation store in " + dir.string());
  std::unique_ptr<AnnotationStore> store(new AnnotationStore());
  store->dir_ = dir;
  store->read_only_ = read_only;
  for (const json& j : read_jsonl(dir / kSeedFile)) {
    auto e = std::make_unique<Entry>();
    e->task = task_from_json(j);
    const std::string id = e->task.sample_id;
    if (!store->tasks_.emplace(id, std::move(e)).second)
      throw Error(ErrorKind::data, "duplicate task " + id);
  }

  const fs::path log_path = dir / kLogFile;
  std::string log_bytes;
  if (fs::exists(log_path)) {
    std::ifstream in(log_path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    log_bytes = std::move(ss).str();
  }
  // A torn final record (no newline) is an interrupted append; drop it.
  const std::size_t complete = log_bytes.rfind('\n') == std::string::npos
                                   ? 0
                                   : log_bytes.rfind('\n') + 1;
  if (complete != log_bytes.size() && !read_only) fs::resize_file(log_path, complete);
  std::istringstream lines(log_bytes.substr(0, complete));
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(lines, line)) {
    ++lineno;
    if (line.empty()) continue;
    json record;
    try {
      record = json::parse(line);
    } catch (const json::exception& e) {
      throw Error(ErrorKind::data, "annotation log line " + std::to_string(lineno) +
                                       ": " + e.what());
    }
    store->apply(record, lineno);
  }

  if (!read_only) {
    store->log_ = std::fopen(log_path.c_str(), "ab");
    if (store->log_ == nullptr)
      throw Error(ErrorKind::data, "cannot open " + log_path.string() + " for append");
  }
  return store;
}

AnnotationStore::~AnnotationStore() {
  if (log_) std::fclose(log_);
}

void AnnotationStore::apply(const json& record, std::size_t lineno) {
  const auto where = "annotation log line " + std::to_string(lineno);
  try {
    const auto id = record.at("sample_id").get<std::string>();
    const auto it = tasks_.find(id);
    if (it == tasks_.end()) throw Error(ErrorKind::data, where + ": unknown task " + id);
    AnnotationTask& t = it->second->task;
    const auto version = record.at("version").get<std::uint64_t>();
    if (version != t.version + 1)
      throw Error(ErrorKind::data, where + ": version " + std::to_string(version) +
                                       " does not follow " + std::to_string(t.version));
    t.version = version;
    t.status = parse_status(record.at("status").get<std::string>());
    t.raw_annotation = record.at("raw").get<std::string>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::data, where + ": " + e.what());
  }
}

AnnotationStore::Entry& AnnotationStore::entry(std::string_view sample_id) const {
  const auto it = tasks_.find(sample_id);
  if (it == tasks_.end())
    throw Error(ErrorKind::not_found, "no task '" + std::string(sample_id) + "'");
  return *it->second;
}

std::vector<AnnotationTask> AnnotationStore::list(const TaskFilter& filter) const {
  std::vector<AnnotationTask> out;
  for (const auto& [id, e] : tasks_) {
    std::shared_lock lock(e->mutex);
    const AnnotationTask& t = e->task;
    if (filter.status && t.status != *filter.status) continue;
    if (filter.signer_id && t.signer_id != *filter.signer_id) continue;
    if (filter.episode_id && t.episode_id != *filter.episode_id) continue;
    out.push_back(t);
  }
  std::sort(out.begin(), out.end(), [](const AnnotationTask& a, const AnnotationTask& b) {
    return std::tie(a.episode_id, a.start_frame, a.sample_id) <
           std::tie(b.episode_id, b.start_frame, b.sample_id);
  });
  return out;
}

AnnotationTask AnnotationStore::get(std::string_view sample_id) const {
  Entry& e = entry(sample_id);
  std::shared_lock lock(e.mutex);
  return e.task;
}

std::uint64_t AnnotationStore::put(std::string_view sample_id, std::string_view raw,
                                   std::uint64_t expected_version, WriteKind kind) {
  if (read_only_) throw Error(ErrorKind::read_only, "annotation store is read-only");
  Entry& e = entry(sample_id);
  std::unique_lock lock(e.mutex);
  if (e.task.version != expected_version)
    throw Error(ErrorKind::conflict, "task '" + std::string(sample_id) + "' is at version " +
                                         std::to_string(e.task.version) + ", not " +
                                         std::to_string(expected_version));
  if (!(kind == WriteKind::flag && raw.empty())) gloss::parse(raw);

  const TaskStatus status = kind == WriteKind::done   ? TaskStatus::done
                            : kind == WriteKind::flag ? TaskStatus::flagged
                                                      : TaskStatus::draft;
  const std::uint64_t version = e.task.version + 1;
  const json record = {{"sample_id", std::string(sample_id)},
                       {"version", version},
                       {"status", status_name(status)},
                       {"raw", std::string(raw)}};
  std::string line = record.dump() + "\n";
  {
    std::lock_guard log_lock(log_mutex_);
    if (std::fwrite(line.data(), 1, line.size(), log_) != line.size() ||
        std::fflush(log_) != 0 || ::fsync(::fileno(log_)) != 0)
      throw Error(ErrorKind::data, "failed to append to the annotation log");
  }
  e.task.version = version;
  e.task.status = status;
  e.task.raw_annotation = std::string(raw);
  return version;
}

std::string AnnotationStore::state_dump() const {
  std::string out;
  for (const auto& [id, e] : tasks_) {
    std::shared_lock lock(e->mutex);
    out += to_json(e->task).dump() + "\n";
  }
  return out;
}

}  // namespace slc::annotation
