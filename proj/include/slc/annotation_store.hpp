#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace slc::annotation {

enum class TaskStatus { unannotated, draft, done, flagged };
std::string_view status_name(TaskStatus s);
TaskStatus parse_status(std::string_view name);

struct AnnotationTask {
  std::string sample_id;
  std::string signer_id;
  std::string episode_id;
  std::int64_t start_frame = 0;
  std::string media;  // frame directory or clip file, relative to the store
  std::string subtitle_text;
  TaskStatus status = TaskStatus::unannotated;
  std::optional<std::string> raw_annotation;
  std::uint64_t version = 0;

  friend bool operator==(const AnnotationTask&, const AnnotationTask&) = default;
};

nlohmann::json to_json(const AnnotationTask& t);
AnnotationTask task_from_json(const nlohmann::json& j);

struct TaskFilter {
  std::optional<TaskStatus> status;
  std::optional<std::string> signer_id;
  std::optional<std::string> episode_id;
};

enum class WriteKind { draft, done, flag };

// Task store persisted as a seed file (tasks.jsonl, written once) plus an
// append-only log of accepted writes (annotations.log). Opening the store
// replays the log over the seed. Each task carries a version; a write must
// name the version it was based on, and is accepted at most once per version.
class AnnotationStore {
 public:
  static constexpr const char* kSeedFile = "tasks.jsonl";
  static constexpr const char* kLogFile = "annotations.log";

  // Creates a store directory from seed tasks. Fails if one already exists.
  static void init(const std::filesystem::path& dir,
                   std::span<const AnnotationTask> seed);

  static std::unique_ptr<AnnotationStore> open(const std::filesystem::path& dir,
                                               bool read_only = false);

  ~AnnotationStore();
  AnnotationStore(const AnnotationStore&) = delete;
  AnnotationStore& operator=(const AnnotationStore&) = delete;

  // Matching tasks ordered by episode, then start frame, then id.
  std::vector<AnnotationTask> list(const TaskFilter& filter = {}) const;
  AnnotationTask get(std::string_view sample_id) const;

  // Validates `raw` with the gloss grammar and appends it to the log.
  // Throws Error(not_found), Error(conflict), gloss::ParseError or
  // Error(read_only); on any error nothing is written. Returns the new version.
  std::uint64_t put(std::string_view sample_id, std::string_view raw,
                    std::uint64_t expected_version, WriteKind kind = WriteKind::draft);

  bool read_only() const { return read_only_; }
  const std::filesystem::path& dir() const { return dir_; }

  // Canonical serialisation of every task, for replay comparisons.
  std::string state_dump() const;

 private:
  struct Entry {
    mutable std::shared_mutex mutex;
    AnnotationTask task;
  };

  AnnotationStore() = default;
  Entry& entry(std::string_view sample_id) const;
  void apply(const nlohmann::json& record, std::size_t lineno);

  std::filesystem::path dir_;
  bool read_only_ = false;
  std::map<std::string, std::unique_ptr<Entry>, std::less<>> tasks_;
  std::mutex log_mutex_;
  std::FILE* log_ = nullptr;
};

}  // namespace slc::annotation
