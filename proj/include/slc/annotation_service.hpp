#pragma once

#include <memory>
#include <string>

#include "slc/annotation_store.hpp"

namespace httplib {
class Server;
}

namespace slc::annotation {

// JSON-over-HTTP front end of an AnnotationStore.
//
//   GET  /api/tasks?status=&signer=&episode=   task summaries
//   GET  /api/tasks/{id}                       full task
//   GET  /api/tasks/{id}/media                 media file, served as is
//   PUT  /api/tasks/{id}/annotation            {raw, expected_version, done, flag}
//   POST /api/validate                         {raw}
//
// Errors: {"error": {"code", "message", "diagnostic"?}} with codes not_found,
// conflict, invalid_annotation, bad_request, read_only.
class AnnotationService {
 public:
  explicit AnnotationService(AnnotationStore& store);
  ~AnnotationService();

  // Binds; port 0 picks a free port. Returns the bound port.
  int bind(const std::string& host, int port);
  // Serves until stop() is called.
  void serve();
  void stop();

 private:
  AnnotationStore& store_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace slc::annotation
