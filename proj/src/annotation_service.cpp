#include "slc/annotation_service.hpp"

#include <fstream>
#include <sstream>

#include <httplib.h>
#include <json.hpp>

#include "slc/error.hpp"
#include "slc/gloss.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace slc::annotation {
namespace {

json diagnostic_json(const gloss::Diagnostic& d) {
  return {{"offset", d.offset},         {"byte_offset", d.byte_offset},
          {"token_index", d.token_index}, {"expected", d.expected},
          {"found", d.found},           {"message", d.message}};
}

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json; charset=utf-8");
}

void send_error(httplib::Response& res, int status, std::string_view code,
                const std::string& message, json extra = nullptr) {
  json err = {{"code", code}, {"message", message}};
  if (!extra.is_null()) err["diagnostic"] = std::move(extra);
  send_json(res, status, {{"error", err}});
}

json summary_json(const AnnotationTask& t) {
  return {{"sample_id", t.sample_id},   {"signer_id", t.signer_id},
          {"episode_id", t.episode_id}, {"start_frame", t.start_frame},
          {"status", status_name(t.status)}, {"version", t.version}};
}

std::string content_type_for(const fs::path& p) {
  const auto ext = p.extension().string();
  if (ext == ".mp4") return "video/mp4";
  if (ext == ".webm") return "video/webm";
  if (ext == ".png") return "image/png";
  if (ext == ".jpg" || ext == ".jpeg") return "image/jpeg";
  if (ext == ".pgm" || ext == ".ppm") return "image/x-portable-anymap";
  return "application/octet-stream";
}

// Maps library errors onto HTTP responses.
template <typename F>
void guarded(httplib::Response& res, F&& f) {
  try {
    f();
  } catch (const gloss::ParseError& e) {
    send_error(res, 422, "invalid_annotation", e.what(), diagnostic_json(e.diagnostic()));
  } catch (const Error& e) {
    switch (e.kind()) {
      case ErrorKind::not_found: send_error(res, 404, "not_found", e.what()); break;
      case ErrorKind::conflict: send_error(res, 409, "conflict", e.what()); break;
      case ErrorKind::read_only: send_error(res, 403, "read_only", e.what()); break;
      case ErrorKind::usage: send_error(res, 400, "bad_request", e.what()); break;
      default: send_error(res, 500, "internal", e.what()); break;
    }
  } catch (const json::exception& e) {
    send_error(res, 400, "bad_request", e.what());
  }
}

}  // namespace

AnnotationService::AnnotationService(AnnotationStore& store)
    : store_(store), server_(std::make_unique<httplib::Server>()) {
  auto& srv = *server_;

  srv.Get("/api/tasks", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      TaskFilter filter;
      if (req.has_param("status")) {
        try {
          filter.status = parse_status(req.get_param_value("status"));
        } catch (const Error& e) {
          throw Error(ErrorKind::usage, e.what());
        }
      }
      if (req.has_param("signer")) filter.signer_id = req.get_param_value("signer");
      if (req.has_param("episode")) filter.episode_id = req.get_param_value("episode");
      json tasks = json::array();
      for (const auto& t : store_.list(filter)) tasks.push_back(summary_json(t));
      send_json(res, 200, {{"tasks", tasks}});
    });
  });

  srv.Get(R"(/api/tasks/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { send_json(res, 200, to_json(store_.get(req.matches[1].str()))); });
  });

  srv.Get(R"(/api/tasks/([^/]+)/media)",
          [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] {
              const AnnotationTask t = store_.get(req.matches[1].str());
              fs::path p = t.media;
              if (p.is_relative()) p = store_.dir() / p;
              if (t.media.empty() || !fs::is_regular_file(p))
                throw Error(ErrorKind::not_found, "no media file for " + t.sample_id);
              std::ifstream in(p, std::ios::binary);
              std::ostringstream ss;
              ss << in.rdbuf();
              res.status = 200;
              res.set_content(std::move(ss).str(), content_type_for(p));
            });
          });

  srv.Put(R"(/api/tasks/([^/]+)/annotation)",
          [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] {
              const json body = json::parse(req.body);
              if (!body.is_object() || !body.contains("raw") || !body["raw"].is_string() ||
                  !body.contains("expected_version") ||
                  !body["expected_version"].is_number_unsigned())
                throw Error(ErrorKind::usage, "body needs raw and expected_version");
              WriteKind kind = WriteKind::draft;
              if (body.value("done", false)) kind = WriteKind::done;
              if (body.value("flag", false)) kind = WriteKind::flag;
              const auto id = req.matches[1].str();
              const auto version = store_.put(id, body["raw"].get<std::string>(),
                                              body["expected_version"].get<std::uint64_t>(),
                                              kind);
              const AnnotationTask t = store_.get(id);
              send_json(res, 200, {{"version", version}, {"status", status_name(t.status)}});
            });
          });

  srv.Post("/api/validate", [](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const json body = json::parse(req.body);
      if (!body.is_object() || !body.contains("raw") || !body["raw"].is_string())
        throw Error(ErrorKind::usage, "body needs raw");
      json diags = json::array();
      for (const auto& d : gloss::validate(body["raw"].get<std::string>()))
        diags.push_back(diagnostic_json(d));
      send_json(res, 200, {{"ok", diags.empty()}, {"diagnostics", diags}});
    });
  });
}

AnnotationService::~AnnotationService() { stop(); }

int AnnotationService::bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = server_->bind_to_any_port(host);
    if (bound < 0) throw Error(ErrorKind::usage, "cannot bind " + host);
    return bound;
  }
  if (!server_->bind_to_port(host, port))
    throw Error(ErrorKind::usage, "cannot bind " + host + ":" + std::to_string(port));
  return port;
}

void AnnotationService::serve() { server_->listen_after_bind(); }

void AnnotationService::stop() {
  if (server_) server_->stop();
}

}  // namespace slc::annotation
