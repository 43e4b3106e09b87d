#pragma once

#include <atomic>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>

#include "tourrec/binning.hpp"
#include "tourrec/engine.hpp"
#include "tourrec/event_log.hpp"

namespace tourrec {

struct HttpRequest {
  std::string method;
  std::string path;
  std::map<std::string, std::string> query;
  std::map<std::string, std::string> headers;
  std::string body;
};

struct HttpResponse {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

struct ServiceConfig {
  /// Required in the X-API-Key header when non-empty.
  std::string api_key;
  /// Event timestamps come from the sequence number instead of the clock.
  bool deterministic = false;
  std::size_t default_page_limit = 50;
  std::size_t max_page_limit = 1000;
};

/// Routes JSON requests onto the engine. Reads share a lock; mutations take it
/// exclusively, so the log appender is serialized and per-user ordering holds.
class Service {
 public:
  Service(Engine& engine, ServiceConfig cfg, const VectorTable* vectors = nullptr);

  HttpResponse handle(const HttpRequest& req);
  std::size_t request_count() const { return requests_.load(); }

 private:
  HttpResponse dispatch(const HttpRequest& req);
  Timestamp now() const;

  HttpResponse create_user(const HttpRequest& req);
  HttpResponse list_users(const HttpRequest& req);
  HttpResponse put_preferences(UserId id, const HttpRequest& req);
  HttpResponse get_recommendations(UserId id, const HttpRequest& req);
  HttpResponse post_feedback(UserId id, const HttpRequest& req);
  HttpResponse post_rating(UserId id, const HttpRequest& req);
  HttpResponse get_profile(UserId id);
  HttpResponse add_item(const HttpRequest& req);
  HttpResponse bin_item_preview(const HttpRequest& req);
  HttpResponse list_items(const HttpRequest& req);
  HttpResponse get_phase();
  HttpResponse get_metrics();

  Engine& engine_;
  ServiceConfig cfg_;
  const VectorTable* vectors_;
  mutable std::shared_mutex mutex_;
  std::atomic<std::size_t> requests_{0};
};

/// Blocks serving HTTP/1.1 until the process is stopped.
void run_http_server(Service& service, const std::string& host, int port);

}  // namespace tourrec
