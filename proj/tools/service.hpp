#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include "monoglot/monoglot.h"

namespace httplib {
class Server;
}

namespace mgsvc {

struct Reply {
  int status = 200;
  std::string body;  // JSON
};

constexpr size_t kMaxTextChars = 2000;

// Service state: a bundle loaded once in the background, then shared
// read-only by every request. Handlers are plain functions of the request
// body so they can run without a socket.
class Service {
 public:
  Service() = default;
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  // Starts loading the bundle on a background thread.
  void start_loading(const std::string& model_path);
  // Blocks until loading finished; returns true when the bundle is ready.
  bool wait_loaded();

  Reply translate(const std::string& body);
  Reply languages() const;
  Reply health() const;

  uint64_t requests() const { return requests_.load(); }

 private:
  Reply not_ready() const;

  std::thread loader_;
  std::atomic<bool> done_{false};
  std::atomic<mg_bundle*> bundle_{nullptr};
  std::string load_error_;  // written before done_ is set
  std::string tags_json_;   // {"languages": [...], "styles": [...]}
  std::atomic<uint64_t> requests_{0};
};

// Number of Unicode code points in UTF-8 text.
size_t utf8_length(const std::string& s);

struct ServeOptions {
  std::string host = "0.0.0.0";
  int port = 8080;
  std::string cors_origin = "*";
};

// Registers the endpoints, CORS headers and payload limit on `server`.
void install_routes(httplib::Server& server, Service& service, const std::string& cors_origin);

// Serves until the process is stopped. Returns non-zero if the socket
// cannot be bound.
int serve(Service& service, const ServeOptions& opts);

}  // namespace mgsvc
