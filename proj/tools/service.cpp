#include "service.hpp"

#include <cstdio>

#include "httplib.h"
#include "json.hpp"

namespace mgsvc {

using json = nlohmann::json;

namespace {

Reply error_reply(int status, const std::string& message, json extra = json::object()) {
  extra["error"] = message;
  return {status, extra.dump()};
}

std::string take(char* s) {
  std::string out = s ? s : "";
  mg_string_free(s);
  return out;
}

}  // namespace

size_t utf8_length(const std::string& s) {
  size_t n = 0;
  for (unsigned char c : s) n += (c & 0xC0) != 0x80;
  return n;
}

Service::~Service() {
  if (loader_.joinable()) loader_.join();
  mg_bundle_free(bundle_.load());
}

void Service::start_loading(const std::string& model_path) {
  loader_ = std::thread([this, model_path] {
    mg_bundle* b = nullptr;
    if (mg_bundle_load(model_path.c_str(), &b) != MG_OK) {
      load_error_ = std::string("cannot load model '") + model_path + "': " + mg_last_error();
    } else {
      char* tags = nullptr;
      if (mg_bundle_tags(b, &tags) != MG_OK) {
        load_error_ = mg_last_error();
        mg_bundle_free(b);
        b = nullptr;
      } else {
        tags_json_ = take(tags);
      }
    }
    bundle_.store(b);
    done_.store(true);
  });
}

bool Service::wait_loaded() {
  if (loader_.joinable()) loader_.join();
  return bundle_.load() != nullptr;
}

Reply Service::not_ready() const {
  if (done_.load()) return error_reply(503, load_error_.empty() ? "model unavailable" : load_error_);
  return error_reply(503, "model is loading");
}

Reply Service::health() const {
  if (!bundle_.load()) {
    json r;
    r["status"] = done_.load() ? "error" : "loading";
    if (done_.load()) r["error"] = load_error_;
    return {503, r.dump()};
  }
  json r;
  r["status"] = "ok";
  r["requests"] = requests_.load();
  return {200, r.dump()};
}

Reply Service::languages() const {
  if (!bundle_.load()) return not_ready();
  return {200, tags_json_};
}

Reply Service::translate(const std::string& body) {
  ++requests_;
  mg_bundle* b = bundle_.load();
  if (!b) return not_ready();

  json req;
  try {
    req = json::parse(body);
  } catch (const json::exception& e) {
    return error_reply(400, std::string("malformed JSON: ") + e.what());
  }
  if (!req.is_object()) return error_reply(400, "request body must be a JSON object");
  for (const char* key : {"text", "source_lang", "target_lang", "target_style"}) {
    if (!req.contains(key) || !req[key].is_string()) {
      return error_reply(400, std::string("field '") + key + "' must be a string");
    }
  }
  const size_t chars = utf8_length(req["text"].get<std::string>());
  if (chars > kMaxTextChars) {
    return error_reply(413, "text has " + std::to_string(chars) + " characters; the limit is " +
                                std::to_string(kMaxTextChars));
  }
  if (!req.contains("beam")) req["beam"] = 5;

  char* out = nullptr;
  const mg_status st = mg_bundle_rewrite(b, req.dump().c_str(), &out);
  if (st == MG_OK) return {200, take(out)};
  const std::string message = mg_last_error();
  if (st == MG_ERR_UNKNOWN_TAG) {
    const json tags = json::parse(tags_json_);
    json extra;
    extra["available_languages"] = tags["languages"];
    extra["available_styles"] = tags["styles"];
    return error_reply(422, message, extra);
  }
  if (st == MG_ERR_INVALID_ARGUMENT || st == MG_ERR_PARSE) return error_reply(400, message);
  return error_reply(500, message);
}

void install_routes(httplib::Server& server, Service& service, const std::string& cors_origin) {
  server.set_default_headers({{"Access-Control-Allow-Origin", cors_origin},
                              {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                              {"Access-Control-Allow-Headers", "Content-Type"}});
  // Bodies beyond this cannot hold a valid request; httplib answers 413.
  server.set_payload_max_length(1 << 20);

  auto send = [](httplib::Response& res, const Reply& r) {
    res.status = r.status;
    res.set_content(r.body, "application/json");
  };
  server.Post("/translate", [&service, send](const httplib::Request& req, httplib::Response& res) {
    send(res, service.translate(req.body));
  });
  server.Get("/languages",
             [&service, send](const httplib::Request&, httplib::Response& res) { send(res, service.languages()); });
  server.Get("/health",
             [&service, send](const httplib::Request&, httplib::Response& res) { send(res, service.health()); });
  server.Options(".*", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
}

int serve(Service& service, const ServeOptions& opts) {
  httplib::Server server;
  install_routes(server, service, opts.cors_origin);
  if (!server.bind_to_port(opts.host, opts.port)) {
    std::fprintf(stderr, "error: cannot listen on %s:%d\n", opts.host.c_str(), opts.port);
    return 1;
  }
  std::fprintf(stderr, "listening on %s:%d\n", opts.host.c_str(), opts.port);
  return server.listen_after_bind() ? 0 : 1;
}

}  // namespace mgsvc
