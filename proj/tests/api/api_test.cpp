#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <string>
#include <thread>
#include <vector>

#include "doctest.h"
#include "httplib.h"
#include "json.hpp"
#include "monoglot/monoglot.h"
#include "service.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::string take(char* s) {
  std::string out = s ? s : "";
  mg_string_free(s);
  return out;
}

void ok(mg_status st) {
  INFO(mg_last_error());
  REQUIRE(st == MG_OK);
}

void write(const fs::path& p, const std::string& content) {
  std::ofstream out(p);
  out << content;
}

// A tiny three-language model trained once for the whole binary.
struct MicroBundle {
  fs::path root;
  fs::path data, prepared, model;

  MicroBundle() {
    root = fs::temp_directory_path() / ("mg_api_tests_" + std::to_string(::getpid()));
    fs::remove_all(root);
    data = root / "toy";
    prepared = root / "prep";
    model = root / "model";
    mg_config* cfg = nullptr;
    ok(mg_config_new(&cfg));
    for (auto [k, v] : std::vector<std::pair<const char*, const char*>>{{"seed", "3"},
                                                                        {"subword_vocab", "128"},
                                                                        {"max_updates", "20"},
                                                                        {"checkpoint_interval", "10"},
                                                                        {"batch_words", "200"},
                                                                        {"layers", "1"},
                                                                        {"model_dim", "32"},
                                                                        {"ff_dim", "64"}}) {
      ok(mg_config_set(cfg, k, v));
    }
    char* report = nullptr;
    ok(mg_toylang(cfg, 3, 100, data.c_str(), &report));
    mg_string_free(report);
    ok(mg_prepare(cfg, data.c_str(), prepared.c_str(), &report));
    mg_string_free(report);
    ok(mg_train(cfg, prepared.c_str(), model.c_str(), 0, &report));
    train_report = json::parse(take(report));
    mg_config_free(cfg);
  }
  ~MicroBundle() { fs::remove_all(root); }

  json train_report;
};

MicroBundle& micro() {
  static MicroBundle m;
  return m;
}

json rewrite(mg_bundle* b, const json& req, mg_status* status = nullptr) {
  char* out = nullptr;
  const mg_status st = mg_bundle_rewrite(b, req.dump().c_str(), &out);
  if (status) *status = st;
  if (st != MG_OK) return json();
  return json::parse(take(out));
}

}  // namespace

TEST_CASE("status names and version") {
  CHECK(std::string(mg_status_name(MG_OK)) == "ok");
  CHECK(std::string(mg_status_name(MG_ERR_UNKNOWN_TAG)) == "unknown tag");
  CHECK(std::string(mg_version()).size() > 0);
}

TEST_CASE("config handle: set, get, errors and echo") {
  mg_config* cfg = nullptr;
  ok(mg_config_new(&cfg));
  ok(mg_config_set(cfg, "beam", "7"));
  char* v = nullptr;
  ok(mg_config_get(cfg, "beam", &v));
  CHECK(take(v) == "7");
  CHECK(mg_config_set(cfg, "beam", "0") == MG_ERR_CONFIG);
  CHECK(std::string(mg_last_error()).find("beam") != std::string::npos);
  CHECK(mg_config_set(cfg, "no_such_key", "1") == MG_ERR_CONFIG);
  CHECK(mg_config_set(nullptr, "beam", "1") == MG_ERR_INVALID_ARGUMENT);
  char* echo = nullptr;
  ok(mg_config_echo(cfg, &echo));
  CHECK(take(echo).find("beam = 7\n") != std::string::npos);
  mg_config_free(cfg);

  const fs::path p = fs::temp_directory_path() / ("mg_api_cfg_" + std::to_string(::getpid()) + ".conf");
  write(p, "beam = 2\nbeam = 4\n");
  ok(mg_config_load(p.c_str(), &cfg));
  ok(mg_config_get(cfg, "beam", &v));
  CHECK(take(v) == "4");
  char* warnings = nullptr;
  ok(mg_config_warnings(cfg, &warnings));
  CHECK(take(warnings).find("duplicate key 'beam'") != std::string::npos);
  mg_config_free(cfg);
  write(p, "beam = 2\ncolour = red\n");
  CHECK(mg_config_load(p.c_str(), &cfg) == MG_ERR_CONFIG);
  CHECK(std::string(mg_last_error()).find(":2") != std::string::npos);
  CHECK(mg_config_load("/nonexistent/mg.conf", &cfg) == MG_ERR_IO);
  fs::remove(p);
}

TEST_CASE("training writes a loadable bundle") {
  auto& m = micro();
  CHECK(m.train_report["updates"] == 20);
  CHECK(m.train_report["stop_reason"] == "max_updates");
  for (const char* f : {"best.ckpt", "last.ckpt", "train.log", "tags.txt", "vocab.txt", "subwords.bpe", "config.txt"}) {
    CHECK(fs::exists(m.model / f));
  }

  mg_bundle* b = nullptr;
  ok(mg_bundle_load(m.model.c_str(), &b));
  char* tags = nullptr;
  ok(mg_bundle_tags(b, &tags));
  const json t = json::parse(take(tags));
  CHECK(t["languages"].size() == 3);
  CHECK(t["styles"].size() == 2);

  const std::string lang = t["languages"][0];
  const std::string style = t["styles"][0];
  json req = {{"text", "Tona toraos."}, {"source_lang", lang}, {"target_lang", lang}, {"target_style", style}};
  const json a = rewrite(b, req);
  const json again = rewrite(b, req);
  CHECK(a == again);
  CHECK(a.contains("output"));
  CHECK(a["tokens_in"].get<int>() > 0);

  mg_status st = MG_OK;
  req["target_style"] = "2xx";
  rewrite(b, req, &st);
  CHECK(st == MG_ERR_UNKNOWN_TAG);
  req["target_style"] = style;
  req["beam"] = 0;
  rewrite(b, req, &st);
  CHECK(st == MG_ERR_INVALID_ARGUMENT);
  char* out = nullptr;
  CHECK(mg_bundle_rewrite(b, "{not json", &out) == MG_ERR_PARSE);
  mg_bundle_free(b);

  CHECK(mg_bundle_load("/nonexistent/model", &b) != MG_OK);
}

TEST_CASE("resume continues from the last checkpoint") {
  auto& m = micro();
  const fs::path copy = m.root / "resumed";
  fs::copy(m.model, copy);
  mg_config* cfg = nullptr;
  ok(mg_config_new(&cfg));
  for (auto [k, v] : std::vector<std::pair<const char*, const char*>>{{"seed", "3"},
                                                                      {"max_updates", "30"},
                                                                      {"checkpoint_interval", "10"},
                                                                      {"batch_words", "200"},
                                                                      {"layers", "1"},
                                                                      {"model_dim", "32"},
                                                                      {"ff_dim", "64"}}) {
    ok(mg_config_set(cfg, k, v));
  }
  char* report = nullptr;
  ok(mg_train(cfg, m.prepared.c_str(), copy.c_str(), 1, &report));
  const json r = json::parse(take(report));
  CHECK(r["updates"] == 30);
  CHECK(r["checkpoints"] == 3);
  CHECK(mg_train(cfg, m.prepared.c_str(), (m.root / "empty").c_str(), 1, &report) == MG_ERR_IO);
  mg_config_free(cfg);
}

TEST_CASE("evaluate computes each metric from files") {
  const fs::path dir = fs::temp_directory_path() / ("mg_api_eval_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  write(dir / "hyp", "the cat sat\n");
  write(dir / "src", "the cat sit\n");
  write(dir / "gold.m2", "S the cat sit\nA 2 3|||verb|||sat|||REQUIRED|||-NONE-|||0\n\n");
  char* report = nullptr;
  json req = {{"metric", "m2"}, {"hyp", (dir / "hyp").string()}, {"gold", (dir / "gold.m2").string()}};
  ok(mg_evaluate(req.dump().c_str(), &report));
  json r = json::parse(take(report));
  CHECK(r["precision"] == doctest::Approx(1.0));
  CHECK(r["recall"] == doctest::Approx(1.0));
  CHECK(r["value"] == doctest::Approx(1.0));

  req = {{"metric", "bleu"}, {"hyp", (dir / "hyp").string()}, {"refs", {(dir / "hyp").string()}}};
  ok(mg_evaluate(req.dump().c_str(), &report));
  CHECK(json::parse(take(report))["value"] == doctest::Approx(100.0));

  req = {{"metric", "gleu"}, {"hyp", (dir / "hyp").string()}};
  CHECK(mg_evaluate(req.dump().c_str(), &report) == MG_ERR_INVALID_ARGUMENT);
  req = {{"metric", "ter"}, {"hyp", (dir / "hyp").string()}};
  CHECK(mg_evaluate(req.dump().c_str(), &report) == MG_ERR_INVALID_ARGUMENT);
  fs::remove_all(dir);
}

TEST_CASE("subword and truecase calls round-trip") {
  auto& m = micro();
  char* units = nullptr;
  ok(mg_subwords_apply(m.model.c_str(), "tona toraos", &units));
  const std::string u = take(units);
  char* tokens = nullptr;
  ok(mg_subwords_revert(u.c_str(), &tokens));
  CHECK(take(tokens) == "tona toraos");

  char* sentence = nullptr;
  ok(mg_truecase_restore("en", "the cat 's toy .", &sentence));
  CHECK(take(sentence) == "The cat's toy.");
}

TEST_CASE("service: 503 until the bundle loads, then 200") {
  mgsvc::Service svc;
  CHECK(svc.health().status == 503);
  CHECK(svc.languages().status == 503);
  CHECK(svc.translate("{}").status == 503);
  svc.start_loading(micro().model.string());
  REQUIRE(svc.wait_loaded());
  CHECK(svc.health().status == 200);
  CHECK(json::parse(svc.health().body)["status"] == "ok");
  const json langs = json::parse(svc.languages().body);
  CHECK(langs["languages"].size() == 3);
  CHECK(langs["styles"].size() == 2);
}

TEST_CASE("service: a failed load keeps reporting 503") {
  mgsvc::Service svc;
  svc.start_loading("/nonexistent/model");
  CHECK_FALSE(svc.wait_loaded());
  const auto h = svc.health();
  CHECK(h.status == 503);
  CHECK(json::parse(h.body)["status"] == "error");
}

TEST_CASE("service: translate status codes") {
  mgsvc::Service svc;
  svc.start_loading(micro().model.string());
  REQUIRE(svc.wait_loaded());
  const json langs = json::parse(svc.languages().body);
  json req = {{"text", "Tona toraos."},
              {"source_lang", langs["languages"][0]},
              {"target_lang", langs["languages"][0]},
              {"target_style", langs["styles"][0]}};

  const auto a = svc.translate(req.dump());
  CHECK(a.status == 200);
  CHECK(svc.translate(req.dump()).body == a.body);
  const json body = json::parse(a.body);
  for (const char* k : {"output", "score", "tokens_in", "tokens_out"}) CHECK(body.contains(k));

  CHECK(svc.translate("{oops").status == 400);
  CHECK(svc.translate("[1, 2]").status == 400);
  CHECK(svc.translate(R"({"text": "x"})").status == 400);

  json bad = req;
  bad["target_style"] = "2xx";
  auto r = svc.translate(bad.dump());
  CHECK(r.status == 422);
  CHECK(json::parse(r.body)["available_styles"] == langs["styles"]);
  bad = req;
  bad["target_lang"] = "zz";
  r = svc.translate(bad.dump());
  CHECK(r.status == 422);
  CHECK(json::parse(r.body)["available_languages"] == langs["languages"]);

  json big = req;
  big["text"] = std::string(2001, 'a');
  CHECK(svc.translate(big.dump()).status == 413);
  std::string multibyte;
  for (int i = 0; i < 2000; ++i) multibyte += "\xC3\xA9";  // 2000 characters, 4000 bytes
  big["text"] = multibyte;
  CHECK(svc.translate(big.dump()).status != 413);

  const uint64_t before = svc.requests();
  std::vector<std::thread> threads;
  std::vector<std::string> bodies(4);
  for (int i = 0; i < 4; ++i) {
    threads.emplace_back([&, i] { bodies[i] = svc.translate(req.dump()).body; });
  }
  for (auto& t : threads) t.join();
  for (const auto& b : bodies) CHECK(b == a.body);
  CHECK(svc.requests() == before + 4);
}

TEST_CASE("service: HTTP round trip with CORS headers") {
  mgsvc::Service svc;
  svc.start_loading(micro().model.string());
  REQUIRE(svc.wait_loaded());

  httplib::Server server;
  mgsvc::install_routes(server, svc, "http://demo.example");
  const int port = server.bind_to_any_port("127.0.0.1");
  REQUIRE(port > 0);
  std::thread listener([&] { server.listen_after_bind(); });
  struct Stop {
    httplib::Server& s;
    std::thread& t;
    ~Stop() {
      s.stop();
      t.join();
    }
  } stop{server, listener};

  httplib::Client client("127.0.0.1", port);
  httplib::Result health;
  for (int i = 0; i < 100 && !health; ++i) {
    health = client.Get("/health");
    if (!health) std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
  REQUIRE(health);
  CHECK(health->status == 200);
  CHECK(health->get_header_value("Access-Control-Allow-Origin") == "http://demo.example");

  auto langs = client.Get("/languages");
  REQUIRE(langs);
  const json tags = json::parse(langs->body);
  const json req = {{"text", "Tona toraos."},
                    {"source_lang", tags["languages"][0]},
                    {"target_lang", tags["languages"][0]},
                    {"target_style", tags["styles"][0]}};
  auto res = client.Post("/translate", req.dump(), "application/json");
  REQUIRE(res);
  CHECK(res->status == 200);
  CHECK(json::parse(res->body).contains("output"));
  res = client.Post("/translate", "{bad", "application/json");
  REQUIRE(res);
  CHECK(res->status == 400);
  auto pre = client.Options("/translate");
  REQUIRE(pre);
  CHECK(pre->status == 204);
}
