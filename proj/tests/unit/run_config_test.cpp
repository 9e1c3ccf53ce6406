#include "common/error.hpp"
#include "config/run_config.hpp"
#include "doctest.h"

using namespace mg;
using mg::config::RunConfig;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error thrown");
  return ErrorKind::kInvalidArgument;
}

std::string message_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  FAIL("no error thrown");
  return "";
}

}  // namespace

TEST_CASE("empty config file yields every default") {
  const RunConfig parsed = RunConfig::parse("");
  const RunConfig defaults;
  CHECK(parsed.echo() == defaults.echo());
  for (const auto& k : config::known_keys()) CHECK(parsed.get(k.key) == RunConfig().get(k.key));
  CHECK(parsed.get_int("beam") == 5);
  CHECK(parsed.get_real("decay") == doctest::Approx(0.7));
  CHECK(parsed.warnings().empty());
  CHECK(RunConfig::parse("# only a comment\n\n   \n").echo() == defaults.echo());
}

TEST_CASE("beam = 0 is a validation error naming key and line") {
  const std::string msg = message_of([] { RunConfig::parse("lr = 0.001\nbeam=0\n", "run.conf"); });
  CHECK(msg.find("run.conf:2") != std::string::npos);
  CHECK(msg.find("beam") != std::string::npos);
  CHECK(kind_of([] { RunConfig::parse("beam=0"); }) == ErrorKind::kConfig);
  RunConfig cfg;
  CHECK(kind_of([&] { cfg.set("beam", "0"); }) == ErrorKind::kConfig);
  CHECK(cfg.get_int("beam") == 5);  // rejected value rolled back
}

TEST_CASE("duplicate key keeps the last value and warns") {
  const RunConfig cfg = RunConfig::parse("beam = 3\nlr = 0.01\nbeam = 7\n", "dup.conf");
  CHECK(cfg.get_int("beam") == 7);
  REQUIRE(cfg.warnings().size() == 1);
  CHECK(cfg.warnings()[0].find("dup.conf:3") != std::string::npos);
  CHECK(cfg.warnings()[0].find("beam") != std::string::npos);
}

TEST_CASE("unknown keys and malformed lines name key and line") {
  std::string msg = message_of([] { RunConfig::parse("beam = 4\nbeem = 4\n", "x.conf"); });
  CHECK(msg.find("x.conf:2") != std::string::npos);
  CHECK(msg.find("beem") != std::string::npos);
  msg = message_of([] { RunConfig::parse("\nbeam 4\n", "x.conf"); });
  CHECK(msg.find("x.conf:2") != std::string::npos);
  msg = message_of([] { RunConfig::parse("lr = fast\n", "x.conf"); });
  CHECK(msg.find("x.conf:1") != std::string::npos);
  CHECK(msg.find("lr") != std::string::npos);
  CHECK(kind_of([] { RunConfig().set("nope", "1"); }) == ErrorKind::kConfig);
}

TEST_CASE("cross-key checks do not depend on line order") {
  // heads must divide model_dim; either order of the two lines is accepted
  const RunConfig a = RunConfig::parse("heads = 3\nmodel_dim = 96\n");
  const RunConfig b = RunConfig::parse("model_dim = 96\nheads = 3\n");
  CHECK(a.echo() == b.echo());
  const std::string msg = message_of([] { RunConfig::parse("model_dim = 64\nheads = 3\n", "h.conf"); });
  CHECK(msg.find("h.conf:") != std::string::npos);
}

TEST_CASE("every key round-trips through the echoed configuration") {
  RunConfig cfg;
  cfg.set("seed", "42");
  cfg.set("lr", "1e-3");
  cfg.set("dropout", " 0.30 ");
  cfg.set("clf_filter_widths", "2, 3");
  cfg.set("max_updates", "1000");
  const RunConfig again = RunConfig::parse(cfg.echo());
  CHECK(again.echo() == cfg.echo());
  CHECK(again.get("lr") == "0.001");
  CHECK(again.get("dropout") == "0.3");
  CHECK(again.get("clf_filter_widths") == "2,3");

  const auto o = again.train_options();
  CHECK(o.lr == doctest::Approx(1e-3));
  CHECK(o.seed == 42);
  CHECK(o.max_updates == 1000);
  CHECK(again.model_config().dropout == doctest::Approx(0.3f));
  CHECK(again.classifier_config().filter_widths == std::vector<int>{2, 3});
}

TEST_CASE("module ranges are enforced") {
  CHECK(kind_of([] { RunConfig().set("decay", "1.5"); }) == ErrorKind::kConfig);
  CHECK(kind_of([] { RunConfig().set("lr", "0"); }) == ErrorKind::kConfig);
  CHECK(kind_of([] { RunConfig().set("clf_dropout", "1"); }) == ErrorKind::kConfig);
  CHECK(kind_of([] { RunConfig().set("port", "70000"); }) == ErrorKind::kConfig);
  CHECK(kind_of([] { RunConfig().set("clf_filter_widths", "3,,4"); }) == ErrorKind::kConfig);
}
