#include <cmath>
#include <cstring>
#include <filesystem>

#include "common/error.hpp"
#include "doctest.h"
#include "support/model_checks.hpp"
#include "train/trainer.hpp"

using namespace mg;
using namespace mg::train;
using namespace mg::testing;

namespace {

// Cross-lingual examples whose target is a fixed function of the source.
std::vector<corpus::EncodedExample> mapping_data(uint64_t seed, int count, int vocab) {
  Rng rng(seed);
  std::vector<corpus::EncodedExample> out(count);
  for (auto& ex : out) {
    const int len = 2 + static_cast<int>(rng.below(4));
    for (int i = 0; i < len; ++i) ex.src.push_back(4 + static_cast<int>(rng.below(vocab - 4)));
    for (int id : ex.src) ex.tgt.push_back(4 + (id - 4 + 1) % (vocab - 4));
    ex.lang_factor = 1;
    ex.style_factor = static_cast<int>(rng.below(2));
    ex.src_lang = "ka";
    ex.tgt_lang = "lu";
  }
  return out;
}

TrainOptions quick_options() {
  TrainOptions o;
  o.lr = 3e-3;
  o.checkpoint_interval = 5;
  o.batch_words = 24;
  o.max_epochs = 50;
  o.seed = 11;
  return o;
}

bool same_params(const model::Checkpoint& a, const model::Checkpoint& b) {
  if (a.params.size() != b.params.size()) return false;
  for (size_t i = 0; i < a.params.size(); ++i) {
    const Tensor& x = a.params[i].value;
    const Tensor& y = b.params[i].value;
    if (a.params[i].name != b.params[i].name || x.shape() != y.shape()) return false;
    if (std::memcmp(x.ptr(), y.ptr(), x.size() * sizeof(float)) != 0) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("plateau schedule examples") {
  TrainOptions o;
  TrainState s;
  s.lr = 2e-4;
  s.best_valid_ppl = 10.0;
  s.checkpoints_since_best = 3;
  CHECK(schedule_update(s, 9.9, o));
  CHECK(s.best_valid_ppl == 9.9);
  CHECK(s.checkpoints_since_best == 0);

  CHECK_FALSE(schedule_update(s, 9.9, o));  // a tie is not an improvement
  CHECK(s.checkpoints_since_best == 1);
  for (int i = 0; i < 7; ++i) schedule_update(s, 9.9, o);
  CHECK(s.lr == doctest::Approx(1.4e-4).epsilon(1e-12));
  CHECK(s.checkpoints_since_best == 8);
  CHECK(s.plateau_count == 0);
  for (int i = 0; i < 8; ++i) schedule_update(s, 12.0, o);
  CHECK(s.lr == doctest::Approx(2e-4 * 0.49).epsilon(1e-12));
  CHECK_FALSE(should_stop(s, o));
  for (int i = 0; i < 16; ++i) schedule_update(s, 12.0, o);
  CHECK(s.checkpoints_since_best == 32);
  CHECK(should_stop(s, o));
}

TEST_CASE("validation perplexity") {
  model::ModelConfig cfg = micro_config();
  model::Transformer m(cfg, 5);
  const auto valid = mapping_data(2, 10, cfg.token_vocab);
  const double a = validate(m, valid, 30);
  CHECK(a == validate(m, valid, 30));
  CHECK(std::isfinite(a));

  for (float& v : m.params().get("out.w").value.mutable_data()) v = 0.0f;
  for (float& v : m.params().get("out.b").value.mutable_data()) v = 0.0f;
  CHECK(validate(m, valid, 30) == doctest::Approx(cfg.token_vocab).epsilon(1e-3 / cfg.token_vocab));
  CHECK_THROWS_AS(validate(m, {}, 30), Error);
}

TEST_CASE("frozen training stops after the stop patience") {
  model::Transformer m(micro_config(), 3);
  const auto data = mapping_data(1, 40, 14), valid = mapping_data(2, 8, 14);
  TrainOptions o = quick_options();
  o.frozen = true;
  o.stop_patience = 2;
  TrainResult r = train::train(m, data, valid, o);
  CHECK(r.stop_reason == "stop_patience");
  REQUIRE(r.log.size() == 3);  // one first measurement, then two stale ones
  CHECK(r.log[1].valid_ppl == r.log[0].valid_ppl);
  CHECK(r.log[2].valid_ppl == r.log[0].valid_ppl);
}

TEST_CASE("training lowers validation perplexity and keeps the best checkpoint") {
  model::Transformer m(micro_config(), 3);
  const auto data = mapping_data(1, 60, 14), valid = mapping_data(2, 10, 14);
  TrainOptions o = quick_options();
  o.max_updates = 60;
  o.plateau_patience = 2;
  TrainResult r = train::train(m, data, valid, o);
  REQUIRE(r.log.size() == 12);
  CHECK(r.log.back().valid_ppl < r.log.front().valid_ppl);
  double best = r.log[0].valid_ppl;
  for (size_t i = 1; i < r.log.size(); ++i) {
    CHECK(r.log[i].lr <= r.log[i - 1].lr);
    best = std::min(best, r.log[i].valid_ppl);
  }
  model::Transformer best_model = model::restore(r.best);
  CHECK(validate(best_model, valid, o.batch_words) == doctest::Approx(best).epsilon(1e-12));
}

TEST_CASE("resuming reproduces an uninterrupted run bit-exactly") {
  const auto data = mapping_data(1, 50, 14), valid = mapping_data(2, 8, 14);
  TrainOptions o = quick_options();
  o.max_updates = 40;
  model::Transformer full(micro_config(), 3);
  TrainResult straight = train::train(full, data, valid, o);

  const std::string dir = (std::filesystem::temp_directory_path() / "mg_resume_test").string();
  std::filesystem::remove_all(dir);
  TrainOptions first = o;
  first.max_updates = 15;
  first.out_dir = dir;
  model::Transformer part(micro_config(), 3);
  train::train(part, data, valid, first);
  const model::Checkpoint last = model::Checkpoint::load(last_file(dir));
  model::Transformer resumed(micro_config(), 99);
  TrainOptions second = o;
  second.out_dir = dir;
  TrainResult rest = train::train(resumed, data, valid, second, &last);

  REQUIRE(rest.log.size() == straight.log.size());
  for (size_t i = 0; i < straight.log.size(); ++i) {
    CHECK(rest.log[i].train_loss == straight.log[i].train_loss);
    CHECK(rest.log[i].valid_ppl == straight.log[i].valid_ppl);
    CHECK(rest.log[i].lr == straight.log[i].lr);
  }
  CHECK(same_params(rest.last, straight.last));
  CHECK(same_params(model::Checkpoint::load(best_file(dir)), straight.best));
  CHECK(std::filesystem::exists(log_file(dir)));
  std::filesystem::remove_all(dir);
}

TEST_CASE("training state round trips through the optimizer section") {
  TrainState s;
  s.update_count = 1234;
  s.checkpoint_index = 7;
  s.lr = 2e-4 * 0.7;
  s.best_valid_ppl = 3.0 / 7.0;
  s.checkpoints_since_best = 5;
  s.plateau_count = 2;
  s.seed = 42;
  s.epoch = 3;
  s.batch_cursor = 17;
  s.window_loss = 1.0 / 3.0;
  s.window_tokens = 99;
  std::vector<CheckpointRecord> log = {{1, 200, 2e-4, 1.0 / 7, 5.5}, {2, 400, 2e-4, 0.1, 4.25}};
  std::vector<CheckpointRecord> back_log;
  TrainState back = load_state(save_state(s, log), &back_log);
  CHECK(back.update_count == s.update_count);
  CHECK(back.lr == s.lr);
  CHECK(back.best_valid_ppl == s.best_valid_ppl);
  CHECK(back.window_loss == s.window_loss);
  CHECK(back.plateau_count == 2);
  CHECK(back.batch_cursor == 17);
  REQUIRE(back_log.size() == 2);
  CHECK(back_log[0].train_loss == log[0].train_loss);
  CHECK(log_line(log[1]) == "2\t400\t0.0002\t0.100000\t4.250000");
}

TEST_CASE("training rejects monolingual examples and bad options") {
  model::Transformer m(micro_config(), 3);
  auto data = mapping_data(1, 10, 14);
  const auto valid = mapping_data(2, 4, 14);
  TrainOptions o = quick_options();
  o.batch_words = 3;
  CHECK_THROWS_AS(train::train(m, data, valid, o), Error);
  o = quick_options();
  data[4].tgt_lang = data[4].src_lang;
  try {
    train::train(m, data, valid, o);
    FAIL("expected a contract error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kContract);
  }
  CHECK_THROWS_AS(train::train(m, {}, valid, o), Error);
}
