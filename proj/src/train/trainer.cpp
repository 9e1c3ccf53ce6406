#include "train/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "common/error.hpp"
#include "common/rng.hpp"

namespace mg::train {

using model::exact;
using model::parse_exact;

bool schedule_update(TrainState& state, double valid_ppl, const TrainOptions& opts) {
  if (valid_ppl < state.best_valid_ppl) {
    state.best_valid_ppl = valid_ppl;
    state.checkpoints_since_best = 0;
    state.plateau_count = 0;
    return true;
  }
  ++state.checkpoints_since_best;
  if (++state.plateau_count >= opts.plateau_patience) {
    state.lr *= opts.decay;
    state.plateau_count = 0;
  }
  return false;
}

bool should_stop(const TrainState& state, const TrainOptions& opts) {
  return state.checkpoints_since_best >= opts.stop_patience;
}

namespace {

long longest_target(const std::vector<corpus::EncodedExample>& data) {
  long n = 0;
  for (const auto& ex : data) n = std::max(n, corpus::target_words(ex));
  return n;
}

}  // namespace

double validate(const model::Transformer& model, const std::vector<corpus::EncodedExample>& valid, long batch_words) {
  if (valid.empty()) fail(ErrorKind::kInvalidArgument, "validation set is empty");
  auto& m = const_cast<model::Transformer&>(model);  // eval graphs only read parameters
  const long budget = std::max(batch_words, longest_target(valid));
  double nll = 0.0, tokens = 0.0;
  for (const corpus::Batch& b : corpus::make_batches(valid, budget, 0)) {
    Graph g(false);
    model::LossResult r = m.forward_loss(g, b, nullptr, false);
    nll += r.nll_sum;
    tokens += r.tokens;
  }
  return std::exp(nll / tokens);
}

std::string log_header() { return "checkpoint\tupdates\tlr\ttrain_loss\tvalid_ppl"; }

std::string log_line(const CheckpointRecord& r) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%d\t%lld\t%.6g\t%.6f\t%.6f", r.index, static_cast<long long>(r.updates), r.lr,
                r.train_loss, r.valid_ppl);
  return buf;
}

model::OptimizerSection save_state(const TrainState& s, const std::vector<CheckpointRecord>& log) {
  model::OptimizerSection o;
  o.adam = s.adam;
  auto& c = o.counters;
  c["update_count"] = std::to_string(s.update_count);
  c["checkpoint_index"] = std::to_string(s.checkpoint_index);
  c["lr"] = exact(s.lr);
  c["best_valid_ppl"] = exact(s.best_valid_ppl);
  c["checkpoints_since_best"] = std::to_string(s.checkpoints_since_best);
  c["plateau_count"] = std::to_string(s.plateau_count);
  c["seed"] = std::to_string(s.seed);
  c["epoch"] = std::to_string(s.epoch);
  c["batch_cursor"] = std::to_string(s.batch_cursor);
  c["window_loss"] = exact(s.window_loss);
  c["window_tokens"] = exact(s.window_tokens);
  c["log_size"] = std::to_string(log.size());
  for (size_t i = 0; i < log.size(); ++i) {
    const auto& r = log[i];
    c["log." + std::to_string(i)] = std::to_string(r.index) + " " + std::to_string(r.updates) + " " + exact(r.lr) +
                                    " " + exact(r.train_loss) + " " + exact(r.valid_ppl);
  }
  return o;
}

TrainState load_state(const model::OptimizerSection& o, std::vector<CheckpointRecord>* log) {
  auto get = [&](const std::string& key) -> const std::string& {
    auto it = o.counters.find(key);
    if (it == o.counters.end()) fail(ErrorKind::kParse, "checkpoint training state lacks '" + key + "'");
    return it->second;
  };
  TrainState s;
  s.adam = o.adam;
  s.update_count = std::stoll(get("update_count"));
  s.checkpoint_index = std::stoi(get("checkpoint_index"));
  s.lr = parse_exact(get("lr"));
  s.best_valid_ppl = parse_exact(get("best_valid_ppl"));
  s.checkpoints_since_best = std::stoi(get("checkpoints_since_best"));
  s.plateau_count = std::stoi(get("plateau_count"));
  s.seed = std::stoull(get("seed"));
  s.epoch = std::stoi(get("epoch"));
  s.batch_cursor = std::stoll(get("batch_cursor"));
  s.window_loss = parse_exact(get("window_loss"));
  s.window_tokens = parse_exact(get("window_tokens"));
  if (log) {
    log->clear();
    const size_t n = std::stoull(get("log_size"));
    for (size_t i = 0; i < n; ++i) {
      char a[64], b[64], c[64];
      CheckpointRecord r;
      long long updates = 0;
      if (std::sscanf(get("log." + std::to_string(i)).c_str(), "%d %lld %63s %63s %63s", &r.index, &updates, a, b, c) != 5) {
        fail(ErrorKind::kParse, "bad training log entry " + std::to_string(i));
      }
      r.updates = updates;
      r.lr = parse_exact(a);
      r.train_loss = parse_exact(b);
      r.valid_ppl = parse_exact(c);
      log->push_back(r);
    }
  }
  return s;
}

namespace {

void write_log(const std::string& path, const std::vector<CheckpointRecord>& log) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorKind::kIo, "cannot write training log " + path);
  out << log_header() << '\n';
  for (const auto& r : log) out << log_line(r) << '\n';
}

}  // namespace

void validate_options(const TrainOptions& opts) {
  auto need = [](bool ok, const std::string& what) {
    if (!ok) fail(ErrorKind::kConfig, "training options: " + what);
  };
  need(opts.lr > 0.0, "lr must be positive");
  need(opts.decay > 0.0 && opts.decay <= 1.0, "decay must be in (0, 1]");
  need(opts.plateau_patience > 0 && opts.stop_patience > 0, "patience values must be positive");
  need(opts.checkpoint_interval > 0, "checkpoint_interval must be positive");
  need(opts.max_epochs > 0, "max_epochs must be positive");
  need(opts.max_updates >= 0, "max_updates must be >= 0");
  need(opts.batch_words > 0, "batch_words must be positive");
}

TrainResult train(model::Transformer& model, const std::vector<corpus::EncodedExample>& data,
                  const std::vector<corpus::EncodedExample>& valid, const TrainOptions& opts,
                  const model::Checkpoint* resume) {
  if (data.empty()) fail(ErrorKind::kInvalidArgument, "training set is empty");
  if (valid.empty()) fail(ErrorKind::kInvalidArgument, "validation set is empty");
  validate_options(opts);
  for (size_t i = 0; i < data.size(); ++i) {
    if (data[i].src_lang == data[i].tgt_lang) {
      fail(ErrorKind::kContract, "training example " + std::to_string(i) + " is monolingual (" + data[i].src_lang +
                                     "); only cross-lingual pairs may be trained on");
    }
  }
  auto say = [&](const std::string& msg) {
    if (opts.log) opts.log(msg);
  };

  TrainResult result;
  TrainState state;
  state.lr = opts.lr;
  state.seed = opts.seed;
  if (resume) {
    if (!resume->optimizer) fail(ErrorKind::kInvalidArgument, "resume checkpoint has no training state");
    model = model::restore(*resume);
    state = load_state(*resume->optimizer, &result.log);
    say("resumed at update " + std::to_string(state.update_count));
  }
  if (!opts.out_dir.empty()) {
    std::filesystem::create_directories(opts.out_dir);
    result.best_path = best_file(opts.out_dir);
    result.last_path = last_file(opts.out_dir);
    if (resume && std::filesystem::exists(result.best_path)) result.best = model::Checkpoint::load(result.best_path);
  }
  if (resume && result.best.params.empty()) result.best = model::snapshot(model, state.seed);

  const long budget = opts.batch_words;
  if (longest_target(data) > budget) {
    fail(ErrorKind::kConfig, "batch_words " + std::to_string(budget) + " is smaller than the longest target (" +
                                 std::to_string(longest_target(data)) + " units)");
  }
  const auto params = model.params().all();
  const uint64_t dropout_base = derive_seed(state.seed, 0xD5);

  auto checkpoint = [&]() {
    CheckpointRecord rec;
    rec.index = ++state.checkpoint_index;
    rec.updates = state.update_count;
    rec.lr = state.lr;
    rec.train_loss = state.window_tokens > 0 ? state.window_loss / state.window_tokens : 0.0;
    rec.valid_ppl = validate(model, valid, budget);
    state.window_loss = 0.0;
    state.window_tokens = 0.0;
    const bool improved = schedule_update(state, rec.valid_ppl, opts);
    result.log.push_back(rec);
    say(log_line(rec) + (improved ? "\t*" : ""));
    if (improved) result.best = model::snapshot(model, state.seed);
    result.last = model::snapshot(model, state.seed);
    result.last.optimizer = save_state(state, result.log);
    if (!opts.out_dir.empty()) {
      if (improved) result.best.save(result.best_path);
      result.last.save(result.last_path);
      write_log(log_file(opts.out_dir), result.log);
    }
  };

  bool pending = false;  // updates since the last checkpoint
  while (true) {
    if (state.epoch >= opts.max_epochs) {
      result.stop_reason = "max_epochs";
      break;
    }
    const std::vector<corpus::Batch> batches = corpus::make_batches(data, budget, derive_seed(state.seed, 1000 + state.epoch));
    bool stop = false;
    while (state.batch_cursor < static_cast<int64_t>(batches.size())) {
      const corpus::Batch& batch = batches[state.batch_cursor];
      model.params().zero_grad();
      Rng dropout(derive_seed(dropout_base, state.update_count));
      Graph g;
      model::LossResult r = model.forward_loss(g, batch, &dropout, true);
      if (!std::isfinite(r.loss.value().item())) {
        fail(ErrorKind::kNumeric, "non-finite training loss at update " + std::to_string(state.update_count + 1) +
                                      "; last good checkpoint is kept");
      }
      g.backward(ops::scale(r.loss, static_cast<float>(1.0 / r.tokens)));
      if (!opts.frozen) {
        if (opts.clip_norm > 0.0) clip_grad_norm(params, opts.clip_norm);
        state.adam.lr = state.lr;
        adam_step(params, state.adam);
      }
      state.window_loss += r.nll_sum;
      state.window_tokens += r.tokens;
      ++state.update_count;
      ++state.batch_cursor;
      pending = true;
      if (state.update_count % opts.checkpoint_interval == 0) {
        checkpoint();
        pending = false;
        if (should_stop(state, opts)) {
          result.stop_reason = "stop_patience";
          stop = true;
          break;
        }
      }
      if (opts.max_updates > 0 && state.update_count >= opts.max_updates) {
        result.stop_reason = "max_updates";
        stop = true;
        break;
      }
    }
    if (stop) break;
    ++state.epoch;
    state.batch_cursor = 0;
  }
  if (pending) checkpoint();
  say("stopped: " + result.stop_reason + " after " + std::to_string(state.update_count) + " updates");
  return result;
}

}  // namespace mg::train
