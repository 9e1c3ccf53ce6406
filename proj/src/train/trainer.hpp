#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "corpus/batching.hpp"
#include "model/checkpoint.hpp"
#include "model/transformer.hpp"
#include "tensor/adam.hpp"

namespace mg::train {

struct TrainOptions {
  double lr = 2e-4;
  double decay = 0.7;
  int plateau_patience = 8;  // stale checkpoints before lr decay
  int stop_patience = 32;    // stale checkpoints before stopping
  int checkpoint_interval = 200;
  int max_epochs = 20;
  long max_updates = 0;  // 0: no limit
  long batch_words = 400;
  double clip_norm = 1.0;  // <= 0 disables clipping
  uint64_t seed = 1;
  std::string out_dir;  // empty: keep checkpoints in memory only
  bool frozen = false;  // compute gradients but never apply them
  std::function<void(const std::string&)> log;
};

struct TrainState {
  int64_t update_count = 0;
  int checkpoint_index = 0;
  double lr = 2e-4;
  double best_valid_ppl = std::numeric_limits<double>::infinity();
  int checkpoints_since_best = 0;
  int plateau_count = 0;
  AdamState adam;
  uint64_t seed = 1;
  int epoch = 0;
  int64_t batch_cursor = 0;  // next batch within the epoch
  double window_loss = 0.0;  // unsmoothed loss since the last checkpoint
  double window_tokens = 0.0;
};

// Throws a config error naming the first bad option.
void validate_options(const TrainOptions& opts);

// Applies one validation result. Returns true when the perplexity improved
// (ties do not count).
bool schedule_update(TrainState& state, double valid_ppl, const TrainOptions& opts);
bool should_stop(const TrainState& state, const TrainOptions& opts);

// exp(mean unsmoothed token loss) in eval mode.
double validate(const model::Transformer& model, const std::vector<corpus::EncodedExample>& valid, long batch_words);

struct CheckpointRecord {
  int index = 0;
  int64_t updates = 0;
  double lr = 0.0;
  double train_loss = 0.0;
  double valid_ppl = 0.0;
};

struct TrainResult {
  std::vector<CheckpointRecord> log;
  model::Checkpoint best;
  model::Checkpoint last;
  std::string best_path, last_path;  // set when out_dir is given
  std::string stop_reason;
};

std::string log_header();
std::string log_line(const CheckpointRecord& r);

// Resumable state <-> the checkpoint's optimizer section.
model::OptimizerSection save_state(const TrainState& state, const std::vector<CheckpointRecord>& log);
TrainState load_state(const model::OptimizerSection& section, std::vector<CheckpointRecord>* log = nullptr);

// Trains `model` in place, leaving it at the last update. Every training
// example must be cross-lingual. `resume` continues from a `last` checkpoint.
TrainResult train(model::Transformer& model, const std::vector<corpus::EncodedExample>& data,
                  const std::vector<corpus::EncodedExample>& valid, const TrainOptions& opts,
                  const model::Checkpoint* resume = nullptr);

inline std::string best_file(const std::string& dir) { return dir + "/best.ckpt"; }
inline std::string last_file(const std::string& dir) { return dir + "/last.ckpt"; }
inline std::string log_file(const std::string& dir) { return dir + "/train.log"; }

}  // namespace mg::train
