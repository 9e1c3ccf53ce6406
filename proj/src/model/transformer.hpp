#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "common/rng.hpp"
#include "corpus/batching.hpp"
#include "model/checkpoint.hpp"
#include "model/config.hpp"
#include "model/params.hpp"
#include "tensor/graph.hpp"
#include "tensor/ops.hpp"

namespace mg::model {

// Packed source batch: `batch` rows of `len` positions each.
struct SourceInput {
  int batch = 1;
  int len = 1;
  std::vector<int> ids;        // batch * len
  std::vector<uint8_t> valid;  // batch * len
  std::vector<int> lang;       // batch
  std::vector<int> style;      // batch
};

SourceInput source_of(const corpus::Batch& batch);

struct LossResult {
  Var loss;               // summed over target tokens (smoothed in train mode)
  double nll_sum = 0.0;   // unsmoothed
  double tokens = 0.0;
};

// Encoder output for one sentence, ready for repeated decoder calls.
struct EncodedSource {
  Tensor memory;  // [len x d]
  std::vector<uint8_t> valid;
  int len = 0;
};

class Transformer {
 public:
  // Parameters initialized from `init_seed`.
  Transformer(ModelConfig config, uint64_t init_seed);

  const ModelConfig& config() const { return config_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }

  // Graph builders. A null `rng` means evaluation mode (no dropout). With
  // `trainable` the parameters become gradient leaves, otherwise constants.
  Var embed_source(Graph& g, const SourceInput& src, Rng* rng, bool trainable = true);
  Var encode(Graph& g, Var embedded, const SourceInput& src, Rng* rng, bool trainable = true,
             std::vector<Var>* attention = nullptr);
  // Logits [batch * tgt_len x vocab] for decoder inputs `tgt_in`.
  Var decode(Graph& g, Var memory, const SourceInput& src, int tgt_len, const std::vector<int>& tgt_in, Rng* rng,
             bool trainable = true, std::vector<Var>* attention = nullptr);

  LossResult forward_loss(Graph& g, const corpus::Batch& batch, Rng* rng, bool trainable = true);

  // Inference.
  EncodedSource encode_source(const std::vector<int>& ids, int lang, int style) const;
  // Next-unit logits [N x vocab] for N equal-length prefixes (each starting
  // with BOS).
  Tensor next_logits(const EncodedSource& src, const std::vector<std::vector<int>>& prefixes) const;

  const Tensor& position_table() const { return positions_; }

 private:
  class Binder;
  Var attention_block(Graph& g, Binder& p, const std::string& prefix, Var x, Var memory, const ops::AttentionSpec& spec,
                      bool self, Rng* rng, std::vector<Var>* attention);
  Var ffn_block(Graph& g, Binder& p, const std::string& prefix, Var x, Rng* rng);
  Var add_positions(Graph& g, Var x, int batch, int len);
  void check_length(int len, const char* what) const;

  ModelConfig config_;
  ParamStore params_;
  Tensor positions_;  // [max_positions x d]
};

// Parameters and configuration as a checkpoint (no optimizer section).
Checkpoint snapshot(const Transformer& model, uint64_t seed);
// Rebuilds a model; names and shapes must match the configuration exactly.
Transformer restore(const Checkpoint& ckpt);

}  // namespace mg::model
