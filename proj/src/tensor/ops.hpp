#pragma once

#include <cstdint>
#include <vector>

#include "common/rng.hpp"
#include "tensor/graph.hpp"

namespace mg::ops {

Var matmul(Var a, Var b);
Var add(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, float s);
// x[R x C] + bias[C], broadcast over rows.
Var add_bias(Var x, Var bias);
Var sum(Var a);
Var relu(Var a);
Var softmax(Var x, int axis = -1);
Var layer_norm(Var x, Var gain, Var bias, float eps = 1e-5f);
// Inverted dropout; identity when `rng` is null or p == 0.
Var dropout(Var x, float p, Rng* rng);
Var gather_rows(Var table, const std::vector<int>& ids);
Var concat_cols(const std::vector<Var>& parts);
Var reshape(Var x, Shape shape);
// Max over each row segment [offsets[s], offsets[s+1]) of x[R x F] -> [S x F].
Var segment_max(Var x, const std::vector<int>& offsets);

struct AttentionSpec {
  int batch = 1;
  int q_len = 1;
  int k_len = 1;
  int heads = 1;
  bool causal = false;
  // batch * k_len flags, 1 = attendable; empty means all keys valid.
  std::vector<uint8_t> key_valid;
};

// Scaled dot-product multi-head attention over packed rows:
// q [batch*q_len x D], k/v [batch*k_len x D]. The attention weights
// [batch x heads x q_len x k_len] are kept as the node's aux tensor.
Var attention(Var q, Var k, Var v, const AttentionSpec& spec);

struct CrossEntropyStats {
  double nll_sum = 0.0;  // unsmoothed negative log-likelihood
  double weight_sum = 0.0;
};

// Sum over rows of weight_i * CE(q_i, softmax(logits_i)) where q_i puts
// (1 - smoothing) on the target plus smoothing / V on every class.
Var cross_entropy(Var logits, const std::vector<int>& targets, const std::vector<float>& weights,
                  float smoothing, CrossEntropyStats* stats = nullptr);

}  // namespace mg::ops
