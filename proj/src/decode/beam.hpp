#pragma once

#include <functional>
#include <vector>

#include "tensor/tensor.hpp"

namespace mg::decode {

struct Hypothesis {
  std::vector<int> units;  // generated units, ending with EOS when finished
  double logprob = 0.0;
  double score = 0.0;  // logprob / length^alpha
  bool finished = false;
};

// Next-unit logits [N x V] for N equal-length prefixes, each starting with BOS.
using StepFn = std::function<Tensor(const std::vector<std::vector<int>>&)>;

struct BeamOptions {
  int beam = 5;
  double length_alpha = 1.0;
  int max_len = 16;  // generated units, EOS included
};

double normalized_score(double logprob, size_t length, double alpha);

// Length-normalized beam search over nested beams: the prefixes kept at width
// `beam` include those kept at every smaller width, so the best result never
// gets worse as the beam widens, and width 1 is the greedy rollout. Finished
// hypotheses use up beam slots. PAD and BOS are never generated; the last
// allowed step may only produce EOS, so every returned hypothesis is finished.
// Results are sorted by score, best first, at most `beam` of them.
std::vector<Hypothesis> beam_search(const StepFn& step, const BeamOptions& opts);

// Decoding cap for a source of `src_len` units.
inline int max_output_length(size_t src_len) { return static_cast<int>(2 * src_len + 8); }

// Row-wise log-softmax in double precision.
std::vector<std::vector<double>> log_softmax_rows(const Tensor& logits);

}  // namespace mg::decode
