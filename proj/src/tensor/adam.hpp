#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tensor/graph.hpp"

namespace mg {

struct AdamState {
  int64_t step = 0;
  double lr = 2e-4;
  double beta1 = 0.9;
  double beta2 = 0.98;
  double eps = 1e-9;
  std::vector<Tensor> m;
  std::vector<Tensor> v;
};

// One bias-corrected Adam update using each parameter's `grad`.
// Throws a numeric error naming the first parameter with a non-finite gradient;
// nothing is updated in that case.
void adam_step(std::span<Parameter* const> params, AdamState& state);

// Scales all gradients so their joint L2 norm is at most `max_norm`.
// Returns the norm before clipping.
double clip_grad_norm(std::span<Parameter* const> params, double max_norm);

}  // namespace mg
