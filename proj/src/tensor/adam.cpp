#include "tensor/adam.hpp"

#include <cmath>

#include "common/error.hpp"

namespace mg {

void adam_step(std::span<Parameter* const> params, AdamState& state) {
  if (!(state.lr > 0.0)) fail(ErrorKind::kInvalidArgument, "adam: learning rate must be positive");
  for (Parameter* p : params) {
    if (p->grad.empty()) p->zero_grad();
    if (p->grad.shape() != p->value.shape()) {
      fail(ErrorKind::kDimension, "adam: gradient shape " + shape_str(p->grad.shape()) + " does not match parameter " +
                                      p->name + " " + shape_str(p->value.shape()));
    }
    if (!p->grad.all_finite()) fail(ErrorKind::kNumeric, "adam: non-finite gradient for parameter " + p->name);
  }
  if (state.m.empty()) {
    for (Parameter* p : params) {
      state.m.emplace_back(p->value.shape(), 0.0f);
      state.v.emplace_back(p->value.shape(), 0.0f);
    }
  }
  if (state.m.size() != params.size()) fail(ErrorKind::kContract, "adam: optimizer state does not match parameter list");

  state.step += 1;
  const double b1 = state.beta1, b2 = state.beta2;
  const double correction1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
  const double correction2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
  const float step_size = static_cast<float>(state.lr / correction1);
  const float inv_sqrt_c2 = static_cast<float>(1.0 / std::sqrt(correction2));
  const float eps = static_cast<float>(state.eps);
  for (size_t i = 0; i < params.size(); ++i) {
    Parameter& p = *params[i];
    float* w = p.value.mutable_ptr();
    const float* g = p.grad.ptr();
    float* m = state.m[i].mutable_ptr();
    float* v = state.v[i].mutable_ptr();
    for (size_t j = 0; j < p.value.size(); ++j) {
      m[j] = static_cast<float>(b1) * m[j] + static_cast<float>(1.0 - b1) * g[j];
      v[j] = static_cast<float>(b2) * v[j] + static_cast<float>(1.0 - b2) * g[j] * g[j];
      w[j] -= step_size * m[j] / (std::sqrt(v[j]) * inv_sqrt_c2 + eps);
    }
  }
}

double clip_grad_norm(std::span<Parameter* const> params, double max_norm) {
  double total = 0.0;
  for (const Parameter* p : params) {
    for (float g : p->grad.data()) total += static_cast<double>(g) * g;
  }
  const double norm = std::sqrt(total);
  if (max_norm > 0.0 && norm > max_norm) {
    const float s = static_cast<float>(max_norm / norm);
    for (Parameter* p : params) {
      for (float& g : p->grad.mutable_data()) g *= s;
    }
  }
  return norm;
}

}  // namespace mg
