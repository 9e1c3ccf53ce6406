#include "tensor/graph.hpp"

#include "common/error.hpp"

namespace mg {

const Tensor& Var::value() const { return graph_->value(*this); }

Var Graph::constant(Tensor value) {
  Node n;
  n.op = "constant";
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Graph::leaf(Tensor value) {
  Node n;
  n.op = "leaf";
  n.value = std::move(value);
  n.needs_grad = record_;
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Graph::parameter(Parameter& param) {
  Node n;
  n.op = "param:" + param.name;
  n.value = param.value;
  n.param = &param;
  n.needs_grad = record_;
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Graph::push(Tensor value, std::vector<int> inputs, BackwardFn fn, Tensor aux) {
  if (!value.all_finite()) {
    fail(ErrorKind::kNumeric, "non-finite value produced after node " + std::to_string(nodes_.size()));
  }
  Node n;
  n.value = std::move(value);
  n.aux = std::move(aux);
  if (record_) {
    for (int id : inputs) n.needs_grad = n.needs_grad || nodes_[id].needs_grad;
    if (n.needs_grad) n.backward = std::move(fn);
  }
  n.inputs = std::move(inputs);
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

const Tensor& Graph::grad(Var v) const {
  const Node& n = nodes_[v.id()];
  if (n.grad.empty()) fail(ErrorKind::kContract, "no gradient recorded for node " + std::to_string(v.id()));
  return n.grad;
}

Tensor& Graph::grad_buffer(int id) {
  Node& n = nodes_[id];
  if (n.grad.empty()) n.grad = Tensor(n.value.shape(), 0.0f);
  return n.grad;
}

void Graph::backward(Var loss) {
  if (!record_) fail(ErrorKind::kContract, "backward on a graph built without recording");
  if (differentiated_) fail(ErrorKind::kContract, "backward called twice on the same graph");
  if (nodes_[loss.id()].value.size() != 1) {
    fail(ErrorKind::kContract, "backward needs a scalar loss, got " + shape_str(nodes_[loss.id()].value.shape()));
  }
  differentiated_ = true;
  grad_buffer(loss.id())[0] = 1.0f;
  for (int id = loss.id(); id >= 0; --id) {
    Node& n = nodes_[id];
    if (n.grad.empty() || !n.needs_grad) continue;
    if (n.backward) n.backward(*this, id);
    if (n.param != nullptr) {
      Parameter& p = *n.param;
      if (p.grad.empty() || p.grad.shape() != p.value.shape()) p.zero_grad();
      float* dst = p.grad.mutable_ptr();
      const float* src = n.grad.ptr();
      for (size_t i = 0; i < n.grad.size(); ++i) dst[i] += src[i];
    }
  }
}

}  // namespace mg
