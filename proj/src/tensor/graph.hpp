#pragma once

#include <functional>
#include <string>
#include <vector>

#include "tensor/tensor.hpp"

namespace mg {

// A named trainable tensor. `grad` is filled by Graph::backward.
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;

  void zero_grad() { grad = Tensor(value.shape(), 0.0f); }
};

class Graph;

// Handle to a node of a Graph. Cheap to copy; valid while the graph lives.
class Var {
 public:
  Var() = default;
  Var(Graph* graph, int id) : graph_(graph), id_(id) {}

  Graph* graph() const { return graph_; }
  int id() const { return id_; }
  bool valid() const { return graph_ != nullptr && id_ >= 0; }

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }

 private:
  Graph* graph_ = nullptr;
  int id_ = -1;
};

// Reverse-mode tape. Node ids are assigned in creation order, which is a
// topological order because every op only consumes existing nodes.
class Graph {
 public:
  using BackwardFn = std::function<void(Graph&, int node)>;

  explicit Graph(bool record = true) : record_(record) {}
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Var constant(Tensor value);
  Var leaf(Tensor value);
  Var parameter(Parameter& param);

  const Tensor& value(Var v) const { return nodes_[v.id()].value; }
  const Tensor& value(int id) const { return nodes_[id].value; }
  const Tensor& aux(Var v) const { return nodes_[v.id()].aux; }
  const Tensor& grad(Var v) const;
  bool has_grad(Var v) const { return !nodes_[v.id()].grad.empty(); }

  // Populates gradients for everything reachable from the scalar `loss`.
  // A graph can be differentiated once.
  void backward(Var loss);

  bool recording() const { return record_; }
  size_t size() const { return nodes_.size(); }

  // Op-implementation interface.
  Var push(Tensor value, std::vector<int> inputs, BackwardFn fn, Tensor aux = {});
  bool needs_grad(int id) const { return nodes_[id].needs_grad; }
  const std::vector<int>& inputs(int id) const { return nodes_[id].inputs; }
  const Tensor& grad_of(int id) const { return nodes_[id].grad; }
  Tensor& grad_buffer(int id);
  const std::string& op_name(int id) const { return nodes_[id].op; }
  void set_op_name(int id, std::string name) { nodes_[id].op = std::move(name); }

 private:
  struct Node {
    std::string op;
    Tensor value;
    Tensor aux;
    Tensor grad;
    std::vector<int> inputs;
    BackwardFn backward;
    Parameter* param = nullptr;
    bool needs_grad = false;
  };

  bool record_;
  bool differentiated_ = false;
  std::vector<Node> nodes_;
};

}  // namespace mg
