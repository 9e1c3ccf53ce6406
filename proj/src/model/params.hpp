#pragma once

#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "tensor/graph.hpp"

namespace mg::model {

// Named parameters in creation order. Addresses are stable.
class ParamStore {
 public:
  Parameter& add(const std::string& name, Tensor value);
  Parameter& get(const std::string& name);
  const Parameter& get(const std::string& name) const;
  bool contains(const std::string& name) const { return index_.count(name) > 0; }

  size_t size() const { return params_.size(); }
  Parameter& at(size_t i) { return *params_[i]; }
  const Parameter& at(size_t i) const { return *params_[i]; }
  std::vector<Parameter*> all();
  size_t total_values() const;

  void zero_grad();

 private:
  std::vector<std::unique_ptr<Parameter>> params_;
  std::unordered_map<std::string, size_t> index_;
};

}  // namespace mg::model
