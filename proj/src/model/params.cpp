#include "model/params.hpp"

#include "common/error.hpp"

namespace mg::model {

Parameter& ParamStore::add(const std::string& name, Tensor value) {
  if (index_.count(name)) fail(ErrorKind::kContract, "duplicate parameter name " + name);
  auto p = std::make_unique<Parameter>();
  p->name = name;
  p->value = std::move(value);
  index_[name] = params_.size();
  params_.push_back(std::move(p));
  return *params_.back();
}

Parameter& ParamStore::get(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) fail(ErrorKind::kContract, "no parameter named " + name);
  return *params_[it->second];
}

const Parameter& ParamStore::get(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) fail(ErrorKind::kContract, "no parameter named " + name);
  return *params_[it->second];
}

std::vector<Parameter*> ParamStore::all() {
  std::vector<Parameter*> out;
  for (auto& p : params_) out.push_back(p.get());
  return out;
}

size_t ParamStore::total_values() const {
  size_t n = 0;
  for (const auto& p : params_) n += p->value.size();
  return n;
}

void ParamStore::zero_grad() {
  for (auto& p : params_) p->zero_grad();
}

}  // namespace mg::model
