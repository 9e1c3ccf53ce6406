#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace mg {

using Shape = std::vector<int>;

std::string shape_str(const Shape& shape);
size_t shape_size(const Shape& shape);

// Dense row-major float32 tensor with value semantics.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, float fill = 0.0f);
  Tensor(Shape shape, std::vector<float> data);

  static Tensor scalar(float v) { return Tensor({1}, std::vector<float>{v}); }
  static Tensor matrix(std::initializer_list<std::initializer_list<float>> rows);
  static Tensor vector(std::initializer_list<float> values);

  const Shape& shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  int dim(int axis) const;
  size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  // Rows/cols treat the tensor as [prod(shape[:-1]) x shape[-1]].
  int rows() const;
  int cols() const;

  std::span<const float> data() const { return data_; }
  std::span<float> mutable_data() { return data_; }
  const float* ptr() const { return data_.data(); }
  float* mutable_ptr() { return data_.data(); }

  float operator[](size_t i) const { return data_[i]; }
  float& operator[](size_t i) { return data_[i]; }
  float at(int r, int c) const { return data_[static_cast<size_t>(r) * cols() + c]; }

  Tensor reshaped(Shape shape) const;
  bool all_finite() const;
  float item() const;

 private:
  Shape shape_;
  std::vector<float> data_;
};

// C[m x n] (+)= op(A) * op(B). Reductions over k run left to right.
void gemm(bool trans_a, bool trans_b, int m, int n, int k, const float* a, const float* b, float* c,
          bool accumulate);

}  // namespace mg
