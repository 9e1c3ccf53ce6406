#include "tensor/tensor.hpp"

#include <cmath>
#include <sstream>

#include "common/error.hpp"

namespace mg {

std::string shape_str(const Shape& shape) {
  std::ostringstream out;
  out << '[';
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) out << 'x';
    out << shape[i];
  }
  out << ']';
  return out.str();
}

size_t shape_size(const Shape& shape) {
  size_t n = 1;
  for (int d : shape) {
    if (d <= 0) fail(ErrorKind::kDimension, "non-positive dimension in shape " + shape_str(shape));
    n *= static_cast<size_t>(d);
  }
  return n;
}

Tensor::Tensor(Shape shape, float fill) : shape_(std::move(shape)) {
  data_.assign(shape_size(shape_), fill);
}

Tensor::Tensor(Shape shape, std::vector<float> data) : shape_(std::move(shape)), data_(std::move(data)) {
  if (shape_size(shape_) != data_.size()) {
    fail(ErrorKind::kDimension, "shape " + shape_str(shape_) + " does not hold " +
                                    std::to_string(data_.size()) + " values");
  }
}

Tensor Tensor::matrix(std::initializer_list<std::initializer_list<float>> rows) {
  std::vector<float> data;
  int r = 0;
  int c = -1;
  for (const auto& row : rows) {
    if (c >= 0 && static_cast<int>(row.size()) != c) fail(ErrorKind::kDimension, "ragged matrix literal");
    c = static_cast<int>(row.size());
    data.insert(data.end(), row.begin(), row.end());
    ++r;
  }
  return Tensor({r, c}, std::move(data));
}

Tensor Tensor::vector(std::initializer_list<float> values) {
  return Tensor({static_cast<int>(values.size())}, std::vector<float>(values));
}

int Tensor::dim(int axis) const {
  if (axis < 0) axis += rank();
  if (axis < 0 || axis >= rank()) fail(ErrorKind::kDimension, "axis out of range for " + shape_str(shape_));
  return shape_[axis];
}

int Tensor::rows() const { return shape_.empty() ? 0 : static_cast<int>(data_.size() / shape_.back()); }
int Tensor::cols() const { return shape_.empty() ? 0 : shape_.back(); }

Tensor Tensor::reshaped(Shape shape) const {
  if (shape_size(shape) != data_.size()) {
    fail(ErrorKind::kDimension, "cannot reshape " + shape_str(shape_) + " to " + shape_str(shape));
  }
  return Tensor(std::move(shape), data_);
}

bool Tensor::all_finite() const {
  for (float v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

float Tensor::item() const {
  if (data_.size() != 1) fail(ErrorKind::kContract, "item() on non-scalar " + shape_str(shape_));
  return data_[0];
}

namespace {

// Row-major C[m x n] += A[m x k] * B[k x n]; the j loop vectorizes.
void gemm_nn(int m, int n, int k, const float* __restrict a, const float* __restrict b, float* __restrict c) {
  constexpr int kRowBlock = 4;
  int i = 0;
  for (; i + kRowBlock <= m; i += kRowBlock) {
    float* c0 = c + static_cast<size_t>(i) * n;
    float* c1 = c0 + n;
    float* c2 = c1 + n;
    float* c3 = c2 + n;
    const float* a0 = a + static_cast<size_t>(i) * k;
    const float* a1 = a0 + k;
    const float* a2 = a1 + k;
    const float* a3 = a2 + k;
    for (int p = 0; p < k; ++p) {
      const float* brow = b + static_cast<size_t>(p) * n;
      const float v0 = a0[p], v1 = a1[p], v2 = a2[p], v3 = a3[p];
      for (int j = 0; j < n; ++j) {
        const float bv = brow[j];
        c0[j] += v0 * bv;
        c1[j] += v1 * bv;
        c2[j] += v2 * bv;
        c3[j] += v3 * bv;
      }
    }
  }
  for (; i < m; ++i) {
    float* crow = c + static_cast<size_t>(i) * n;
    const float* arow = a + static_cast<size_t>(i) * k;
    for (int p = 0; p < k; ++p) {
      const float* brow = b + static_cast<size_t>(p) * n;
      const float v = arow[p];
      for (int j = 0; j < n; ++j) crow[j] += v * brow[j];
    }
  }
}

std::vector<float> transpose(const float* src, int rows, int cols) {
  std::vector<float> out(static_cast<size_t>(rows) * cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) out[static_cast<size_t>(c) * rows + r] = src[static_cast<size_t>(r) * cols + c];
  }
  return out;
}

}  // namespace

void gemm(bool trans_a, bool trans_b, int m, int n, int k, const float* a, const float* b, float* c,
          bool accumulate) {
  if (!accumulate) std::fill(c, c + static_cast<size_t>(m) * n, 0.0f);
  if (m == 0 || n == 0 || k == 0) return;
  std::vector<float> at;
  std::vector<float> bt;
  if (trans_a) {
    at = transpose(a, k, m);
    a = at.data();
  }
  if (trans_b) {
    bt = transpose(b, n, k);
    b = bt.data();
  }
  gemm_nn(m, n, k, a, b, c);
}

}  // namespace mg
