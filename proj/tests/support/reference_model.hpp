#pragma once

// Naive double-precision transformer loss written directly from the model
// definition. It shares nothing with the tensor engine except the parameter
// values, so finite differences taken on it are free of float32 noise.

#include <cmath>
#include <string>
#include <vector>

#include "corpus/batching.hpp"
#include "model/transformer.hpp"

namespace mg::testing {

class ReferenceModel {
 public:
  using Mat = std::vector<std::vector<double>>;

  explicit ReferenceModel(model::Transformer& m) : m_(m), c_(m.config()) {}

  // Summed label-smoothed cross-entropy without dropout.
  double loss(const corpus::Batch& batch, double smoothing) const {
    double total = 0.0;
    for (int b = 0; b < batch.size; ++b) {
      std::vector<int> src;
      for (int t = 0; t < batch.src_len; ++t) {
        if (batch.src_valid[static_cast<size_t>(b) * batch.src_len + t]) {
          src.push_back(batch.src_ids[static_cast<size_t>(b) * batch.src_len + t]);
        }
      }
      const Mat memory = encode(src, batch.lang_factor[b], batch.style_factor[b]);
      std::vector<int> tin, tout;
      std::vector<double> w;
      for (int t = 0; t < batch.tgt_len; ++t) {
        const size_t at = static_cast<size_t>(b) * batch.tgt_len + t;
        tin.push_back(batch.tgt_in[at]);
        tout.push_back(batch.tgt_out[at]);
        w.push_back(batch.tgt_weight[at]);
      }
      const Mat logits = decode(memory, tin);
      const int v = c_.token_vocab;
      for (size_t t = 0; t < logits.size(); ++t) {
        if (w[t] == 0.0) continue;
        double mx = logits[t][0];
        for (double x : logits[t]) mx = std::max(mx, x);
        double z = 0.0;
        for (double x : logits[t]) z += std::exp(x - mx);
        const double logz = std::log(z) + mx;
        double mean_lp = 0.0;
        for (double x : logits[t]) mean_lp += x - logz;
        mean_lp /= v;
        total += w[t] * (-(1.0 - smoothing) * (logits[t][tout[t]] - logz) - smoothing * mean_lp);
      }
    }
    return total;
  }

 private:
  Mat param(const std::string& name) const {
    const Tensor& t = m_.params().get(name).value;
    const int rows = t.rank() == 1 ? 1 : t.rows();
    const int cols = t.rank() == 1 ? static_cast<int>(t.size()) : t.cols();
    Mat out(rows, std::vector<double>(cols));
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) out[r][c] = t[static_cast<size_t>(r) * cols + c];
    }
    return out;
  }

  static Mat matmul(const Mat& a, const Mat& b) {
    Mat out(a.size(), std::vector<double>(b[0].size(), 0.0));
    for (size_t i = 0; i < a.size(); ++i) {
      for (size_t k = 0; k < b.size(); ++k) {
        for (size_t j = 0; j < b[0].size(); ++j) out[i][j] += a[i][k] * b[k][j];
      }
    }
    return out;
  }

  Mat linear(const Mat& x, const std::string& w, const std::string& b) const {
    Mat out = matmul(x, param(w));
    const Mat bias = param(b);
    for (auto& row : out) {
      for (size_t j = 0; j < row.size(); ++j) row[j] += bias[0][j];
    }
    return out;
  }

  Mat norm(const Mat& x, const std::string& name) const {
    const Mat g = param(name + ".g"), b = param(name + ".b");
    Mat out = x;
    for (auto& row : out) {
      const double n = static_cast<double>(row.size());
      double mean = 0.0, var = 0.0;
      for (double v : row) mean += v;
      mean /= n;
      for (double v : row) var += (v - mean) * (v - mean);
      var /= n;
      const double inv = 1.0 / std::sqrt(var + 1e-5);
      for (size_t j = 0; j < row.size(); ++j) row[j] = (row[j] - mean) * inv * g[0][j] + b[0][j];
    }
    return out;
  }

  Mat attend(const Mat& x, const Mat& mem, const std::string& pre, bool causal) const {
    const Mat q = linear(x, pre + ".wq", pre + ".bq");
    const Mat k = linear(mem, pre + ".wk", pre + ".bk");
    const Mat v = linear(mem, pre + ".wv", pre + ".bv");
    const int d = c_.model_dim, heads = c_.heads, dh = d / heads;
    Mat out(x.size(), std::vector<double>(d, 0.0));
    for (int h = 0; h < heads; ++h) {
      for (size_t i = 0; i < q.size(); ++i) {
        const size_t keys = causal ? i + 1 : k.size();
        std::vector<double> s(keys);
        double mx = -1e300;
        for (size_t j = 0; j < keys; ++j) {
          double dot = 0.0;
          for (int c = 0; c < dh; ++c) dot += q[i][h * dh + c] * k[j][h * dh + c];
          s[j] = dot / std::sqrt(static_cast<double>(dh));
          mx = std::max(mx, s[j]);
        }
        double z = 0.0;
        for (double& e : s) z += (e = std::exp(e - mx));
        for (size_t j = 0; j < keys; ++j) {
          for (int c = 0; c < dh; ++c) out[i][h * dh + c] += s[j] / z * v[j][h * dh + c];
        }
      }
    }
    return linear(out, pre + ".wo", pre + ".bo");
  }

  Mat ffn(const Mat& x, const std::string& pre) const {
    Mat h = linear(x, pre + ".w1", pre + ".b1");
    for (auto& row : h) {
      for (double& v : row) v = v > 0.0 ? v : 0.0;
    }
    return linear(h, pre + ".w2", pre + ".b2");
  }

  static void add_into(Mat& x, const Mat& y) {
    for (size_t i = 0; i < x.size(); ++i) {
      for (size_t j = 0; j < x[i].size(); ++j) x[i][j] += y[i][j];
    }
  }

  void add_positions(Mat& x) const {
    const Tensor& pe = m_.position_table();
    for (size_t i = 0; i < x.size(); ++i) {
      for (size_t j = 0; j < x[i].size(); ++j) x[i][j] += pe[i * x[i].size() + j];
    }
  }

  Mat encode(const std::vector<int>& src, int lang, int style) const {
    const Mat tok = param("src.embed"), le = param("src.lang_embed"), se = param("src.style_embed");
    Mat in;
    for (int id : src) {
      std::vector<double> row = tok[id];
      row.insert(row.end(), le[lang].begin(), le[lang].end());
      row.insert(row.end(), se[style].begin(), se[style].end());
      in.push_back(row);
    }
    Mat x = matmul(in, param("src.in_proj"));
    add_positions(x);
    for (int l = 0; l < c_.layers; ++l) {
      const std::string pre = "enc." + std::to_string(l);
      Mat n1 = norm(x, pre + ".ln1");
      add_into(x, attend(n1, n1, pre + ".self", false));
      add_into(x, ffn(norm(x, pre + ".ln2"), pre + ".ffn"));
    }
    return norm(x, "enc.ln");
  }

  Mat decode(const Mat& memory, const std::vector<int>& tin) const {
    const Mat emb = param("tgt.embed");
    Mat x;
    for (int id : tin) x.push_back(emb[id]);
    add_positions(x);
    for (int l = 0; l < c_.layers; ++l) {
      const std::string pre = "dec." + std::to_string(l);
      Mat n1 = norm(x, pre + ".ln1");
      add_into(x, attend(n1, n1, pre + ".self", true));
      add_into(x, attend(norm(x, pre + ".ln2"), memory, pre + ".cross", false));
      add_into(x, ffn(norm(x, pre + ".ln3"), pre + ".ffn"));
    }
    return linear(norm(x, "dec.ln"), "out.w", "out.b");
  }

  model::Transformer& m_;
  const model::ModelConfig& c_;
};

}  // namespace mg::testing
