#include "tensor/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "common/error.hpp"

namespace mg::ops {

namespace {

Graph& graph_of(Var a) {
  if (!a.valid()) fail(ErrorKind::kContract, "operation on an empty variable");
  return *a.graph();
}

void same_graph(Var a, Var b) {
  if (a.graph() != b.graph()) fail(ErrorKind::kContract, "variables belong to different graphs");
}

void require_same_shape(const char* op, Var a, Var b) {
  if (a.shape() != b.shape()) {
    fail(ErrorKind::kDimension,
         std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  }
}

void accumulate(Tensor& dst, const float* src) {
  float* d = dst.mutable_ptr();
  for (size_t i = 0; i < dst.size(); ++i) d[i] += src[i];
}

Var named(Var v, const char* name) {
  v.graph()->set_op_name(v.id(), name);
  return v;
}

}  // namespace

Var matmul(Var a, Var b) {
  Graph& g = graph_of(a);
  same_graph(a, b);
  const Shape& sa = a.shape();
  const Shape& sb = b.shape();
  if (sa.size() != 2 || sb.size() != 2 || sa[1] != sb[0]) {
    fail(ErrorKind::kDimension, "matmul: cannot multiply " + shape_str(sa) + " by " + shape_str(sb));
  }
  const int m = sa[0], k = sa[1], n = sb[1];
  Tensor out({m, n});
  gemm(false, false, m, n, k, a.value().ptr(), b.value().ptr(), out.mutable_ptr(), false);
  return named(g.push(std::move(out), {a.id(), b.id()},
                      [m, n, k](Graph& g, int id) {
                        const int ia = g.inputs(id)[0], ib = g.inputs(id)[1];
                        const float* dc = g.grad_of(id).ptr();
                        if (g.needs_grad(ia)) {
                          gemm(false, true, m, k, n, dc, g.value(ib).ptr(), g.grad_buffer(ia).mutable_ptr(), true);
                        }
                        if (g.needs_grad(ib)) {
                          gemm(true, false, k, n, m, g.value(ia).ptr(), dc, g.grad_buffer(ib).mutable_ptr(), true);
                        }
                      }),
               "matmul");
}

Var add(Var a, Var b) {
  Graph& g = graph_of(a);
  same_graph(a, b);
  require_same_shape("add", a, b);
  Tensor out = a.value();
  accumulate(out, b.value().ptr());
  return named(g.push(std::move(out), {a.id(), b.id()},
                      [](Graph& g, int id) {
                        for (int in : g.inputs(id)) {
                          if (g.needs_grad(in)) accumulate(g.grad_buffer(in), g.grad_of(id).ptr());
                        }
                      }),
               "add");
}

Var mul(Var a, Var b) {
  Graph& g = graph_of(a);
  same_graph(a, b);
  require_same_shape("mul", a, b);
  Tensor out = a.value();
  const float* pb = b.value().ptr();
  for (size_t i = 0; i < out.size(); ++i) out[i] *= pb[i];
  return named(g.push(std::move(out), {a.id(), b.id()},
                      [](Graph& g, int id) {
                        const int ia = g.inputs(id)[0], ib = g.inputs(id)[1];
                        const Tensor& dy = g.grad_of(id);
                        if (g.needs_grad(ia)) {
                          Tensor& da = g.grad_buffer(ia);
                          const Tensor& vb = g.value(ib);
                          for (size_t i = 0; i < dy.size(); ++i) da[i] += dy[i] * vb[i];
                        }
                        if (g.needs_grad(ib)) {
                          Tensor& db = g.grad_buffer(ib);
                          const Tensor& va = g.value(ia);
                          for (size_t i = 0; i < dy.size(); ++i) db[i] += dy[i] * va[i];
                        }
                      }),
               "mul");
}

Var scale(Var a, float s) {
  Graph& g = graph_of(a);
  Tensor out = a.value();
  for (size_t i = 0; i < out.size(); ++i) out[i] *= s;
  return named(g.push(std::move(out), {a.id()},
                      [s](Graph& g, int id) {
                        Tensor& da = g.grad_buffer(g.inputs(id)[0]);
                        const Tensor& dy = g.grad_of(id);
                        for (size_t i = 0; i < dy.size(); ++i) da[i] += s * dy[i];
                      }),
               "scale");
}

Var add_bias(Var x, Var bias) {
  Graph& g = graph_of(x);
  same_graph(x, bias);
  const int cols = x.value().cols();
  if (bias.value().size() != static_cast<size_t>(cols)) {
    fail(ErrorKind::kDimension, "add_bias: bias " + shape_str(bias.shape()) + " does not match " + shape_str(x.shape()));
  }
  Tensor out = x.value();
  const float* pb = bias.value().ptr();
  const int rows = out.rows();
  for (int r = 0; r < rows; ++r) {
    float* row = out.mutable_ptr() + static_cast<size_t>(r) * cols;
    for (int c = 0; c < cols; ++c) row[c] += pb[c];
  }
  return named(g.push(std::move(out), {x.id(), bias.id()},
                      [rows, cols](Graph& g, int id) {
                        const int ix = g.inputs(id)[0], ib = g.inputs(id)[1];
                        const Tensor& dy = g.grad_of(id);
                        if (g.needs_grad(ix)) accumulate(g.grad_buffer(ix), dy.ptr());
                        if (g.needs_grad(ib)) {
                          float* db = g.grad_buffer(ib).mutable_ptr();
                          for (int r = 0; r < rows; ++r) {
                            const float* row = dy.ptr() + static_cast<size_t>(r) * cols;
                            for (int c = 0; c < cols; ++c) db[c] += row[c];
                          }
                        }
                      }),
               "add_bias");
}

Var sum(Var a) {
  Graph& g = graph_of(a);
  double total = 0.0;
  for (float v : a.value().data()) total += v;
  return named(g.push(Tensor::scalar(static_cast<float>(total)), {a.id()},
                      [](Graph& g, int id) {
                        Tensor& da = g.grad_buffer(g.inputs(id)[0]);
                        const float dy = g.grad_of(id)[0];
                        for (size_t i = 0; i < da.size(); ++i) da[i] += dy;
                      }),
               "sum");
}

Var relu(Var a) {
  Graph& g = graph_of(a);
  Tensor out = a.value();
  for (size_t i = 0; i < out.size(); ++i) out[i] = out[i] > 0.0f ? out[i] : 0.0f;
  return named(g.push(std::move(out), {a.id()},
                      [](Graph& g, int id) {
                        const int ia = g.inputs(id)[0];
                        Tensor& da = g.grad_buffer(ia);
                        const Tensor& x = g.value(ia);
                        const Tensor& dy = g.grad_of(id);
                        // relu'(0) = 0
                        for (size_t i = 0; i < dy.size(); ++i) {
                          if (x[i] > 0.0f) da[i] += dy[i];
                        }
                      }),
               "relu");
}

Var softmax(Var x, int axis) {
  Graph& g = graph_of(x);
  const Shape& shape = x.shape();
  const int rank = static_cast<int>(shape.size());
  if (axis < 0) axis += rank;
  if (axis < 0 || axis >= rank) fail(ErrorKind::kDimension, "softmax: axis out of range for " + shape_str(shape));
  const int n = shape[axis];
  if (n < 1) fail(ErrorKind::kDimension, "softmax: empty axis");
  int outer = 1, inner = 1;
  for (int i = 0; i < axis; ++i) outer *= shape[i];
  for (int i = axis + 1; i < rank; ++i) inner *= shape[i];

  Tensor out(shape);
  const float* px = x.value().ptr();
  float* py = out.mutable_ptr();
  for (int o = 0; o < outer; ++o) {
    for (int in = 0; in < inner; ++in) {
      const size_t base = static_cast<size_t>(o) * n * inner + in;
      float mx = -std::numeric_limits<float>::infinity();
      for (int j = 0; j < n; ++j) mx = std::max(mx, px[base + static_cast<size_t>(j) * inner]);
      double total = 0.0;
      for (int j = 0; j < n; ++j) {
        const float e = std::exp(px[base + static_cast<size_t>(j) * inner] - mx);
        py[base + static_cast<size_t>(j) * inner] = e;
        total += e;
      }
      const float invz = static_cast<float>(1.0 / total);
      for (int j = 0; j < n; ++j) py[base + static_cast<size_t>(j) * inner] *= invz;
    }
  }
  return named(g.push(std::move(out), {x.id()},
                      [outer, inner, n](Graph& g, int id) {
                        const Tensor& y = g.value(id);
                        const Tensor& dy = g.grad_of(id);
                        Tensor& dx = g.grad_buffer(g.inputs(id)[0]);
                        for (int o = 0; o < outer; ++o) {
                          for (int in = 0; in < inner; ++in) {
                            const size_t base = static_cast<size_t>(o) * n * inner + in;
                            double dot = 0.0;
                            for (int j = 0; j < n; ++j) {
                              const size_t at = base + static_cast<size_t>(j) * inner;
                              dot += static_cast<double>(dy[at]) * y[at];
                            }
                            for (int j = 0; j < n; ++j) {
                              const size_t at = base + static_cast<size_t>(j) * inner;
                              dx[at] += y[at] * (dy[at] - static_cast<float>(dot));
                            }
                          }
                        }
                      }),
               "softmax");
}

Var layer_norm(Var x, Var gain, Var bias, float eps) {
  Graph& g = graph_of(x);
  same_graph(x, gain);
  same_graph(x, bias);
  const int d = x.value().cols();
  if (d == 0 || x.value().empty()) fail(ErrorKind::kDimension, "layer_norm: empty last axis");
  if (gain.value().size() != static_cast<size_t>(d) || bias.value().size() != static_cast<size_t>(d)) {
    fail(ErrorKind::kDimension, "layer_norm: gain/bias " + shape_str(gain.shape()) + "/" + shape_str(bias.shape()) +
                                    " do not match " + shape_str(x.shape()));
  }
  const int rows = x.value().rows();
  Tensor out(x.shape());
  // aux holds xhat followed by one inverse std per row.
  Tensor aux({rows * d + rows});
  const float* px = x.value().ptr();
  const float* pg = gain.value().ptr();
  const float* pb = bias.value().ptr();
  for (int r = 0; r < rows; ++r) {
    const float* row = px + static_cast<size_t>(r) * d;
    double mean = 0.0;
    for (int c = 0; c < d; ++c) mean += row[c];
    mean /= d;
    double var = 0.0;
    for (int c = 0; c < d; ++c) var += (row[c] - mean) * (row[c] - mean);
    var /= d;
    const float inv = static_cast<float>(1.0 / std::sqrt(var + eps));
    float* xhat = aux.mutable_ptr() + static_cast<size_t>(r) * d;
    float* y = out.mutable_ptr() + static_cast<size_t>(r) * d;
    for (int c = 0; c < d; ++c) {
      xhat[c] = static_cast<float>(row[c] - mean) * inv;
      y[c] = xhat[c] * pg[c] + pb[c];
    }
    aux[static_cast<size_t>(rows) * d + r] = inv;
  }
  return named(
      g.push(std::move(out), {x.id(), gain.id(), bias.id()},
             [rows, d](Graph& g, int id) {
               const int ix = g.inputs(id)[0], ig = g.inputs(id)[1], ib = g.inputs(id)[2];
               const Tensor& aux = g.aux(Var(&g, id));
               const Tensor& dy = g.grad_of(id);
               const float* gain = g.value(ig).ptr();
               if (g.needs_grad(ig) || g.needs_grad(ib)) {
                 float* dg = g.needs_grad(ig) ? g.grad_buffer(ig).mutable_ptr() : nullptr;
                 float* db = g.needs_grad(ib) ? g.grad_buffer(ib).mutable_ptr() : nullptr;
                 for (int r = 0; r < rows; ++r) {
                   const float* xh = aux.ptr() + static_cast<size_t>(r) * d;
                   const float* gy = dy.ptr() + static_cast<size_t>(r) * d;
                   for (int c = 0; c < d; ++c) {
                     if (dg) dg[c] += gy[c] * xh[c];
                     if (db) db[c] += gy[c];
                   }
                 }
               }
               if (g.needs_grad(ix)) {
                 float* dx = g.grad_buffer(ix).mutable_ptr();
                 for (int r = 0; r < rows; ++r) {
                   const float* xh = aux.ptr() + static_cast<size_t>(r) * d;
                   const float* gy = dy.ptr() + static_cast<size_t>(r) * d;
                   const float inv = aux[static_cast<size_t>(rows) * d + r];
                   double mean_dxh = 0.0, mean_dxh_xh = 0.0;
                   for (int c = 0; c < d; ++c) {
                     const double dxh = static_cast<double>(gy[c]) * gain[c];
                     mean_dxh += dxh;
                     mean_dxh_xh += dxh * xh[c];
                   }
                   mean_dxh /= d;
                   mean_dxh_xh /= d;
                   float* out = dx + static_cast<size_t>(r) * d;
                   for (int c = 0; c < d; ++c) {
                     const double dxh = static_cast<double>(gy[c]) * gain[c];
                     out[c] += static_cast<float>(inv * (dxh - mean_dxh - xh[c] * mean_dxh_xh));
                   }
                 }
               }
             },
             std::move(aux)),
      "layer_norm");
}

Var dropout(Var x, float p, Rng* rng) {
  if (rng == nullptr || p <= 0.0f) return x;
  if (p >= 1.0f) fail(ErrorKind::kInvalidArgument, "dropout probability must be < 1");
  Graph& g = graph_of(x);
  const float keep_scale = 1.0f / (1.0f - p);
  std::vector<float> mask(x.value().size());
  for (float& m : mask) m = rng->uniform() < p ? 0.0f : keep_scale;
  Tensor out = x.value();
  for (size_t i = 0; i < out.size(); ++i) out[i] *= mask[i];
  return named(g.push(std::move(out), {x.id()},
                      [mask = std::move(mask)](Graph& g, int id) {
                        Tensor& dx = g.grad_buffer(g.inputs(id)[0]);
                        const Tensor& dy = g.grad_of(id);
                        for (size_t i = 0; i < dy.size(); ++i) dx[i] += dy[i] * mask[i];
                      }),
               "dropout");
}

Var gather_rows(Var table, const std::vector<int>& ids) {
  Graph& g = graph_of(table);
  const Tensor& t = table.value();
  if (t.rank() != 2) fail(ErrorKind::kDimension, "gather_rows: table must be a matrix, got " + shape_str(t.shape()));
  const int rows = t.dim(0), d = t.dim(1);
  if (ids.empty()) fail(ErrorKind::kDimension, "gather_rows: no ids");
  Tensor out({static_cast<int>(ids.size()), d});
  for (size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || ids[i] >= rows) {
      fail(ErrorKind::kInvalidArgument,
           "gather_rows: id " + std::to_string(ids[i]) + " out of range [0, " + std::to_string(rows) + ")");
    }
    std::copy_n(t.ptr() + static_cast<size_t>(ids[i]) * d, d, out.mutable_ptr() + i * d);
  }
  return named(g.push(std::move(out), {table.id()},
                      [ids, d](Graph& g, int id) {
                        float* dt = g.grad_buffer(g.inputs(id)[0]).mutable_ptr();
                        const float* dy = g.grad_of(id).ptr();
                        for (size_t i = 0; i < ids.size(); ++i) {
                          float* row = dt + static_cast<size_t>(ids[i]) * d;
                          for (int c = 0; c < d; ++c) row[c] += dy[i * d + c];
                        }
                      }),
               "gather_rows");
}

Var concat_cols(const std::vector<Var>& parts) {
  if (parts.empty()) fail(ErrorKind::kDimension, "concat_cols: nothing to concatenate");
  Graph& g = graph_of(parts[0]);
  const int rows = parts[0].value().rows();
  std::vector<int> widths;
  std::vector<int> inputs;
  int total = 0;
  for (Var p : parts) {
    same_graph(parts[0], p);
    if (p.value().rows() != rows) {
      fail(ErrorKind::kDimension, "concat_cols: row mismatch " + shape_str(parts[0].shape()) + " vs " + shape_str(p.shape()));
    }
    widths.push_back(p.value().cols());
    inputs.push_back(p.id());
    total += widths.back();
  }
  Tensor out({rows, total});
  int offset = 0;
  for (size_t k = 0; k < parts.size(); ++k) {
    const float* src = parts[k].value().ptr();
    for (int r = 0; r < rows; ++r) {
      std::copy_n(src + static_cast<size_t>(r) * widths[k], widths[k], out.mutable_ptr() + static_cast<size_t>(r) * total + offset);
    }
    offset += widths[k];
  }
  return named(g.push(std::move(out), std::move(inputs),
                      [rows, total, widths](Graph& g, int id) {
                        const float* dy = g.grad_of(id).ptr();
                        int offset = 0;
                        for (size_t k = 0; k < widths.size(); ++k) {
                          const int in = g.inputs(id)[k];
                          if (g.needs_grad(in)) {
                            float* dx = g.grad_buffer(in).mutable_ptr();
                            for (int r = 0; r < rows; ++r) {
                              for (int c = 0; c < widths[k]; ++c) {
                                dx[static_cast<size_t>(r) * widths[k] + c] += dy[static_cast<size_t>(r) * total + offset + c];
                              }
                            }
                          }
                          offset += widths[k];
                        }
                      }),
               "concat_cols");
}

Var reshape(Var x, Shape shape) {
  Graph& g = graph_of(x);
  return named(g.push(x.value().reshaped(std::move(shape)), {x.id()},
                      [](Graph& g, int id) { accumulate(g.grad_buffer(g.inputs(id)[0]), g.grad_of(id).ptr()); }),
               "reshape");
}

Var segment_max(Var x, const std::vector<int>& offsets) {
  Graph& g = graph_of(x);
  const int rows = x.value().rows(), f = x.value().cols();
  if (offsets.size() < 2) fail(ErrorKind::kDimension, "segment_max: need at least one segment");
  const int segments = static_cast<int>(offsets.size()) - 1;
  Tensor out({segments, f});
  std::vector<int> argmax(static_cast<size_t>(segments) * f);
  const float* px = x.value().ptr();
  for (int s = 0; s < segments; ++s) {
    const int lo = offsets[s], hi = offsets[s + 1];
    if (lo < 0 || hi > rows || lo >= hi) fail(ErrorKind::kDimension, "segment_max: bad segment bounds");
    for (int c = 0; c < f; ++c) {
      int best = lo;
      for (int r = lo + 1; r < hi; ++r) {
        if (px[static_cast<size_t>(r) * f + c] > px[static_cast<size_t>(best) * f + c]) best = r;
      }
      argmax[static_cast<size_t>(s) * f + c] = best;
      out[static_cast<size_t>(s) * f + c] = px[static_cast<size_t>(best) * f + c];
    }
  }
  return named(g.push(std::move(out), {x.id()},
                      [argmax = std::move(argmax), f](Graph& g, int id) {
                        float* dx = g.grad_buffer(g.inputs(id)[0]).mutable_ptr();
                        const float* dy = g.grad_of(id).ptr();
                        for (size_t i = 0; i < argmax.size(); ++i) {
                          dx[static_cast<size_t>(argmax[i]) * f + i % f] += dy[i];
                        }
                      }),
               "segment_max");
}

Var attention(Var q, Var k, Var v, const AttentionSpec& spec) {
  Graph& g = graph_of(q);
  same_graph(q, k);
  same_graph(q, v);
  const int batch = spec.batch, tq = spec.q_len, tk = spec.k_len, heads = spec.heads;
  const int d = q.value().cols();
  if (heads <= 0 || d % heads != 0) {
    fail(ErrorKind::kDimension, "attention: width " + std::to_string(d) + " not divisible by " + std::to_string(heads) + " heads");
  }
  if (q.value().rows() != batch * tq || k.value().rows() != batch * tk || v.value().rows() != batch * tk ||
      k.value().cols() != d || v.value().cols() != d) {
    fail(ErrorKind::kDimension, "attention: packed shapes " + shape_str(q.shape()) + ", " + shape_str(k.shape()) + ", " +
                                    shape_str(v.shape()) + " disagree with batch/length spec");
  }
  if (!spec.key_valid.empty() && spec.key_valid.size() != static_cast<size_t>(batch) * tk) {
    fail(ErrorKind::kDimension, "attention: key mask size mismatch");
  }
  const int dh = d / heads;
  const float scale = 1.0f / std::sqrt(static_cast<float>(dh));
  const float* pq = q.value().ptr();
  const float* pk = k.value().ptr();
  const float* pv = v.value().ptr();
  Tensor out({batch * tq, d});
  Tensor weights({batch, heads, tq, tk});
  std::vector<float> scores(tk);
  for (int b = 0; b < batch; ++b) {
    for (int h = 0; h < heads; ++h) {
      for (int i = 0; i < tq; ++i) {
        const float* qi = pq + static_cast<size_t>(b * tq + i) * d + h * dh;
        float* w = weights.mutable_ptr() + ((static_cast<size_t>(b) * heads + h) * tq + i) * tk;
        float mx = -std::numeric_limits<float>::infinity();
        for (int j = 0; j < tk; ++j) {
          const bool ok = (spec.key_valid.empty() || spec.key_valid[static_cast<size_t>(b) * tk + j]) &&
                          (!spec.causal || j <= i);
          if (!ok) {
            scores[j] = -std::numeric_limits<float>::infinity();
            continue;
          }
          const float* kj = pk + static_cast<size_t>(b * tk + j) * d + h * dh;
          float s = 0.0f;
          for (int c = 0; c < dh; ++c) s += qi[c] * kj[c];
          scores[j] = s * scale;
          mx = std::max(mx, scores[j]);
        }
        if (mx == -std::numeric_limits<float>::infinity()) continue;  // nothing attendable: zero output
        double total = 0.0;
        for (int j = 0; j < tk; ++j) {
          const float e = scores[j] == -std::numeric_limits<float>::infinity() ? 0.0f : std::exp(scores[j] - mx);
          w[j] = e;
          total += e;
        }
        const float invz = static_cast<float>(1.0 / total);
        float* oi = out.mutable_ptr() + static_cast<size_t>(b * tq + i) * d + h * dh;
        for (int j = 0; j < tk; ++j) {
          w[j] *= invz;
          if (w[j] == 0.0f) continue;
          const float* vj = pv + static_cast<size_t>(b * tk + j) * d + h * dh;
          for (int c = 0; c < dh; ++c) oi[c] += w[j] * vj[c];
        }
      }
    }
  }
  return named(
      g.push(std::move(out), {q.id(), k.id(), v.id()},
             [batch, tq, tk, heads, d, dh, scale](Graph& g, int id) {
               const int iq = g.inputs(id)[0], ik = g.inputs(id)[1], iv = g.inputs(id)[2];
               const Tensor& w = g.aux(Var(&g, id));
               const float* dout = g.grad_of(id).ptr();
               const float* pq = g.value(iq).ptr();
               const float* pk = g.value(ik).ptr();
               const float* pv = g.value(iv).ptr();
               float* dq = g.needs_grad(iq) ? g.grad_buffer(iq).mutable_ptr() : nullptr;
               float* dk = g.needs_grad(ik) ? g.grad_buffer(ik).mutable_ptr() : nullptr;
               float* dv = g.needs_grad(iv) ? g.grad_buffer(iv).mutable_ptr() : nullptr;
               std::vector<float> dp(tk);
               for (int b = 0; b < batch; ++b) {
                 for (int h = 0; h < heads; ++h) {
                   for (int i = 0; i < tq; ++i) {
                     const float* wi = w.ptr() + ((static_cast<size_t>(b) * heads + h) * tq + i) * tk;
                     const float* doi = dout + static_cast<size_t>(b * tq + i) * d + h * dh;
                     double dot = 0.0;
                     for (int j = 0; j < tk; ++j) {
                       if (wi[j] == 0.0f) {
                         dp[j] = 0.0f;
                         continue;
                       }
                       const float* vj = pv + static_cast<size_t>(b * tk + j) * d + h * dh;
                       float s = 0.0f;
                       for (int c = 0; c < dh; ++c) s += doi[c] * vj[c];
                       dp[j] = s;
                       dot += static_cast<double>(s) * wi[j];
                       if (dv) {
                         float* dvj = dv + static_cast<size_t>(b * tk + j) * d + h * dh;
                         for (int c = 0; c < dh; ++c) dvj[c] += wi[j] * doi[c];
                       }
                     }
                     const float* qi = pq + static_cast<size_t>(b * tq + i) * d + h * dh;
                     float* dqi = dq ? dq + static_cast<size_t>(b * tq + i) * d + h * dh : nullptr;
                     for (int j = 0; j < tk; ++j) {
                       if (wi[j] == 0.0f) continue;
                       const float ds = wi[j] * (dp[j] - static_cast<float>(dot)) * scale;
                       const float* kj = pk + static_cast<size_t>(b * tk + j) * d + h * dh;
                       if (dqi) {
                         for (int c = 0; c < dh; ++c) dqi[c] += ds * kj[c];
                       }
                       if (dk) {
                         float* dkj = dk + static_cast<size_t>(b * tk + j) * d + h * dh;
                         for (int c = 0; c < dh; ++c) dkj[c] += ds * qi[c];
                       }
                     }
                   }
                 }
               }
             },
             std::move(weights)),
      "attention");
}

Var cross_entropy(Var logits, const std::vector<int>& targets, const std::vector<float>& weights, float smoothing,
                  CrossEntropyStats* stats) {
  Graph& g = graph_of(logits);
  const int rows = logits.value().rows(), vocab = logits.value().cols();
  if (targets.size() != static_cast<size_t>(rows) || weights.size() != static_cast<size_t>(rows)) {
    fail(ErrorKind::kDimension, "cross_entropy: " + std::to_string(targets.size()) + " targets for " + std::to_string(rows) + " rows");
  }
  if (smoothing < 0.0f || smoothing >= 1.0f) fail(ErrorKind::kInvalidArgument, "cross_entropy: smoothing must be in [0, 1)");
  Tensor probs(logits.shape());
  const float* px = logits.value().ptr();
  double loss = 0.0, nll = 0.0, wsum = 0.0;
  for (int r = 0; r < rows; ++r) {
    const float* row = px + static_cast<size_t>(r) * vocab;
    float* p = probs.mutable_ptr() + static_cast<size_t>(r) * vocab;
    if (weights[r] == 0.0f) continue;
    if (targets[r] < 0 || targets[r] >= vocab) fail(ErrorKind::kInvalidArgument, "cross_entropy: target out of range");
    float mx = row[0];
    for (int c = 1; c < vocab; ++c) mx = std::max(mx, row[c]);
    double z = 0.0;
    for (int c = 0; c < vocab; ++c) z += std::exp(static_cast<double>(row[c] - mx));
    const double logz = std::log(z) + mx;
    double mean_logp = 0.0;
    for (int c = 0; c < vocab; ++c) {
      const double lp = row[c] - logz;
      p[c] = static_cast<float>(std::exp(lp));
      mean_logp += lp;
    }
    mean_logp /= vocab;
    const double target_lp = row[targets[r]] - logz;
    loss += weights[r] * (-(1.0 - smoothing) * target_lp - smoothing * mean_logp);
    nll += weights[r] * -target_lp;
    wsum += weights[r];
  }
  if (stats) {
    stats->nll_sum = nll;
    stats->weight_sum = wsum;
  }
  return named(g.push(Tensor::scalar(static_cast<float>(loss)), {logits.id()},
                      [targets, weights, smoothing, rows, vocab, probs = std::move(probs)](Graph& g, int id) {
                        float* dx = g.grad_buffer(g.inputs(id)[0]).mutable_ptr();
                        const float dy = g.grad_of(id)[0];
                        const float uniform = smoothing / static_cast<float>(vocab);
                        for (int r = 0; r < rows; ++r) {
                          if (weights[r] == 0.0f) continue;
                          const float s = dy * weights[r];
                          const float* p = probs.ptr() + static_cast<size_t>(r) * vocab;
                          float* out = dx + static_cast<size_t>(r) * vocab;
                          for (int c = 0; c < vocab; ++c) out[c] += s * (p[c] - uniform);
                          out[targets[r]] -= s * (1.0f - smoothing);
                        }
                      }),
               "cross_entropy");
}

}  // namespace mg::ops
