#include "model/transformer.hpp"

#include <cmath>

#include "common/error.hpp"
#include "text/vocab.hpp"

namespace mg::model {

namespace {

Tensor xavier(Rng& rng, int fan_in, int fan_out) {
  Tensor t({fan_in, fan_out});
  const double a = std::sqrt(6.0 / (fan_in + fan_out));
  for (size_t i = 0; i < t.size(); ++i) t[i] = static_cast<float>(rng.uniform(-a, a));
  return t;
}

Tensor normal(Rng& rng, int rows, int cols, double stddev) {
  Tensor t({rows, cols});
  for (size_t i = 0; i < t.size(); ++i) t[i] = static_cast<float>(rng.normal() * stddev);
  return t;
}

Tensor sinusoids(int positions, int d) {
  Tensor t({positions, d});
  for (int p = 0; p < positions; ++p) {
    for (int i = 0; i < d; i += 2) {
      const double freq = std::pow(10000.0, -static_cast<double>(i) / d);
      t[static_cast<size_t>(p) * d + i] = static_cast<float>(std::sin(p * freq));
      if (i + 1 < d) t[static_cast<size_t>(p) * d + i + 1] = static_cast<float>(std::cos(p * freq));
    }
  }
  return t;
}

}  // namespace

// Resolves parameter names to graph nodes, once per graph.
class Transformer::Binder {
 public:
  Binder(Graph& g, ParamStore& store, bool trainable) : g_(g), store_(store), trainable_(trainable) {}

  Var operator()(const std::string& name) {
    auto it = cache_.find(name);
    if (it != cache_.end()) return it->second;
    Parameter& p = store_.get(name);
    Var v = trainable_ ? g_.parameter(p) : g_.constant(p.value);
    cache_.emplace(name, v);
    return v;
  }

 private:
  Graph& g_;
  ParamStore& store_;
  bool trainable_;
  std::map<std::string, Var> cache_;
};

SourceInput source_of(const corpus::Batch& batch) {
  SourceInput s;
  s.batch = batch.size;
  s.len = batch.src_len;
  s.ids = batch.src_ids;
  s.valid = batch.src_valid;
  s.lang = batch.lang_factor;
  s.style = batch.style_factor;
  return s;
}

Transformer::Transformer(ModelConfig config, uint64_t init_seed) : config_(std::move(config)) {
  config_.validate();
  const int d = config_.model_dim, v = config_.token_vocab, fd = config_.factor_dim, ff = config_.ff_dim;
  Rng rng(init_seed);
  params_.add("src.embed", normal(rng, v, d, 1.0));
  params_.add("src.lang_embed", normal(rng, config_.lang_factors(), fd, 1.0));
  params_.add("src.style_embed", normal(rng, config_.style_factors(), fd, 1.0));
  params_.add("src.in_proj", xavier(rng, d + 2 * fd, d));
  params_.add("tgt.embed", normal(rng, v, d, 1.0));

  auto norm = [&](const std::string& name) {
    params_.add(name + ".g", Tensor({d}, 1.0f));
    params_.add(name + ".b", Tensor({d}, 0.0f));
  };
  auto attn = [&](const std::string& name) {
    for (const char* w : {"q", "k", "v", "o"}) {
      params_.add(name + ".w" + w, xavier(rng, d, d));
      params_.add(name + ".b" + w, Tensor({d}, 0.0f));
    }
  };
  auto ffn = [&](const std::string& name) {
    params_.add(name + ".w1", xavier(rng, d, ff));
    params_.add(name + ".b1", Tensor({ff}, 0.0f));
    params_.add(name + ".w2", xavier(rng, ff, d));
    params_.add(name + ".b2", Tensor({d}, 0.0f));
  };
  for (int l = 0; l < config_.layers; ++l) {
    const std::string p = "enc." + std::to_string(l);
    norm(p + ".ln1");
    attn(p + ".self");
    norm(p + ".ln2");
    ffn(p + ".ffn");
  }
  norm("enc.ln");
  for (int l = 0; l < config_.layers; ++l) {
    const std::string p = "dec." + std::to_string(l);
    norm(p + ".ln1");
    attn(p + ".self");
    norm(p + ".ln2");
    attn(p + ".cross");
    norm(p + ".ln3");
    ffn(p + ".ffn");
  }
  norm("dec.ln");
  params_.add("out.w", xavier(rng, d, v));
  params_.add("out.b", Tensor({v}, 0.0f));
  positions_ = sinusoids(config_.max_positions, d);
}

void Transformer::check_length(int len, const char* what) const {
  if (len > config_.max_positions) {
    fail(ErrorKind::kInvalidArgument, std::string(what) + " length " + std::to_string(len) + " exceeds max_positions " +
                                          std::to_string(config_.max_positions));
  }
}

Var Transformer::add_positions(Graph& g, Var x, int batch, int len) {
  const int d = config_.model_dim;
  Tensor pe({batch * len, d});
  for (int b = 0; b < batch; ++b) {
    std::copy(positions_.ptr(), positions_.ptr() + static_cast<size_t>(len) * d,
              pe.mutable_ptr() + static_cast<size_t>(b) * len * d);
  }
  return ops::add(x, g.constant(std::move(pe)));
}

Var Transformer::embed_source(Graph& g, const SourceInput& src, Rng* rng, bool trainable) {
  check_length(src.len, "source");
  if (src.ids.size() != static_cast<size_t>(src.batch) * src.len || src.lang.size() != static_cast<size_t>(src.batch) ||
      src.style.size() != static_cast<size_t>(src.batch)) {
    fail(ErrorKind::kDimension, "source input sizes disagree with batch " + std::to_string(src.batch) + " x " +
                                    std::to_string(src.len));
  }
  for (int b = 0; b < src.batch; ++b) {
    if (src.lang[b] < 0 || src.lang[b] >= config_.lang_factors()) {
      fail(ErrorKind::kInvalidArgument, "language factor id " + std::to_string(src.lang[b]) + " out of range");
    }
    if (src.style[b] < 0 || src.style[b] >= config_.style_factors()) {
      fail(ErrorKind::kInvalidArgument, "style factor id " + std::to_string(src.style[b]) + " out of range");
    }
  }
  Binder p(g, params_, trainable);
  std::vector<int> lang_ids, style_ids;
  for (int b = 0; b < src.batch; ++b) {
    lang_ids.insert(lang_ids.end(), src.len, src.lang[b]);
    style_ids.insert(style_ids.end(), src.len, src.style[b]);
  }
  Var tok = ops::gather_rows(p("src.embed"), src.ids);
  Var lang = ops::gather_rows(p("src.lang_embed"), lang_ids);
  Var style = ops::gather_rows(p("src.style_embed"), style_ids);
  Var x = ops::matmul(ops::concat_cols({tok, lang, style}), p("src.in_proj"));
  x = add_positions(g, x, src.batch, src.len);
  return ops::dropout(x, config_.dropout, rng);
}

Var Transformer::attention_block(Graph& g, Binder& p, const std::string& prefix, Var x, Var memory,
                                 const ops::AttentionSpec& spec, bool self, Rng* rng, std::vector<Var>* attention) {
  (void)g;
  auto proj = [&](Var in, const char* w) {
    return ops::add_bias(ops::matmul(in, p(prefix + ".w" + w)), p(prefix + ".b" + w));
  };
  Var q = proj(x, "q");
  Var k = proj(self ? x : memory, "k");
  Var v = proj(self ? x : memory, "v");
  Var a = ops::attention(q, k, v, spec);
  if (attention) attention->push_back(a);
  return ops::dropout(proj(a, "o"), config_.dropout, rng);
}

Var Transformer::ffn_block(Graph& g, Binder& p, const std::string& prefix, Var x, Rng* rng) {
  (void)g;
  Var h = ops::relu(ops::add_bias(ops::matmul(x, p(prefix + ".w1")), p(prefix + ".b1")));
  Var y = ops::add_bias(ops::matmul(h, p(prefix + ".w2")), p(prefix + ".b2"));
  return ops::dropout(y, config_.dropout, rng);
}

Var Transformer::encode(Graph& g, Var x, const SourceInput& src, Rng* rng, bool trainable,
                        std::vector<Var>* attention) {
  Binder p(g, params_, trainable);
  ops::AttentionSpec spec;
  spec.batch = src.batch;
  spec.q_len = src.len;
  spec.k_len = src.len;
  spec.heads = config_.heads;
  spec.key_valid = src.valid;
  auto ln = [&](Var in, const std::string& name) { return ops::layer_norm(in, p(name + ".g"), p(name + ".b")); };
  for (int l = 0; l < config_.layers; ++l) {
    const std::string pre = "enc." + std::to_string(l);
    x = ops::add(x, attention_block(g, p, pre + ".self", ln(x, pre + ".ln1"), Var(), spec, true, rng, attention));
    x = ops::add(x, ffn_block(g, p, pre + ".ffn", ln(x, pre + ".ln2"), rng));
  }
  return ln(x, "enc.ln");
}

Var Transformer::decode(Graph& g, Var memory, const SourceInput& src, int tgt_len, const std::vector<int>& tgt_in,
                        Rng* rng, bool trainable, std::vector<Var>* attention) {
  check_length(tgt_len, "target prefix");
  if (tgt_in.size() != static_cast<size_t>(src.batch) * tgt_len) {
    fail(ErrorKind::kDimension, "decoder input size disagrees with batch");
  }
  Binder p(g, params_, trainable);
  Var x = ops::gather_rows(p("tgt.embed"), tgt_in);
  x = ops::dropout(add_positions(g, x, src.batch, tgt_len), config_.dropout, rng);

  ops::AttentionSpec self_spec;
  self_spec.batch = src.batch;
  self_spec.q_len = tgt_len;
  self_spec.k_len = tgt_len;
  self_spec.heads = config_.heads;
  self_spec.causal = true;
  ops::AttentionSpec cross_spec;
  cross_spec.batch = src.batch;
  cross_spec.q_len = tgt_len;
  cross_spec.k_len = src.len;
  cross_spec.heads = config_.heads;
  cross_spec.key_valid = src.valid;

  auto ln = [&](Var in, const std::string& name) { return ops::layer_norm(in, p(name + ".g"), p(name + ".b")); };
  for (int l = 0; l < config_.layers; ++l) {
    const std::string pre = "dec." + std::to_string(l);
    x = ops::add(x, attention_block(g, p, pre + ".self", ln(x, pre + ".ln1"), Var(), self_spec, true, rng, attention));
    x = ops::add(x, attention_block(g, p, pre + ".cross", ln(x, pre + ".ln2"), memory, cross_spec, false, rng, attention));
    x = ops::add(x, ffn_block(g, p, pre + ".ffn", ln(x, pre + ".ln3"), rng));
  }
  x = ln(x, "dec.ln");
  return ops::add_bias(ops::matmul(x, p("out.w")), p("out.b"));
}

LossResult Transformer::forward_loss(Graph& g, const corpus::Batch& batch, Rng* rng, bool trainable) {
  const SourceInput src = source_of(batch);
  Var memory = encode(g, embed_source(g, src, rng, trainable), src, rng, trainable);
  Var logits = decode(g, memory, src, batch.tgt_len, batch.tgt_in, rng, trainable);
  ops::CrossEntropyStats stats;
  LossResult r;
  r.loss = ops::cross_entropy(logits, batch.tgt_out, batch.tgt_weight, rng ? config_.label_smoothing : 0.0f, &stats);
  r.nll_sum = stats.nll_sum;
  r.tokens = stats.weight_sum;
  return r;
}

EncodedSource Transformer::encode_source(const std::vector<int>& ids, int lang, int style) const {
  auto* self = const_cast<Transformer*>(this);  // eval graphs only read parameters
  SourceInput src;
  src.batch = 1;
  src.len = std::max<int>(1, static_cast<int>(ids.size()));
  src.ids = ids;
  src.valid.assign(ids.size(), 1);
  if (ids.empty()) {
    src.ids = {text::Vocab::kPad};
    src.valid = {0};
  }
  src.lang = {lang};
  src.style = {style};
  Graph g(false);
  Var memory = self->encode(g, self->embed_source(g, src, nullptr, false), src, nullptr, false);
  return {memory.value(), src.valid, src.len};
}

Tensor Transformer::next_logits(const EncodedSource& enc, const std::vector<std::vector<int>>& prefixes) const {
  auto* self = const_cast<Transformer*>(this);
  if (prefixes.empty()) fail(ErrorKind::kInvalidArgument, "next_logits needs at least one prefix");
  const int n = static_cast<int>(prefixes.size());
  const int t = static_cast<int>(prefixes[0].size());
  if (t == 0) fail(ErrorKind::kInvalidArgument, "decoder prefix must start with BOS");
  check_length(t, "target prefix");
  const int d = config_.model_dim;
  SourceInput src;
  src.batch = n;
  src.len = enc.len;
  Tensor memory({n * enc.len, d});
  std::vector<int> tgt_in;
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(prefixes[i].size()) != t) fail(ErrorKind::kInvalidArgument, "prefixes differ in length");
    std::copy(enc.memory.ptr(), enc.memory.ptr() + static_cast<size_t>(enc.len) * d,
              memory.mutable_ptr() + static_cast<size_t>(i) * enc.len * d);
    src.valid.insert(src.valid.end(), enc.valid.begin(), enc.valid.end());
    tgt_in.insert(tgt_in.end(), prefixes[i].begin(), prefixes[i].end());
  }
  Graph g(false);
  Var logits = self->decode(g, g.constant(std::move(memory)), src, t, tgt_in, nullptr, false);
  const int v = config_.token_vocab;
  Tensor out({n, v});
  for (int i = 0; i < n; ++i) {
    const float* row = logits.value().ptr() + (static_cast<size_t>(i) * t + t - 1) * v;
    std::copy(row, row + v, out.mutable_ptr() + static_cast<size_t>(i) * v);
  }
  return out;
}

}  // namespace mg::model

namespace mg::model {

Checkpoint snapshot(const Transformer& model, uint64_t seed) {
  Checkpoint c;
  c.config = model.config().serialize();
  for (size_t i = 0; i < model.params().size(); ++i) {
    c.params.push_back({model.params().at(i).name, model.params().at(i).value});
  }
  c.seed = seed;
  return c;
}

Transformer restore(const Checkpoint& ckpt) {
  Transformer m(ModelConfig::parse(ckpt.config), 0);
  if (ckpt.params.size() != m.params().size()) {
    fail(ErrorKind::kParse, "checkpoint has " + std::to_string(ckpt.params.size()) + " parameters, config needs " +
                                std::to_string(m.params().size()));
  }
  for (const auto& p : ckpt.params) {
    if (!m.params().contains(p.name)) fail(ErrorKind::kParse, "checkpoint parameter " + p.name + " is not in the model");
    Parameter& dst = m.params().get(p.name);
    if (dst.value.shape() != p.value.shape()) {
      fail(ErrorKind::kParse, "checkpoint parameter " + p.name + " has shape " + shape_str(p.value.shape()) +
                                  ", expected " + shape_str(dst.value.shape()));
    }
    dst.value = p.value;
  }
  return m;
}

}  // namespace mg::model
