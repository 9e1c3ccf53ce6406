#include "model/checkpoint.hpp"

#include <bit>
#include <cstdio>
#include <cstring>

#include "common/error.hpp"
#include "common/io.hpp"

namespace mg::model {

namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

class Writer {
 public:
  void u8(uint8_t v) { out_.push_back(static_cast<char>(v)); }
  void u32(uint32_t v) { raw(&v, 4); }
  void u64(uint64_t v) { raw(&v, 8); }
  void i64(int64_t v) { raw(&v, 8); }
  void f64(double v) { raw(&v, 8); }
  void str(const std::string& s) {
    u32(static_cast<uint32_t>(s.size()));
    out_ += s;
  }
  void tensor(const Tensor& t) {
    u32(static_cast<uint32_t>(t.rank()));
    for (int d : t.shape()) u32(static_cast<uint32_t>(d));
    raw(t.ptr(), t.size() * sizeof(float));
  }
  std::string take() { return std::move(out_); }

 private:
  void raw(const void* p, size_t n) { out_.append(static_cast<const char*>(p), n); }
  std::string out_;
};

class Reader {
 public:
  explicit Reader(const std::string& in) : in_(in) {}
  uint8_t u8() {
    uint8_t v;
    raw(&v, 1);
    return v;
  }
  uint32_t u32() {
    uint32_t v;
    raw(&v, 4);
    return v;
  }
  uint64_t u64() {
    uint64_t v;
    raw(&v, 8);
    return v;
  }
  int64_t i64() {
    int64_t v;
    raw(&v, 8);
    return v;
  }
  double f64() {
    double v;
    raw(&v, 8);
    return v;
  }
  std::string str() {
    const uint32_t n = u32();
    need(n);
    std::string s = in_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  Tensor tensor() {
    const uint32_t rank = u32();
    if (rank == 0 || rank > 8) fail(ErrorKind::kParse, "checkpoint: bad tensor rank " + std::to_string(rank));
    Shape shape;
    size_t count = 1;
    for (uint32_t i = 0; i < rank; ++i) {
      const uint32_t d = u32();
      if (d == 0 || d > (1u << 28)) fail(ErrorKind::kParse, "checkpoint: bad tensor dimension");
      shape.push_back(static_cast<int>(d));
      count *= d;
    }
    need(count * sizeof(float));
    std::vector<float> data(count);
    raw(data.data(), count * sizeof(float));
    return Tensor(shape, std::move(data));
  }
  bool done() const { return pos_ == in_.size(); }

 private:
  void need(size_t n) {
    if (pos_ + n > in_.size()) fail(ErrorKind::kParse, "checkpoint: truncated file");
  }
  void raw(void* p, size_t n) {
    need(n);
    std::memcpy(p, in_.data() + pos_, n);
    pos_ += n;
  }
  const std::string& in_;
  size_t pos_ = 0;
};

}  // namespace

std::string Checkpoint::encode() const {
  if (magic.size() != 4) fail(ErrorKind::kContract, "checkpoint magic must be 4 bytes");
  Writer w;
  for (char c : magic) w.u8(static_cast<uint8_t>(c));
  w.u32(kCheckpointVersion);
  w.str(config);
  w.u32(static_cast<uint32_t>(params.size()));
  for (const auto& p : params) {
    w.str(p.name);
    w.tensor(p.value);
  }
  w.u8(optimizer ? 1 : 0);
  if (optimizer) {
    const AdamState& a = optimizer->adam;
    w.i64(a.step);
    w.f64(a.lr);
    w.f64(a.beta1);
    w.f64(a.beta2);
    w.f64(a.eps);
    w.u32(static_cast<uint32_t>(a.m.size()));
    for (size_t i = 0; i < a.m.size(); ++i) {
      w.tensor(a.m[i]);
      w.tensor(a.v[i]);
    }
    w.u32(static_cast<uint32_t>(optimizer->counters.size()));
    for (const auto& [k, v] : optimizer->counters) {
      w.str(k);
      w.str(v);
    }
  }
  w.u64(seed);
  return w.take();
}

Checkpoint Checkpoint::decode(const std::string& bytes, const std::string& expected_magic) {
  Reader r(bytes);
  Checkpoint c;
  c.magic.clear();
  for (int i = 0; i < 4; ++i) c.magic += static_cast<char>(r.u8());
  if (c.magic != expected_magic) {
    fail(ErrorKind::kParse, "checkpoint: expected magic " + expected_magic + ", found '" + c.magic + "'");
  }
  const uint32_t version = r.u32();
  if (version != kCheckpointVersion) fail(ErrorKind::kParse, "checkpoint: unsupported version " + std::to_string(version));
  c.config = r.str();
  const uint32_t n = r.u32();
  for (uint32_t i = 0; i < n; ++i) {
    NamedTensor p;
    p.name = r.str();
    p.value = r.tensor();
    c.params.push_back(std::move(p));
  }
  if (r.u8()) {
    OptimizerSection opt;
    opt.adam.step = r.i64();
    opt.adam.lr = r.f64();
    opt.adam.beta1 = r.f64();
    opt.adam.beta2 = r.f64();
    opt.adam.eps = r.f64();
    const uint32_t moments = r.u32();
    for (uint32_t i = 0; i < moments; ++i) {
      opt.adam.m.push_back(r.tensor());
      opt.adam.v.push_back(r.tensor());
    }
    const uint32_t counters = r.u32();
    for (uint32_t i = 0; i < counters; ++i) {
      std::string k = r.str();
      opt.counters[k] = r.str();
    }
    c.optimizer = std::move(opt);
  }
  c.seed = r.u64();
  if (!r.done()) fail(ErrorKind::kParse, "checkpoint: trailing bytes");
  return c;
}

void Checkpoint::save(const std::string& path) const {
  write_file(path, encode());
}

Checkpoint Checkpoint::load(const std::string& path, const std::string& expected_magic) {
  return decode(read_file(path), expected_magic);
}

std::string exact(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

double parse_exact(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') fail(ErrorKind::kParse, "bad number '" + s + "'");
  return v;
}

}  // namespace mg::model
