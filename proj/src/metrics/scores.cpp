#include "metrics/scores.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "common/error.hpp"

namespace mg::metrics {

namespace {

using Counts = std::map<std::vector<std::string>, int>;

Counts ngrams(const Tokens& t, int n) {
  Counts c;
  for (size_t i = 0; i + n <= t.size(); ++i) ++c[Tokens(t.begin() + i, t.begin() + i + n)];
  return c;
}

int overlap(const Counts& a, const Counts& b) {
  int total = 0;
  for (const auto& [g, n] : a) {
    auto it = b.find(g);
    if (it != b.end()) total += std::min(n, it->second);
  }
  return total;
}

}  // namespace

void NgramStats::add(const NgramStats& o) {
  for (int n = 0; n < 4; ++n) {
    numerator[n] += o.numerator[n];
    denominator[n] += o.denominator[n];
  }
  hyp_len += o.hyp_len;
  ref_len += o.ref_len;
}

double NgramStats::score() const {
  double log_sum = 0.0;
  int orders = 0;
  for (int n = 0; n < 4; ++n) {
    if (denominator[n] <= 0) continue;
    if (numerator[n] <= 0) return 0.0;
    log_sum += std::log(numerator[n] / denominator[n]);
    ++orders;
  }
  if (orders == 0) return 0.0;
  const double bp = hyp_len >= ref_len ? 1.0 : std::exp(1.0 - ref_len / hyp_len);
  return bp * std::exp(log_sum / orders);
}

NgramStats bleu_stats(const Tokens& hyp, const Tokens& ref) {
  NgramStats s;
  for (int n = 1; n <= 4; ++n) {
    const Counts h = ngrams(hyp, n);
    s.numerator[n - 1] = overlap(h, ngrams(ref, n));
    s.denominator[n - 1] = hyp.size() >= static_cast<size_t>(n) ? static_cast<double>(hyp.size() - n + 1) : 0.0;
  }
  s.hyp_len = static_cast<double>(hyp.size());
  s.ref_len = static_cast<double>(ref.size());
  return s;
}

NgramStats gleu_stats(const Tokens& src, const Tokens& hyp, const Tokens& ref) {
  NgramStats s;
  for (int n = 1; n <= 4; ++n) {
    const Counts h = ngrams(hyp, n), r = ngrams(ref, n);
    Counts src_only;
    for (const auto& [g, c] : ngrams(src, n)) {
      auto it = r.find(g);
      const int left = c - (it == r.end() ? 0 : it->second);
      if (left > 0) src_only[g] = left;
    }
    s.numerator[n - 1] = std::max(0, overlap(h, r) - overlap(h, src_only));
    s.denominator[n - 1] = hyp.size() >= static_cast<size_t>(n) ? static_cast<double>(hyp.size() - n + 1) : 0.0;
  }
  s.hyp_len = static_cast<double>(hyp.size());
  s.ref_len = static_cast<double>(ref.size());
  return s;
}

MetricReport corpus_bleu(const std::vector<Tokens>& hyps, const std::vector<Tokens>& refs) {
  if (hyps.size() != refs.size()) {
    fail(ErrorKind::kInvalidArgument, "BLEU: " + std::to_string(hyps.size()) + " hypotheses for " +
                                          std::to_string(refs.size()) + " references");
  }
  MetricReport r;
  r.metric = "BLEU";
  NgramStats total;
  for (size_t i = 0; i < hyps.size(); ++i) total.add(bleu_stats(hyps[i], refs[i]));
  r.value = 100.0 * total.score();
  return r;
}

double sentence_gleu(const Tokens& src, const Tokens& hyp, const std::vector<Tokens>& refs) {
  if (refs.empty()) fail(ErrorKind::kInvalidArgument, "GLEU: sentence has no reference");
  double sum = 0.0;
  for (const Tokens& ref : refs) {
    if (ref.empty()) fail(ErrorKind::kInvalidArgument, "GLEU: empty reference");
    sum += gleu_stats(src, hyp, ref).score();
  }
  return sum / static_cast<double>(refs.size());
}

MetricReport corpus_gleu(const std::vector<Tokens>& srcs, const std::vector<Tokens>& hyps,
                         const std::vector<std::vector<Tokens>>& refs) {
  if (srcs.size() != hyps.size() || refs.size() != hyps.size()) {
    fail(ErrorKind::kInvalidArgument, "GLEU: sources, hypotheses and references differ in count");
  }
  MetricReport r;
  r.metric = "GLEU";
  size_t slots = 0;
  for (size_t i = 0; i < refs.size(); ++i) {
    if (refs[i].empty()) fail(ErrorKind::kInvalidArgument, "GLEU: sentence " + std::to_string(i + 1) + " has no reference");
    for (const Tokens& ref : refs[i]) {
      if (ref.empty()) fail(ErrorKind::kInvalidArgument, "GLEU: empty reference for sentence " + std::to_string(i + 1));
    }
    slots = std::max(slots, refs[i].size());
    r.per_sentence.push_back(sentence_gleu(srcs[i], hyps[i], refs[i]));
  }
  double sum = 0.0;
  for (size_t k = 0; k < slots; ++k) {
    NgramStats total;
    for (size_t i = 0; i < hyps.size(); ++i) total.add(gleu_stats(srcs[i], hyps[i], refs[i][k % refs[i].size()]));
    sum += total.score();
  }
  r.value = slots ? sum / static_cast<double>(slots) : 0.0;
  return r;
}

double f_beta(double precision, double recall, double beta) {
  const double b2 = beta * beta;
  const double denom = b2 * precision + recall;
  return denom > 0.0 ? (1.0 + b2) * precision * recall / denom : 0.0;
}

}  // namespace mg::metrics
