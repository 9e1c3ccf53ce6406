#pragma once

#include <string>
#include <vector>

namespace mg::metrics {

using Tokens = std::vector<std::string>;

struct MetricReport {
  std::string metric;  // BLEU, GLEU or M2
  double value = 0.0;
  double precision = 0.0;  // M2 only
  double recall = 0.0;     // M2 only
  std::vector<double> per_sentence;
};

// Corpus BLEU, n = 1..4, no smoothing, x100. Orders for which the whole
// hypothesis corpus has no n-grams are left out of the geometric mean; an
// empty hypothesis corpus scores 0.
MetricReport corpus_bleu(const std::vector<Tokens>& hyps, const std::vector<Tokens>& refs);

// Per-order statistics shared by BLEU and GLEU.
struct NgramStats {
  double numerator[4] = {0, 0, 0, 0};
  double denominator[4] = {0, 0, 0, 0};
  double hyp_len = 0.0;
  double ref_len = 0.0;

  void add(const NgramStats& o);
  // Brevity penalty times the geometric mean of the orders that have
  // hypothesis n-grams, in [0, 1].
  double score() const;
};

NgramStats bleu_stats(const Tokens& hyp, const Tokens& ref);
// Matches with the reference minus matches with source n-grams the
// reference lacks, floored at 0 per order.
NgramStats gleu_stats(const Tokens& src, const Tokens& hyp, const Tokens& ref);

// Mean of the per-reference sentence scores, in [0, 1].
double sentence_gleu(const Tokens& src, const Tokens& hyp, const std::vector<Tokens>& refs);

// For each reference slot k (sentence i uses reference k mod its count),
// corpus-level GLEU from summed statistics; the slots are averaged.
MetricReport corpus_gleu(const std::vector<Tokens>& srcs, const std::vector<Tokens>& hyps,
                         const std::vector<std::vector<Tokens>>& refs);

// (1 + b^2) P R / (b^2 P + R); 0 when both are 0.
double f_beta(double precision, double recall, double beta = 0.5);

}  // namespace mg::metrics
