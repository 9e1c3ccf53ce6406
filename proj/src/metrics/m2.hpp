#pragma once

#include <string>
#include <vector>

#include "metrics/edits.hpp"
#include "metrics/scores.hpp"

namespace mg::metrics {

// One S block of an M2 file. A "noop" line (start = end = -1) marks an
// annotator who made no corrections; it is kept as an Edit with start -1.
struct M2Sentence {
  Tokens source;
  EditSet edits;

  bool operator==(const M2Sentence&) const = default;
  // Annotator ids in first-appearance order; {0} when there are no A lines.
  std::vector<int> annotators() const;
  // Corrections of one annotator, noop markers dropped.
  EditSet gold(int annotator) const;
};

std::vector<M2Sentence> parse_m2(const std::string& content, const std::string& origin = "<m2>");
std::vector<M2Sentence> read_m2(const std::string& path);
// Blocks end with a blank line.
std::string emit_m2(const std::vector<M2Sentence>& sentences);

// Levenshtein alignment lattice over all minimal-cost alignments. Arcs are
// single match steps or edits: runs of steps that start and end with a
// non-match step and contain at most `span_cap` matches.
struct EditLattice {
  struct Arc {
    int from = 0;
    int to = 0;
    bool is_edit = false;
    Edit edit;
  };
  std::vector<std::pair<int, int>> nodes;  // (source position, hypothesis position), topologically ordered
  std::vector<Arc> arcs;
  int start = 0;
  int end = 0;
};

EditLattice edit_lattice(const Tokens& src, const Tokens& hyp, int span_cap = 2);

struct M2Counts {
  double correct = 0.0;
  double proposed = 0.0;
  double gold = 0.0;

  void add(const M2Counts& o) {
    correct += o.correct;
    proposed += o.proposed;
    gold += o.gold;
  }
  double precision() const { return proposed > 0 ? correct / proposed : 1.0; }
  double recall() const { return gold > 0 ? correct / gold : 1.0; }
};

// Chooses the edit decomposition and annotator that maximize F_beta of
// `running` plus this sentence. Ties prefer more correct edits, then fewer
// proposed edits, then the earlier annotator. Adjacent insertions at one
// source position count as a single edit.
M2Counts best_sentence_counts(const EditLattice& lattice, const M2Sentence& gold, const M2Counts& running,
                              double beta = 0.5);

MetricReport m2_score(const std::vector<Tokens>& hyps, const std::vector<M2Sentence>& gold, double beta = 0.5,
                      int span_cap = 2);

}  // namespace mg::metrics
