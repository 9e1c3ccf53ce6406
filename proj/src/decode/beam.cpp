#include "decode/beam.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "common/error.hpp"
#include "text/vocab.hpp"

namespace mg::decode {

double normalized_score(double logprob, size_t length, double alpha) {
  return logprob / std::pow(static_cast<double>(std::max<size_t>(length, 1)), alpha);
}

std::vector<std::vector<double>> log_softmax_rows(const Tensor& logits) {
  const int rows = logits.rows(), cols = logits.cols();
  std::vector<std::vector<double>> out(rows, std::vector<double>(cols));
  for (int r = 0; r < rows; ++r) {
    double mx = logits.at(r, 0);
    for (int c = 1; c < cols; ++c) mx = std::max<double>(mx, logits.at(r, c));
    double z = 0.0;
    for (int c = 0; c < cols; ++c) z += std::exp(logits.at(r, c) - mx);
    const double logz = std::log(z) + mx;
    for (int c = 0; c < cols; ++c) out[r][c] = logits.at(r, c) - logz;
  }
  return out;
}

namespace {

struct Candidate {
  int parent;
  int unit;
  double logprob;
};

struct Alive {
  Hypothesis hyp;
  int level;  // smallest beam width whose search keeps this prefix
};

bool better(const Hypothesis& a, const Hypothesis& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.units < b.units;
}

}  // namespace

std::vector<Hypothesis> beam_search(const StepFn& step, const BeamOptions& opts) {
  if (opts.beam < 1) fail(ErrorKind::kInvalidArgument, "beam must be at least 1");
  if (opts.max_len < 1) fail(ErrorKind::kInvalidArgument, "max_len must be at least 1");
  // Nested beams: the width-j prefix set is the top j expansions of the
  // width-j set plus everything the width-(j-1) search keeps, for j = 1..beam.
  // Widening the beam therefore never loses a hypothesis.
  std::vector<Alive> alive{{Hypothesis{}, 1}};
  std::vector<Hypothesis> finished;
  std::set<std::vector<int>> finished_units;
  for (int t = 0; t < opts.max_len && !alive.empty(); ++t) {
    std::vector<std::vector<int>> prefixes;
    for (const auto& a : alive) {
      std::vector<int> p{text::Vocab::kBos};
      p.insert(p.end(), a.hyp.units.begin(), a.hyp.units.end());
      prefixes.push_back(std::move(p));
    }
    const auto lp = log_softmax_rows(step(prefixes));
    const bool last = t + 1 == opts.max_len;
    std::vector<Candidate> cands;
    for (size_t i = 0; i < alive.size(); ++i) {
      for (int u = 0; u < static_cast<int>(lp[i].size()); ++u) {
        if (u == text::Vocab::kPad || u == text::Vocab::kBos) continue;
        if (last && u != text::Vocab::kEos) continue;
        cands.push_back({static_cast<int>(i), u, alive[i].hyp.logprob + lp[i][u]});
      }
    }
    std::stable_sort(cands.begin(), cands.end(),
                     [](const Candidate& a, const Candidate& b) { return a.logprob > b.logprob; });
    std::map<std::pair<int, int>, int> level;  // (parent, unit) -> smallest width selecting it
    for (int width = 1; width <= opts.beam; ++width) {
      int kept = 0;
      for (const Candidate& c : cands) {
        if (kept >= width) break;
        if (alive[c.parent].level > width) continue;
        level.emplace(std::pair{c.parent, c.unit}, width);
        ++kept;
      }
    }
    std::vector<Alive> next;
    for (const Candidate& c : cands) {
      auto it = level.find({c.parent, c.unit});
      if (it == level.end()) continue;
      Hypothesis h;
      h.units = alive[c.parent].hyp.units;
      h.units.push_back(c.unit);
      h.logprob = c.logprob;
      h.score = normalized_score(h.logprob, h.units.size(), opts.length_alpha);
      if (c.unit == text::Vocab::kEos) {
        h.finished = true;
        if (finished_units.insert(h.units).second) finished.push_back(std::move(h));
      } else {
        next.push_back({std::move(h), it->second});
      }
    }
    alive = std::move(next);
  }
  std::sort(finished.begin(), finished.end(), better);
  if (static_cast<int>(finished.size()) > opts.beam) finished.resize(opts.beam);
  return finished;
}

}  // namespace mg::decode
