#pragma once

// Exhaustive M2 oracle: enumerates every minimal-cost alignment path and every
// grouping of its steps into edits, then scores all of them. Exponential, so
// only for short sentences.

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <tuple>
#include <vector>

#include "common/rng.hpp"
#include "metrics/m2.hpp"

namespace mg::testing {

using EditKey = std::tuple<int, int, std::vector<std::string>>;

inline std::set<std::set<EditKey>> all_decompositions(const metrics::Tokens& src, const metrics::Tokens& hyp,
                                                      int span_cap) {
  const int n = static_cast<int>(src.size()), m = static_cast<int>(hyp.size());
  std::map<std::pair<int, int>, int> memo;
  std::function<int(int, int)> dist = [&](int i, int j) -> int {
    if (i == n) return m - j;
    if (j == m) return n - i;
    auto it = memo.find({i, j});
    if (it != memo.end()) return it->second;
    const int v = std::min({dist(i + 1, j) + 1, dist(i, j + 1) + 1, dist(i + 1, j + 1) + (src[i] == hyp[j] ? 0 : 1)});
    memo[{i, j}] = v;
    return v;
  };
  struct Step {
    int i0, j0, i1, j1;
    bool match;
  };
  std::vector<std::vector<Step>> paths;
  std::vector<Step> cur;
  std::function<void(int, int)> walk = [&](int i, int j) {
    if (i == n && j == m) {
      paths.push_back(cur);
      return;
    }
    const int d = dist(i, j);
    if (i < n && j < m) {
      const bool match = src[i] == hyp[j];
      if ((match ? 0 : 1) + dist(i + 1, j + 1) == d) {
        cur.push_back({i, j, i + 1, j + 1, match});
        walk(i + 1, j + 1);
        cur.pop_back();
      }
    }
    if (i < n && 1 + dist(i + 1, j) == d) {
      cur.push_back({i, j, i + 1, j, false});
      walk(i + 1, j);
      cur.pop_back();
    }
    if (j < m && 1 + dist(i, j + 1) == d) {
      cur.push_back({i, j, i, j + 1, false});
      walk(i, j + 1);
      cur.pop_back();
    }
  };
  walk(0, 0);

  std::set<std::set<EditKey>> out;
  for (const auto& path : paths) {
    std::set<EditKey> edits;
    std::function<void(size_t)> group = [&](size_t k) {
      if (k == path.size()) {
        // Insertions at one source position merge into a single edit.
        std::set<int> insert_at;
        for (const auto& [s, e, r] : edits) {
          if (s == e && !insert_at.insert(s).second) return;
        }
        out.insert(edits);
        return;
      }
      if (path[k].match) {
        group(k + 1);
        return;
      }
      int matches = 0;
      for (size_t e = k; e < path.size(); ++e) {
        if (path[e].match) {
          if (++matches > span_cap) break;
          continue;
        }
        EditKey key{path[k].i0, path[e].i1,
                    std::vector<std::string>(hyp.begin() + path[k].j0, hyp.begin() + path[e].j1)};
        if (!edits.insert(key).second) continue;
        group(e + 1);
        edits.erase(key);
      }
    };
    group(0);
  }
  return out;
}

inline metrics::M2Counts oracle_sentence_counts(const metrics::Tokens& hyp, const metrics::M2Sentence& gold,
                                                const metrics::M2Counts& running, double beta = 0.5,
                                                int span_cap = 2) {
  const auto decomps = all_decompositions(gold.source, hyp, span_cap);
  metrics::M2Counts best;
  double best_f = -1.0;
  bool have = false;
  for (int annotator : gold.annotators()) {
    std::set<EditKey> g;
    double gold_count = 0;
    for (const auto& e : gold.edits) {
      if (e.annotator != annotator || e.start < 0) continue;
      g.insert({e.start, e.end, e.replacement});
      ++gold_count;
    }
    for (const auto& d : decomps) {
      metrics::M2Counts c;
      c.gold = gold_count;
      c.proposed = static_cast<double>(d.size());
      for (const auto& k : d) c.correct += g.count(k);
      metrics::M2Counts total = running;
      total.add(c);
      const double f = metrics::f_beta(total.precision(), total.recall(), beta);
      if (!have || f > best_f ||
          (f == best_f && (c.correct > best.correct || (c.correct == best.correct && c.proposed < best.proposed)))) {
        best = c;
        best_f = f;
        have = true;
      }
    }
  }
  return best;
}

struct M2Case {
  metrics::M2Sentence gold;
  metrics::Tokens hyp;
};

// Source of at most 8 tokens over a small alphabet (so matches are common),
// one or two annotators with random non-overlapping edits, and a hypothesis
// that applies some of one annotator's edits plus occasional noise.
inline M2Case random_m2_case(Rng& rng) {
  static const std::vector<std::string> kAlphabet = {"a", "b", "c", "d", "e"};
  auto token = [&] { return kAlphabet[rng.below(kAlphabet.size())]; };
  M2Case c;
  const int n = static_cast<int>(rng.below(9));
  for (int i = 0; i < n; ++i) c.gold.source.push_back(token());
  const int annotators = 1 + static_cast<int>(rng.below(2));
  for (int a = 0; a < annotators; ++a) {
    int pos = 0;
    bool any = false;
    while (pos <= n) {
      if (rng.below(3) == 0) {
        metrics::Edit e;
        e.start = pos;
        e.end = std::min(n, pos + static_cast<int>(rng.below(3)));
        const int r = static_cast<int>(rng.below(3));
        for (int k = 0; k < r; ++k) e.replacement.push_back(token());
        e.annotator = a;
        const metrics::Tokens old(c.gold.source.begin() + e.start, c.gold.source.begin() + e.end);
        if (old != e.replacement) {
          c.gold.edits.push_back(e);
          any = true;
          pos = e.end + 1;
          continue;
        }
      }
      ++pos;
    }
    if (!any && rng.below(2)) c.gold.edits.push_back({-1, -1, {}, "noop", a});
  }
  const int chosen = static_cast<int>(rng.below(annotators));
  metrics::EditSet applied;
  for (const auto& e : c.gold.gold(chosen)) {
    if (rng.below(3) != 0) applied.push_back(e);
  }
  c.hyp = metrics::apply_edits(c.gold.source, applied);
  if (rng.below(3) == 0 && c.hyp.size() < 8) {
    c.hyp.insert(c.hyp.begin() + static_cast<long>(rng.below(c.hyp.size() + 1)), token());
  }
  if (rng.below(4) == 0 && !c.hyp.empty()) c.hyp.erase(c.hyp.begin() + static_cast<long>(rng.below(c.hyp.size())));
  return c;
}

}  // namespace mg::testing
