#include "metrics/m2.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "common/error.hpp"
#include "common/io.hpp"
#include "text/unicode.hpp"

namespace mg::metrics {

std::vector<int> M2Sentence::annotators() const {
  std::vector<int> ids;
  for (const Edit& e : edits) {
    if (std::find(ids.begin(), ids.end(), e.annotator) == ids.end()) ids.push_back(e.annotator);
  }
  if (ids.empty()) ids.push_back(0);
  return ids;
}

EditSet M2Sentence::gold(int annotator) const {
  EditSet out;
  for (const Edit& e : edits) {
    if (e.annotator == annotator && e.start >= 0) out.push_back(e);
  }
  return out;
}

namespace {

std::vector<std::string> split_fields(const std::string& s, const std::string& sep) {
  std::vector<std::string> out;
  size_t pos = 0;
  while (true) {
    const size_t next = s.find(sep, pos);
    out.push_back(s.substr(pos, next == std::string::npos ? std::string::npos : next - pos));
    if (next == std::string::npos) break;
    pos = next + sep.size();
  }
  return out;
}

int parse_int(const std::string& s, const std::string& where) {
  size_t used = 0;
  int v = 0;
  try {
    v = std::stoi(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) fail(ErrorKind::kParse, where + ": bad number '" + s + "'");
  return v;
}

}  // namespace

std::vector<M2Sentence> parse_m2(const std::string& content, const std::string& origin) {
  std::vector<M2Sentence> out;
  std::istringstream in(content);
  std::string line;
  int line_no = 0;
  bool open = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string where = origin + ":" + std::to_string(line_no);
    if (line.empty()) {
      open = false;
      continue;
    }
    if (line.rfind("S ", 0) == 0 || line == "S") {
      M2Sentence s;
      s.source = text::split_whitespace(line.size() > 2 ? line.substr(2) : "");
      out.push_back(std::move(s));
      open = true;
      continue;
    }
    if (line.rfind("A ", 0) != 0) fail(ErrorKind::kParse, where + ": expected an S or A line");
    if (!open) fail(ErrorKind::kParse, where + ": A line outside a sentence block");
    const auto fields = split_fields(line.substr(2), "|||");
    if (fields.size() != 6) {
      fail(ErrorKind::kParse, where + ": A line needs 6 '|||' fields, found " + std::to_string(fields.size()));
    }
    const auto span = text::split_whitespace(fields[0]);
    if (span.size() != 2) fail(ErrorKind::kParse, where + ": A line span must be two numbers");
    Edit e;
    e.start = parse_int(span[0], where);
    e.end = parse_int(span[1], where);
    e.type = fields[1];
    e.annotator = parse_int(fields[5], where);
    M2Sentence& s = out.back();
    if (e.start == -1 && e.end == -1) {
      e.replacement.clear();
    } else {
      if (e.start < 0 || e.end < e.start) {
        fail(ErrorKind::kParse, where + ": span end " + std::to_string(e.end) + " before start " + std::to_string(e.start));
      }
      if (e.end > static_cast<int>(s.source.size())) {
        fail(ErrorKind::kParse, where + ": span ends past the sentence (" + std::to_string(s.source.size()) + " tokens)");
      }
      e.replacement = text::split_whitespace(fields[2]);
    }
    s.edits.push_back(std::move(e));
  }
  return out;
}

std::vector<M2Sentence> read_m2(const std::string& path) { return parse_m2(read_file(path), path); }

std::string emit_m2(const std::vector<M2Sentence>& sentences) {
  std::string out;
  for (const M2Sentence& s : sentences) {
    out += "S " + text::join(s.source, " ") + "\n";
    for (const Edit& e : s.edits) {
      const std::string correction = e.start < 0 ? "-NONE-" : text::join(e.replacement, " ");
      out += "A " + std::to_string(e.start) + " " + std::to_string(e.end) + "|||" + e.type + "|||" + correction +
             "|||REQUIRED|||-NONE-|||" + std::to_string(e.annotator) + "\n";
    }
    out += "\n";
  }
  return out;
}

EditLattice edit_lattice(const Tokens& src, const Tokens& hyp, int span_cap) {
  const int n = static_cast<int>(src.size()), m = static_cast<int>(hyp.size());
  auto at = [m](int i, int j) { return static_cast<size_t>(i) * (m + 1) + j; };
  std::vector<int> fwd((n + 1) * static_cast<size_t>(m + 1)), bwd(fwd.size());
  for (int i = 0; i <= n; ++i) {
    for (int j = 0; j <= m; ++j) {
      if (i == 0 && j == 0) continue;
      int best = 1 << 29;
      if (i > 0) best = std::min(best, fwd[at(i - 1, j)] + 1);
      if (j > 0) best = std::min(best, fwd[at(i, j - 1)] + 1);
      if (i > 0 && j > 0) best = std::min(best, fwd[at(i - 1, j - 1)] + (src[i - 1] == hyp[j - 1] ? 0 : 1));
      fwd[at(i, j)] = best;
    }
  }
  for (int i = n; i >= 0; --i) {
    for (int j = m; j >= 0; --j) {
      if (i == n && j == m) continue;
      int best = 1 << 29;
      if (i < n) best = std::min(best, bwd[at(i + 1, j)] + 1);
      if (j < m) best = std::min(best, bwd[at(i, j + 1)] + 1);
      if (i < n && j < m) best = std::min(best, bwd[at(i + 1, j + 1)] + (src[i] == hyp[j] ? 0 : 1));
      bwd[at(i, j)] = best;
    }
  }
  const int total = fwd[at(n, m)];

  // Optimal steps out of each cell: (target cell, is_match).
  struct Step {
    int i, j;
    bool match;
  };
  auto steps = [&](int i, int j) {
    std::vector<Step> out;
    const int here = fwd[at(i, j)];
    auto consider = [&](int ti, int tj, int cost, bool match) {
      if (here + cost + bwd[at(ti, tj)] == total) out.push_back({ti, tj, match});
    };
    if (i < n && j < m) consider(i + 1, j + 1, src[i] == hyp[j] ? 0 : 1, src[i] == hyp[j]);
    if (i < n) consider(i + 1, j, 1, false);
    if (j < m) consider(i, j + 1, 1, false);
    return out;
  };

  EditLattice lat;
  std::map<std::pair<int, int>, int> index;
  for (int i = 0; i <= n; ++i) {
    for (int j = 0; j <= m; ++j) {
      if (fwd[at(i, j)] + bwd[at(i, j)] == total) {
        index[{i, j}] = static_cast<int>(lat.nodes.size());
        lat.nodes.push_back({i, j});
      }
    }
  }
  // Row-major order is topological: every step increases i or j.
  lat.start = index.at({0, 0});
  lat.end = index.at({n, m});

  for (const auto& [i0, j0] : lat.nodes) {
    const int from = index.at({i0, j0});
    for (const Step& s : steps(i0, j0)) {
      if (s.match) lat.arcs.push_back({from, index.at({s.i, s.j}), false, {}});
    }
    // Edit arcs: walk runs that start with a non-match step, tracking the
    // number of matches used; a run may end after any non-match step.
    std::set<std::tuple<int, int, int>> seen;  // node, matches, last step was a match
    std::vector<std::tuple<int, int, int, bool>> stack;
    for (const Step& s : steps(i0, j0)) {
      if (!s.match) stack.push_back({s.i, s.j, 0, false});
    }
    std::set<int> ends;
    while (!stack.empty()) {
      auto [i, j, used, last_match] = stack.back();
      stack.pop_back();
      if (!seen.insert({index.at({i, j}), used, last_match ? 1 : 0}).second) continue;
      if (!last_match) ends.insert(index.at({i, j}));
      for (const Step& s : steps(i, j)) {
        const int next_used = used + (s.match ? 1 : 0);
        if (next_used > span_cap) continue;
        stack.push_back({s.i, s.j, next_used, s.match});
      }
    }
    for (int to : ends) {
      const auto [i1, j1] = lat.nodes[to];
      EditLattice::Arc a;
      a.from = from;
      a.to = to;
      a.is_edit = true;
      a.edit.start = i0;
      a.edit.end = i1;
      a.edit.replacement.assign(hyp.begin() + j0, hyp.begin() + j1);
      lat.arcs.push_back(std::move(a));
    }
  }
  return lat;
}

M2Counts best_sentence_counts(const EditLattice& lat, const M2Sentence& gold, const M2Counts& running, double beta) {
  M2Counts best;
  double best_f = -1.0;
  bool have = false;
  // Arcs grouped by source node; nodes are already topologically ordered.
  std::vector<std::vector<const EditLattice::Arc*>> out(lat.nodes.size());
  for (const auto& a : lat.arcs) out[a.from].push_back(&a);

  for (int annotator : gold.annotators()) {
    const EditSet g = gold.gold(annotator);
    std::set<std::tuple<int, int, std::vector<std::string>>> gold_keys;
    for (const Edit& e : g) gold_keys.insert({e.start, e.end, e.replacement});
    // Per node and (proposed count, arrived by an insertion edit): most correct
    // edits reachable. Insertions at one position merge into a single edit.
    std::vector<std::map<std::pair<int, bool>, int>> reach(lat.nodes.size());
    reach[lat.start][{0, false}] = 0;
    for (size_t u = 0; u < lat.nodes.size(); ++u) {
      for (const auto& [key, corr] : reach[u]) {
        const auto [prop, via_insert] = key;
        for (const auto* a : out[u]) {
          int p = prop, c = corr;
          const bool insert = a->is_edit && a->edit.start == a->edit.end;
          if (insert && via_insert) continue;
          if (a->is_edit) {
            ++p;
            if (gold_keys.count({a->edit.start, a->edit.end, a->edit.replacement})) ++c;
          }
          auto [it, inserted] = reach[a->to].emplace(std::pair{p, insert}, c);
          if (!inserted) it->second = std::max(it->second, c);
        }
      }
    }
    std::map<int, int> final_counts;
    for (const auto& [key, corr] : reach[lat.end]) {
      auto [it, inserted] = final_counts.emplace(key.first, corr);
      if (!inserted) it->second = std::max(it->second, corr);
    }
    for (const auto& [prop, corr] : final_counts) {
      M2Counts cand{static_cast<double>(corr), static_cast<double>(prop), static_cast<double>(g.size())};
      M2Counts total = running;
      total.add(cand);
      const double f = f_beta(total.precision(), total.recall(), beta);
      const bool better = !have || f > best_f ||
                          (f == best_f && (cand.correct > best.correct ||
                                           (cand.correct == best.correct && cand.proposed < best.proposed)));
      if (better) {
        best = cand;
        best_f = f;
        have = true;
      }
    }
  }
  return best;
}

MetricReport m2_score(const std::vector<Tokens>& hyps, const std::vector<M2Sentence>& gold, double beta, int span_cap) {
  if (hyps.size() != gold.size()) {
    fail(ErrorKind::kInvalidArgument, "M2: " + std::to_string(hyps.size()) + " hypotheses for " +
                                          std::to_string(gold.size()) + " gold sentences");
  }
  MetricReport r;
  r.metric = "M2";
  M2Counts total;
  for (size_t i = 0; i < hyps.size(); ++i) {
    const M2Counts c = best_sentence_counts(edit_lattice(gold[i].source, hyps[i], span_cap), gold[i], total, beta);
    total.add(c);
    r.per_sentence.push_back(f_beta(c.precision(), c.recall(), beta));
  }
  r.precision = total.precision();
  r.recall = total.recall();
  r.value = f_beta(r.precision, r.recall, beta);
  return r;
}

}  // namespace mg::metrics
