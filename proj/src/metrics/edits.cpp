#include "metrics/edits.hpp"

#include <algorithm>

#include "common/error.hpp"

namespace mg::metrics {

std::vector<std::string> apply_edits(const std::vector<std::string>& tokens, EditSet edits) {
  std::stable_sort(edits.begin(), edits.end(), [](const Edit& a, const Edit& b) {
    return a.start != b.start ? a.start < b.start : a.end < b.end;
  });
  std::vector<std::string> out;
  int pos = 0;
  for (const Edit& e : edits) {
    if (e.start == -1 && e.end == -1) continue;  // noop marker
    if (e.start < pos || e.end < e.start || e.end > static_cast<int>(tokens.size())) {
      fail(ErrorKind::kInvalidArgument, "edit (" + std::to_string(e.start) + ", " + std::to_string(e.end) +
                                            ") overlaps another edit or leaves the sentence");
    }
    out.insert(out.end(), tokens.begin() + pos, tokens.begin() + e.start);
    out.insert(out.end(), e.replacement.begin(), e.replacement.end());
    pos = e.end;
  }
  out.insert(out.end(), tokens.begin() + pos, tokens.end());
  return out;
}

EditSet annotator_edits(const EditSet& edits, int annotator) {
  EditSet out;
  for (const Edit& e : edits) {
    if (e.annotator == annotator && e.start >= 0) out.push_back(e);
  }
  std::stable_sort(out.begin(), out.end(), [](const Edit& a, const Edit& b) {
    return a.start != b.start ? a.start < b.start : a.end < b.end;
  });
  return out;
}

}  // namespace mg::metrics
