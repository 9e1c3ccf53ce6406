#pragma once

#include <string>
#include <vector>

namespace mg::metrics {

// Token-span edit: tokens [start, end) are replaced by `replacement`.
struct Edit {
  int start = 0;
  int end = 0;
  std::vector<std::string> replacement;
  std::string type = "-";
  int annotator = 0;

  bool operator==(const Edit&) const = default;
};

using EditSet = std::vector<Edit>;

// Applies non-overlapping edits (noop markers, start = end = -1, are skipped); throws when spans overlap or fall outside.
std::vector<std::string> apply_edits(const std::vector<std::string>& tokens, EditSet edits);

// Corrections of one annotator, in span order.
EditSet annotator_edits(const EditSet& edits, int annotator);

}  // namespace mg::metrics
