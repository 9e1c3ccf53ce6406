#pragma once

#include <string>

namespace mg {

// Whole-file read; throws an I/O error naming the path.
std::string read_file(const std::string& path);
// Atomic replace through `path`.tmp.
void write_file(const std::string& path, const std::string& content);

}  // namespace mg
