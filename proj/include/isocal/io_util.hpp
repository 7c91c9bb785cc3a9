#pragma once

#include <string>

namespace isocal {

// Writes content to path via a temp file + rename so failed runs never leave
// partial outputs behind.
void write_file_atomic(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);

// 17 significant digits, general format: exact double round-trip.
std::string format_double(double v);

}  // namespace isocal
