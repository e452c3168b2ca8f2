#pragma once

#include <string>

namespace framepipe {

// Whole-file read; throws IoError with the path on failure.
std::string read_text_file(const std::string& path);

// Write-temp-then-rename so concurrent readers never observe a partial file.
void atomic_write_text(const std::string& path, const std::string& content);

// Shortest decimal form that round-trips the exact double value.
std::string format_double(double v);

}  // namespace framepipe
