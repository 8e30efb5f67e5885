#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace densnet {

/// Reads a whole file; paths ending in ".gz" are gunzipped.
std::string read_text_file(const std::string& path);
/// Writes a whole file; paths ending in ".gz" are gzipped.
void write_text_file(const std::string& path, std::string_view content);

/// Shortest-roundtrip-safe decimal form (%.17g).
std::string format_double(double v);
double parse_double(std::string_view s);
long long parse_integer(std::string_view s);

/// Whitespace-separated tokens of one line.
std::vector<std::string_view> split_tokens(std::string_view line);
/// Lines with '#' comments stripped; blank lines dropped. Each entry keeps
/// its 1-based line number.
std::vector<std::pair<int, std::string_view>> content_lines(std::string_view text);

}  // namespace densnet
