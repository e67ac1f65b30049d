#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace tomo::text {

// Scientific notation with 17 significant digits: parses back to the exact
// same double and satisfies any >= 12 significant digit requirement.
std::string format_double(double v);

// Shortest representation that round-trips exactly; used for Newick lengths.
std::string format_double_compact(double v);

// Strict double parse of the whole field. Returns false on any trailing junk.
bool parse_double(std::string_view field, double& out);

bool parse_int(std::string_view field, long long& out);
bool parse_uint64(std::string_view field, unsigned long long& out);

std::string_view trim(std::string_view s);

std::vector<std::string> split(std::string_view line, char sep);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

}  // namespace tomo::text
