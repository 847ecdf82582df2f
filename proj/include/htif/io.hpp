#pragma once

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>
#include <string_view>

#include "htif/duration.hpp"

namespace htif {

// Shortest round-trip decimal form; identical bytes for identical doubles.
std::string format_double(double value);
inline std::string format_duration(Duration d) { return format_double(d.to_double()); }

// 64-bit FNV-1a, rendered as 16 hex digits.
std::string fnv1a_hex(std::string_view bytes);

void write_text_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace htif
