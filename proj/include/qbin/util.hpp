#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace qbin {

// Shortest decimal that round-trips the exact double value.
std::string format_double(double v);

double parse_double(std::string_view s);

std::vector<std::string> split_csv_line(std::string_view line);
std::string join_csv(const std::vector<std::string>& fields);

// Writes to a temporary file in the same directory, then renames into place.
void atomic_write(const std::filesystem::path& path, const std::string& contents);

std::string read_file(const std::filesystem::path& path);

// 64-bit mix used to derive independent per-item RNG streams.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace qbin
