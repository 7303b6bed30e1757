#pragma once

#include <filesystem>
#include <string>

#include "qbin/heatmap.hpp"

namespace qbin {

// Binary grid format: magic "QBHM", u32le height, u32le width,
// height*width IEEE-754 f32le activations row-major.
std::string encode_qbhm(const Heatmap& h);
Heatmap decode_qbhm(const std::string& bytes);

void write_qbhm(const std::filesystem::path& path, const Heatmap& h);
Heatmap read_qbhm(const std::filesystem::path& path);

// Plain CSV grid, one row per line.
std::string encode_heatmap_csv(const Heatmap& h);
Heatmap decode_heatmap_csv(const std::string& text);

void write_heatmap_csv(const std::filesystem::path& path, const Heatmap& h);
Heatmap read_heatmap_csv(const std::filesystem::path& path);

// Dispatches on extension: ".qbhm" binary, anything else CSV.
Heatmap read_heatmap(const std::filesystem::path& path);

}  // namespace qbin
