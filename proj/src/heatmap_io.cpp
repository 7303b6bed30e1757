#include "qbin/heatmap_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <sstream>
#include <stdexcept>

#include "qbin/util.hpp"

namespace qbin {

namespace {

constexpr char kMagic[4] = {'Q', 'B', 'H', 'M'};

void put_u32le(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>((v >> 8) & 0xFF));
  out.push_back(static_cast<char>((v >> 16) & 0xFF));
  out.push_back(static_cast<char>((v >> 24) & 0xFF));
}

std::uint32_t get_u32le(const std::string& s, std::size_t off) {
  return static_cast<std::uint32_t>(static_cast<unsigned char>(s[off])) |
         static_cast<std::uint32_t>(static_cast<unsigned char>(s[off + 1])) << 8 |
         static_cast<std::uint32_t>(static_cast<unsigned char>(s[off + 2])) << 16 |
         static_cast<std::uint32_t>(static_cast<unsigned char>(s[off + 3])) << 24;
}

}  // namespace

std::string encode_qbhm(const Heatmap& h) {
  std::string out;
  out.reserve(12 + h.values().size() * 4);
  out.append(kMagic, 4);
  put_u32le(out, static_cast<std::uint32_t>(h.height()));
  put_u32le(out, static_cast<std::uint32_t>(h.width()));
  for (double v : h.values()) put_u32le(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  return out;
}

Heatmap decode_qbhm(const std::string& bytes) {
  if (bytes.size() < 12 || std::memcmp(bytes.data(), kMagic, 4) != 0)
    throw std::runtime_error("QBHM: bad magic or truncated header");
  const std::uint32_t height = get_u32le(bytes, 4);
  const std::uint32_t width = get_u32le(bytes, 8);
  if (height == 0 || width == 0) throw std::runtime_error("QBHM: zero dimension");
  const std::size_t expected = 12 + static_cast<std::size_t>(height) * width * 4;
  if (bytes.size() != expected)
    throw std::runtime_error("QBHM: payload size mismatch (truncated or trailing bytes)");
  std::vector<double> vals;
  vals.reserve(static_cast<std::size_t>(height) * width);
  for (std::size_t off = 12; off < expected; off += 4)
    vals.push_back(std::bit_cast<float>(get_u32le(bytes, off)));
  return Heatmap(static_cast<int>(height), static_cast<int>(width), std::move(vals));
}

void write_qbhm(const std::filesystem::path& path, const Heatmap& h) {
  atomic_write(path, encode_qbhm(h));
}

Heatmap read_qbhm(const std::filesystem::path& path) { return decode_qbhm(read_file(path)); }

std::string encode_heatmap_csv(const Heatmap& h) {
  std::string out;
  for (int r = 0; r < h.height(); ++r) {
    for (int c = 0; c < h.width(); ++c) {
      if (c) out += ',';
      out += format_double(h.at(r, c));
    }
    out += '\n';
  }
  return out;
}

Heatmap decode_heatmap_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<double> vals;
  int width = -1;
  int height = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    auto fields = split_csv_line(line);
    if (width < 0)
      width = static_cast<int>(fields.size());
    else if (static_cast<int>(fields.size()) != width)
      throw std::runtime_error("heatmap CSV: ragged rows");
    for (const auto& f : fields) vals.push_back(parse_double(f));
    ++height;
  }
  if (height == 0 || width <= 0) throw std::runtime_error("heatmap CSV: empty grid");
  return Heatmap(height, width, std::move(vals));
}

void write_heatmap_csv(const std::filesystem::path& path, const Heatmap& h) {
  atomic_write(path, encode_heatmap_csv(h));
}

Heatmap read_heatmap_csv(const std::filesystem::path& path) {
  return decode_heatmap_csv(read_file(path));
}

Heatmap read_heatmap(const std::filesystem::path& path) {
  if (path.extension() == ".qbhm") return read_qbhm(path);
  return read_heatmap_csv(path);
}

}  // namespace qbin
