#pragma once

// Depth-map file formats:
//   - 16-bit binary PGM: "P5", maxval 65535, big-endian samples, one count
//     per 0.1 mm of height. Pixel pitch may ride along in a header comment
//     "# scale_mm_per_px <v>" or in a sidecar "<file>.json".
//   - CSV of heights in mm, one image row per line.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "snpick/errors.hpp"
#include "snpick/grid.hpp"

namespace snpick {

namespace detail {

// Reads one PNM header token, skipping whitespace and '#' comments.
// Comment bodies are appended to `comments` so scale hints survive.
inline std::string pnm_token(std::istream& in, std::vector<std::string>* comments) {
  std::string tok;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      std::string line;
      std::getline(in, line);
      if (comments) comments->push_back(line);
      continue;
    }
    if (std::isspace(c)) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(static_cast<char>(c));
  }
  return tok;
}

inline int parse_pnm_int(const std::string& tok, const char* what) {
  if (tok.empty()) throw io_error(std::string("malformed header: missing ") + what);
  for (char ch : tok)
    if (!std::isdigit(static_cast<unsigned char>(ch)))
      throw io_error(std::string("malformed header: bad ") + what + " '" + tok + "'");
  return std::stoi(tok);
}

inline std::optional<double> scale_from_comments(
    const std::vector<std::string>& comments) {
  for (const auto& line : comments) {
    std::istringstream ss(line);
    std::string key;
    double value;
    if (ss >> key >> value && key == "scale_mm_per_px" && value > 0.0)
      return value;
  }
  return std::nullopt;
}

}  // namespace detail

struct PgmImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint16_t> samples;            // row-major
  std::optional<double> scale_mm_per_px;         // from header comment, if any
};

inline PgmImage load_pgm16(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open '" + path.string() + "'");

  std::vector<std::string> comments;
  const std::string magic = detail::pnm_token(in, &comments);
  if (magic != "P5")
    throw io_error("malformed header: expected P5, got '" + magic + "' in '" +
                   path.string() + "'");
  const int width = detail::parse_pnm_int(detail::pnm_token(in, &comments), "width");
  const int height = detail::parse_pnm_int(detail::pnm_token(in, &comments), "height");
  const int maxval = detail::parse_pnm_int(detail::pnm_token(in, &comments), "maxval");
  if (width <= 0 || height <= 0)
    throw io_error("malformed header: non-positive dimensions in '" + path.string() + "'");
  if (maxval != 65535)
    throw io_error("unsupported maxval " + std::to_string(maxval) +
                   " (expected 65535) in '" + path.string() + "'");

  PgmImage img;
  img.width = width;
  img.height = height;
  img.scale_mm_per_px = detail::scale_from_comments(comments);
  img.samples.resize(static_cast<std::size_t>(width) * height);

  std::vector<unsigned char> raw(img.samples.size() * 2);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (in.gcount() != static_cast<std::streamsize>(raw.size()))
    throw io_error("truncated sample data in '" + path.string() + "'");
  for (std::size_t i = 0; i < img.samples.size(); ++i)
    img.samples[i] = static_cast<std::uint16_t>((raw[2 * i] << 8) | raw[2 * i + 1]);
  return img;
}

inline void save_pgm16(const std::filesystem::path& path, int width, int height,
                       const std::vector<std::uint16_t>& samples,
                       std::optional<double> scale_mm_per_px = std::nullopt) {
  if (samples.size() != static_cast<std::size_t>(width) * height)
    throw io_error("sample count does not match dimensions for '" + path.string() + "'");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot write '" + path.string() + "'");
  out << "P5\n";
  if (scale_mm_per_px) out << "# scale_mm_per_px " << *scale_mm_per_px << "\n";
  out << width << " " << height << "\n65535\n";
  std::vector<unsigned char> raw(samples.size() * 2);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    raw[2 * i] = static_cast<unsigned char>(samples[i] >> 8);
    raw[2 * i + 1] = static_cast<unsigned char>(samples[i] & 0xff);
  }
  out.write(reinterpret_cast<const char*>(raw.data()),
            static_cast<std::streamsize>(raw.size()));
  if (!out) throw io_error("short write to '" + path.string() + "'");
}

// CSV fallback: heights in mm, one row per line.
inline FloatGrid load_depth_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open '" + path.string() + "'");
  std::vector<double> values;
  int width = -1, row = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() && in.eof()) break;
    std::istringstream ss(line);
    std::string cell;
    int col = 0;
    while (std::getline(ss, cell, ',')) {
      double v;
      try {
        std::size_t used = 0;
        v = std::stod(cell, &used);
        while (used < cell.size() && std::isspace(static_cast<unsigned char>(cell[used])))
          ++used;
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw io_error("malformed value at row " + std::to_string(row) + ", col " +
                       std::to_string(col) + " in '" + path.string() + "'");
      }
      if (!std::isfinite(v) || v < 0.0)
        throw io_error("invalid depth value at row " + std::to_string(row) +
                       ", col " + std::to_string(col) + " in '" + path.string() +
                       "' (must be finite and >= 0 mm)");
      values.push_back(v);
      ++col;
    }
    if (col == 0) continue;  // skip blank lines
    if (width < 0)
      width = col;
    else if (col != width)
      throw io_error("ragged row " + std::to_string(row) + " in '" + path.string() +
                     "': expected " + std::to_string(width) + " columns, got " +
                     std::to_string(col));
    ++row;
  }
  if (width <= 0 || row == 0) throw io_error("malformed header: empty depth file '" +
                                             path.string() + "'");
  return FloatGrid(width, row, std::move(values));
}

inline bool looks_like_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open '" + path.string() + "'");
  char magic[2] = {0, 0};
  in.read(magic, 2);
  return magic[0] == 'P' && magic[1] == '5';
}

// 0.1 mm per PGM count.
inline constexpr double kPgmMmPerCount = 0.1;

inline DepthMap load_depth_map(const std::filesystem::path& path,
                               double scale_mm_per_px) {
  if (!std::filesystem::exists(path))
    throw io_error("no such file: '" + path.string() + "'");
  if (looks_like_pgm(path)) {
    const PgmImage img = load_pgm16(path);
    FloatGrid grid(img.width, img.height, 0.0);
    for (std::size_t i = 0; i < img.samples.size(); ++i)
      grid[i] = img.samples[i] * kPgmMmPerCount;
    return DepthMap(std::move(grid), scale_mm_per_px);
  }
  return DepthMap(load_depth_csv(path), scale_mm_per_px);
}

inline void save_depth_map(const DepthMap& d, const std::filesystem::path& path) {
  std::vector<std::uint16_t> samples(d.heights().size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double counts = std::round(d.heights()[i] / kPgmMmPerCount);
    if (counts < 0.0 || counts > 65535.0)
      throw io_error("height " + std::to_string(d.heights()[i]) +
                     " mm out of 16-bit PGM range for '" + path.string() + "'");
    samples[i] = static_cast<std::uint16_t>(counts);
  }
  save_pgm16(path, d.width(), d.height(), samples, d.scale());
}

// Scale lookup when the caller has none: PGM header comment first, then the
// "<file>.json" sidecar {"scale_mm_per_px": v}.
inline std::optional<double> resolve_scale(const std::filesystem::path& path) {
  if (std::filesystem::exists(path) && looks_like_pgm(path)) {
    const PgmImage img = load_pgm16(path);
    if (img.scale_mm_per_px) return img.scale_mm_per_px;
  }
  const std::filesystem::path sidecar = path.string() + ".json";
  if (std::filesystem::exists(sidecar)) {
    std::ifstream in(sidecar);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw io_error("bad sidecar '" + sidecar.string() + "': " + e.what());
    }
    if (j.contains("scale_mm_per_px")) {
      const double v = j.at("scale_mm_per_px").get<double>();
      if (v > 0.0) return v;
      throw io_error("sidecar scale must be > 0 in '" + sidecar.string() + "'");
    }
  }
  return std::nullopt;
}

// Masks and score maps exported as PGM for eyeballing. Scores are clamped to
// [0, 1] and stretched over the 16-bit range.
inline void save_mask_pgm(const BinaryMask& m, const std::filesystem::path& path) {
  std::vector<std::uint16_t> samples(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) samples[i] = m[i] ? 65535 : 0;
  save_pgm16(path, m.width(), m.height(), samples);
}

inline void save_score_pgm(const FloatGrid& g, const std::filesystem::path& path) {
  std::vector<std::uint16_t> samples(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double v = std::clamp(g[i], 0.0, 1.0);
    samples[i] = static_cast<std::uint16_t>(std::lround(v * 65535.0));
  }
  save_pgm16(path, g.width(), g.height(), samples);
}

}  // namespace snpick
