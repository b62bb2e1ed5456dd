#pragma once

// Raster file I/O: binary PGM (P5, 8/16-bit) and grayscale PNG in, PGM out.
// Outputs go through write_file_atomic so an interrupted run never leaves a
// truncated file behind.

#include <png.h>

#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "alw/error.hpp"
#include "alw/image.hpp"

namespace alw::io {

/// Writes `bytes` to a sibling temp file and renames it over `path`.
inline void write_file_atomic(const std::filesystem::path& path, std::string_view bytes) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InvalidInput("cannot open " + tmp.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw InvalidInput("failed writing " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw InvalidInput("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
  }
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace detail {

inline std::size_t skip_pnm_space(std::string_view s, std::size_t pos) {
  while (pos < s.size()) {
    if (std::isspace(static_cast<unsigned char>(s[pos]))) {
      ++pos;
    } else if (s[pos] == '#') {
      while (pos < s.size() && s[pos] != '\n') ++pos;
    } else {
      break;
    }
  }
  return pos;
}

inline long parse_pnm_int(std::string_view s, std::size_t& pos) {
  pos = skip_pnm_space(s, pos);
  const std::size_t start = pos;
  while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
  if (pos == start || pos - start > 9) throw InvalidInput("malformed PGM header");
  return std::stol(std::string(s.substr(start, pos - start)));
}

}  // namespace detail

/// Parses binary PGM bytes into raw (unnormalized) intensities.
inline Raster<double> decode_pgm(std::string_view bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') throw InvalidInput("not a binary PGM (P5) file");
  std::size_t pos = 2;
  const long w = detail::parse_pnm_int(bytes, pos);
  const long h = detail::parse_pnm_int(bytes, pos);
  const long maxval = detail::parse_pnm_int(bytes, pos);
  if (w <= 0 || h <= 0) throw InvalidInput("PGM has zero area");
  if (maxval <= 0 || maxval > 65535) throw InvalidInput("PGM maxval out of range");
  if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos]))) {
    throw InvalidInput("malformed PGM header");
  }
  ++pos;
  const std::size_t bpp = maxval > 255 ? 2 : 1;
  const std::size_t n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  if (bytes.size() - pos < n * bpp) throw InvalidInput("PGM pixel data truncated");
  Raster<double> out(static_cast<int>(w), static_cast<int>(h));
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data() + pos);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = bpp == 1 ? p[i] : static_cast<double>((p[2 * i] << 8) | p[2 * i + 1]);
  }
  return out;
}

inline Raster<double> decode_png(std::string_view bytes) {
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&img, bytes.data(), bytes.size())) {
    throw InvalidInput(std::string("cannot decode PNG: ") + img.message);
  }
  const bool gray = (img.format & PNG_FORMAT_FLAG_COLOR) == 0;
  if (!gray) {
    png_image_free(&img);
    throw InvalidInput("only grayscale PNG images are supported");
  }
  const bool wide = (img.format & PNG_FORMAT_FLAG_LINEAR) != 0;
  img.format = wide ? PNG_FORMAT_LINEAR_Y : PNG_FORMAT_GRAY;
  const int w = static_cast<int>(img.width);
  const int h = static_cast<int>(img.height);
  Raster<double> out(w, h);
  if (wide) {
    std::vector<png_uint_16> buf(PNG_IMAGE_SIZE(img) / 2);
    if (!png_image_finish_read(&img, nullptr, buf.data(), 0, nullptr)) {
      throw InvalidInput(std::string("cannot decode PNG: ") + img.message);
    }
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = buf[i];
  } else {
    std::vector<png_byte> buf(PNG_IMAGE_SIZE(img));
    if (!png_image_finish_read(&img, nullptr, buf.data(), 0, nullptr)) {
      throw InvalidInput(std::string("cannot decode PNG: ") + img.message);
    }
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = buf[i];
  }
  return out;
}

/// Reads a PGM (P5) or grayscale PNG file, detected by signature, as raw intensities.
inline Raster<double> read_raster(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  if (bytes.size() >= 8 && static_cast<unsigned char>(bytes[0]) == 0x89 && bytes.compare(1, 3, "PNG") == 0) {
    return decode_png(bytes);
  }
  return decode_pgm(bytes);
}

/// 8-bit P5 encoding of a [0,1] image (values scaled by 255 and rounded).
inline std::string encode_pgm(const GrayImage& image) {
  std::string out = "P5\n" + std::to_string(image.width()) + " " + std::to_string(image.height()) + "\n255\n";
  out.reserve(out.size() + image.size());
  for (double v : image.pixels().values()) out.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0))));
  return out;
}

/// 8-bit P5 encoding of a binary mask: 255 inside, 0 outside.
inline std::string encode_mask_pgm(const Mask& mask) {
  std::string out = "P5\n" + std::to_string(mask.width()) + " " + std::to_string(mask.height()) + "\n255\n";
  out.reserve(out.size() + mask.size());
  for (auto v : mask.values()) out.push_back(static_cast<char>(v ? 255 : 0));
  return out;
}

inline void write_pgm(const std::filesystem::path& path, const GrayImage& image) {
  write_file_atomic(path, encode_pgm(image));
}

inline void write_mask_pgm(const std::filesystem::path& path, const Mask& mask) {
  write_file_atomic(path, encode_mask_pgm(mask));
}

/// Reads a mask PGM; any nonzero pixel is inside.
inline Mask read_mask_pgm(const std::filesystem::path& path) {
  const auto raw = decode_pgm(read_file(path));
  Mask m(raw.width(), raw.height());
  for (std::size_t i = 0; i < raw.size(); ++i) m[i] = raw[i] > 0.0 ? 1 : 0;
  return m;
}

}  // namespace alw::io
