#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "stereorig/errors.hpp"
#include "stereorig/grid.hpp"

// Binary portable graymap (P5), 8- and 16-bit. 16-bit samples are big-endian.

namespace stereorig::pgm {

struct Graymap {
  int width = 0;
  int height = 0;
  int maxval = 255;
  std::vector<std::uint16_t> samples;
};

inline std::string encode(const Graymap &g) {
  if (g.maxval < 1 || g.maxval > 65535)
    throw DomainError("pgm maxval must lie in [1, 65535]");
  if (g.samples.size() != static_cast<std::size_t>(g.width) * g.height)
    throw DomainError("pgm sample count does not match its size");
  std::string out = "P5\n" + std::to_string(g.width) + " " +
                    std::to_string(g.height) + "\n" +
                    std::to_string(g.maxval) + "\n";
  const bool wide = g.maxval > 255;
  out.reserve(out.size() + g.samples.size() * (wide ? 2 : 1));
  for (std::uint16_t s : g.samples) {
    if (wide)
      out += static_cast<char>(s >> 8);
    out += static_cast<char>(s & 0xFF);
  }
  return out;
}

inline Graymap decode(std::string_view bytes) {
  std::size_t pos = 0;
  auto skip_space = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n')
          ++pos;
      } else if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto read_int = [&](const char *what) {
    skip_space();
    long v = 0;
    std::size_t digits = 0;
    while (pos < bytes.size() &&
           std::isdigit(static_cast<unsigned char>(bytes[pos]))) {
      v = v * 10 + (bytes[pos++] - '0');
      if (v > 1 << 24)
        throw ValidationError(std::string("pgm ") + what + " too large");
      ++digits;
    }
    if (digits == 0)
      throw ValidationError(std::string("pgm header: bad ") + what);
    return static_cast<int>(v);
  };

  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5')
    throw ValidationError("not a binary PGM (P5) file");
  pos = 2;
  Graymap g;
  g.width = read_int("width");
  g.height = read_int("height");
  g.maxval = read_int("maxval");
  if (g.width <= 0 || g.height <= 0 || g.maxval <= 0 || g.maxval > 65535)
    throw ValidationError("pgm header values out of range");
  if (pos >= bytes.size() ||
      !std::isspace(static_cast<unsigned char>(bytes[pos])))
    throw ValidationError("pgm header not terminated");
  ++pos;
  const std::size_t n = static_cast<std::size_t>(g.width) * g.height;
  const std::size_t bpp = g.maxval > 255 ? 2 : 1;
  if (bytes.size() - pos < n * bpp)
    throw ValidationError("pgm pixel data truncated");
  g.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto b0 = static_cast<unsigned char>(bytes[pos + i * bpp]);
    if (bpp == 2) {
      const auto b1 = static_cast<unsigned char>(bytes[pos + i * bpp + 1]);
      g.samples[i] = static_cast<std::uint16_t>((b0 << 8) | b1);
    } else {
      g.samples[i] = b0;
    }
  }
  return g;
}

/// 8-bit graymap of an image in [0, 1]: round(v * 255).
inline Graymap from_image(const Image &img) {
  Graymap g{img.width(), img.height(), 255, {}};
  g.samples.reserve(img.size());
  for (double v : img.data())
    g.samples.push_back(static_cast<std::uint16_t>(
        std::lround(std::clamp(v, 0.0, 1.0) * 255.0)));
  return g;
}

inline Image to_image(const Graymap &g) {
  Image img(g.width, g.height, 0.0);
  auto d = img.data();
  for (std::size_t i = 0; i < g.samples.size(); ++i)
    d[i] = static_cast<double>(g.samples[i]) / g.maxval;
  return img;
}

/// 16-bit fixed point: round(v * scale) clamped to [0, 65535]; sentinels and
/// negatives become 0.
inline Graymap fixed_point16(const Grid<double> &map, double scale) {
  Graymap g{map.width(), map.height(), 65535, {}};
  g.samples.reserve(map.size());
  for (double v : map.data()) {
    if (!has_value(v) || !(v > 0.0)) {
      g.samples.push_back(0);
      continue;
    }
    g.samples.push_back(static_cast<std::uint16_t>(
        std::llround(std::min(v * scale, 65535.0))));
  }
  return g;
}

} // namespace stereorig::pgm
