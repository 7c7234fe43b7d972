#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "hmegen/error.hpp"
#include "hmegen/ink_model.hpp"

namespace hmegen {

struct RasterConfig {
  int target_height = 128;
  int max_width = 2048;
  int thickness = 3;
  int margin = 8;

  void validate() const {
    if (thickness < 1) throw ParameterError("thickness must be at least 1 pixel");
    if (margin < 0) throw ParameterError("margin must be non-negative");
    if (target_height < 2 * margin + thickness)
      throw ParameterError("target height must fit the margins and one stroke");
    if (max_width < 2 * margin + thickness)
      throw ParameterError("max width must fit the margins and one stroke");
  }
};

inline constexpr std::uint8_t kBackground = 255;
inline constexpr std::uint8_t kInk = 0;

/// Row-major 8-bit grayscale image.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  Image() = default;
  Image(int w, int h)
      : width(w), height(h), pixels(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), kBackground) {}

  std::uint8_t& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
  bool is_ink(int x, int y) const { return at(x, y) == kInk; }

  std::size_t ink_count() const {
    return static_cast<std::size_t>(std::count(pixels.begin(), pixels.end(), kInk));
  }

  bool operator==(const Image&) const = default;
};

namespace detail {

inline double squared_distance_to_segment(double px, double py, double ax, double ay, double bx,
                                          double by) {
  const double dx = bx - ax;
  const double dy = by - ay;
  const double len2 = dx * dx + dy * dy;
  double t = len2 > 0.0 ? ((px - ax) * dx + (py - ay) * dy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const double ex = ax + t * dx - px;
  const double ey = ay + t * dy - py;
  return ex * ex + ey * ey;
}

}  // namespace detail

/// Inks every pixel whose center lies within thickness/2 of the segment.
/// Endpoints are snapped to pixel centers (integer coordinates) and clamped
/// to the image; p0 == p1 gives a disc of diameter `thickness`.
inline void draw_segment(Image& image, PenPoint p0, PenPoint p1, int thickness) {
  if (image.width <= 0 || image.height <= 0) return;
  auto snap = [](double v, int hi) {
    return static_cast<double>(std::clamp<long>(std::lround(v), 0L, static_cast<long>(hi - 1)));
  };
  const double ax = snap(p0.x, image.width), ay = snap(p0.y, image.height);
  const double bx = snap(p1.x, image.width), by = snap(p1.y, image.height);
  const double r = thickness / 2.0;
  const double r2 = r * r;
  const int reach = static_cast<int>(std::ceil(r));
  const int x0 = std::max(0, static_cast<int>(std::min(ax, bx)) - reach);
  const int x1 = std::min(image.width - 1, static_cast<int>(std::max(ax, bx)) + reach);
  const int y0 = std::max(0, static_cast<int>(std::min(ay, by)) - reach);
  const int y1 = std::min(image.height - 1, static_cast<int>(std::max(ay, by)) + reach);
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x)
      if (detail::squared_distance_to_segment(x, y, ax, ay, bx, by) <= r2 + 1e-9)
        image.at(x, y) = kInk;
}

/// Placement of ink coordinates in the output image.
struct RasterTransform {
  double scale = 0.0;
  double offset_x = 0.0;
  double offset_y = 0.0;
  int width = 0;
  int height = 0;

  PenPoint apply(const PenPoint& p) const { return {offset_x + p.x * scale, offset_y + p.y * scale}; }
};

/// Uniform, aspect-preserving fit: stroke centerlines span
/// target_height - 2*margin - thickness rows so painted ink spans
/// target_height - 2*margin; width is capped at max_width.
inline RasterTransform raster_transform(const BoundingBox& box, const RasterConfig& config) {
  config.validate();
  const double w = box.width();
  const double h = box.height();
  const double span = config.target_height - 2 * config.margin - config.thickness;
  const int frame = 2 * config.margin + config.thickness;

  RasterTransform t;
  t.scale = h > 0.0 ? span / h : (w > 0.0 ? span / w : 0.0);
  t.width = static_cast<int>(std::ceil(w * t.scale - 1e-9)) + frame;
  if (t.width > config.max_width) {
    t.scale = (config.max_width - frame) / w;
    t.width = std::min(config.max_width,
                       static_cast<int>(std::ceil(w * t.scale - 1e-9)) + frame);
  }
  t.height = config.target_height;
  const double lead = config.margin + (config.thickness - 1) / 2.0;
  const double free_x = (t.width - frame) - w * t.scale;
  const double free_y = span - h * t.scale;
  t.offset_x = lead + free_x / 2.0 - box.min_x * t.scale;
  t.offset_y = lead + free_y / 2.0 - box.min_y * t.scale;
  return t;
}

/// Renders the expression as binary ink on white, connecting consecutive pen
/// points with constant-thickness segments.
inline Image rasterize(const OnlineHME& hme, const RasterConfig& config = {}) {
  std::vector<PenPoint> all;
  for (const Stroke& s : hme.strokes) all.insert(all.end(), s.points.begin(), s.points.end());
  if (all.empty()) throw Error("no ink");
  const RasterTransform t = raster_transform(bounding_box(std::span<const PenPoint>(all)), config);
  Image image(t.width, t.height);
  for (const Stroke& s : hme.strokes) {
    if (s.points.size() == 1) {
      const PenPoint p = t.apply(s.points[0]);
      draw_segment(image, p, p, config.thickness);
    }
    for (std::size_t i = 1; i < s.points.size(); ++i)
      draw_segment(image, t.apply(s.points[i - 1]), t.apply(s.points[i]), config.thickness);
  }
  return image;
}

/// Binary PGM (P5) encoding.
inline std::string encode_pgm(const Image& image) {
  std::string out = "P5\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
  out.append(reinterpret_cast<const char*>(image.pixels.data()), image.pixels.size());
  return out;
}

inline Image decode_pgm(std::string_view bytes) {
  std::size_t pos = 0;
  auto next_field = [&]() {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
        ++pos;
      } else {
        break;
      }
    }
    const std::size_t start = pos;
    while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
    return std::string(bytes.substr(start, pos - start));
  };
  if (next_field() != "P5") throw ParseError("not a binary PGM", 0);
  int w = 0, h = 0, maxval = 0;
  try {
    w = std::stoi(next_field());
    h = std::stoi(next_field());
    maxval = std::stoi(next_field());
  } catch (const std::exception&) {
    throw ParseError("bad PGM header", pos);
  }
  if (maxval != 255 || w <= 0 || h <= 0) throw ParseError("unsupported PGM header", pos);
  ++pos;
  const std::size_t n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  if (bytes.size() - pos < n) throw ParseError("truncated PGM data", bytes.size());
  Image image(w, h);
  std::copy_n(reinterpret_cast<const std::uint8_t*>(bytes.data() + pos), n, image.pixels.begin());
  return image;
}

}  // namespace hmegen
