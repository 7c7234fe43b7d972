#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <span>
#include <vector>

#include "hmegen/distortion_params.hpp"
#include "hmegen/error.hpp"
#include "hmegen/ink_model.hpp"

namespace hmegen {

inline constexpr double radians(double degrees) { return degrees * std::numbers::pi / 180.0; }

// All local models below work in the [0,100]^2 frame of one symbol.

/// Horizontal: x' = x + y tan(a). Vertical: y' = y + x tan(a).
inline std::vector<PenPoint> apply_shear(std::span<const PenPoint> points, Axis axis,
                                         double alpha_deg) {
  if (std::abs(alpha_deg) >= 90.0) throw ParameterError("shear angle must be within (-90, 90) degrees");
  const double t = std::tan(radians(alpha_deg));
  std::vector<PenPoint> out;
  out.reserve(points.size());
  for (const PenPoint& p : points)
    out.push_back(axis == Axis::kHorizontal ? PenPoint{p.x + p.y * t, p.y}
                                            : PenPoint{p.x, p.y + p.x * t});
  return out;
}

/// Vertical: x' = x (cos a - y sin a / 100). Horizontal: y' = y (cos a - x sin a / 100).
/// The scaled coordinate is the one being moved, so a = 0 is the identity.
inline std::vector<PenPoint> apply_shrink(std::span<const PenPoint> points, Axis axis,
                                          double alpha_deg) {
  const double a = radians(alpha_deg);
  const double c = std::sin(std::numbers::pi / 2.0 - a);
  const double s = std::sin(a);
  std::vector<PenPoint> out;
  out.reserve(points.size());
  for (const PenPoint& p : points) {
    if (axis == Axis::kVertical)
      out.push_back({p.x * (c - p.y * s / kFrameSize), p.y});
    else
      out.push_back({p.x, p.y * (c - p.x * s / kFrameSize)});
  }
  return out;
}

/// Vertical: x' = 2/3 (x + 50 cos(4a (x-50)/100)), y' = 2/3 y (cos a - y sin a / 100).
/// Horizontal swaps the roles of x and y. Not the identity at a = 0.
inline std::vector<PenPoint> apply_perspective(std::span<const PenPoint> points, Axis axis,
                                               double alpha_deg) {
  const double a = radians(alpha_deg);
  const double c = std::sin(std::numbers::pi / 2.0 - a);
  const double s = std::sin(a);
  const double half = kFrameSize / 2.0;
  auto bend = [&](double u) { return 2.0 / 3.0 * (u + half * std::cos(4.0 * a * (u - half) / kFrameSize)); };
  auto squeeze = [&](double u) { return 2.0 / 3.0 * u * (c - u * s / kFrameSize); };
  std::vector<PenPoint> out;
  out.reserve(points.size());
  for (const PenPoint& p : points) {
    if (axis == Axis::kVertical)
      out.push_back({bend(p.x), squeeze(p.y)});
    else
      out.push_back({squeeze(p.x), bend(p.y)});
  }
  return out;
}

/// Rotation by `angle_deg` about `pivot`:
/// x' = dx cos + dy sin, y' = -dx sin + dy cos (relative to the pivot).
inline std::vector<PenPoint> apply_rotation(std::span<const PenPoint> points, double angle_deg,
                                            PenPoint pivot) {
  const double c = std::cos(radians(angle_deg));
  const double s = std::sin(radians(angle_deg));
  std::vector<PenPoint> out;
  out.reserve(points.size());
  for (const PenPoint& p : points) {
    const double dx = p.x - pivot.x;
    const double dy = p.y - pivot.y;
    out.push_back({pivot.x + dx * c + dy * s, pivot.y - dx * s + dy * c});
  }
  return out;
}

inline std::vector<PenPoint> apply_scaling(std::span<const PenPoint> points, double k,
                                           PenPoint pivot) {
  if (!(k > 0.0)) throw ParameterError("scale factor must be positive");
  std::vector<PenPoint> out;
  out.reserve(points.size());
  for (const PenPoint& p : points)
    out.push_back({pivot.x + k * (p.x - pivot.x), pivot.y + k * (p.y - pivot.y)});
  return out;
}

/// Deterministic random source. Streams are keyed by (master seed, item
/// index, sub-index) so the order items are processed in does not matter.
class Rng {
 public:
  explicit Rng(std::uint64_t master_seed, std::uint64_t stream = 0, std::uint64_t substream = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                      static_cast<std::uint32_t>(substream), static_cast<std::uint32_t>(substream >> 32)};
    engine_.seed(seq);
  }

  /// Uniform in [lo, hi), built from 53 random bits so results do not depend
  /// on the standard library's distribution implementation.
  double uniform(double lo, double hi) {
    const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
  }

  /// Uniform integer in [lo, hi], rejection sampled.
  int uniform_int(int lo, int hi) {
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % span;
    std::uint64_t v;
    do v = engine_();
    while (v >= limit);
    return lo + static_cast<int>(v % span);
  }

 private:
  std::mt19937_64 engine_;
};

/// Draws (id, axis, alpha, beta, k, gamma) in that order.
inline DistortionParams sample_params(Rng& rng) {
  DistortionParams p;
  p.id = rng.uniform_int(1, 5);
  p.axis = rng.uniform_int(0, 1) == 0 ? Axis::kHorizontal : Axis::kVertical;
  p.alpha = rng.uniform(-kMaxAngleDegrees, kMaxAngleDegrees);
  p.beta = rng.uniform(-kMaxAngleDegrees, kMaxAngleDegrees);
  p.k = rng.uniform(kMinScale, kMaxScale);
  p.gamma = rng.uniform(-kMaxAngleDegrees, kMaxAngleDegrees);
  return p;
}

/// Rejects parameters no model can apply (ids outside 1..5, tangent
/// singularities, non-positive scale). Values outside the sampling ranges but
/// otherwise usable are accepted.
inline void check_params(const DistortionParams& p) {
  if (p.id < 1 || p.id > 5) throw ParameterError("distortion id must be in 1..5");
  if (!std::isfinite(p.alpha) || !std::isfinite(p.beta) || !std::isfinite(p.gamma) ||
      !std::isfinite(p.k))
    throw ParameterError("distortion parameters must be finite");
  if (std::abs(p.alpha) >= 90.0) throw ParameterError("alpha must be within (-90, 90) degrees");
  if (!(p.k > 0.0)) throw ParameterError("scale factor must be positive");
}

inline bool in_sampling_range(const DistortionParams& p) {
  auto angle_ok = [](double a) { return a >= -kMaxAngleDegrees && a <= kMaxAngleDegrees; };
  return p.id >= 1 && p.id <= 5 && angle_ok(p.alpha) && angle_ok(p.beta) && angle_ok(p.gamma) &&
         p.k >= kMinScale && p.k <= kMaxScale;
}

/// The local model selected by params.id, applied in frame coordinates.
inline std::vector<PenPoint> apply_local_model(std::span<const PenPoint> frame,
                                               const DistortionParams& p) {
  const PenPoint frame_center{kFrameSize / 2.0, kFrameSize / 2.0};
  switch (static_cast<DistortionModel>(p.id)) {
    case DistortionModel::kShear: return apply_shear(frame, p.axis, p.alpha);
    case DistortionModel::kShrink: return apply_shrink(frame, p.axis, p.alpha);
    case DistortionModel::kPerspective: return apply_perspective(frame, p.axis, p.alpha);
    case DistortionModel::kShrinkRotation:
      return apply_rotation(apply_shrink(frame, p.axis, p.alpha), p.beta, frame_center);
    case DistortionModel::kPerspectiveRotation:
      return apply_rotation(apply_perspective(frame, p.axis, p.alpha), p.beta, frame_center);
  }
  throw ParameterError("distortion id must be in 1..5");
}

/// Distorted copies of one symbol's strokes (in symbol.strokes order). The
/// symbol is distorted in its own frame and re-anchored on its original
/// bounding-box center.
inline std::vector<Stroke> distort_symbol(const OnlineHME& hme, std::size_t symbol,
                                          const DistortionParams& params) {
  check_params(params);
  const std::vector<PenPoint> points = hme.symbol_points(symbol);
  const BoundingBox box = bounding_box(std::span<const PenPoint>(points));
  std::vector<PenPoint> moved =
      denormalize_from_frame(apply_local_model(normalize_to_frame(points, box), params), box);

  const PenPoint before = box.center();
  const PenPoint after = bounding_box(std::span<const PenPoint>(moved)).center();
  for (PenPoint& p : moved) {
    p.x += before.x - after.x;
    p.y += before.y - after.y;
  }

  std::vector<Stroke> out;
  std::size_t next = 0;
  for (std::size_t s : hme.symbols[symbol].strokes) {
    const std::size_t n = hme.strokes[s].points.size();
    out.push_back({std::vector<PenPoint>(moved.begin() + static_cast<std::ptrdiff_t>(next),
                                         moved.begin() + static_cast<std::ptrdiff_t>(next + n))});
    next += n;
  }
  return out;
}

/// Local distortion of every symbol with shared parameters, then global
/// rotation by gamma and scaling by k about the expression's box center.
inline OnlineHME distort_hme(const OnlineHME& hme, const DistortionParams& params) {
  check_params(params);
  OnlineHME out = hme;
  for (std::size_t sym = 0; sym < hme.symbols.size(); ++sym) {
    auto strokes = distort_symbol(hme, sym, params);
    for (std::size_t i = 0; i < strokes.size(); ++i)
      out.strokes[hme.symbols[sym].strokes[i]] = std::move(strokes[i]);
  }

  const PenPoint pivot = bounding_box(std::span<const Stroke>(out.strokes)).center();
  for (Stroke& s : out.strokes)
    s.points = apply_scaling(apply_rotation(s.points, params.gamma, pivot), params.k, pivot);

  out.provenance.params = params;
  out.provenance.strategy = hme.provenance.strategy == Strategy::kDecomposition
                                ? Strategy::kHybrid
                                : Strategy::kDistortion;
  return out;
}

}  // namespace hmegen
