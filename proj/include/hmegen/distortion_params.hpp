#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

namespace hmegen {

/// Local distortion model selector.
enum class DistortionModel : std::uint8_t {
  kShear = 1,
  kShrink = 2,
  kPerspective = 3,
  kShrinkRotation = 4,
  kPerspectiveRotation = 5,
};

enum class Axis : std::uint8_t { kHorizontal, kVertical };

inline constexpr double kMaxAngleDegrees = 10.0;
inline constexpr double kMinScale = 0.7;
inline constexpr double kMaxScale = 1.3;

/// The sampled variables that fully determine one distorted pattern.
/// Angles are in degrees.
struct DistortionParams {
  int id = 1;
  Axis axis = Axis::kHorizontal;
  double alpha = 0.0;
  double beta = 0.0;
  double k = 1.0;
  double gamma = 0.0;

  bool operator==(const DistortionParams&) const = default;
};

inline constexpr std::string_view to_string(Axis axis) {
  return axis == Axis::kHorizontal ? "horizontal" : "vertical";
}

inline std::optional<Axis> parse_axis(std::string_view text) {
  if (text == "horizontal" || text == "h" || text == "H") return Axis::kHorizontal;
  if (text == "vertical" || text == "v" || text == "V") return Axis::kVertical;
  return std::nullopt;
}

}  // namespace hmegen
