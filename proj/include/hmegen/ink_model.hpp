#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hmegen/distortion_params.hpp"
#include "hmegen/error.hpp"

namespace hmegen {

/// One sampled pen position. Y grows downward, as in InkML trace data.
struct PenPoint {
  double x = 0.0;
  double y = 0.0;

  bool operator==(const PenPoint&) const = default;
};

/// Pen-down to pen-up sequence of points.
struct Stroke {
  std::vector<PenPoint> points;

  bool operator==(const Stroke&) const = default;
};

struct BoundingBox {
  double min_x = 0.0;
  double min_y = 0.0;
  double max_x = 0.0;
  double max_y = 0.0;

  double width() const { return max_x - min_x; }
  double height() const { return max_y - min_y; }
  PenPoint center() const { return {(min_x + max_x) / 2.0, (min_y + max_y) / 2.0}; }
  double diagonal() const { return std::hypot(width(), height()); }

  bool operator==(const BoundingBox&) const = default;
};

inline BoundingBox bounding_box(std::span<const PenPoint> points) {
  if (points.empty()) throw Error("empty point set");
  BoundingBox box{points[0].x, points[0].y, points[0].x, points[0].y};
  for (const PenPoint& p : points.subspan(1)) {
    box.min_x = std::min(box.min_x, p.x);
    box.min_y = std::min(box.min_y, p.y);
    box.max_x = std::max(box.max_x, p.x);
    box.max_y = std::max(box.max_y, p.y);
  }
  return box;
}

inline BoundingBox bounding_box(std::span<const Stroke> strokes) {
  std::vector<PenPoint> all;
  for (const Stroke& s : strokes) all.insert(all.end(), s.points.begin(), s.points.end());
  return bounding_box(std::span<const PenPoint>(all));
}

/// Side length of the normalized frame the local distortion models work in.
inline constexpr double kFrameSize = 100.0;

namespace detail {

// Ink units per frame unit along each axis. A zero-extent axis borrows the
// other axis's scale so shapes that gain extent in the frame (a sheared
// vertical bar) keep it on the way back; a dot gets scale 0.
struct FrameScale {
  double x;
  double y;
};

inline FrameScale frame_scale(const BoundingBox& box) {
  const double sx = box.width() / kFrameSize;
  const double sy = box.height() / kFrameSize;
  if (sx > 0.0 && sy > 0.0) return {sx, sy};
  if (sx > 0.0) return {sx, sx};
  if (sy > 0.0) return {sy, sy};
  return {0.0, 0.0};
}

}  // namespace detail

/// Maps `box` affinely onto [0,100]x[0,100]. A zero-extent axis maps to 50.
inline std::vector<PenPoint> normalize_to_frame(std::span<const PenPoint> points,
                                                const BoundingBox& box) {
  const double w = box.width();
  const double h = box.height();
  std::vector<PenPoint> out;
  out.reserve(points.size());
  for (const PenPoint& p : points) {
    out.push_back({w > 0.0 ? (p.x - box.min_x) / w * kFrameSize : kFrameSize / 2.0,
                   h > 0.0 ? (p.y - box.min_y) / h * kFrameSize : kFrameSize / 2.0});
  }
  return out;
}

/// Inverse of normalize_to_frame for the same box.
inline std::vector<PenPoint> denormalize_from_frame(std::span<const PenPoint> points,
                                                    const BoundingBox& box) {
  const auto scale = detail::frame_scale(box);
  const double ox = box.width() > 0.0 ? box.min_x : box.min_x - kFrameSize / 2.0 * scale.x;
  const double oy = box.height() > 0.0 ? box.min_y : box.min_y - kFrameSize / 2.0 * scale.y;
  std::vector<PenPoint> out;
  out.reserve(points.size());
  for (const PenPoint& p : points) out.push_back({ox + p.x * scale.x, oy + p.y * scale.y});
  return out;
}

/// A labeled group of strokes forming one math symbol.
struct Symbol {
  std::string id;
  std::string label;
  std::vector<std::size_t> strokes;

  bool operator==(const Symbol&) const = default;
};

enum class Relation : std::uint8_t {
  kRight,
  kSubscript,
  kSuperscript,
  kOver,
  kUnder,
  kInside,
};

inline constexpr std::size_t kRelationCount = 6;

inline constexpr std::array<Relation, kRelationCount> kAllRelations = {
    Relation::kRight, Relation::kSubscript, Relation::kSuperscript,
    Relation::kOver,  Relation::kUnder,     Relation::kInside};

inline constexpr std::string_view to_string(Relation r) {
  switch (r) {
    case Relation::kRight: return "RIGHT";
    case Relation::kSubscript: return "SUBSCRIPT";
    case Relation::kSuperscript: return "SUPERSCRIPT";
    case Relation::kOver: return "OVER";
    case Relation::kUnder: return "UNDER";
    case Relation::kInside: return "INSIDE";
  }
  return "?";
}

struct SrtEdge {
  std::size_t parent;
  Relation relation;
  std::size_t child;

  bool operator==(const SrtEdge&) const = default;
};

struct SrtNode {
  std::string label;
  // Index of the symbol this node stands for, in the expression the tree was
  // built from. Trees owned by an OnlineHME have symbol == node index.
  std::size_t symbol = 0;
  std::array<std::optional<std::size_t>, kRelationCount> children{};

  bool operator==(const SrtNode&) const = default;
};

/// Symbols linked by spatial relations. Each node has at most one child per
/// relation; a subexpression is the RIGHT chain starting at its first symbol.
class SymbolRelationTree {
 public:
  SymbolRelationTree() = default;

  std::size_t add_node(std::string label, std::size_t symbol) {
    nodes_.push_back(SrtNode{std::move(label), symbol, {}});
    return nodes_.size() - 1;
  }

  void link(std::size_t parent, Relation relation, std::size_t child) {
    if (parent >= nodes_.size() || child >= nodes_.size())
      throw StructureError("relation tree edge references a missing node");
    auto& slot = nodes_[parent].children[static_cast<std::size_t>(relation)];
    if (slot)
      throw StructureError("node " + std::to_string(parent) + " already has a " +
                           std::string(to_string(relation)) + " child");
    slot = child;
  }

  void set_root(std::size_t root) { root_ = root; }

  std::size_t size() const { return nodes_.size(); }
  bool empty() const { return nodes_.empty(); }
  std::size_t root() const { return root_; }
  const SrtNode& node(std::size_t i) const { return nodes_.at(i); }
  const std::vector<SrtNode>& nodes() const { return nodes_; }

  std::optional<std::size_t> child(std::size_t i, Relation r) const {
    return nodes_.at(i).children[static_cast<std::size_t>(r)];
  }

  std::vector<SrtEdge> edges() const {
    std::vector<SrtEdge> out;
    for (std::size_t i = 0; i < nodes_.size(); ++i)
      for (Relation r : kAllRelations)
        if (auto c = child(i, r)) out.push_back({i, r, *c});
    return out;
  }

  /// Nodes of the RIGHT chain that starts at `first`.
  std::vector<std::size_t> chain(std::size_t first) const {
    std::vector<std::size_t> out;
    for (std::optional<std::size_t> cur = first; cur; cur = child(*cur, Relation::kRight)) {
      out.push_back(*cur);
      if (out.size() > nodes_.size()) throw StructureError("cycle in relation tree");
    }
    return out;
  }

  /// Throws StructureError unless the tree is a single rooted, acyclic tree
  /// covering every node exactly once.
  void validate() const {
    if (nodes_.empty()) throw StructureError("relation tree is empty");
    if (root_ >= nodes_.size()) throw StructureError("relation tree root out of range");
    std::vector<int> parents(nodes_.size(), 0);
    for (const SrtEdge& e : edges()) ++parents[e.child];
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      if (i == root_ && parents[i] != 0)
        throw StructureError("relation tree root has a parent");
      if (i != root_ && parents[i] != 1)
        throw StructureError("relation tree node " + std::to_string(i) + " (" +
                             nodes_[i].label + ") has " + std::to_string(parents[i]) +
                             " parents");
    }
    // One parent per non-root node plus full reachability from the root rules
    // out cycles.
    std::vector<bool> seen(nodes_.size(), false);
    std::vector<std::size_t> stack{root_};
    std::size_t reached = 0;
    while (!stack.empty()) {
      std::size_t n = stack.back();
      stack.pop_back();
      if (seen[n]) throw StructureError("cycle in relation tree");
      seen[n] = true;
      ++reached;
      for (Relation r : kAllRelations)
        if (auto c = child(n, r)) stack.push_back(*c);
    }
    if (reached != nodes_.size()) throw StructureError("relation tree is not connected");
  }

  bool operator==(const SymbolRelationTree&) const = default;

 private:
  std::vector<SrtNode> nodes_;
  std::size_t root_ = 0;
};

enum class Strategy : std::uint8_t { kOriginal, kDistortion, kDecomposition, kHybrid };

inline constexpr std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::kOriginal: return "original";
    case Strategy::kDistortion: return "distortion";
    case Strategy::kDecomposition: return "decomposition";
    case Strategy::kHybrid: return "hybrid";
  }
  return "?";
}

inline std::optional<Strategy> parse_strategy(std::string_view text) {
  for (Strategy s : {Strategy::kOriginal, Strategy::kDistortion, Strategy::kDecomposition,
                     Strategy::kHybrid})
    if (text == to_string(s)) return s;
  return std::nullopt;
}

/// Where a generated expression came from.
struct Provenance {
  std::string source;
  Strategy strategy = Strategy::kOriginal;
  std::optional<DistortionParams> params;
  std::optional<int> rule;  // decomposition rule (1..3)
  std::string anchor;       // operator or relation the rule split on

  bool operator==(const Provenance&) const = default;
};

/// A complete online handwritten expression.
struct OnlineHME {
  std::vector<Stroke> strokes;
  std::vector<Symbol> symbols;
  SymbolRelationTree srt;
  std::string latex;
  Provenance provenance;

  std::size_t point_count() const {
    std::size_t n = 0;
    for (const Stroke& s : strokes) n += s.points.size();
    return n;
  }

  std::vector<PenPoint> symbol_points(std::size_t symbol) const {
    std::vector<PenPoint> out;
    for (std::size_t s : symbols.at(symbol).strokes)
      out.insert(out.end(), strokes.at(s).points.begin(), strokes.at(s).points.end());
    return out;
  }

  /// Checks stroke ownership and the tree/symbol correspondence.
  void validate() const {
    if (symbols.empty()) throw StructureError("expression has no symbols");
    std::vector<int> owners(strokes.size(), 0);
    for (const Symbol& sym : symbols) {
      if (sym.strokes.empty())
        throw StructureError("symbol " + sym.id + " owns no strokes");
      for (std::size_t s : sym.strokes) {
        if (s >= strokes.size())
          throw StructureError("symbol " + sym.id + " references stroke " +
                               std::to_string(s) + " which does not exist");
        ++owners[s];
      }
    }
    for (std::size_t i = 0; i < strokes.size(); ++i) {
      if (owners[i] != 1)
        throw StructureError("stroke " + std::to_string(i) + " is owned by " +
                             std::to_string(owners[i]) + " symbols");
      if (strokes[i].points.empty())
        throw StructureError("stroke " + std::to_string(i) + " is empty");
      for (const PenPoint& p : strokes[i].points)
        if (!std::isfinite(p.x) || !std::isfinite(p.y))
          throw StructureError("stroke " + std::to_string(i) + " has a non-finite point");
    }
    if (srt.size() != symbols.size())
      throw StructureError("relation tree does not cover every symbol");
    srt.validate();
    for (std::size_t i = 0; i < symbols.size(); ++i)
      if (srt.node(i).symbol != i || srt.node(i).label != symbols[i].label)
        throw StructureError("relation tree node " + std::to_string(i) +
                             " does not match symbol " + symbols[i].id);
  }
};

}  // namespace hmegen
