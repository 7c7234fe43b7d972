#pragma once

// Test fixtures built without the library: InkML text assembled by hand,
// random expressions that carry their own expected canonical LaTeX, and a
// brute-force pixel distance oracle.

#include <cmath>
#include <cstdint>
#include <iomanip>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "hmegen/hmegen.hpp"

namespace fixture {

struct Glyph {
  std::string label;
  double x = 0;  // top-left of the glyph box
  double y = 0;
  double w = 10;
  double h = 10;
  int strokes = 1;
  bool dot = false;  // one single-point stroke
};

inline std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

/// Polyline points for stroke `k` of a glyph: a zig-zag for the first stroke,
/// a diagonal for the rest.
inline std::vector<hmegen::PenPoint> glyph_stroke(const Glyph& g, int k) {
  if (g.dot) return {{g.x, g.y}};
  if (k == 0)
    return {{g.x, g.y}, {g.x + g.w * 0.3, g.y + g.h}, {g.x + g.w * 0.6, g.y + g.h * 0.2},
            {g.x + g.w, g.y + g.h * 0.9}};
  return {{g.x + g.w, g.y}, {g.x, g.y + g.h}};
}

inline std::string number(double v, int digits = 9) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(digits) << v;
  return out.str();
}

/// CROHME-style InkML with a LaTeX truth annotation (omitted when empty) and
/// one leaf traceGroup per glyph.
inline std::string inkml(const std::string& truth, const std::vector<Glyph>& glyphs,
                         const std::string& mathml = "") {
  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<ink xmlns=\"http://www.w3.org/2003/InkML\">\n"
      << "<traceFormat><channel name=\"X\" type=\"decimal\"/><channel name=\"Y\" type=\"decimal\"/>"
      << "</traceFormat>\n<annotation type=\"writer\">fixture</annotation>\n";
  if (!truth.empty()) out << "<annotation type=\"truth\">$" << escape(truth) << "$</annotation>\n";
  if (!mathml.empty()) out << "<annotationXML type=\"truth\" encoding=\"Content-MathML\">" << mathml
                           << "</annotationXML>\n";
  int trace = 0;
  std::vector<std::vector<int>> owned;
  for (const Glyph& g : glyphs) {
    owned.emplace_back();
    for (int k = 0; k < (g.dot ? 1 : g.strokes); ++k) {
      out << "<trace id=\"t" << trace << "\">";
      const auto pts = glyph_stroke(g, k);
      for (std::size_t i = 0; i < pts.size(); ++i)
        out << (i ? ", " : "") << number(pts[i].x) << ' ' << number(pts[i].y);
      out << "</trace>\n";
      owned.back().push_back(trace++);
    }
  }
  out << "<traceGroup xml:id=\"seg\">\n<annotation type=\"truth\">Segmentation</annotation>\n";
  for (std::size_t s = 0; s < glyphs.size(); ++s) {
    out << "<traceGroup xml:id=\"g" << s << "\">\n<annotation type=\"truth\">" << escape(glyphs[s].label)
        << "</annotation>\n";
    for (int t : owned[s]) out << "<traceView traceDataRef=\"t" << t << "\"/>\n";
    if (!mathml.empty()) out << "<annotationXML href=\"m" << s << "\"/>\n";
    out << "</traceGroup>\n";
  }
  out << "</traceGroup>\n</ink>\n";
  return out.str();
}

/// Glyphs laid out left to right, one per label.
inline std::vector<Glyph> row(const std::vector<std::string>& labels) {
  std::vector<Glyph> out;
  for (std::size_t i = 0; i < labels.size(); ++i)
    out.push_back({labels[i], 15.0 * static_cast<double>(i), 0, 10, 10, 1, false});
  return out;
}

inline hmegen::OnlineHME hme(const std::string& truth, const std::vector<std::string>& labels) {
  hmegen::OnlineHME h = hmegen::parse_inkml(inkml(truth, row(labels)));
  h.provenance.source = "fixture.inkml";
  return h;
}

inline hmegen::OnlineHME fig5() {
  return hme("x^2+2x+1", {"x", "2", "+", "2", "x", "+", "1"});
}

// ---------------------------------------------------------------------------
// Random expressions. Each piece carries its loose truth LaTeX, the expected
// canonical token string, and its symbol labels in reading order (item, then
// subscript, superscript, numerator, denominator, radicand).

struct Expr {
  std::string truth;
  std::string canonical;
  std::vector<std::string> labels;
};

class ExprGenerator {
 public:
  explicit ExprGenerator(std::uint64_t seed) : rng_(seed) {}

  Expr expression(int depth = 2) { return row(depth, pick(1, 4)); }

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  int pick(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

 private:
  static void append(Expr& into, const Expr& e) {
    into.truth += e.truth;
    if (!into.canonical.empty() && !e.canonical.empty()) into.canonical += ' ';
    into.canonical += e.canonical;
    into.labels.insert(into.labels.end(), e.labels.begin(), e.labels.end());
  }

  Expr atom() {
    static const std::vector<std::string> pool = {"a", "b", "x", "y", "n", "1", "2", "3", "7"};
    const std::string s = pool[static_cast<std::size_t>(pick(0, static_cast<int>(pool.size()) - 1))];
    return {s, s, {s}};
  }

  Expr op() {
    static const std::vector<std::pair<std::string, std::string>> ops = {
        {"+", "+"}, {"-", "-"}, {"=", "="}, {"\\times ", "\\times"}, {"<", "<"}};
    const auto& [truth, canon] = ops[static_cast<std::size_t>(pick(0, static_cast<int>(ops.size()) - 1))];
    return {truth, canon, {canon}};
  }

  Expr group(const Expr& e) { return {"{" + e.truth + "}", e.canonical, e.labels}; }

  Expr item(int depth) {
    const int kind = depth > 0 ? pick(0, 6) : 0;
    switch (kind) {
      case 1: {  // superscript
        Expr base = atom();
        Expr sup = depth > 1 && pick(0, 1) ? row(depth - 1, pick(1, 2)) : atom();
        return {base.truth + "^" + group(sup).truth, base.canonical + " ^ { " + sup.canonical + " }",
                cat(base.labels, sup.labels)};
      }
      case 2: {  // subscript and superscript
        Expr base = atom(), sub = atom(), sup = atom();
        return {base.truth + "_" + group(sub).truth + "^" + group(sup).truth,
                base.canonical + " _ { " + sub.canonical + " } ^ { " + sup.canonical + " }",
                cat(cat(base.labels, sub.labels), sup.labels)};
      }
      case 3: {  // fraction
        Expr num = row(depth - 1, pick(1, 3)), den = row(depth - 1, pick(1, 2));
        return {"\\frac" + group(num).truth + group(den).truth,
                "\\frac { " + num.canonical + " } { " + den.canonical + " }",
                cat(cat({"-"}, num.labels), den.labels)};
      }
      case 4: {  // radical
        Expr body = row(depth - 1, pick(1, 3));
        return {"\\sqrt" + group(body).truth, "\\sqrt { " + body.canonical + " }", cat({"\\sqrt"}, body.labels)};
      }
      case 5: {  // parenthesized sum
        Expr body = row(depth - 1, 2);
        return {"(" + body.truth + ")", "( " + body.canonical + " )", cat(cat({"("}, body.labels), {")"})};
      }
      default: return atom();
    }
  }

  Expr row(int depth, int items) {
    Expr out;
    for (int i = 0; i < items; ++i) {
      if (i > 0 && pick(0, 2) > 0) append(out, op());
      append(out, item(depth));
    }
    return out;
  }

  static std::vector<std::string> cat(std::vector<std::string> a, const std::vector<std::string>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
  }

  std::mt19937_64 rng_;
};

/// Random glyph placement for the labels of an expression, coordinates with
/// nine decimal places.
inline std::vector<Glyph> scatter(const std::vector<std::string>& labels, ExprGenerator& gen) {
  std::vector<Glyph> out;
  double x = gen.uniform(0, 50);
  for (const std::string& l : labels) {
    Glyph g{l, x, gen.uniform(0, 40), gen.uniform(3, 30), gen.uniform(3, 30), gen.pick(1, 2), false};
    out.push_back(g);
    x += g.w + gen.uniform(1, 10);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Raster oracle

inline double distance_to_segment(double px, double py, double ax, double ay, double bx, double by) {
  const double dx = bx - ax, dy = by - ay;
  const double len2 = dx * dx + dy * dy;
  double t = len2 > 0 ? ((px - ax) * dx + (py - ay) * dy) / len2 : 0.0;
  t = t < 0 ? 0 : (t > 1 ? 1 : t);
  return std::hypot(ax + t * dx - px, ay + t * dy - py);
}

/// Largest distance from an ink pixel center to the nearest segment of the
/// polylines (already in image coordinates).
inline double worst_ink_distance(const hmegen::Image& img,
                                 const std::vector<std::vector<hmegen::PenPoint>>& polylines) {
  double worst = 0;
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      if (!img.is_ink(x, y)) continue;
      double best = std::numeric_limits<double>::infinity();
      for (const auto& pl : polylines) {
        if (pl.size() == 1) best = std::min(best, std::hypot(pl[0].x - x, pl[0].y - y));
        for (std::size_t i = 1; i < pl.size(); ++i)
          best = std::min(best, distance_to_segment(x, y, pl[i - 1].x, pl[i - 1].y, pl[i].x, pl[i].y));
      }
      worst = std::max(worst, best);
    }
  return worst;
}

}  // namespace fixture
