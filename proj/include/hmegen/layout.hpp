#pragma once

#include <array>
#include <cctype>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hmegen/error.hpp"
#include "hmegen/ink_model.hpp"
#include "hmegen/symbols.hpp"

namespace hmegen {

struct LayoutItem;
using LayoutRow = std::vector<LayoutItem>;

/// Ground-truth math structure before it is tied to ink: one item per symbol,
/// with attached sub-rows keyed by the relation that reaches them. Fractions
/// are their bar symbol (OVER numerator, UNDER denominator); radicals are the
/// root sign (INSIDE body, OVER index).
struct LayoutItem {
  std::string label;  // canonical
  std::string link;   // MathML xml:id, empty when unlinked
  std::array<std::optional<LayoutRow>, kRelationCount> parts{};

  LayoutRow* part(Relation r) {
    auto& p = parts[static_cast<std::size_t>(r)];
    return p ? &*p : nullptr;
  }
  const LayoutRow* part(Relation r) const {
    const auto& p = parts[static_cast<std::size_t>(r)];
    return p ? &*p : nullptr;
  }
  void set_part(Relation r, LayoutRow row) { parts[static_cast<std::size_t>(r)] = std::move(row); }
};

/// Leaf items of a row in reading order (depth-first, parts in relation order).
inline void collect_leaves(const LayoutRow& row, std::vector<const LayoutItem*>& out) {
  for (const LayoutItem& item : row) {
    out.push_back(&item);
    for (Relation r : kAllRelations)
      if (const LayoutRow* p = item.part(r)) collect_leaves(*p, out);
  }
}

namespace detail {

struct LatexToken {
  std::string text;
  std::size_t offset;
};

inline std::vector<LatexToken> tokenize_latex(std::string_view src) {
  std::vector<LatexToken> out;
  std::size_t i = 0;
  while (i < src.size()) {
    const char c = src[i];
    if (c == '$' || std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    const std::size_t start = i;
    if (c == '\\') {
      ++i;
      if (i < src.size() && std::isalpha(static_cast<unsigned char>(src[i]))) {
        while (i < src.size() && std::isalpha(static_cast<unsigned char>(src[i]))) ++i;
      } else if (i < src.size()) {
        ++i;
      } else {
        throw ParseError("dangling backslash in LaTeX", start);
      }
    } else if (static_cast<unsigned char>(c) >= 0x80) {
      // Keep a UTF-8 sequence together.
      ++i;
      while (i < src.size() && (static_cast<unsigned char>(src[i]) & 0xC0) == 0x80) ++i;
    } else {
      ++i;
    }
    out.push_back({std::string(src.substr(start, i - start)), start});
  }
  return out;
}

inline bool is_spacing_command(std::string_view t) {
  return t == "\\," || t == "\\;" || t == "\\!" || t == "\\:" || t == "\\ " ||
         t == "\\quad" || t == "\\qquad" || t == "\\displaystyle" || t == "\\limits" ||
         t == "\\nolimits";
}

inline bool is_transparent_command(std::string_view t) {
  return t == "\\mathrm" || t == "\\mbox" || t == "\\text" || t == "\\mathit" ||
         t == "\\mathbf" || t == "\\textrm" || t == "\\operatorname";
}

class LatexParser {
 public:
  explicit LatexParser(std::string_view src) : src_size_(src.size()), tokens_(tokenize_latex(src)) {}

  LayoutRow parse() {
    LayoutRow row = parse_row(false);
    if (pos_ < tokens_.size())
      throw ParseError("unbalanced '" + tokens_[pos_].text + "' in LaTeX", tokens_[pos_].offset);
    return row;
  }

 private:
  bool at_end() const { return pos_ >= tokens_.size(); }
  const LatexToken& peek() const { return tokens_[pos_]; }
  std::size_t offset() const { return at_end() ? src_size_ : peek().offset; }

  void expect(std::string_view text) {
    if (at_end() || peek().text != text)
      throw ParseError("expected '" + std::string(text) + "' in LaTeX", offset());
    ++pos_;
  }

  LayoutRow parse_row(bool in_optional) {
    LayoutRow row;
    while (!at_end()) {
      const std::string& t = peek().text;
      if (t == "}" || (in_optional && t == "]")) break;
      if (t == "^" || t == "_") {
        if (row.empty()) throw ParseError("script without a base in LaTeX", offset());
        attach_script(row.back());
        continue;
      }
      parse_atom(row);
    }
    return row;
  }

  void attach_script(LayoutItem& base) {
    const bool lower = peek().text == "_";
    const std::size_t at = offset();
    ++pos_;
    LayoutRow arg = parse_arg();
    const bool stacked = symbols::has_stacked_limits(base.label);
    const Relation r = lower ? (stacked ? Relation::kUnder : Relation::kSubscript)
                             : (stacked ? Relation::kOver : Relation::kSuperscript);
    if (base.part(r)) throw ParseError(lower ? "double subscript" : "double superscript", at);
    base.set_part(r, std::move(arg));
  }

  // Appends the items of one atom (a group may contribute several).
  void parse_atom(LayoutRow& row) {
    const LatexToken tok = peek();
    const std::string& t = tok.text;
    if (t == "{") {
      ++pos_;
      LayoutRow inner = parse_row(false);
      expect("}");
      row.insert(row.end(), std::make_move_iterator(inner.begin()),
                 std::make_move_iterator(inner.end()));
      return;
    }
    ++pos_;
    if (t == "\\frac" || t == "\\dfrac" || t == "\\tfrac") {
      LayoutItem bar{std::string(symbols::kFractionBar), {}, {}};
      bar.set_part(Relation::kOver, parse_arg());
      bar.set_part(Relation::kUnder, parse_arg());
      row.push_back(std::move(bar));
      return;
    }
    if (t == "\\sqrt") {
      LayoutItem root{std::string(symbols::kRadical), {}, {}};
      if (!at_end() && peek().text == "[") {
        ++pos_;
        LayoutRow index = parse_row(true);
        expect("]");
        root.set_part(Relation::kOver, std::move(index));
      }
      root.set_part(Relation::kInside, parse_arg());
      row.push_back(std::move(root));
      return;
    }
    if (t == "\\left" || t == "\\right") {
      if (at_end()) throw ParseError("missing delimiter after " + t, tok.offset);
      const std::string delim = peek().text;
      ++pos_;
      if (delim != ".") row.push_back({symbols::canonical_label(delim), {}, {}});
      return;
    }
    if (is_spacing_command(t)) return;
    if (is_transparent_command(t)) {
      LayoutRow inner = parse_arg();
      row.insert(row.end(), std::make_move_iterator(inner.begin()),
                 std::make_move_iterator(inner.end()));
      return;
    }
    if (t == "}" || t == "^" || t == "_")
      throw ParseError("unexpected '" + t + "' in LaTeX", tok.offset);
    row.push_back({symbols::canonical_label(t), {}, {}});
  }

  LayoutRow parse_arg() {
    if (at_end()) throw ParseError("missing argument in LaTeX", offset());
    if (peek().text == "{") {
      ++pos_;
      LayoutRow inner = parse_row(false);
      expect("}");
      return inner;
    }
    LayoutRow single;
    parse_atom(single);
    return single;
  }

  std::size_t src_size_;
  std::vector<LatexToken> tokens_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// Parses a LaTeX ground-truth string ("$...$" delimiters allowed) into a
/// layout tree. Scripts that follow a braced group attach to its last symbol.
inline LayoutRow parse_latex_layout(std::string_view latex) {
  return detail::LatexParser(latex).parse();
}

}  // namespace hmegen
