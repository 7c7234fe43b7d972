#pragma once

#include <string>
#include <vector>

#include "hmegen/error.hpp"
#include "hmegen/ink_model.hpp"
#include "hmegen/symbols.hpp"

namespace hmegen {

namespace detail {

class LatexEmitter {
 public:
  explicit LatexEmitter(const SymbolRelationTree& srt) : srt_(srt) {}

  std::string run() {
    emit_chain(srt_.root());
    std::string out;
    for (const std::string& t : tokens_) {
      if (!out.empty()) out += ' ';
      out += t;
    }
    return out;
  }

 private:
  void fail(std::size_t n, const std::string& what) const {
    throw StructureError("no LaTeX form for node " + std::to_string(n) + " (" +
                         srt_.node(n).label + "): " + what);
  }

  void emit_chain(std::size_t first) {
    for (std::size_t n : srt_.chain(first)) emit_node(n);
  }

  void emit_group(std::optional<std::size_t> first) {
    tokens_.emplace_back("{");
    if (first) emit_chain(*first);
    tokens_.emplace_back("}");
  }

  void emit_scripts(std::optional<std::size_t> lower, std::optional<std::size_t> upper) {
    if (lower) {
      tokens_.emplace_back("_");
      emit_group(lower);
    }
    if (upper) {
      tokens_.emplace_back("^");
      emit_group(upper);
    }
  }

  void emit_node(std::size_t n) {
    const std::string& label = srt_.node(n).label;
    const auto sub = srt_.child(n, Relation::kSubscript);
    const auto sup = srt_.child(n, Relation::kSuperscript);
    const auto over = srt_.child(n, Relation::kOver);
    const auto under = srt_.child(n, Relation::kUnder);
    const auto inside = srt_.child(n, Relation::kInside);

    if (label == symbols::kRadical) {
      if (under) fail(n, "radical with an UNDER part");
      tokens_.emplace_back("\\sqrt");
      if (over) {
        tokens_.emplace_back("[");
        emit_chain(*over);
        tokens_.emplace_back("]");
      }
      emit_group(inside);
      emit_scripts(sub, sup);
      return;
    }
    if (inside) fail(n, "INSIDE part on a non-radical");
    if (label == symbols::kFractionBar && (over || under)) {
      tokens_.emplace_back("\\frac");
      emit_group(over);
      emit_group(under);
      emit_scripts(sub, sup);
      return;
    }
    if (symbols::is_big_operator(label)) {
      if (sub && under) fail(n, "both SUBSCRIPT and UNDER limits");
      if (sup && over) fail(n, "both SUPERSCRIPT and OVER limits");
      tokens_.push_back(label);
      emit_scripts(sub ? sub : under, sup ? sup : over);
      return;
    }
    if (over || under) fail(n, "OVER/UNDER part on an ordinary symbol");
    tokens_.push_back(label);
    emit_scripts(sub, sup);
  }

  const SymbolRelationTree& srt_;
  std::vector<std::string> tokens_;
};

}  // namespace detail

/// Canonical space-separated LaTeX token string for a relation tree.
inline std::string latex_of(const SymbolRelationTree& srt) {
  if (srt.empty()) throw StructureError("relation tree is empty");
  return detail::LatexEmitter(srt).run();
}

}  // namespace hmegen
