#pragma once

#include <algorithm>
#include <array>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "hmegen/error.hpp"
#include "hmegen/ink_model.hpp"
#include "hmegen/latex.hpp"
#include "hmegen/symbols.hpp"

namespace hmegen {

/// Which decomposition rule produced a sub-expression, and what it split on.
struct RuleTrace {
  int rule = 0;        // 1 baseline, 2 script/over/under/inside part, 3 operator split
  std::string anchor;  // e.g. "SUPERSCRIPT of x (node 0)" or "left of + (node 2)"

  bool operator==(const RuleTrace&) const = default;
};

struct DecompositionResult {
  std::vector<OnlineHME> sub_hmes;
  std::vector<RuleTrace> rule_trace;  // parallel to sub_hmes
  std::array<std::size_t, 4> candidates{};  // per rule (index 1..3) before filtering
  std::size_t discarded_single_symbol = 0;
  std::size_t duplicates = 0;
};

namespace detail {

// Copies the subtree hanging off `first` (its RIGHT chain and everything
// attached) into `dst`. Node `symbol` fields are carried over so they keep
// referring to the source expression's symbols. `chain_end` stops the top
// chain before that node; `drop_scripts` skips SUBSCRIPT/SUPERSCRIPT at all
// depths.
class SubtreeCopier {
 public:
  SubtreeCopier(const SymbolRelationTree& src, bool drop_scripts)
      : src_(src), drop_scripts_(drop_scripts) {}

  std::optional<std::size_t> copy_chain(SymbolRelationTree& dst, std::size_t first,
                                        std::optional<std::size_t> chain_end = std::nullopt) const {
    std::optional<std::size_t> head;
    std::optional<std::size_t> prev;
    for (std::size_t n : src_.chain(first)) {
      if (chain_end && n == *chain_end) break;
      const std::size_t copy = dst.add_node(src_.node(n).label, src_.node(n).symbol);
      if (prev) dst.link(*prev, Relation::kRight, copy);
      else head = copy;
      prev = copy;
      for (Relation r : kAllRelations) {
        if (r == Relation::kRight) continue;
        if (drop_scripts_ && (r == Relation::kSubscript || r == Relation::kSuperscript)) continue;
        if (auto c = src_.child(n, r)) dst.link(copy, r, *copy_chain(dst, *c));
      }
    }
    return head;
  }

  SymbolRelationTree tree(std::size_t first,
                          std::optional<std::size_t> chain_end = std::nullopt) const {
    SymbolRelationTree dst;
    if (auto head = copy_chain(dst, first, chain_end)) dst.set_root(*head);
    return dst;
  }

 private:
  const SymbolRelationTree& src_;
  bool drop_scripts_;
};

inline bool is_script(Relation r) {
  return r == Relation::kSubscript || r == Relation::kSuperscript;
}

inline bool is_fraction_bar(const SymbolRelationTree& srt, std::size_t n) {
  return srt.node(n).label == symbols::kFractionBar &&
         (srt.child(n, Relation::kOver) || srt.child(n, Relation::kUnder));
}

inline std::string describe(const SymbolRelationTree& srt, std::size_t n) {
  return srt.node(n).label + " (node " + std::to_string(n) + ")";
}

}  // namespace detail

/// Rule 1: the tree with every subscript and superscript removed, at all
/// depths. Empty when there is nothing to remove.
inline std::optional<SymbolRelationTree> baseline_of(const SymbolRelationTree& srt) {
  const auto edges = srt.edges();
  if (std::none_of(edges.begin(), edges.end(),
                   [](const SrtEdge& e) { return detail::is_script(e.relation); }))
    return std::nullopt;
  return detail::SubtreeCopier(srt, true).tree(srt.root());
}

namespace detail {

inline void collect_parts(const SymbolRelationTree& srt, std::size_t first,
                          std::vector<std::pair<SymbolRelationTree, std::string>>& out) {
  const SubtreeCopier copier(srt, false);
  for (std::size_t n : srt.chain(first)) {
    for (Relation r : kAllRelations) {
      if (r == Relation::kRight) continue;
      if (auto c = srt.child(n, r)) {
        out.emplace_back(copier.tree(*c), std::string(to_string(r)) + " of " + describe(srt, n));
        collect_parts(srt, *c, out);
      }
    }
  }
}

inline std::vector<std::pair<SymbolRelationTree, std::string>> script_parts_with_anchor(
    const SymbolRelationTree& srt) {
  std::vector<std::pair<SymbolRelationTree, std::string>> out;
  collect_parts(srt, srt.root(), out);
  return out;
}

inline std::vector<std::pair<SymbolRelationTree, std::string>> operator_splits_with_anchor(
    const SymbolRelationTree& srt) {
  std::vector<std::pair<SymbolRelationTree, std::string>> out;
  const SubtreeCopier copier(srt, false);
  const std::vector<std::size_t> baseline = srt.chain(srt.root());
  std::vector<symbols::BracketKind> open;
  for (std::size_t i = 0; i < baseline.size(); ++i) {
    const std::size_t n = baseline[i];
    const std::string& label = srt.node(n).label;
    switch (symbols::bracket_kind(label)) {
      case symbols::BracketKind::kOpen: open.push_back(symbols::BracketKind::kOpen); continue;
      case symbols::BracketKind::kClose:
        if (!open.empty()) open.pop_back();
        continue;
      case symbols::BracketKind::kToggle:
        if (!open.empty() && open.back() == symbols::BracketKind::kToggle) open.pop_back();
        else open.push_back(symbols::BracketKind::kToggle);
        continue;
      case symbols::BracketKind::kNone: break;
    }
    if (!open.empty() || !symbols::is_binary_operator(label) || is_fraction_bar(srt, n)) continue;
    if (i > 0) out.emplace_back(copier.tree(baseline[0], n), "left of " + describe(srt, n));
    if (i + 1 < baseline.size())
      out.emplace_back(copier.tree(baseline[i + 1]), "right of " + describe(srt, n));
  }
  return out;
}

}  // namespace detail

/// Rule 2: one standalone tree per SUBSCRIPT/SUPERSCRIPT/OVER/UNDER/INSIDE
/// edge anywhere in the tree, in depth-first order.
inline std::vector<SymbolRelationTree> script_parts_of(const SymbolRelationTree& srt) {
  std::vector<SymbolRelationTree> out;
  for (auto& [tree, anchor] : detail::script_parts_with_anchor(srt)) out.push_back(std::move(tree));
  return out;
}

/// Rule 3: for every binary operator on the top-level baseline that is not
/// enclosed in brackets, the pieces strictly left and strictly right of it.
/// Pieces keep their scripts; the operator belongs to neither.
inline std::vector<SymbolRelationTree> operator_splits_of(const SymbolRelationTree& srt) {
  std::vector<SymbolRelationTree> out;
  for (auto& [tree, anchor] : detail::operator_splits_with_anchor(srt))
    out.push_back(std::move(tree));
  return out;
}

/// Builds the sub-expression of `parent` selected by `sub`, whose nodes refer
/// to parent symbols. Symbols and strokes keep their parent order and
/// coordinates.
inline OnlineHME materialize(const OnlineHME& parent, const SymbolRelationTree& sub) {
  std::vector<std::size_t> order(sub.size());
  for (std::size_t i = 0; i < sub.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return sub.node(a).symbol < sub.node(b).symbol;
  });
  std::vector<std::size_t> new_index(sub.size());
  for (std::size_t i = 0; i < order.size(); ++i) new_index[order[i]] = i;

  std::vector<std::size_t> strokes;
  for (std::size_t i : order)
    for (std::size_t s : parent.symbols.at(sub.node(i).symbol).strokes) strokes.push_back(s);
  std::sort(strokes.begin(), strokes.end());
  std::vector<std::size_t> stroke_index(parent.strokes.size(), 0);
  for (std::size_t i = 0; i < strokes.size(); ++i) stroke_index[strokes[i]] = i;

  OnlineHME out;
  for (std::size_t s : strokes) out.strokes.push_back(parent.strokes[s]);
  for (std::size_t i : order) {
    Symbol sym = parent.symbols[sub.node(i).symbol];
    for (std::size_t& s : sym.strokes) s = stroke_index[s];
    out.symbols.push_back(std::move(sym));
  }
  for (std::size_t i = 0; i < order.size(); ++i) out.srt.add_node(sub.node(order[i]).label, i);
  for (const SrtEdge& e : sub.edges())
    out.srt.link(new_index[e.parent], e.relation, new_index[e.child]);
  out.srt.set_root(new_index[sub.root()]);
  out.latex = latex_of(out.srt);
  out.provenance.source = parent.provenance.source;
  out.provenance.strategy = Strategy::kDecomposition;
  return out;
}

/// Single-pass decomposition: Rule 1, Rule 2 and Rule 3 candidates in that
/// order, Rule 4 drops single-symbol results, then duplicates (same latex and
/// same parent symbols) are dropped.
inline DecompositionResult decompose(const OnlineHME& hme) {
  std::vector<std::tuple<int, SymbolRelationTree, std::string>> candidates;
  if (auto base = baseline_of(hme.srt)) candidates.emplace_back(1, std::move(*base), "baseline");
  for (auto& [tree, anchor] : detail::script_parts_with_anchor(hme.srt))
    candidates.emplace_back(2, std::move(tree), std::move(anchor));
  for (auto& [tree, anchor] : detail::operator_splits_with_anchor(hme.srt))
    candidates.emplace_back(3, std::move(tree), std::move(anchor));

  DecompositionResult result;
  std::set<std::pair<std::string, std::vector<std::size_t>>> seen;
  for (auto& [rule, tree, anchor] : candidates) {
    ++result.candidates[static_cast<std::size_t>(rule)];
    if (tree.size() < 2) {
      ++result.discarded_single_symbol;
      continue;
    }
    OnlineHME sub = materialize(hme, tree);
    std::vector<std::size_t> key;
    for (const SrtNode& n : tree.nodes()) key.push_back(n.symbol);
    std::sort(key.begin(), key.end());
    if (!seen.emplace(sub.latex, std::move(key)).second) {
      ++result.duplicates;
      continue;
    }
    sub.provenance.rule = rule;
    sub.provenance.anchor = anchor;
    result.sub_hmes.push_back(std::move(sub));
    result.rule_trace.push_back({rule, anchor});
  }
  return result;
}

}  // namespace hmegen
