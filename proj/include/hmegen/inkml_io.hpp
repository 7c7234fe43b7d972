#pragma once

#include <cctype>
#include <charconv>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "hmegen/error.hpp"
#include "hmegen/ink_model.hpp"
#include "hmegen/latex.hpp"
#include "hmegen/layout.hpp"
#include "hmegen/symbols.hpp"
#include "hmegen/xml.hpp"

namespace hmegen {

// ---------------------------------------------------------------------------
// Ground truth -> relation tree

namespace detail {

class SrtBuilder {
 public:
  SrtBuilder(std::span<const Symbol> symbols, std::span<const std::string> links)
      : symbols_(symbols), links_(links), used_(symbols.size(), false) {}

  SymbolRelationTree build(const LayoutRow& truth) {
    if (truth.empty()) throw AlignmentError("ground truth contains no symbols");
    std::vector<const LayoutItem*> leaves;
    collect_leaves(truth, leaves);

    // Explicit links first, then label + reading-order matching for the rest.
    for (const LayoutItem* leaf : leaves) {
      if (leaf->link.empty()) continue;
      for (std::size_t s = 0; s < links_.size() && s < symbols_.size(); ++s) {
        if (!used_[s] && links_[s] == leaf->link &&
            symbols::canonical_label(symbols_[s].label) == leaf->label) {
          assign(leaf, s);
          break;
        }
      }
    }
    for (const LayoutItem* leaf : leaves) {
      if (assigned_.count(leaf)) continue;
      bool found = false;
      for (std::size_t s = 0; s < symbols_.size(); ++s) {
        if (!used_[s] && symbols::canonical_label(symbols_[s].label) == leaf->label) {
          assign(leaf, s);
          found = true;
          break;
        }
      }
      if (!found)
        throw AlignmentError("ground-truth symbol '" + leaf->label +
                             (leaf->link.empty() ? std::string() : " (" + leaf->link + ")") +
                             "' has no matching trace group");
    }
    for (std::size_t s = 0; s < symbols_.size(); ++s)
      if (!used_[s])
        throw AlignmentError("trace group " + symbols_[s].id + " ('" + symbols_[s].label +
                             "') is not part of the ground truth");

    SymbolRelationTree srt;
    for (std::size_t s = 0; s < symbols_.size(); ++s)
      srt.add_node(symbols::canonical_label(symbols_[s].label), s);
    srt.set_root(link_row(srt, truth));
    srt.validate();
    return srt;
  }

 private:
  void assign(const LayoutItem* leaf, std::size_t s) {
    assigned_[leaf] = s;
    used_[s] = true;
  }

  // Links one row as a RIGHT chain and returns the node of its first item.
  std::size_t link_row(SymbolRelationTree& srt, const LayoutRow& row) {
    std::optional<std::size_t> prev;
    std::size_t first = 0;
    for (const LayoutItem& item : row) {
      const std::size_t node = assigned_.at(&item);
      if (prev) srt.link(*prev, Relation::kRight, node);
      else first = node;
      prev = node;
      for (Relation r : kAllRelations) {
        const LayoutRow* part = item.part(r);
        if (part && !part->empty()) srt.link(node, r, link_row(srt, *part));
      }
    }
    return first;
  }

  std::span<const Symbol> symbols_;
  std::span<const std::string> links_;
  std::vector<bool> used_;
  std::map<const LayoutItem*, std::size_t> assigned_;
};

}  // namespace detail

/// Aligns the segmentation with a ground-truth layout and links the symbols
/// into a relation tree whose node i is symbols[i]. `links` optionally gives
/// each symbol's MathML reference (CROHME annotationXML href).
inline SymbolRelationTree build_srt(std::span<const Symbol> symbols, const LayoutRow& truth,
                                    std::span<const std::string> links = {}) {
  return detail::SrtBuilder(symbols, links).build(truth);
}

inline SymbolRelationTree build_srt(std::span<const Symbol> symbols, std::string_view latex) {
  return build_srt(symbols, parse_latex_layout(latex));
}

// ---------------------------------------------------------------------------
// MathML <-> layout

namespace detail {

inline std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

inline std::string element_id(const xml::Element& el) {
  if (const auto* id = el.attribute("xml:id")) return *id;
  if (const auto* id = el.attribute("id")) return *id;
  return {};
}

inline LayoutRow mathml_row(const xml::Element& el);

inline LayoutRow mathml_children(const xml::Element& el) {
  LayoutRow row;
  for (const xml::Element& c : el.children) {
    LayoutRow part = mathml_row(c);
    row.insert(row.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
  }
  return row;
}

inline LayoutRow mathml_leaf(const xml::Element& el) {
  const std::string text = trim(el.text);
  if (text.empty()) return {};
  const std::string canonical = symbols::canonical_label(text);
  const bool single = canonical != text || text.front() == '\\' ||
                      symbols::is_function_word(text) ||
                      static_cast<unsigned char>(text.front()) >= 0x80 || text.size() == 1;
  if (single) return {LayoutItem{canonical, element_id(el), {}}};
  LayoutRow row;
  for (char c : text)
    if (c != ' ') row.push_back({symbols::canonical_label(std::string(1, c)), {}, {}});
  return row;
}

inline void attach_part(LayoutItem& base, Relation r, LayoutRow row, const xml::Element& el) {
  if (base.part(r))
    throw StructureError("MathML <" + el.name + "> repeats a " + std::string(to_string(r)) +
                         " part");
  base.set_part(r, std::move(row));
}

inline LayoutRow mathml_scripted(const xml::Element& el, std::initializer_list<Relation> rels) {
  if (el.children.size() != rels.size() + 1)
    throw StructureError("MathML <" + el.name + "> has " + std::to_string(el.children.size()) +
                         " children, expected " + std::to_string(rels.size() + 1));
  LayoutRow base = mathml_row(el.children[0]);
  if (base.empty()) throw StructureError("MathML <" + el.name + "> has an empty base");
  std::size_t i = 1;
  for (Relation r : rels) attach_part(base.back(), r, mathml_row(el.children[i++]), el);
  return base;
}

inline LayoutRow mathml_row(const xml::Element& el) {
  const std::string& n = el.name;
  if (n == "mi" || n == "mn" || n == "mo" || n == "mtext") return mathml_leaf(el);
  if (n == "msub") return mathml_scripted(el, {Relation::kSubscript});
  if (n == "msup") return mathml_scripted(el, {Relation::kSuperscript});
  if (n == "msubsup") return mathml_scripted(el, {Relation::kSubscript, Relation::kSuperscript});
  if (n == "munder") return mathml_scripted(el, {Relation::kUnder});
  if (n == "mover") return mathml_scripted(el, {Relation::kOver});
  if (n == "munderover") return mathml_scripted(el, {Relation::kUnder, Relation::kOver});
  if (n == "mfrac") {
    if (el.children.size() != 2) throw StructureError("MathML <mfrac> needs two children");
    LayoutItem bar{std::string(symbols::kFractionBar), element_id(el), {}};
    bar.set_part(Relation::kOver, mathml_row(el.children[0]));
    bar.set_part(Relation::kUnder, mathml_row(el.children[1]));
    return {std::move(bar)};
  }
  if (n == "msqrt") {
    LayoutItem root{std::string(symbols::kRadical), element_id(el), {}};
    root.set_part(Relation::kInside, mathml_children(el));
    return {std::move(root)};
  }
  if (n == "mroot") {
    if (el.children.size() != 2) throw StructureError("MathML <mroot> needs two children");
    LayoutItem root{std::string(symbols::kRadical), element_id(el), {}};
    root.set_part(Relation::kInside, mathml_row(el.children[0]));
    root.set_part(Relation::kOver, mathml_row(el.children[1]));
    return {std::move(root)};
  }
  if (n == "semantics") return el.children.empty() ? LayoutRow{} : mathml_row(el.children[0]);
  if (n == "annotation" || n == "annotation-xml") return {};
  return mathml_children(el);
}

}  // namespace detail

/// Converts a <math> element (or any presentation-MathML subtree) to a layout.
inline LayoutRow parse_mathml_layout(const xml::Element& math) { return detail::mathml_row(math); }

namespace detail {

class MathmlWriter {
 public:
  MathmlWriter(const SymbolRelationTree& srt, std::span<const std::string> ids)
      : srt_(srt), ids_(ids) {}

  std::string run() {
    out_ << "<math xmlns=\"http://www.w3.org/1998/Math/MathML\">";
    row(srt_.root());
    out_ << "</math>";
    return out_.str();
  }

 private:
  void row(std::optional<std::size_t> first) {
    if (!first) {
      out_ << "<mrow/>";
      return;
    }
    const auto chain = srt_.chain(*first);
    if (chain.size() > 1) out_ << "<mrow>";
    for (std::size_t n : chain) item(n);
    if (chain.size() > 1) out_ << "</mrow>";
  }

  void open(std::string_view tag, std::size_t n) {
    out_ << '<' << tag << " xml:id=\"" << xml::escape(ids_[n]) << "\">";
  }

  static std::string_view leaf_tag(std::string_view label) {
    if (label.size() == 1 && label[0] >= '0' && label[0] <= '9') return "mn";
    if (symbols::is_binary_operator(label) || symbols::bracket_kind(label) != symbols::BracketKind::kNone ||
        symbols::is_big_operator(label) || label == "," || label == "." || label == "!")
      return "mo";
    return "mi";
  }

  void item(std::size_t n) {
    const SrtNode& node = srt_.node(n);
    const auto sub = srt_.child(n, Relation::kSubscript);
    const auto sup = srt_.child(n, Relation::kSuperscript);
    const auto over = srt_.child(n, Relation::kOver);
    const auto under = srt_.child(n, Relation::kUnder);
    const auto inside = srt_.child(n, Relation::kInside);
    const bool radical = node.label == symbols::kRadical;
    const bool fraction = !radical && node.label == symbols::kFractionBar && (over || under);

    const char* script_tag = sub && sup ? "msubsup" : sub ? "msub" : sup ? "msup" : nullptr;
    if (script_tag) out_ << '<' << script_tag << '>';

    const bool limits = !radical && !fraction && (over || under);
    const char* limit_tag = under && over ? "munderover" : under ? "munder" : "mover";
    if (limits) out_ << '<' << limit_tag << '>';

    if (radical && over) {
      open("mroot", n);
      row(inside);
      row(over);
      out_ << "</mroot>";
    } else if (radical) {
      open("msqrt", n);
      row(inside);
      out_ << "</msqrt>";
    } else if (fraction) {
      open("mfrac", n);
      row(over);
      row(under);
      out_ << "</mfrac>";
    } else {
      const auto tag = leaf_tag(node.label);
      open(tag, n);
      out_ << xml::escape(node.label) << "</" << tag << '>';
    }

    if (limits) {
      if (under) row(under);
      if (over) row(over);
      out_ << "</" << limit_tag << '>';
    }
    if (script_tag) {
      if (sub) row(sub);
      if (sup) row(sup);
      out_ << "</" << script_tag << '>';
    }
  }

  const SymbolRelationTree& srt_;
  std::span<const std::string> ids_;
  std::ostringstream out_;
};

}  // namespace detail

/// Presentation MathML for a relation tree. `ids[i]` becomes the xml:id of
/// node i's element.
inline std::string write_mathml(const SymbolRelationTree& srt, std::span<const std::string> ids) {
  return detail::MathmlWriter(srt, ids).run();
}

// ---------------------------------------------------------------------------
// InkML

struct ParseOptions {
  // Accept files without ground truth; the relation tree then chains the
  // symbols left to right and latex is left empty.
  bool allow_missing_truth = false;
};

namespace detail {

inline std::string format_number(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw Error("cannot format number");
  return std::string(buf, end);
}

inline Stroke parse_trace(std::string_view text, std::size_t offset) {
  Stroke stroke;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find(',', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view point = text.substr(start, end - start);
    double values[2];
    int count = 0;
    std::size_t i = 0;
    while (i < point.size()) {
      while (i < point.size() && std::isspace(static_cast<unsigned char>(point[i]))) ++i;
      if (i >= point.size()) break;
      std::size_t j = i;
      while (j < point.size() && !std::isspace(static_cast<unsigned char>(point[j]))) ++j;
      if (count < 2) {
        double v = 0.0;
        auto tok = point.substr(i, j - i);
        if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
        auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (ec != std::errc() || ptr != tok.data() + tok.size())
          throw ParseError("bad trace value '" + std::string(point.substr(i, j - i)) + "'",
                           offset);
        values[count] = v;
      }
      ++count;  // extra channels (time, pressure) are ignored
      i = j;
    }
    if (count == 1) throw ParseError("trace point with a single coordinate", offset);
    if (count >= 2) stroke.points.push_back({values[0], values[1]});
    start = end + 1;
  }
  if (stroke.points.empty()) throw ParseError("empty trace", offset);
  return stroke;
}

inline void collect_leaf_groups(const xml::Element& group, std::vector<const xml::Element*>& out) {
  bool has_nested = false;
  for (const xml::Element& c : group.children) {
    if (c.name == "traceGroup") {
      has_nested = true;
      collect_leaf_groups(c, out);
    }
  }
  if (!has_nested && group.first_child("traceView")) out.push_back(&group);
}

inline std::optional<double> number_annotation(const std::map<std::string, std::string>& notes,
                                               const std::string& key) {
  auto it = notes.find(key);
  if (it == notes.end()) return std::nullopt;
  double v = 0.0;
  const std::string s = trim(it->second);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw StructureError("bad numeric annotation " + key + ": '" + it->second + "'");
  return v;
}

inline Provenance read_provenance(const std::map<std::string, std::string>& notes) {
  Provenance p;
  if (auto it = notes.find("source"); it != notes.end()) p.source = it->second;
  if (auto it = notes.find("strategy"); it != notes.end()) {
    auto s = parse_strategy(trim(it->second));
    if (!s) throw StructureError("unknown strategy annotation '" + it->second + "'");
    p.strategy = *s;
  }
  if (auto id = number_annotation(notes, "distortion_id")) {
    DistortionParams d;
    d.id = static_cast<int>(*id);
    if (auto it = notes.find("axis"); it != notes.end()) {
      auto axis = parse_axis(trim(it->second));
      if (!axis) throw StructureError("unknown axis annotation '" + it->second + "'");
      d.axis = *axis;
    }
    d.alpha = number_annotation(notes, "alpha").value_or(0.0);
    d.beta = number_annotation(notes, "beta").value_or(0.0);
    d.k = number_annotation(notes, "k").value_or(1.0);
    d.gamma = number_annotation(notes, "gamma").value_or(0.0);
    p.params = d;
  }
  if (auto rule = number_annotation(notes, "decomposition_rule")) p.rule = static_cast<int>(*rule);
  if (auto it = notes.find("anchor"); it != notes.end()) p.anchor = it->second;
  return p;
}

}  // namespace detail

/// Parses a CROHME-style InkML document: one stroke per <trace> in file order,
/// one symbol per leaf <traceGroup>, relation tree from the MathML truth
/// (falling back to the LaTeX truth annotation).
inline OnlineHME parse_inkml(std::string_view bytes, const ParseOptions& options = {}) {
  const xml::Element root = xml::parse(bytes);
  if (root.name != "ink") throw StructureError("root element is <" + root.name + ">, not <ink>");

  OnlineHME hme;
  std::map<std::string, std::size_t> trace_index;
  std::map<std::string, std::string> notes;
  const xml::Element* mathml = nullptr;
  std::vector<const xml::Element*> leaf_groups;

  for (const xml::Element& el : root.children) {
    if (el.name == "trace") {
      std::string id = detail::element_id(el);
      if (id.empty()) id = std::to_string(hme.strokes.size());
      if (!trace_index.emplace(id, hme.strokes.size()).second)
        throw StructureError("duplicate trace id '" + id + "'");
      hme.strokes.push_back(detail::parse_trace(el.text, el.offset));
    } else if (el.name == "annotation") {
      if (const auto* type = el.attribute("type")) notes[*type] = el.text;
    } else if (el.name == "annotationXML") {
      if (const auto* math = el.first_child("math")) mathml = math;
    } else if (el.name == "traceGroup") {
      detail::collect_leaf_groups(el, leaf_groups);
    }
  }

  std::vector<std::string> links;
  for (const xml::Element* group : leaf_groups) {
    Symbol sym;
    sym.id = detail::element_id(*group);
    if (sym.id.empty()) sym.id = "sym" + std::to_string(hme.symbols.size());
    std::string link;
    for (const xml::Element& c : group->children) {
      if (c.name == "annotation") {
        const auto* type = c.attribute("type");
        if (!type || *type == "truth") sym.label = symbols::canonical_label(c.text);
      } else if (c.name == "traceView") {
        const auto* ref = c.attribute("traceDataRef");
        if (!ref) throw StructureError("traceView without traceDataRef in group " + sym.id);
        auto it = trace_index.find(*ref);
        if (it == trace_index.end())
          throw StructureError("trace group " + sym.id + " references unknown trace '" + *ref + "'");
        sym.strokes.push_back(it->second);
      } else if (c.name == "annotationXML") {
        if (const auto* href = c.attribute("href")) link = *href;
      }
    }
    if (sym.label.empty()) throw StructureError("trace group " + sym.id + " has no label");
    hme.symbols.push_back(std::move(sym));
    links.push_back(std::move(link));
  }

  const auto latex_note = notes.find("truth");
  const bool has_truth = mathml != nullptr || latex_note != notes.end();
  if (!has_truth || hme.symbols.empty()) {
    if (!options.allow_missing_truth)
      throw StructureError(has_truth ? "document has no symbol segmentation"
                                     : "document has no ground truth");
    if (hme.symbols.empty()) {
      for (std::size_t s = 0; s < hme.strokes.size(); ++s)
        hme.symbols.push_back({"sym" + std::to_string(s), "?", {s}});
    }
    for (std::size_t s = 0; s < hme.symbols.size(); ++s) {
      hme.srt.add_node(hme.symbols[s].label, s);
      if (s > 0) hme.srt.link(s - 1, Relation::kRight, s);
    }
  } else if (mathml != nullptr) {
    try {
      hme.srt = build_srt(hme.symbols, parse_mathml_layout(*mathml), links);
    } catch (const Error&) {
      if (latex_note == notes.end()) throw;
      hme.srt = build_srt(hme.symbols, latex_note->second);
    }
  } else {
    hme.srt = build_srt(hme.symbols, latex_note->second);
  }
  for (std::size_t s = 0; s < hme.symbols.size(); ++s) hme.symbols[s].label = hme.srt.node(s).label;

  hme.provenance = detail::read_provenance(notes);
  hme.validate();
  if (has_truth) hme.latex = latex_of(hme.srt);
  return hme;
}

/// Serializes an expression as InkML with LaTeX and MathML truth, the symbol
/// segmentation, and provenance annotations.
inline std::string write_inkml(const OnlineHME& hme) {
  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<ink xmlns=\"http://www.w3.org/2003/InkML\">\n"
      << "<traceFormat>\n<channel name=\"X\" type=\"decimal\"/>\n"
      << "<channel name=\"Y\" type=\"decimal\"/>\n</traceFormat>\n";
  if (!hme.latex.empty())
    out << "<annotation type=\"truth\">$" << xml::escape(hme.latex) << "$</annotation>\n";

  const Provenance& p = hme.provenance;
  auto note = [&out](std::string_view type, std::string_view value) {
    out << "<annotation type=\"" << type << "\">" << xml::escape(value) << "</annotation>\n";
  };
  if (!p.source.empty()) note("source", p.source);
  note("strategy", to_string(p.strategy));
  if (p.params) {
    note("distortion_id", std::to_string(p.params->id));
    note("axis", to_string(p.params->axis));
    note("alpha", detail::format_number(p.params->alpha));
    note("beta", detail::format_number(p.params->beta));
    note("k", detail::format_number(p.params->k));
    note("gamma", detail::format_number(p.params->gamma));
  }
  if (p.rule) note("decomposition_rule", std::to_string(*p.rule));
  if (!p.anchor.empty()) note("anchor", p.anchor);

  std::vector<std::string> ids;
  for (std::size_t i = 0; i < hme.symbols.size(); ++i) ids.push_back("m" + std::to_string(i));
  if (!hme.latex.empty()) {
    out << "<annotationXML type=\"truth\" encoding=\"Content-MathML\">\n"
        << write_mathml(hme.srt, ids) << "\n</annotationXML>\n";
  }

  for (std::size_t t = 0; t < hme.strokes.size(); ++t) {
    out << "<trace id=\"" << t << "\">";
    const auto& pts = hme.strokes[t].points;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (i) out << ", ";
      out << detail::format_number(pts[i].x) << ' ' << detail::format_number(pts[i].y);
    }
    out << "</trace>\n";
  }

  out << "<traceGroup xml:id=\"segmentation\">\n<annotation type=\"truth\">Segmentation</annotation>\n";
  for (std::size_t s = 0; s < hme.symbols.size(); ++s) {
    const Symbol& sym = hme.symbols[s];
    out << "<traceGroup xml:id=\"" << xml::escape(sym.id) << "\">\n"
        << "<annotation type=\"truth\">" << xml::escape(sym.label) << "</annotation>\n";
    for (std::size_t t : sym.strokes) out << "<traceView traceDataRef=\"" << t << "\"/>\n";
    if (!hme.latex.empty()) out << "<annotationXML href=\"" << ids[s] << "\"/>\n";
    out << "</traceGroup>\n";
  }
  out << "</traceGroup>\n</ink>\n";
  return out.str();
}

// ---------------------------------------------------------------------------
// Manifest: one "relative-path TAB latex" record per line.

struct ManifestRow {
  std::string path;
  std::string latex;

  bool operator==(const ManifestRow&) const = default;
};

inline std::string format_manifest(std::span<const ManifestRow> rows) {
  std::string out;
  for (const ManifestRow& r : rows) {
    if (r.path.find_first_of("\t\n") != std::string::npos ||
        r.latex.find_first_of("\t\n") != std::string::npos)
      throw Error("manifest fields may not contain tabs or newlines");
    out += r.path;
    out += '\t';
    out += r.latex;
    out += '\n';
  }
  return out;
}

inline std::vector<ManifestRow> parse_manifest(std::string_view text) {
  std::vector<ManifestRow> rows;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty()) {
      const auto tab = line.find('\t');
      if (tab == std::string_view::npos) throw ParseError("manifest line without a tab", start);
      rows.push_back({std::string(line.substr(0, tab)), std::string(line.substr(tab + 1))});
    }
    start = end + 1;
  }
  return rows;
}

}  // namespace hmegen
