#pragma once

#include <algorithm>
#include <array>
#include <string>
#include <string_view>
#include <utility>

namespace hmegen::symbols {

/// The 101 symbol classes of the CROHME inventory, in canonical spelling.
inline constexpr std::array<std::string_view, 101> kClasses = {
    "0", "1", "2", "3", "4", "5", "6", "7", "8", "9",
    "a", "b", "c", "d", "e", "f", "g", "h", "i", "j", "k", "l", "m",
    "n", "o", "p", "q", "r", "s", "t", "u", "v", "w", "x", "y", "z",
    "A", "B", "C", "E", "F", "G", "H", "I", "L", "M", "N", "P", "R",
    "S", "T", "V", "X", "Y",
    "\\alpha", "\\beta", "\\gamma", "\\theta", "\\lambda", "\\mu", "\\pi",
    "\\sigma", "\\phi", "\\Delta",
    "+", "-", "\\pm", "\\times", "\\div", "=", "\\neq", "<", ">", "\\leq",
    "\\geq", "/",
    "\\sin", "\\cos", "\\tan", "\\log", "\\lim",
    "\\sum", "\\int",
    "\\sqrt", "\\infty", "\\rightarrow", "\\ldots", "\\exists", "\\forall",
    "\\in", "\\prime", "!", ",", ".", "|",
    "(", ")", "[", "]", "\\{", "\\}",
};

inline constexpr std::string_view kFractionBar = "-";
inline constexpr std::string_view kRadical = "\\sqrt";

namespace detail {

inline constexpr std::array<std::pair<std::string_view, std::string_view>, 40> kAliases = {{
    {"\\lt", "<"},          {"\\gt", ">"},          {"\\le", "\\leq"},
    {"\\ge", "\\geq"},      {"\\ne", "\\neq"},      {"\\to", "\\rightarrow"},
    {"\\lbrace", "\\{"},    {"\\rbrace", "\\}"},    {"\\lbrack", "["},
    {"\\rbrack", "]"},      {"COMMA", ","},         {"\\vert", "|"},
    {"\\mid", "|"},         {"\\dots", "\\ldots"},  {"'", "\\prime"},
    {"\\frac", "-"},        {"\\dfrac", "-"},       {"\\leqslant", "\\leq"},
    {"\\geqslant", "\\geq"}, {"\\Rightarrow", "\\rightarrow"}, {"\\varphi", "\\phi"},
    // Unicode spellings used inside MathML annotations.
    {"∫", "\\int"},    {"∑", "\\sum"},    {"√", "\\sqrt"},
    {"×", "\\times"},  {"÷", "\\div"},    {"±", "\\pm"},
    {"≠", "\\neq"},    {"≤", "\\leq"},    {"≥", "\\geq"},
    {"→", "\\rightarrow"}, {"∞", "\\infty"}, {"…", "\\ldots"},
    {"∃", "\\exists"}, {"∀", "\\forall"}, {"∈", "\\in"},
    {"′", "\\prime"},  {"−", "-"},        {"ϕ", "\\phi"},
    {"–", "-"},
}};

inline constexpr std::array<std::pair<std::string_view, std::string_view>, 10> kGreek = {{
    {"α", "\\alpha"}, {"β", "\\beta"}, {"γ", "\\gamma"},
    {"θ", "\\theta"}, {"λ", "\\lambda"}, {"μ", "\\mu"},
    {"π", "\\pi"},    {"σ", "\\sigma"}, {"φ", "\\phi"},
    {"Δ", "\\Delta"},
}};

inline constexpr std::array<std::string_view, 5> kFunctionWords = {"sin", "cos", "tan", "log",
                                                                    "lim"};

}  // namespace detail

/// Canonical spelling for a symbol label from any of the accepted sources
/// (traceGroup annotations, LaTeX truth, MathML leaf text).
inline std::string canonical_label(std::string_view label) {
  while (!label.empty() && label.front() == ' ') label.remove_prefix(1);
  while (!label.empty() && label.back() == ' ') label.remove_suffix(1);
  for (const auto& [from, to] : detail::kAliases)
    if (label == from) return std::string(to);
  for (const auto& [from, to] : detail::kGreek)
    if (label == from) return std::string(to);
  for (std::string_view word : detail::kFunctionWords)
    if (label == word) return "\\" + std::string(word);
  return std::string(label);
}

inline bool is_known_class(std::string_view canonical) {
  return std::find(kClasses.begin(), kClasses.end(), canonical) != kClasses.end();
}

/// Operators that Rule-3 style splitting may cut an expression at.
inline bool is_binary_operator(std::string_view canonical) {
  static constexpr std::array<std::string_view, 12> kOps = {
      "+", "-", "\\pm", "\\times", "\\div", "=", "\\neq", "<", ">", "\\leq", "\\geq",
      "\\rightarrow"};
  return std::find(kOps.begin(), kOps.end(), canonical) != kOps.end();
}

/// Large operators whose limits are written with _ and ^.
inline bool is_big_operator(std::string_view canonical) {
  static constexpr std::array<std::string_view, 8> kOps = {
      "\\sum", "\\int", "\\prod", "\\lim", "\\bigcup", "\\bigcap", "\\oint", "\\coprod"};
  return std::find(kOps.begin(), kOps.end(), canonical) != kOps.end();
}

/// Big operators whose limits sit below/above rather than as scripts.
inline bool has_stacked_limits(std::string_view canonical) {
  return canonical == "\\sum" || canonical == "\\prod" || canonical == "\\lim" ||
         canonical == "\\bigcup" || canonical == "\\bigcap" || canonical == "\\coprod";
}

enum class BracketKind { kNone, kOpen, kClose, kToggle };

inline BracketKind bracket_kind(std::string_view canonical) {
  if (canonical == "(" || canonical == "[" || canonical == "\\{") return BracketKind::kOpen;
  if (canonical == ")" || canonical == "]" || canonical == "\\}") return BracketKind::kClose;
  if (canonical == "|") return BracketKind::kToggle;
  return BracketKind::kNone;
}

inline bool is_function_word(std::string_view text) {
  return std::find(detail::kFunctionWords.begin(), detail::kFunctionWords.end(), text) !=
         detail::kFunctionWords.end();
}

}  // namespace hmegen::symbols
