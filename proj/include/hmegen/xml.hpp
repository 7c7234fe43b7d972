#pragma once

#include <expat.h>

#include <cstddef>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "hmegen/error.hpp"

namespace hmegen::xml {

/// Minimal element tree: enough of XML for InkML and embedded MathML.
struct Element {
  std::string name;  // local name, namespace prefix stripped
  std::map<std::string, std::string> attributes;
  std::vector<Element> children;
  std::string text;  // concatenated character data directly inside this element
  std::size_t offset = 0;

  const std::string* attribute(std::string_view key) const {
    auto it = attributes.find(std::string(key));
    return it == attributes.end() ? nullptr : &it->second;
  }

  const Element* first_child(std::string_view child_name) const {
    for (const Element& c : children)
      if (c.name == child_name) return &c;
    return nullptr;
  }
};

namespace detail {

inline std::string local_name(const char* qualified) {
  std::string_view q(qualified);
  auto colon = q.rfind(':');
  return std::string(colon == std::string_view::npos ? q : q.substr(colon + 1));
}

struct TreeBuilder {
  XML_Parser parser = nullptr;
  std::vector<Element*> stack;
  std::unique_ptr<Element> root;

  static void on_start(void* data, const XML_Char* name, const XML_Char** atts) {
    auto* self = static_cast<TreeBuilder*>(data);
    Element el;
    el.name = local_name(name);
    el.offset = static_cast<std::size_t>(XML_GetCurrentByteIndex(self->parser));
    for (std::size_t i = 0; atts[i] != nullptr; i += 2) el.attributes[atts[i]] = atts[i + 1];
    if (self->stack.empty()) {
      self->root = std::make_unique<Element>(std::move(el));
      self->stack.push_back(self->root.get());
    } else {
      auto& siblings = self->stack.back()->children;
      siblings.push_back(std::move(el));
      self->stack.push_back(&siblings.back());
    }
  }

  static void on_end(void* data, const XML_Char*) {
    static_cast<TreeBuilder*>(data)->stack.pop_back();
  }

  static void on_text(void* data, const XML_Char* s, int len) {
    auto* self = static_cast<TreeBuilder*>(data);
    if (!self->stack.empty()) self->stack.back()->text.append(s, static_cast<std::size_t>(len));
  }
};

}  // namespace detail

/// Parses a complete document. Malformed input raises ParseError carrying the
/// byte offset expat stopped at.
inline Element parse(std::string_view bytes) {
  using ParserPtr = std::unique_ptr<std::remove_pointer_t<XML_Parser>, decltype(&XML_ParserFree)>;
  ParserPtr parser(XML_ParserCreate("UTF-8"), &XML_ParserFree);
  if (!parser) throw Error("cannot allocate XML parser");
  detail::TreeBuilder builder;
  builder.parser = parser.get();
  XML_SetUserData(parser.get(), &builder);
  XML_SetElementHandler(parser.get(), &detail::TreeBuilder::on_start, &detail::TreeBuilder::on_end);
  XML_SetCharacterDataHandler(parser.get(), &detail::TreeBuilder::on_text);
  if (XML_Parse(parser.get(), bytes.data(), static_cast<int>(bytes.size()), XML_TRUE) ==
      XML_STATUS_ERROR) {
    throw ParseError(std::string("malformed XML: ") + XML_ErrorString(XML_GetErrorCode(parser.get())),
                     static_cast<std::size_t>(XML_GetCurrentByteIndex(parser.get())));
  }
  if (!builder.root) throw ParseError("XML document has no root element", 0);
  return std::move(*builder.root);
}

inline std::string escape(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace hmegen::xml
