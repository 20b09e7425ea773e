#include "propnet/textvariants.hpp"

#include <cctype>
#include <vector>

#include "propnet/corpus.hpp"
#include "propnet/error.hpp"

namespace propnet {

std::string_view to_string(VariantKind kind) {
  switch (kind) {
    case VariantKind::Original: return "original";
    case VariantKind::Tag: return "tag";
    case VariantKind::Miss: return "miss";
    case VariantKind::Structure: return "structure";
  }
  return "?";
}

VariantKind parse_variant(std::string_view text) {
  for (VariantKind k : {VariantKind::Original, VariantKind::Tag, VariantKind::Miss, VariantKind::Structure}) {
    if (text == to_string(k)) return k;
  }
  throw ConfigError("unknown text variant '" + std::string(text) + "' (expected original, tag, miss or structure)");
}

std::string apply_variant(std::string_view std_text, VariantKind kind) {
  if (kind == VariantKind::Original) return std::string(std_text);
  std::string out;
  auto emit = [&out](std::string_view tok) {
    if (!out.empty()) out.push_back(' ');
    out.append(tok);
  };
  std::size_t i = 0;
  while (i < std_text.size()) {
    while (i < std_text.size() && std::isspace(static_cast<unsigned char>(std_text[i]))) ++i;
    std::size_t j = i;
    while (j < std_text.size() && !std::isspace(static_cast<unsigned char>(std_text[j]))) ++j;
    if (j == i) break;
    const std::string_view tok = std_text.substr(i, j - i);
    const bool tag = is_hashtag_token(tok);
    switch (kind) {
      case VariantKind::Tag: emit(tag ? "TAG" : tok); break;
      case VariantKind::Miss:
        if (!tag) emit(tok);
        break;
      case VariantKind::Structure: emit(tag ? "T" : tok == "URL" ? "U" : "W"); break;
      case VariantKind::Original: break;
    }
    i = j;
  }
  return out;
}

}  // namespace propnet
