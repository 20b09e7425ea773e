#pragma once

#include <string>
#include <string_view>

namespace propnet {

enum class VariantKind { Original, Tag, Miss, Structure };

std::string_view to_string(VariantKind kind);
// Accepts the lowercase names: original, tag, miss, structure.
VariantKind parse_variant(std::string_view text);

// Whitespace-token rewrite of standardized text:
//   Tag       hashtags -> "TAG"
//   Miss      hashtags removed
//   Structure hashtag -> T, URL sentinel -> U, anything else -> W
std::string apply_variant(std::string_view std_text, VariantKind kind);

}  // namespace propnet
