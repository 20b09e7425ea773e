#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "propnet/corpus.hpp"
#include "propnet/image.hpp"

namespace propnet {

// Generated corpora with known structure, already labelled and split.
//   separable  keyword hashtag and bright square both mark positives
//   image      only the bright square is informative
//   text       only the keyword is informative
//   quadrant   positives carry a bright square inside the top-left
//              quadrant, negatives carry none
//   xorg       three organisations sharing a weak common token, each with
//              an organisation-specific token that is noise elsewhere
enum class SyntheticKind { Separable, ImageInformative, TextInformative, Quadrant, CrossOrg };

std::string_view to_string(SyntheticKind kind);
SyntheticKind parse_synthetic_kind(std::string_view text);

struct SyntheticOptions {
  std::size_t records = 2000;  // per organisation for xorg
  std::size_t image_size = 16;
  std::uint64_t seed = 0;
};

struct SyntheticCorpus {
  std::vector<TweetRecord> records;
  std::map<std::string, Image> images;  // keyed by image_ref
};

SyntheticCorpus make_synthetic(SyntheticKind kind, const SyntheticOptions& opts);

// corpus.jsonl plus the images (PNG) under dir/images.
void write_synthetic(const SyntheticCorpus& corpus, const std::filesystem::path& dir);

}  // namespace propnet
