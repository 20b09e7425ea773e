#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "propnet/corpus.hpp"
#include "propnet/image.hpp"
#include "propnet/model.hpp"
#include "propnet/tokenizer.hpp"

namespace propnet {

// Pixels for a record, or nullopt when it has none.
using ImageSource = std::function<std::optional<Image>(const TweetRecord&)>;

// Resolves image_ref against `root`; a missing file raises InputError.
ImageSource image_dir_source(std::filesystem::path root);
ImageSource image_map_source(const std::map<std::string, Image>& images);

// Texts after the spec's variant rewrite.
std::vector<std::string> variant_texts(std::span<const TweetRecord> records, VariantKind kind);

// Image tensor and/or token sequence for the spec's modalities.
Sample make_sample(const TweetRecord& record, const ModelSpec& spec, const Vocab* vocab, const ImageSource& images);
std::vector<Sample> make_samples(std::span<const TweetRecord> records, const ModelSpec& spec, const Vocab* vocab,
                                 const ImageSource& images);

std::vector<TweetRecord> select(std::span<const TweetRecord> records, std::optional<Org> subset,
                                std::optional<Split> split);

}  // namespace propnet
