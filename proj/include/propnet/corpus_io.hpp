#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "propnet/corpus.hpp"
#include "propnet/textvariants.hpp"

namespace propnet {

// Raw archive: one JSON object per line with id, org, timestamp, text and
// optional image (path) and english (default true). Blank lines are
// skipped; malformed lines raise InputError naming the line number.
std::vector<TweetRecord> read_raw_jsonl(const std::filesystem::path& path);
std::vector<TweetRecord> parse_raw_jsonl(std::string_view content, const std::string& origin = "<input>");

// Built corpus: the raw fields plus std_text, image_hash, label, split and
// subset. With `variant`, every line also carries variant/variant_text.
void write_corpus_jsonl(const std::filesystem::path& path, std::span<const TweetRecord> records,
                        std::optional<VariantKind> variant = std::nullopt);
std::vector<TweetRecord> read_corpus_jsonl(const std::filesystem::path& path);

}  // namespace propnet
