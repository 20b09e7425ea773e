#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace propnet {

inline constexpr int kPadId = 0;
inline constexpr int kUnkId = 1;
inline constexpr int kClsId = 2;
inline constexpr int kSepId = 3;
inline constexpr std::string_view kContinuation = "##";

class Vocab {
 public:
  // Specials only.
  Vocab();
  // `pieces` must start with [PAD] [UNK] [CLS] [SEP] and be unique.
  explicit Vocab(std::vector<std::string> pieces);

  std::size_t size() const noexcept { return pieces_.size(); }
  const std::string& piece(int id) const;
  std::optional<int> find(std::string_view piece) const;
  const std::vector<std::string>& pieces() const noexcept { return pieces_; }

  // One piece per line; line number is the id.
  void save(const std::filesystem::path& path) const;
  static Vocab load(const std::filesystem::path& path);

  friend bool operator==(const Vocab& a, const Vocab& b) { return a.pieces_ == b.pieces_; }

 private:
  std::vector<std::string> pieces_;
  std::unordered_map<std::string, int> index_;
};

// Specials, then every character by descending frequency, then the
// continuation form of each character in the same order, then whole words
// of two or more characters by descending frequency; ties break
// lexicographically. Truncated to target_size.
Vocab build_vocab(std::span<const std::string> texts, std::size_t target_size);

struct TokenSequence {
  std::vector<int> ids;
  std::vector<int> mask;
  // Source word of each piece; empty for [CLS], [SEP] and [PAD].
  std::vector<std::optional<std::size_t>> word_index;
  // Words that survived truncation, in order.
  std::vector<std::string> words;

  std::size_t length() const noexcept { return ids.size(); }
  // Position of [SEP].
  std::size_t sep_position() const;
};

// Greedy longest-match pieces of one word; a word that cannot be covered
// becomes a single [UNK].
std::vector<int> wordpiece(std::string_view word, const Vocab& vocab);

// [CLS] pieces... [SEP] [PAD]...; trailing whole words are dropped until
// the pieces fit in n - 2 slots.
TokenSequence encode(std::string_view text, const Vocab& vocab, std::size_t n);

// Split into UTF-8 code points (invalid bytes stand alone).
std::vector<std::string> utf8_chars(std::string_view word);

}  // namespace propnet
