#include "propnet/tokenizer.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>

#include "propnet/error.hpp"

namespace propnet {

namespace {

const std::vector<std::string> kSpecials = {"[PAD]", "[UNK]", "[CLS]", "[SEP]"};

std::vector<std::string_view> whitespace_words(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    if (j > i) out.push_back(text.substr(i, j - i));
    i = j;
  }
  return out;
}

std::vector<std::string> by_frequency(const std::map<std::string, std::size_t>& counts) {
  std::vector<std::pair<std::string, std::size_t>> items(counts.begin(), counts.end());
  std::stable_sort(items.begin(), items.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> out;
  out.reserve(items.size());
  for (auto& [s, c] : items) out.push_back(s);
  return out;
}

}  // namespace

Vocab::Vocab() : Vocab(kSpecials) {}

Vocab::Vocab(std::vector<std::string> pieces) : pieces_(std::move(pieces)) {
  if (pieces_.size() < kSpecials.size() || !std::equal(kSpecials.begin(), kSpecials.end(), pieces_.begin())) {
    throw InputError("vocabulary must start with [PAD] [UNK] [CLS] [SEP]");
  }
  for (std::size_t i = 0; i < pieces_.size(); ++i) {
    if (pieces_[i].empty()) throw InputError("vocabulary piece " + std::to_string(i) + " is empty");
    if (!index_.emplace(pieces_[i], static_cast<int>(i)).second) {
      throw InputError("duplicate vocabulary piece '" + pieces_[i] + "'");
    }
  }
}

const std::string& Vocab::piece(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= pieces_.size()) {
    throw InputError("token id " + std::to_string(id) + " outside vocabulary of size " + std::to_string(size()));
  }
  return pieces_[static_cast<std::size_t>(id)];
}

std::optional<int> Vocab::find(std::string_view piece) const {
  auto it = index_.find(std::string(piece));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

void Vocab::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write vocabulary to " + path.string());
  for (const auto& p : pieces_) out << p << '\n';
  if (!out) throw InputError("failed writing vocabulary to " + path.string());
}

Vocab Vocab::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read vocabulary " + path.string());
  std::vector<std::string> pieces;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    pieces.push_back(line);
  }
  return Vocab(std::move(pieces));
}

std::vector<std::string> utf8_chars(std::string_view word) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < word.size()) {
    const auto lead = static_cast<unsigned char>(word[i]);
    std::size_t len = lead < 0x80 ? 1 : (lead >> 5) == 0x6 ? 2 : (lead >> 4) == 0xE ? 3 : (lead >> 3) == 0x1E ? 4 : 1;
    if (i + len > word.size()) len = 1;
    for (std::size_t k = 1; k < len; ++k) {
      if ((static_cast<unsigned char>(word[i + k]) & 0xC0) != 0x80) {
        len = 1;
        break;
      }
    }
    out.emplace_back(word.substr(i, len));
    i += len;
  }
  return out;
}

Vocab build_vocab(std::span<const std::string> texts, std::size_t target_size) {
  if (target_size <= kSpecials.size()) {
    throw ConfigError("vocabulary target size must exceed " + std::to_string(kSpecials.size()));
  }
  std::map<std::string, std::size_t> char_counts;
  std::map<std::string, std::size_t> word_counts;
  for (const auto& text : texts) {
    for (std::string_view w : whitespace_words(text)) {
      const auto chars = utf8_chars(w);
      for (const auto& c : chars) ++char_counts[c];
      if (chars.size() >= 2) ++word_counts[std::string(w)];
    }
  }
  if (char_counts.empty()) throw InputError("cannot build a vocabulary from an empty corpus");

  std::vector<std::string> pieces = kSpecials;
  std::map<std::string, bool> seen;
  for (const auto& s : kSpecials) seen[s] = true;
  auto push = [&](std::string p) {
    if (pieces.size() < target_size && !seen[p]) {
      seen[p] = true;
      pieces.push_back(std::move(p));
    }
  };
  const auto chars = by_frequency(char_counts);
  for (const auto& c : chars) push(c);
  for (const auto& c : chars) push(std::string(kContinuation) + c);
  for (const auto& w : by_frequency(word_counts)) push(w);
  return Vocab(std::move(pieces));
}

std::vector<int> wordpiece(std::string_view word, const Vocab& vocab) {
  const auto chars = utf8_chars(word);
  std::vector<int> out;
  std::size_t start = 0;
  while (start < chars.size()) {
    std::optional<int> match;
    std::size_t end = chars.size();
    for (; end > start; --end) {
      std::string cand = start == 0 ? std::string() : std::string(kContinuation);
      for (std::size_t k = start; k < end; ++k) cand += chars[k];
      if ((match = vocab.find(cand))) break;
    }
    if (!match) return {kUnkId};
    out.push_back(*match);
    start = end;
  }
  return out;
}

std::size_t TokenSequence::sep_position() const {
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] == kSepId) return i;
  }
  throw InputError("token sequence has no [SEP]");
}

TokenSequence encode(std::string_view text, const Vocab& vocab, std::size_t n) {
  if (n < 3) throw ConfigError("sequence length must be at least 3, got " + std::to_string(n));
  TokenSequence seq;
  seq.ids.push_back(kClsId);
  seq.word_index.emplace_back();
  const std::size_t budget = n - 2;
  for (std::string_view w : whitespace_words(text)) {
    const auto pieces = wordpiece(w, vocab);
    if (seq.ids.size() - 1 + pieces.size() > budget) break;
    const std::size_t wi = seq.words.size();
    seq.words.emplace_back(w);
    for (int id : pieces) {
      seq.ids.push_back(id);
      seq.word_index.emplace_back(wi);
    }
  }
  seq.ids.push_back(kSepId);
  seq.word_index.emplace_back();
  seq.mask.assign(seq.ids.size(), 1);
  while (seq.ids.size() < n) {
    seq.ids.push_back(kPadId);
    seq.mask.push_back(0);
    seq.word_index.emplace_back();
  }
  return seq;
}

}  // namespace propnet
