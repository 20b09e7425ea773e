#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "propnet/image.hpp"
#include "propnet/numerics/rng.hpp"

namespace propnet {

enum class Org { IRA, Russian, Iranian, Background };
enum class Label { NonSponsored = 0, Sponsored = 1 };
enum class Split { Train, Validation, Continuous, Delay };

using TimePoint = std::chrono::sys_seconds;

std::string_view to_string(Org org);
std::string_view to_string(Label label);
std::string_view to_string(Split split);
Org parse_org(std::string_view text);
Split parse_split(std::string_view text);

// "YYYY-MM-DD", "YYYY-MM-DDTHH:MM:SS[.fff][Z|+00:00]".
TimePoint parse_timestamp(std::string_view text);
std::string format_timestamp(TimePoint t);
std::string format_date(TimePoint t);
// Calendar month key, e.g. 201506.
int month_key(TimePoint t);

struct TweetRecord {
  std::string id;
  Org org = Org::Background;
  TimePoint timestamp{};
  std::string raw_text;
  std::string std_text;
  std::optional<std::string> image_ref;
  std::optional<std::uint64_t> image_hash;
  Label label = Label::NonSponsored;
  bool english = true;
  // Filled in by the corpus builder.
  std::optional<Split> split;
  std::optional<Org> subset;
};

// Record with std_text and label derived from raw_text and org.
TweetRecord make_record(std::string id, Org org, TimePoint timestamp, std::string raw_text,
                        std::optional<std::string> image_ref = std::nullopt);

// Half-open [begin, end).
struct DateRange {
  TimePoint begin{};
  TimePoint end{};
  bool contains(TimePoint t) const { return t >= begin && t < end; }
};

struct SplitSpec {
  DateRange train;
  DateRange validation;
  DateRange continuous_test;
  DateRange delay_test;

  // Throws ConfigError on empty, overlapping or out-of-order ranges.
  void validate() const;
  const DateRange& range(Split s) const;
  // Published date ranges per organisation; end dates made exclusive.
  static SplitSpec published(Org org);
};

struct HashtagScore {
  std::string hashtag;
  double score = 0.0;
};

// URL replacement, leading retweet-marker removal, whitespace collapse.
std::string standardize_text(std::string_view raw);
bool is_hashtag_token(std::string_view token);
std::vector<std::string> extract_hashtags(std::string_view std_text);

// Sum over tweets of (occurrences of h) / (hashtags in tweet).
double hashtag_importance(std::span<const std::vector<std::string>> tweet_hashtags, std::string_view hashtag);
double hashtag_importance(std::span<const TweetRecord> sponsored, std::string_view hashtag);
std::vector<HashtagScore> hashtag_scores(std::span<const std::vector<std::string>> tweet_hashtags);
// Descending score, ties ascending lexicographically.
std::vector<HashtagScore> top_k_hashtags(std::span<const std::vector<std::string>> tweet_hashtags, std::size_t k = 15);
std::vector<HashtagScore> top_k_hashtags(std::span<const TweetRecord> sponsored, std::size_t k = 15);

// 64-bit average hash: 8×8 box-filtered thumbnail, bit set where the cell
// is strictly brighter than the thumbnail mean, row-major, MSB first.
std::uint64_t image_hash(const GrayRaster& raster);
std::string hash_to_hex(std::uint64_t hash);
std::uint64_t hash_from_hex(std::string_view hex);

// Stable (timestamp, id) scan keeping the first record of every std_text
// and image hash; empty text / missing hash never collide.
std::vector<TweetRecord> dedup(std::vector<TweetRecord> records);
std::vector<TweetRecord> purge_positives_from_negatives(std::vector<TweetRecord> negatives,
                                                        std::span<const TweetRecord> positives);
std::vector<TweetRecord> filter_by_keywords(std::vector<TweetRecord> records, std::span<const std::string> keywords);
// Per calendar month keep min(|pos|, |neg|) of each side, subsampling the
// larger side uniformly without replacement.
std::vector<TweetRecord> balanced_monthly_sample(std::vector<TweetRecord> positives,
                                                 std::vector<TweetRecord> negatives, Rng& rng);

struct SplitResult {
  std::vector<TweetRecord> train;
  std::vector<TweetRecord> validation;
  std::vector<TweetRecord> continuous_test;
  std::vector<TweetRecord> delay_test;

  std::vector<TweetRecord>& operator[](Split s);
  const std::vector<TweetRecord>& operator[](Split s) const;
};

// Records outside every range are dropped; each kept record gets its split.
SplitResult split_temporal(std::vector<TweetRecord> records, const SplitSpec& spec);

}  // namespace propnet
