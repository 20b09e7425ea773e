#include "propnet/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <unordered_set>

#include "propnet/error.hpp"

namespace propnet {

std::string_view to_string(Org org) {
  switch (org) {
    case Org::IRA: return "IRA";
    case Org::Russian: return "Russian";
    case Org::Iranian: return "Iranian";
    case Org::Background: return "Background";
  }
  return "?";
}

std::string_view to_string(Label label) { return label == Label::Sponsored ? "Sponsored" : "NonSponsored"; }

std::string_view to_string(Split split) {
  switch (split) {
    case Split::Train: return "train";
    case Split::Validation: return "validation";
    case Split::Continuous: return "continuous";
    case Split::Delay: return "delay";
  }
  return "?";
}

Org parse_org(std::string_view text) {
  for (Org o : {Org::IRA, Org::Russian, Org::Iranian, Org::Background}) {
    if (text == to_string(o)) return o;
  }
  throw InputError("unknown organisation '" + std::string(text) + "'");
}

Split parse_split(std::string_view text) {
  for (Split s : {Split::Train, Split::Validation, Split::Continuous, Split::Delay}) {
    if (text == to_string(s)) return s;
  }
  throw InputError("unknown split '" + std::string(text) + "'");
}

namespace {

int read_int(std::string_view text, std::size_t pos, std::size_t len, std::string_view whole) {
  int value = 0;
  if (pos + len > text.size()) throw InputError("malformed timestamp '" + std::string(whole) + "'");
  auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + pos + len, value);
  if (ec != std::errc() || ptr != text.data() + pos + len) {
    throw InputError("malformed timestamp '" + std::string(whole) + "'");
  }
  return value;
}

}  // namespace

TimePoint parse_timestamp(std::string_view text) {
  using namespace std::chrono;
  if (text.size() < 10 || text[4] != '-' || text[7] != '-') {
    throw InputError("malformed timestamp '" + std::string(text) + "'");
  }
  const year_month_day ymd{year{read_int(text, 0, 4, text)}, month{static_cast<unsigned>(read_int(text, 5, 2, text))},
                           day{static_cast<unsigned>(read_int(text, 8, 2, text))}};
  if (!ymd.ok()) throw InputError("invalid calendar date '" + std::string(text) + "'");
  seconds tod{0};
  if (text.size() > 10) {
    if ((text[10] != 'T' && text[10] != ' ') || text.size() < 19 || text[13] != ':' || text[16] != ':') {
      throw InputError("malformed timestamp '" + std::string(text) + "'");
    }
    const int hh = read_int(text, 11, 2, text), mm = read_int(text, 14, 2, text), ss = read_int(text, 17, 2, text);
    if (hh > 23 || mm > 59 || ss > 60) throw InputError("invalid time of day '" + std::string(text) + "'");
    tod = hours{hh} + minutes{mm} + seconds{ss};
    std::string_view rest = text.substr(19);
    if (!rest.empty() && rest.front() == '.') {
      std::size_t i = 1;
      while (i < rest.size() && std::isdigit(static_cast<unsigned char>(rest[i]))) ++i;
      rest.remove_prefix(i);
    }
    if (!(rest.empty() || rest == "Z" || rest == "+00:00" || rest == "+0000")) {
      throw InputError("timestamp must be UTC: '" + std::string(text) + "'");
    }
  }
  return sys_days{ymd} + tod;
}

std::string format_timestamp(TimePoint t) {
  using namespace std::chrono;
  const sys_days day = floor<days>(t);
  const year_month_day ymd{day};
  const hh_mm_ss hms{t - day};
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02ld:%02ld:%02ldZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<long>(hms.hours().count()), static_cast<long>(hms.minutes().count()),
                static_cast<long>(hms.seconds().count()));
  return buf;
}

std::string format_date(TimePoint t) { return format_timestamp(t).substr(0, 10); }

int month_key(TimePoint t) {
  const std::chrono::year_month_day ymd{std::chrono::floor<std::chrono::days>(t)};
  return static_cast<int>(ymd.year()) * 100 + static_cast<int>(static_cast<unsigned>(ymd.month()));
}

TweetRecord make_record(std::string id, Org org, TimePoint timestamp, std::string raw_text,
                        std::optional<std::string> image_ref) {
  TweetRecord r;
  r.id = std::move(id);
  r.org = org;
  r.timestamp = timestamp;
  r.std_text = standardize_text(raw_text);
  r.raw_text = std::move(raw_text);
  r.image_ref = std::move(image_ref);
  r.label = org == Org::Background ? Label::NonSponsored : Label::Sponsored;
  return r;
}

void SplitSpec::validate() const {
  const std::pair<const char*, const DateRange*> ranges[] = {
      {"train", &train}, {"validation", &validation}, {"continuous", &continuous_test}, {"delay", &delay_test}};
  for (const auto& [name, r] : ranges) {
    if (!(r->begin < r->end)) {
      throw ConfigError(std::string("split range '") + name + "' is empty: " + format_date(r->begin) + " .. " +
                        format_date(r->end));
    }
  }
  for (std::size_t i = 0; i + 1 < std::size(ranges); ++i) {
    if (ranges[i].second->end > ranges[i + 1].second->begin) {
      throw ConfigError(std::string("split ranges '") + ranges[i].first + "' and '" + ranges[i + 1].first +
                        "' overlap or are out of order");
    }
  }
}

const DateRange& SplitSpec::range(Split s) const {
  switch (s) {
    case Split::Train: return train;
    case Split::Validation: return validation;
    case Split::Continuous: return continuous_test;
    case Split::Delay: return delay_test;
  }
  throw ConfigError("unknown split");
}

SplitSpec SplitSpec::published(Org org) {
  auto day = [](const char* s) { return parse_timestamp(s); };
  SplitSpec spec;
  switch (org) {
    case Org::IRA:
      spec.train = {day("2015-04-01"), day("2016-01-20")};
      spec.validation = {day("2016-01-20"), day("2016-02-01")};
      spec.continuous_test = {day("2016-02-01"), day("2016-02-29")};
      break;
    case Org::Russian:
    case Org::Iranian:
      spec.train = {day("2015-04-01"), day("2015-12-15")};
      spec.validation = {day("2015-12-15"), day("2016-01-01")};
      spec.continuous_test = {day("2016-01-01"), day("2016-02-29")};
      break;
    case Org::Background:
      throw ConfigError("the background pool has no published split");
  }
  spec.delay_test = {day("2016-10-01"), day("2017-07-01")};
  return spec;
}

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::vector<std::string_view> split_ws(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    std::size_t j = i;
    while (j < text.size() && !is_space(text[j])) ++j;
    if (j > i) out.push_back(text.substr(i, j - i));
    i = j;
  }
  return out;
}

std::string replace_urls(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    const std::string_view rest = text.substr(i);
    std::size_t scheme = 0;
    if (rest.starts_with("https://")) scheme = 8;
    else if (rest.starts_with("http://")) scheme = 7;
    if (scheme && scheme < rest.size() && !is_space(rest[scheme])) {
      std::size_t j = scheme;
      while (j < rest.size() && !is_space(rest[j])) ++j;
      out += "URL";
      i += j;
      continue;
    }
    out.push_back(text[i]);
    ++i;
  }
  return out;
}

bool is_username_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

// Length of a leading "RT @user:" / "RT" marker (after whitespace), or 0.
std::size_t retweet_prefix(std::string_view text) {
  std::size_t i = 0;
  while (i < text.size() && is_space(text[i])) ++i;
  const std::string_view rest = text.substr(i);
  if (!(rest.starts_with("RT") || rest.starts_with("rt"))) return 0;
  std::size_t j = 2;
  if (j < rest.size() && !is_space(rest[j])) return 0;
  std::size_t k = j;
  while (k < rest.size() && is_space(rest[k])) ++k;
  if (k < rest.size() && rest[k] == '@') {
    std::size_t u = k + 1;
    while (u < rest.size() && is_username_char(rest[u])) ++u;
    if (u > k + 1) {
      if (u < rest.size() && rest[u] == ':') ++u;
      return i + u;
    }
  }
  return i + j;
}

std::string collapse_whitespace(std::string_view text) {
  std::string out;
  for (std::string_view tok : split_ws(text)) {
    if (!out.empty()) out.push_back(' ');
    out.append(tok);
  }
  return out;
}

constexpr std::string_view kTrailingPunct = ".,!?:;\"'";

std::string normalise_hashtag(std::string_view token) {
  while (!token.empty() && kTrailingPunct.find(token.back()) != std::string_view::npos) token.remove_suffix(1);
  std::string out(token);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

std::string standardize_text(std::string_view raw) {
  std::string text = replace_urls(raw);
  while (std::size_t n = retweet_prefix(text)) text.erase(0, n);
  return collapse_whitespace(text);
}

bool is_hashtag_token(std::string_view token) {
  return token.size() > 1 && token.front() == '#' && normalise_hashtag(token).size() > 1;
}

std::vector<std::string> extract_hashtags(std::string_view std_text) {
  std::vector<std::string> tags;
  for (std::string_view tok : split_ws(std_text)) {
    if (is_hashtag_token(tok)) tags.push_back(normalise_hashtag(tok));
  }
  return tags;
}

namespace {

// Occurrences of one hashtag grouped by the hashtag count H of their tweet.
using ShareCounts = std::map<std::size_t, std::size_t>;

// Σ_H hits_H / H in extended precision, rounded once to double.
double share_sum(const ShareCounts& counts) {
  long double sum = 0.0L;
  for (const auto& [total, hits] : counts) sum += static_cast<long double>(hits) / static_cast<long double>(total);
  return static_cast<double>(sum);
}

}  // namespace

double hashtag_importance(std::span<const std::vector<std::string>> tweet_hashtags, std::string_view hashtag) {
  ShareCounts counts;
  for (const auto& tags : tweet_hashtags) {
    if (tags.empty()) continue;
    const auto hits = static_cast<std::size_t>(std::count(tags.begin(), tags.end(), hashtag));
    if (hits > 0) counts[tags.size()] += hits;
  }
  return share_sum(counts);
}

namespace {

std::vector<std::vector<std::string>> hashtags_of(std::span<const TweetRecord> records) {
  std::vector<std::vector<std::string>> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(extract_hashtags(r.std_text));
  return out;
}

}  // namespace

double hashtag_importance(std::span<const TweetRecord> sponsored, std::string_view hashtag) {
  const auto tags = hashtags_of(sponsored);
  return hashtag_importance(std::span<const std::vector<std::string>>(tags), hashtag);
}

std::vector<HashtagScore> hashtag_scores(std::span<const std::vector<std::string>> tweet_hashtags) {
  std::map<std::string, ShareCounts> acc;
  for (const auto& tags : tweet_hashtags) {
    for (const auto& t : tags) acc[t][tags.size()] += 1;
  }
  std::vector<HashtagScore> out;
  out.reserve(acc.size());
  for (const auto& [tag, counts] : acc) out.push_back({tag, share_sum(counts)});
  std::stable_sort(out.begin(), out.end(), [](const HashtagScore& a, const HashtagScore& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.hashtag < b.hashtag;
  });
  return out;
}

std::vector<HashtagScore> top_k_hashtags(std::span<const std::vector<std::string>> tweet_hashtags, std::size_t k) {
  if (k == 0) throw ConfigError("top_k_hashtags: k must be at least 1");
  auto scores = hashtag_scores(tweet_hashtags);
  if (scores.size() > k) scores.resize(k);
  return scores;
}

std::vector<HashtagScore> top_k_hashtags(std::span<const TweetRecord> sponsored, std::size_t k) {
  const auto tags = hashtags_of(sponsored);
  return top_k_hashtags(std::span<const std::vector<std::string>>(tags), k);
}

namespace {

// Fractional overlap of source cells with each of `cells` equal target bins.
std::vector<std::vector<std::pair<std::size_t, double>>> box_weights(std::size_t src, std::size_t cells) {
  std::vector<std::vector<std::pair<std::size_t, double>>> w(cells);
  const double step = static_cast<double>(src) / static_cast<double>(cells);
  for (std::size_t t = 0; t < cells; ++t) {
    const double lo = static_cast<double>(t) * step;
    const double hi = lo + step;
    for (auto s = static_cast<std::size_t>(std::floor(lo)); s < src && static_cast<double>(s) < hi; ++s) {
      const double overlap = std::min(hi, static_cast<double>(s + 1)) - std::max(lo, static_cast<double>(s));
      if (overlap > 0) w[t].emplace_back(s, overlap / step);
    }
  }
  return w;
}

}  // namespace

std::uint64_t image_hash(const GrayRaster& raster) {
  if (raster.width == 0 || raster.height == 0 || raster.values.size() != raster.width * raster.height) {
    throw InputError("image_hash: zero-dimension raster");
  }
  const auto wx = box_weights(raster.width, 8);
  const auto wy = box_weights(raster.height, 8);
  double cells[64];
  double total = 0.0;
  for (std::size_t ty = 0; ty < 8; ++ty) {
    for (std::size_t tx = 0; tx < 8; ++tx) {
      double v = 0.0;
      for (auto [sy, fy] : wy[ty])
        for (auto [sx, fx] : wx[tx]) v += fy * fx * raster.at(sy, sx);
      cells[ty * 8 + tx] = v;
      total += v;
    }
  }
  const double mean = total / 64.0;
  std::uint64_t hash = 0;
  for (int i = 0; i < 64; ++i) {
    hash = (hash << 1) | (cells[i] > mean ? 1u : 0u);
  }
  return hash;
}

std::string hash_to_hex(std::uint64_t hash) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

std::uint64_t hash_from_hex(std::string_view hex) {
  std::uint64_t value = 0;
  auto [ptr, ec] = std::from_chars(hex.data(), hex.data() + hex.size(), value, 16);
  if (hex.size() != 16 || ec != std::errc() || ptr != hex.data() + hex.size()) {
    throw InputError("image hash must be 16 hex digits, got '" + std::string(hex) + "'");
  }
  return value;
}

std::vector<TweetRecord> dedup(std::vector<TweetRecord> records) {
  std::stable_sort(records.begin(), records.end(), [](const TweetRecord& a, const TweetRecord& b) {
    if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
    return a.id < b.id;
  });
  std::unordered_set<std::string> texts;
  std::unordered_set<std::uint64_t> hashes;
  std::vector<TweetRecord> kept;
  for (auto& r : records) {
    const bool text_dup = !r.std_text.empty() && texts.contains(r.std_text);
    const bool image_dup = r.image_hash && hashes.contains(*r.image_hash);
    if (text_dup || image_dup) continue;
    if (!r.std_text.empty()) texts.insert(r.std_text);
    if (r.image_hash) hashes.insert(*r.image_hash);
    kept.push_back(std::move(r));
  }
  return kept;
}

std::vector<TweetRecord> purge_positives_from_negatives(std::vector<TweetRecord> negatives,
                                                        std::span<const TweetRecord> positives) {
  std::unordered_set<std::string> texts;
  std::unordered_set<std::uint64_t> hashes;
  for (const auto& p : positives) {
    if (!p.std_text.empty()) texts.insert(p.std_text);
    if (p.image_hash) hashes.insert(*p.image_hash);
  }
  std::erase_if(negatives, [&](const TweetRecord& n) {
    return (!n.std_text.empty() && texts.contains(n.std_text)) || (n.image_hash && hashes.contains(*n.image_hash));
  });
  return negatives;
}

std::vector<TweetRecord> filter_by_keywords(std::vector<TweetRecord> records, std::span<const std::string> keywords) {
  if (keywords.empty()) throw ConfigError("filter_by_keywords: keyword list is empty");
  const std::unordered_set<std::string> wanted(keywords.begin(), keywords.end());
  std::erase_if(records, [&](const TweetRecord& r) {
    const auto tags = extract_hashtags(r.std_text);
    return std::none_of(tags.begin(), tags.end(), [&](const std::string& t) { return wanted.contains(t); });
  });
  return records;
}

namespace {

// Uniform subset of size m, original relative order preserved.
std::vector<TweetRecord> sample_without_replacement(std::vector<TweetRecord> items, std::size_t m, Rng& rng) {
  if (m >= items.size()) return items;
  std::vector<std::size_t> idx(items.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  // Partial Fisher-Yates: the first m slots are the sample.
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t j = i + rng.index(idx.size() - i);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(m);
  std::sort(idx.begin(), idx.end());
  std::vector<TweetRecord> out;
  out.reserve(m);
  for (std::size_t i : idx) out.push_back(std::move(items[i]));
  return out;
}

}  // namespace

std::vector<TweetRecord> balanced_monthly_sample(std::vector<TweetRecord> positives,
                                                 std::vector<TweetRecord> negatives, Rng& rng) {
  std::map<int, std::pair<std::vector<TweetRecord>, std::vector<TweetRecord>>> months;
  for (auto& r : positives) months[month_key(r.timestamp)].first.push_back(std::move(r));
  for (auto& r : negatives) months[month_key(r.timestamp)].second.push_back(std::move(r));
  std::vector<TweetRecord> out;
  for (auto& [month, sides] : months) {
    const std::size_t m = std::min(sides.first.size(), sides.second.size());
    if (m == 0) continue;
    auto pos = sample_without_replacement(std::move(sides.first), m, rng);
    auto neg = sample_without_replacement(std::move(sides.second), m, rng);
    for (auto& r : pos) out.push_back(std::move(r));
    for (auto& r : neg) out.push_back(std::move(r));
  }
  return out;
}

std::vector<TweetRecord>& SplitResult::operator[](Split s) {
  switch (s) {
    case Split::Train: return train;
    case Split::Validation: return validation;
    case Split::Continuous: return continuous_test;
    case Split::Delay: return delay_test;
  }
  throw ConfigError("unknown split");
}

const std::vector<TweetRecord>& SplitResult::operator[](Split s) const {
  return const_cast<SplitResult&>(*this)[s];
}

SplitResult split_temporal(std::vector<TweetRecord> records, const SplitSpec& spec) {
  spec.validate();
  SplitResult out;
  for (auto& r : records) {
    for (Split s : {Split::Train, Split::Validation, Split::Continuous, Split::Delay}) {
      if (spec.range(s).contains(r.timestamp)) {
        r.split = s;
        out[s].push_back(std::move(r));
        break;
      }
    }
  }
  return out;
}

}  // namespace propnet
