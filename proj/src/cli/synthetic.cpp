#include "propnet/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cstdio>

#include "propnet/corpus_io.hpp"
#include "propnet/error.hpp"

namespace propnet {

namespace {

constexpr std::array<std::string_view, 40> kFiller = {
    "the",   "people", "city",  "today",  "report", "after",  "new",    "state",  "news",   "video",
    "watch", "local",  "week",  "police", "school", "again",  "world",  "money",  "great",  "day",
    "more",  "time",   "media", "vote",   "story",  "photo",  "power",  "health", "market", "game",
    "fans",  "team",   "music", "food",   "night",  "street", "water",  "family", "friend", "life"};

struct SplitShare {
  Split split;
  double share;
};
constexpr std::array<SplitShare, 4> kShares = {
    {{Split::Train, 0.60}, {Split::Validation, 0.10}, {Split::Continuous, 0.15}, {Split::Delay, 0.15}}};

std::vector<std::string> filler(Rng& rng, std::size_t lo, std::size_t hi) {
  const std::size_t n = lo + rng.index(hi - lo + 1);
  std::vector<std::string> words;
  for (std::size_t i = 0; i < n; ++i) words.emplace_back(kFiller[rng.index(kFiller.size())]);
  return words;
}

std::string join(std::vector<std::string> words, Rng& rng, bool shuffle) {
  if (shuffle) rng.shuffle(words);
  std::string out;
  for (const auto& w : words) {
    if (!out.empty()) out.push_back(' ');
    out += w;
  }
  return out;
}

Image noise_image(std::size_t S, Rng& rng) {
  Image img{S, S, 3, std::vector<std::uint8_t>(S * S * 3)};
  for (auto& p : img.pixels) p = static_cast<std::uint8_t>(rng.index(103));  // up to 0.4 of full scale
  return img;
}

void paint_square(Image& img, std::size_t y0, std::size_t x0, std::size_t side) {
  for (std::size_t y = y0; y < y0 + side; ++y)
    for (std::size_t x = x0; x < x0 + side; ++x)
      for (std::size_t c = 0; c < img.channels; ++c) img.pixels[(y * img.width + x) * img.channels + c] = 255;
}

// Square of `side` placed uniformly inside [y_lo, y_lo+span) × [x_lo, x_lo+span).
void paint_square_in(Image& img, std::size_t y_lo, std::size_t x_lo, std::size_t span, std::size_t side, Rng& rng) {
  const std::size_t y = y_lo + rng.index(span - side + 1);
  const std::size_t x = x_lo + rng.index(span - side + 1);
  paint_square(img, y, x, side);
}

// Exact per-split counts with half positives in each.
std::vector<std::pair<Split, int>> split_plan(std::size_t n, Rng& rng) {
  std::vector<std::pair<Split, int>> plan;
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < kShares.size(); ++i) {
    const std::size_t count = i + 1 == kShares.size()
                                  ? n - assigned
                                  : static_cast<std::size_t>(static_cast<double>(n) * kShares[i].share);
    assigned += count;
    for (std::size_t j = 0; j < count; ++j) plan.emplace_back(kShares[i].split, j < count / 2 ? 1 : 0);
  }
  rng.shuffle(plan);
  return plan;
}

TimePoint random_time(const DateRange& range, Rng& rng) {
  const auto span = static_cast<std::size_t>((range.end - range.begin).count());
  return range.begin + std::chrono::seconds(static_cast<long long>(rng.index(span)));
}

}  // namespace

std::string_view to_string(SyntheticKind kind) {
  switch (kind) {
    case SyntheticKind::Separable: return "separable";
    case SyntheticKind::ImageInformative: return "image";
    case SyntheticKind::TextInformative: return "text";
    case SyntheticKind::Quadrant: return "quadrant";
    case SyntheticKind::CrossOrg: return "xorg";
  }
  return "?";
}

SyntheticKind parse_synthetic_kind(std::string_view text) {
  for (auto k : {SyntheticKind::Separable, SyntheticKind::ImageInformative, SyntheticKind::TextInformative,
                 SyntheticKind::Quadrant, SyntheticKind::CrossOrg}) {
    if (text == to_string(k)) return k;
  }
  throw ConfigError("unknown synthetic corpus kind '" + std::string(text) +
                    "' (expected separable, image, text, quadrant or xorg)");
}

SyntheticCorpus make_synthetic(SyntheticKind kind, const SyntheticOptions& opts) {
  if (opts.records < 8) throw ConfigError("synthetic corpus needs at least 8 records");
  if (opts.image_size < 8) throw ConfigError("synthetic images need a size of at least 8");
  const std::size_t S = opts.image_size;
  const std::size_t side = std::max<std::size_t>(2, S / 4);
  const SplitSpec dates = SplitSpec::published(Org::IRA);
  Rng rng(opts.seed);
  SyntheticCorpus out;

  const std::vector<Org> orgs =
      kind == SyntheticKind::CrossOrg ? std::vector<Org>{Org::IRA, Org::Russian, Org::Iranian} : std::vector<Org>{Org::IRA};
  for (std::size_t k = 0; k < orgs.size(); ++k) {
    const Org org = orgs[k];
    const auto plan = split_plan(opts.records, rng);
    for (std::size_t i = 0; i < plan.size(); ++i) {
      const auto [split, label] = plan[i];
      const bool pos = label == 1;
      std::vector<std::string> words = filler(rng, 3, 7);
      Image img = noise_image(S, rng);
      switch (kind) {
        case SyntheticKind::Separable:
          words.emplace_back(pos ? "#freedom" : "#weather");
          if (pos) paint_square_in(img, 0, 0, S, side, rng);
          break;
        case SyntheticKind::ImageInformative:
          if (rng.bernoulli(0.5)) words.emplace_back(rng.bernoulli(0.5) ? "#news" : "#today");
          if (pos) paint_square_in(img, 0, 0, S, side, rng);
          break;
        case SyntheticKind::TextInformative:
          words.emplace_back(pos ? "#freedom" : "#weather");
          break;
        case SyntheticKind::Quadrant:
          if (rng.bernoulli(0.5)) words.emplace_back(rng.bernoulli(0.5) ? "#news" : "#today");
          if (pos) paint_square_in(img, 0, 0, S / 2, side, rng);
          break;
        case SyntheticKind::CrossOrg:
          if (pos && rng.bernoulli(0.8)) words.emplace_back("shared");
          for (std::size_t j = 0; j < orgs.size(); ++j) {
            const bool present = j == k ? pos : rng.bernoulli(0.5);
            if (present) words.emplace_back("nuis" + std::to_string(j));
          }
          break;
      }
      char id[48];
      std::snprintf(id, sizeof id, "%s-%s-%05zu", std::string(to_string(kind)).c_str(),
                    std::string(to_string(org)).c_str(), i);
      const std::string ref = std::string("images/") + id + ".png";
      TweetRecord r = make_record(id, pos ? org : Org::Background, random_time(dates.range(split), rng),
                                  join(std::move(words), rng, true), ref);
      r.image_hash = image_hash(to_grayscale(img));
      r.split = split;
      r.subset = org;
      out.images.emplace(ref, std::move(img));
      out.records.push_back(std::move(r));
    }
  }
  return out;
}

void write_synthetic(const SyntheticCorpus& corpus, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "images");
  for (const auto& [ref, img] : corpus.images) write_png(dir / ref, img);
  write_corpus_jsonl(dir / "corpus.jsonl", corpus.records);
}

}  // namespace propnet
