#include <algorithm>
#include <set>

#include "doctest.h"
#include "propnet/corpus.hpp"
#include "propnet/corpus_io.hpp"
#include "propnet/error.hpp"

using namespace propnet;

namespace {

TweetRecord rec(std::string id, Org org, const char* ts, std::string text, std::optional<std::uint64_t> hash = {}) {
  TweetRecord r = make_record(std::move(id), org, parse_timestamp(ts), std::move(text));
  r.image_hash = hash;
  return r;
}

}  // namespace

TEST_CASE("standardize_text replaces urls and strips leading retweet markers") {
  CHECK(standardize_text("#Putin's 1st New Year's \"achievement\" in #Syria https://t.co/x") ==
        "#Putin's 1st New Year's \"achievement\" in #Syria URL");
  CHECK(standardize_text("RT @bob: Hello https://t.co/a") == "Hello URL");
  CHECK(standardize_text("") == "");
  CHECK(standardize_text("  a \t b\n") == "a b");
  CHECK(standardize_text("hello RT @bob: x") == "hello RT @bob: x");
  for (const char* s : {"RT @a: RT @b: x http://q.io y", "  spaced   out ", "no change"}) {
    const std::string once = standardize_text(s);
    CHECK(standardize_text(once) == once);
  }
}

TEST_CASE("hashtags are lowercased and stripped of trailing punctuation") {
  const auto tags = extract_hashtags("#Putin's 1st New Year's \"achievement\" in #Syria URL");
  CHECK(tags == std::vector<std::string>{"#putin's", "#syria"});
  CHECK(extract_hashtags("no tags here").empty());
  CHECK(extract_hashtags("#A #a") == std::vector<std::string>{"#a", "#a"});
  CHECK(extract_hashtags("#end. # #x,") == std::vector<std::string>{"#end", "#x"});
}

TEST_CASE("hashtag importance sums per-tweet shares") {
  const std::vector<std::vector<std::string>> tweets = {{"#a", "#b"}, {"#a"}, {"#b", "#b", "#c"}};
  CHECK(hashtag_importance(tweets, "#b") == doctest::Approx(7.0 / 6.0).epsilon(1e-15));
  CHECK(hashtag_importance(tweets, "#zzz") == 0.0);
  const std::vector<std::vector<std::string>> single = {{"#a"}};
  CHECK(hashtag_importance(single, "#a") == 1.0);

  const auto top = top_k_hashtags(tweets, 2);
  REQUIRE(top.size() == 2);
  // #a: 1/2 + 1 = 3/2, #b: 1/2 + 2/3 = 7/6.
  CHECK(top[0].hashtag == "#a");
  CHECK(top[0].score == doctest::Approx(1.5));
  CHECK(top[1].hashtag == "#b");
  CHECK(top[1].score == doctest::Approx(7.0 / 6.0));
  CHECK(top_k_hashtags(tweets, 10).size() == 3);

  const std::vector<std::vector<std::string>> tie = {{"#y"}, {"#x"}};
  const auto t = top_k_hashtags(tie, 2);
  CHECK(t[0].hashtag == "#x");
  CHECK(t[1].hashtag == "#y");
  CHECK_THROWS_AS(top_k_hashtags(tie, 0), ConfigError);
}

TEST_CASE("average hash of constant and half-split images") {
  GrayRaster flat(16, 16, 0.3);
  CHECK(image_hash(flat) == 0);
  GrayRaster split(16, 16, 0.0);
  for (std::size_t y = 0; y < 16; ++y)
    for (std::size_t x = 8; x < 16; ++x) split.at(y, x) = 1.0;
  CHECK(image_hash(split) == 0x0F0F0F0F0F0F0F0FULL);
  CHECK(hash_to_hex(0x0F0F0F0F0F0F0F0FULL) == "0f0f0f0f0f0f0f0f");
  CHECK(hash_from_hex("0f0f0f0f0f0f0f0f") == 0x0F0F0F0F0F0F0F0FULL);
  CHECK_THROWS_AS(image_hash(GrayRaster{}), InputError);
}

TEST_CASE("dedup keeps the first of each text and image hash") {
  std::vector<TweetRecord> same_text = {rec("1", Org::IRA, "2015-05-01", "hello", 1),
                                        rec("2", Org::IRA, "2015-05-02", "hello", 2)};
  auto out = dedup(same_text);
  REQUIRE(out.size() == 1);
  CHECK(out[0].id == "1");

  std::vector<TweetRecord> hashes = {rec("1", Org::IRA, "2015-05-01", "a", 10),
                                     rec("2", Org::IRA, "2015-05-02", "b", 20),
                                     rec("3", Org::IRA, "2015-05-03", "c", 10)};
  out = dedup(hashes);
  REQUIRE(out.size() == 2);
  CHECK(out[0].id == "1");
  CHECK(out[1].id == "2");
  CHECK(dedup(out).size() == out.size());
}

TEST_CASE("purge removes negatives sharing text or image with positives") {
  std::vector<TweetRecord> pos = {rec("p1", Org::IRA, "2015-05-01", "same", 1)};
  std::vector<TweetRecord> neg = {rec("n1", Org::Background, "2015-05-01", "same", 9),
                                  rec("n2", Org::Background, "2015-05-01", "other", 1),
                                  rec("n3", Org::Background, "2015-05-01", "fine", 5)};
  auto out = purge_positives_from_negatives(neg, pos);
  REQUIRE(out.size() == 1);
  CHECK(out[0].id == "n3");
  std::vector<TweetRecord> disjoint = {rec("n4", Org::Background, "2015-05-01", "x", 7)};
  CHECK(purge_positives_from_negatives(disjoint, pos).size() == 1);
}

TEST_CASE("keyword filter keeps records with at least one keyword") {
  std::vector<TweetRecord> records = {rec("1", Org::IRA, "2015-05-01", "go #Syria"),
                                      rec("2", Org::IRA, "2015-05-01", "no tags"),
                                      rec("3", Org::IRA, "2015-05-01", "#other #maga"),
                                      rec("4", Org::IRA, "2015-05-01", "#x")};
  const std::vector<std::string> kw = {"#syria", "#maga"};
  const auto out = filter_by_keywords(records, kw);
  std::set<std::string> ids;
  for (const auto& r : out) ids.insert(r.id);
  CHECK(ids == std::set<std::string>{"1", "3"});
  CHECK_THROWS_AS(filter_by_keywords(records, std::vector<std::string>{}), ConfigError);
}

TEST_CASE("balanced sampling keeps the per-month minimum") {
  std::vector<TweetRecord> pos, neg;
  for (int i = 0; i < 5; ++i) pos.push_back(rec("p" + std::to_string(i), Org::IRA, "2015-06-03", "p" + std::to_string(i)));
  for (int i = 0; i < 3; ++i)
    neg.push_back(rec("n" + std::to_string(i), Org::Background, "2015-06-10", "n" + std::to_string(i)));
  pos.push_back(rec("pj", Org::IRA, "2015-07-03", "july"));
  Rng rng(1);
  const auto out = balanced_monthly_sample(pos, neg, rng);
  std::size_t p = 0, n = 0;
  for (const auto& r : out) (r.label == Label::Sponsored ? p : n)++;
  CHECK(p == 3);
  CHECK(n == 3);

  Rng a(5), b(5);
  const auto x = balanced_monthly_sample(pos, neg, a);
  const auto y = balanced_monthly_sample(pos, neg, b);
  REQUIRE(x.size() == y.size());
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(x[i].id == y[i].id);
}

TEST_CASE("temporal split follows the published IRA ranges") {
  const SplitSpec spec = SplitSpec::published(Org::IRA);
  std::vector<TweetRecord> records = {rec("a", Org::IRA, "2015-06-01", "a"),
                                      rec("b", Org::IRA, "2016-01-19T23:59:59Z", "b"),
                                      rec("c", Org::IRA, "2016-01-20", "c"),
                                      rec("d", Org::IRA, "2016-05-01", "d"),
                                      rec("e", Org::IRA, "2016-10-01", "e"),
                                      rec("f", Org::IRA, "2014-01-01", "f")};
  const auto s = split_temporal(records, spec);
  REQUIRE(s.train.size() == 2);
  CHECK(s.train[0].id == "a");
  CHECK(s.train[0].split == Split::Train);
  REQUIRE(s.validation.size() == 1);
  CHECK(s.validation[0].id == "c");
  CHECK(s.continuous_test.empty());
  REQUIRE(s.delay_test.size() == 1);
  CHECK(s.delay_test[0].id == "e");

  SplitSpec bad = spec;
  bad.validation.begin = spec.train.begin;
  CHECK_THROWS_AS(split_temporal(records, bad), ConfigError);
  CHECK_THROWS_AS(SplitSpec::published(Org::Background), ConfigError);
}

TEST_CASE("timestamps accept common UTC spellings") {
  const auto t = parse_timestamp("2016-02-03T04:05:06Z");
  CHECK(parse_timestamp("2016-02-03T04:05:06+00:00") == t);
  CHECK(parse_timestamp("2016-02-03T04:05:06.250Z") == t);
  CHECK(format_timestamp(t) == "2016-02-03T04:05:06Z");
  CHECK(month_key(t) == 201602);
  CHECK_THROWS_AS(parse_timestamp("2016-13-01"), InputError);
  CHECK_THROWS_AS(parse_timestamp("yesterday"), InputError);
}

TEST_CASE("raw jsonl errors report the line number") {
  const std::string good =
      R"({"id":"1","org":"IRA","timestamp":"2015-05-01T00:00:00Z","text":"RT @x: hi http://a.b"})" "\n"
      R"({"id":"2","org":"Background","timestamp":"2015-05-01","text":"yo","english":false,"image":"i.png"})" "\n";
  const auto recs = parse_raw_jsonl(good, "mem");
  REQUIRE(recs.size() == 2);
  CHECK(recs[0].std_text == "hi URL");
  CHECK(recs[0].label == Label::Sponsored);
  CHECK(recs[1].label == Label::NonSponsored);
  CHECK_FALSE(recs[1].english);
  CHECK(recs[1].image_ref == "i.png");
  try {
    parse_raw_jsonl(good + R"({"id":"3","org":"IRA"})" "\n", "mem");
    FAIL("expected InputError");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("mem:3") != std::string::npos);
  }
}
