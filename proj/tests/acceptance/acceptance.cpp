#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "propnet/corpus.hpp"
#include "propnet/evaluation.hpp"
#include "propnet/explain.hpp"
#include "propnet/textvariants.hpp"
#include "propnet/training.hpp"
#include "support/fixtures.hpp"
#include "support/op_cases.hpp"

using namespace propnet;
using namespace propnet::testing;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// ---------------------------------------------------------------- AC1

Outcome gradient_suite() {
  const auto t0 = Clock::now();
  std::size_t cases = 0, failed = 0;
  double worst = 0.0;
  std::string worst_name;
  auto record = [&](const std::string& name, double err) {
    ++cases;
    if (!(err < 1e-5)) {
      ++failed;
      std::fprintf(stderr, "gradient check %s: %.3e\n", name.c_str(), err);
    }
    if (err > worst || std::isnan(err)) {
      worst = err;
      worst_name = name;
    }
  };
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    Rng rng(seed);
    for (auto& c : op_cases(rng)) record(c.name, check_op(c.f, c.inputs, rng));
  }
  for (std::uint64_t seed = 1; seed <= 2; ++seed) {
    Rng rng(100 + seed);
    for (auto kind : {VisualExtractorKind::ResidualCNN, VisualExtractorKind::PlainCNN, VisualExtractorKind::BranchCNN,
                      VisualExtractorKind::Style, VisualExtractorKind::Content, VisualExtractorKind::StyleContent,
                      VisualExtractorKind::ImageStructure}) {
      ModelSpec spec;
      spec.modality = Modality::MultiModal;
      spec.visual = kind;
      spec.text = TextEncoderConfig{1, 2, 8, 6, 0.0, 12};
      spec.image_size = 8;
      spec.visual_width = 2;
      Model m(spec, seed);
      jitter_parameters(m, rng);
      Sample s;
      s.image = random_tensor({3, 8, 8}, rng, 0, 1);
      TokenSequence t;
      t.ids = {kClsId, 4 + static_cast<int>(rng.index(8)), 4 + static_cast<int>(rng.index(8)), kSepId, kPadId, kPadId};
      t.mask = {1, 1, 1, 1, 0, 0};
      t.word_index = {std::nullopt, 0, 1, std::nullopt, std::nullopt, std::nullopt};
      t.words = {"a", "b"};
      s.tokens = t;
      s.label = static_cast<int>(seed % 2);
      record(std::string("model/") + std::string(to_string(kind)), check_model(m, s, rng));
    }
  }
  const double secs = seconds_since(t0);
  Outcome o;
  o.pass = failed == 0 && cases >= 100 && secs < 60.0;
  o.detail = std::to_string(cases) + " cases, " + std::to_string(failed) + " failed, worst rel. err " +
             fmt("%.2e", worst) + " (" + worst_name + "), " + fmt("%.1f", secs) + " s";
  return o;
}

// ---------------------------------------------------------------- AC2

struct Fraction {
  long long num = 0, den = 1;
  void add(long long n, long long d) {
    num = num * d + n * den;
    den *= d;
    const long long g = std::gcd(num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
  }
};

Outcome hashtag_oracle() {
  const std::vector<std::vector<std::string>> fixture = {{"#a", "#b"}, {"#a"}, {"#b", "#b", "#c"}};
  const double fixed = hashtag_importance(fixture, "#b");
  bool ok = fixed == 7.0 / 6.0;
  std::string detail = "7/6 fixture " + fmt("%.17g", fixed);
  Rng rng(2718);
  const std::vector<std::string> pool = {"#a", "#b", "#c", "#d", "#e", "#f"};
  std::size_t mismatches = 0;
  for (int corpus = 0; corpus < 50; ++corpus) {
    std::vector<std::vector<std::string>> tweets(1 + rng.index(30));
    for (auto& t : tweets) {
      const std::size_t n = rng.index(6);
      for (std::size_t i = 0; i < n; ++i) t.push_back(pool[rng.index(pool.size())]);
    }
    for (const auto& h : pool) {
      Fraction exact;
      for (const auto& t : tweets) {
        if (t.empty()) continue;
        long long hits = 0;
        for (const auto& x : t) hits += x == h;
        exact.add(hits, static_cast<long long>(t.size()));
      }
      const double want = static_cast<double>(exact.num) / static_cast<double>(exact.den);
      const double got = hashtag_importance(tweets, h);
      if (std::abs(got - want) > 1e-12 * std::max(1.0, want)) ++mismatches;
    }
  }
  ok = ok && mismatches == 0;
  detail += ", 50 random corpora x 6 hashtags vs exact rational sums: " + std::to_string(mismatches) + " mismatches";
  return {ok, detail};
}

// ---------------------------------------------------------------- AC3

Outcome variant_rows() {
  const std::string original = "#Putin's 1st New Year's \"achievement\" in #Syria URL";
  const std::vector<std::pair<VariantKind, std::string>> rows = {
      {VariantKind::Tag, "TAG 1st New Year's \"achievement\" in TAG URL"},
      {VariantKind::Miss, "1st New Year's \"achievement\" in URL"},
      {VariantKind::Structure, "T W W W W W T U"}};
  std::size_t matched = 0;
  for (const auto& [kind, want] : rows) matched += apply_variant(original, kind) == want;
  return {matched == rows.size(), std::to_string(matched) + "/3 rows identical"};
}

// ---------------------------------------------------------------- AC4

Outcome auc_oracle() {
  Rng rng(314);
  std::size_t auc_bad = 0, tpr_bad = 0;
  double worst = 0.0;
  for (int inst = 0; inst < 200; ++inst) {
    const std::size_t n = 2 + rng.index(49);
    std::vector<double> s(n);
    std::vector<int> y(n);
    const std::size_t levels = 2 + rng.index(20);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = static_cast<double>(rng.index(levels)) / static_cast<double>(levels);
      y[i] = rng.bernoulli(0.5) ? 1 : 0;
    }
    y[0] = 1;
    y[1] = 0;
    double wins = 0, pairs = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (y[i] == 1 && y[j] == 0) {
          pairs += 1;
          wins += s[i] > s[j] ? 1.0 : s[i] == s[j] ? 0.5 : 0.0;
        }
    const double err = std::abs(roc_and_auc(s, y).auc - wins / pairs);
    worst = std::max(worst, err);
    if (!(err < 1e-9)) ++auc_bad;

    // Every candidate threshold t: predict positive iff score > t.
    std::vector<double> thresholds = s;
    thresholds.push_back(-1.0);
    double best = 0.0;
    for (double t : thresholds) {
      std::size_t fp = 0, tp = 0, npos = 0;
      for (std::size_t i = 0; i < n; ++i) {
        npos += y[i];
        if (s[i] > t) (y[i] ? tp : fp)++;
      }
      if (fp == 0) best = std::max(best, static_cast<double>(tp) / static_cast<double>(npos));
    }
    if (tpr_at_zero_fpr(s, y) != best) ++tpr_bad;
  }
  return {auc_bad == 0 && tpr_bad == 0, "200 instances: AUC mismatches " + std::to_string(auc_bad) + " (max err " +
                                            fmt("%.1e", worst) + "), zero-FPR TPR mismatches " +
                                            std::to_string(tpr_bad)};
}

// ---------------------------------------------------------------- AC5

struct Trained {
  double f1 = 0.0;
  double seconds = 0.0;
  std::size_t epochs = 0;
};

ModelSpec learn_spec(Modality m) {
  ModelSpec spec;
  spec.modality = m;
  if (m != Modality::TextOnly) spec.visual = VisualExtractorKind::ResidualCNN;
  if (m != Modality::ImageOnly) spec.text = TextEncoderConfig{1, 2, 16, 16, 0.1, 0};
  spec.image_size = 16;
  spec.visual_width = 8;
  return spec;
}

SyntheticCorpus synthetic(SyntheticKind kind, std::size_t records, std::uint64_t seed, std::size_t image_size = 16) {
  SyntheticOptions o;
  o.records = records;
  o.image_size = image_size;
  o.seed = seed;
  return make_synthetic(kind, o);
}

Trained train_and_test(const SyntheticCorpus& corpus, Modality m, std::uint64_t seed) {
  ModelSpec spec = learn_spec(m);
  const auto data = samples_from(corpus, spec);
  const auto t0 = Clock::now();
  Model model(spec, seed);
  TrainConfig cfg;  // defaults: lr 0.05, batch 32, 50 epochs, patience 5
  cfg.seed = seed;
  const auto r = train(model, data.train, data.validation, cfg);
  std::vector<Sample> held_out = data.continuous;
  held_out.insert(held_out.end(), data.delay.begin(), data.delay.end());
  Trained out;
  out.seconds = seconds_since(t0);
  out.f1 = evaluate_model(model, held_out).f1;
  out.epochs = r.history.size();
  return out;
}

Outcome learnability() {
  const auto separable = synthetic(SyntheticKind::Separable, 2000, 11);
  const Trained multi = train_and_test(separable, Modality::MultiModal, 1);
  const Trained img_same = train_and_test(separable, Modality::ImageOnly, 1);
  const Trained txt_same = train_and_test(separable, Modality::TextOnly, 1);
  const Trained img = train_and_test(synthetic(SyntheticKind::ImageInformative, 2000, 12), Modality::ImageOnly, 1);
  const Trained txt = train_and_test(synthetic(SyntheticKind::TextInformative, 2000, 13), Modality::TextOnly, 1);
  const double best_single = std::max({img.f1, txt.f1, img_same.f1, txt_same.f1});
  Outcome o;
  o.pass = multi.f1 >= 0.95 && multi.epochs <= 50 && multi.seconds < 600.0 && img.f1 >= 0.80 && txt.f1 >= 0.80 &&
           multi.f1 >= best_single - 0.02;
  o.detail = "multi F1 " + fmt("%.4f", multi.f1) + " (" + std::to_string(multi.epochs) + " epochs, " +
             fmt("%.0f", multi.seconds) + " s); image-only F1 " + fmt("%.4f", img.f1) + ", text-only F1 " +
             fmt("%.4f", txt.f1) + " on their fixtures; on the separable set image-only " +
             fmt("%.4f", img_same.f1) + ", text-only " + fmt("%.4f", txt_same.f1);
  return o;
}

// ---------------------------------------------------------------- AC6

std::vector<TweetRecord> random_records(Rng& rng, std::size_t n) {
  const TimePoint lo = parse_timestamp("2015-04-01");
  const TimePoint hi = parse_timestamp("2017-07-01");
  const auto span = static_cast<std::size_t>((hi - lo).count());
  std::vector<TweetRecord> out;
  for (std::size_t i = 0; i < n; ++i) {
    const Org org = rng.bernoulli(0.5) ? Org::IRA : Org::Background;
    const TimePoint t = lo + std::chrono::seconds(static_cast<long long>(rng.index(span)));
    TweetRecord r = make_record("id" + std::to_string(i), org, t, "text " + std::to_string(rng.index(n)));
    if (rng.bernoulli(0.8)) r.image_hash = rng.index(n);
    out.push_back(std::move(r));
  }
  return out;
}

bool same_ids(const std::vector<TweetRecord>& a, const std::vector<TweetRecord>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i].id != b[i].id) return false;
  return true;
}

Outcome corpus_invariants() {
  Rng rng(1618);
  std::size_t bad_dedup = 0, bad_purge = 0, bad_parity = 0, bad_split = 0;
  const SplitSpec spec = SplitSpec::published(Org::IRA);
  for (int f = 0; f < 100; ++f) {
    const auto records = random_records(rng, 20 + rng.index(200));
    std::vector<TweetRecord> pos, neg;
    for (const auto& r : records) (r.label == Label::Sponsored ? pos : neg).push_back(r);

    const auto once = dedup(records);
    if (!same_ids(dedup(once), once)) ++bad_dedup;
    std::set<std::string> texts;
    std::set<std::uint64_t> hashes;
    for (const auto& r : once) {
      if (!texts.insert(r.std_text).second) ++bad_dedup;
      if (r.image_hash && !hashes.insert(*r.image_hash).second) ++bad_dedup;
    }

    const auto dpos = dedup(pos);
    const auto purged = purge_positives_from_negatives(dedup(neg), dpos);
    for (const auto& n : purged)
      for (const auto& p : dpos)
        if (n.std_text == p.std_text || (n.image_hash && p.image_hash && *n.image_hash == *p.image_hash)) ++bad_purge;

    Rng sample_rng(static_cast<std::uint64_t>(f));
    const auto balanced = balanced_monthly_sample(dpos, purged, sample_rng);
    std::map<int, std::pair<int, int>> per_month;
    for (const auto& r : balanced) {
      auto& c = per_month[month_key(r.timestamp)];
      (r.label == Label::Sponsored ? c.first : c.second)++;
    }
    for (const auto& [m, c] : per_month) bad_parity += c.first != c.second;

    const auto parts = split_temporal(balanced, spec);
    std::set<std::string> seen;
    std::set<std::string> input_ids;
    for (const auto& r : balanced) input_ids.insert(r.id);
    for (Split s : {Split::Train, Split::Validation, Split::Continuous, Split::Delay}) {
      for (const auto& r : parts[s]) {
        if (!seen.insert(r.id).second) ++bad_split;
        if (!input_ids.contains(r.id)) ++bad_split;
        if (!spec.range(s).contains(r.timestamp) || r.split != s) ++bad_split;
      }
    }
  }
  const bool ok = bad_dedup + bad_purge + bad_parity + bad_split == 0;
  return {ok, "100 fixtures: dedup " + std::to_string(bad_dedup) + ", purge " + std::to_string(bad_purge) +
                  ", month parity " + std::to_string(bad_parity) + ", split " + std::to_string(bad_split) +
                  " violations"};
}

// ---------------------------------------------------------------- AC7

Outcome gradcam_localization() {
  const auto corpus = synthetic(SyntheticKind::Quadrant, 2000, 21, 32);
  ModelSpec spec = learn_spec(Modality::ImageOnly);
  spec.image_size = 32;
  const auto data = samples_from(corpus, spec);
  Model model(spec, 3);
  TrainConfig cfg;
  cfg.seed = 3;
  train(model, data.train, data.validation, cfg);
  std::vector<Sample> held_out = data.continuous;
  held_out.insert(held_out.end(), data.delay.begin(), data.delay.end());
  const double f1 = evaluate_model(model, held_out).f1;

  const std::size_t S = spec.image_size;
  double share_sum = 0.0;
  std::size_t used = 0;
  bool non_negative = true;
  for (const auto& s : held_out) {
    if (s.label != 1) continue;
    const auto cam = grad_cam(model, s, 1);
    double total = 0.0, inside = 0.0;
    for (std::size_t y = 0; y < S; ++y)
      for (std::size_t x = 0; x < S; ++x) {
        const double v = cam.heatmap.at(y, x);
        if (v < 0.0) non_negative = false;
        total += v;
        if (y < S / 2 && x < S / 2) inside += v;
      }
    share_sum += total > 0.0 ? inside / total : 0.0;
    if (++used == 20) break;
  }
  const double mean_share = used ? share_sum / static_cast<double>(used) : 0.0;
  return {used == 20 && mean_share >= 0.60 && non_negative,
          "mean top-left mass " + fmt("%.3f", mean_share) + " over " + std::to_string(used) +
              " positive test images, non-negative " + (non_negative ? "yes" : "no") + ", detector F1 " +
              fmt("%.3f", f1)};
}

// ---------------------------------------------------------------- AC8

Outcome attention_checks() {
  ModelSpec spec;
  spec.modality = Modality::TextOnly;
  spec.text = TextEncoderConfig{2, 4, 16, 12, 0.0, 40};
  Model model(spec, 8);
  Rng rng(88);
  std::size_t sum_bad = 0, sep_bad = 0, rows_bad = 0;
  for (int inst = 0; inst < 50; ++inst) {
    const std::size_t words = 1 + rng.index(9);
    std::vector<std::string> ws;
    for (std::size_t i = 0; i < words; ++i) ws.push_back("w" + std::to_string(rng.index(30)));
    std::vector<std::string> pieces = {"[PAD]", "[UNK]", "[CLS]", "[SEP]"};
    for (int i = 0; i < 30; ++i) pieces.push_back("w" + std::to_string(i));
    for (int i = 0; i < 6; ++i) pieces.push_back("##" + std::to_string(i));
    const Vocab vocab(pieces);
    std::string text;
    for (const auto& w : ws) text += (text.empty() ? "" : " ") + w;
    const TokenSequence t = encode(text, vocab, 12);

    const auto imp = attention_importance(model, t);
    const double total = std::accumulate(imp.scores.begin(), imp.scores.end(), 0.0);
    if (!(std::abs(total - 1.0) < 1e-9)) ++sum_bad;

    Tape tape;
    const auto out = model.text_forward(tape, t);
    const Tensor agg = attention_aggregation_input(out.attention, t);
    const std::size_t n = t.length(), sep = t.sep_position(), last = spec.text->layers - 1;
    const std::size_t H = spec.text->heads;
    for (std::size_t j = 0; j < n; ++j)
      if (agg.at(sep, j) != 0.0) ++sep_bad;
    for (std::size_t i = 0; i < n; ++i) {
      if (i == sep) continue;
      for (std::size_t j = 0; j < n; ++j) {
        double mean = 0.0;
        for (std::size_t h = 0; h < H; ++h) mean += out.attention[((last * H + h) * n + i) * n + j];
        mean /= static_cast<double>(H);
        if (std::abs(agg.at(i, j) - mean) > 1e-12) ++rows_bad;
      }
    }
  }
  return {sum_bad + sep_bad + rows_bad == 0, "50 sequences: sum violations " + std::to_string(sum_bad) +
                                                 ", non-zero [SEP] entries " + std::to_string(sep_bad) +
                                                 ", other rows differing from head mean " + std::to_string(rows_bad)};
}

// ---------------------------------------------------------------- AC9

Outcome generalizability() {
  const auto corpus = synthetic(SyntheticKind::CrossOrg, 1000, 31);
  ModelSpec spec = learn_spec(Modality::MultiModal);
  std::vector<TweetRecord> train_all;
  for (Org o : {Org::IRA, Org::Russian, Org::Iranian}) {
    auto part = select(corpus.records, o, Split::Train);
    train_all.insert(train_all.end(), part.begin(), part.end());
  }
  const Vocab vocab = build_vocab(variant_texts(train_all, spec.text_variant), 200);
  spec.text->vocab_size = vocab.size();
  const auto images = image_map_source(corpus.images);
  std::vector<OrgData> orgs;
  for (Org o : {Org::IRA, Org::Russian, Org::Iranian}) {
    OrgData d;
    d.org = o;
    d.train = make_samples(select(corpus.records, o, Split::Train), spec, &vocab, images);
    d.validation = make_samples(select(corpus.records, o, Split::Validation), spec, &vocab, images);
    d.continuous = make_samples(select(corpus.records, o, Split::Continuous), spec, &vocab, images);
    d.delay = make_samples(select(corpus.records, o, Split::Delay), spec, &vocab, images);
    orgs.push_back(std::move(d));
  }
  TrainConfig cfg;
  cfg.seed = 5;
  const auto t0 = Clock::now();
  const auto rows = cross_org_experiment(orgs, spec, cfg, 5);
  std::size_t wins = 0;
  std::string detail;
  for (const auto& r : rows) {
    wins += (r.multi_continuous >= r.baseline_continuous) + (r.multi_delay >= r.baseline_delay);
    detail += std::string(to_string(r.target)) + " cont " + fmt("%.3f", r.multi_continuous) + " vs " +
              fmt("%.3f", r.baseline_continuous) + ", delay " + fmt("%.3f", r.multi_delay) + " vs " +
              fmt("%.3f", r.baseline_delay) + "; ";
  }
  detail += std::to_string(wins) + "/6 comparisons (12 cells) multi >= baseline, " + fmt("%.0f", seconds_since(t0)) + " s";
  return {rows.size() == 3 && wins == 6, detail};
}

// ---------------------------------------------------------------- AC10

std::map<std::string, std::string> snapshot_tree(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file() || e.path().extension() == ".log") continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    files[fs::relative(e.path(), root).string()] = ss.str();
  }
  return files;
}

Outcome cli_determinism() {
  const fs::path root = fs::temp_directory_path() / "propnet_acceptance_determinism";
  fs::remove_all(root);
  const std::string model_flags =
      " --image-size 8 --seq-len 12 --set d_model=8 --set heads=2 --set layers=1 --set visual_width=2"
      " --max-epochs 3 --set patience=2 --set batch_size=16";
  const std::vector<std::pair<std::string, std::string>> steps = {
      {"make-synthetic", "make-synthetic --kind image --records 120 --image-size 8 --seed 4 --out data"},
      {"build-corpus", "build-corpus --input data/corpus.jsonl --out built --subsets IRA --seed 4"},
      {"variants", "variants --corpus data/corpus.jsonl --out variants --variant structure"},
      {"train", "train --corpus data/corpus.jsonl --out model --modality multi --visual branch --seed 4" +
                    model_flags},
      {"evaluate", "evaluate --corpus data/corpus.jsonl --out eval --checkpoint model/checkpoint.bin"
                   " --splits continuous,delay"},
      {"explain", "explain --corpus data/corpus.jsonl --out explain --checkpoint model/checkpoint.bin"
                  " --record image-IRA-00003"},
      {"make-synthetic xorg", "make-synthetic --kind xorg --records 40 --image-size 8 --seed 4 --out xdata"},
      {"xorg", "xorg --corpus xdata/corpus.jsonl --out xorg --modality text --seed 4" + model_flags},
  };
  std::vector<std::map<std::string, std::string>> trees;
  for (const char* run_dir : {"a", "b"}) {
    const fs::path dir = root / run_dir;
    fs::create_directories(dir);
    for (std::size_t i = 0; i < steps.size(); ++i) {
      const std::string cmd = "cd " + dir.string() + " && " + std::string(PROPNET_CLI_PATH) + " " + steps[i].second +
                              " > step" + std::to_string(i) + ".log 2>&1";
      const int status = std::system(cmd.c_str());
      if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
        return {false, steps[i].first + " failed in run " + run_dir + " (see " +
                           (dir / ("step" + std::to_string(i) + ".log")).string() + ")"};
      }
    }
    trees.push_back(snapshot_tree(dir));
  }
  std::size_t differing = 0;
  std::string first_diff;
  for (const auto& [name, bytes] : trees[0]) {
    auto it = trees[1].find(name);
    if (it == trees[1].end() || it->second != bytes) {
      ++differing;
      if (first_diff.empty()) first_diff = name;
    }
  }
  if (trees[0].size() != trees[1].size()) ++differing;
  const bool ok = differing == 0 && trees[0].size() > 0;
  if (ok) fs::remove_all(root);
  return {ok, std::to_string(trees[0].size()) + " output files over " + std::to_string(steps.size()) +
                  " commands, " + std::to_string(differing) + " differing" +
                  (first_diff.empty() ? "" : " (first: " + first_diff + ")")};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"AC1 gradient suite", gradient_suite},
      {"AC2 hashtag importance oracle", hashtag_oracle},
      {"AC3 text variant rows", variant_rows},
      {"AC4 AUC and zero-FPR oracles", auc_oracle},
      {"AC5 synthetic learnability", learnability},
      {"AC6 corpus invariants", corpus_invariants},
      {"AC7 Grad-CAM localization", gradcam_localization},
      {"AC8 attention importance", attention_checks},
      {"AC9 cross-organisation direction", generalizability},
      {"AC10 CLI determinism", cli_determinism},
  };
  std::set<std::string> only;
  for (int i = 1; i < argc; ++i) only.insert(argv[i]);
  int failures = 0;
  for (const auto& [name, fn] : criteria) {
    const std::string key = name.substr(0, name.find(' '));
    if (!only.empty() && !only.contains(key)) continue;
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
    failures += !o.pass;
  }
  return failures == 0 ? 0 : 1;
}
