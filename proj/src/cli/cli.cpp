#include "propnet/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "propnet/corpus_io.hpp"
#include "propnet/dataset.hpp"
#include "propnet/error.hpp"
#include "propnet/evaluation.hpp"
#include "propnet/explain.hpp"
#include "propnet/synthetic.hpp"

namespace propnet {

namespace fs = std::filesystem;

const std::vector<std::string>& RunConfig::known_keys() {
  static const std::vector<std::string> keys = {
      "batch_size",     "checkpoint",   "continuous_begin", "continuous_end", "corpus",       "d_model",
      "delay_begin",    "delay_end",    "dropout",          "early_stop",     "heads",        "image_dir",
      "image_size",     "input",        "k_hashtags",       "kind",           "layers",       "learning_rate",
      "max_epochs",     "modality",     "out",              "patience",       "record",       "records",
      "seed",           "seq_len",      "splits",           "subset",         "subsets",      "target_class",
      "train_begin",    "train_end",    "validation_begin", "validation_end", "variant",      "visual",
      "visual_width",   "vocab_size"};
  return keys;
}

void RunConfig::set(const std::string& key, std::string value) {
  const auto& keys = known_keys();
  if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
    throw ConfigError("unknown configuration key '" + key + "'");
  }
  values_[key] = std::move(value);
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    std::size_t end = s.find(',', start);
    if (end == std::string::npos) end = s.size();
    std::string item = trim(std::string_view(s).substr(start, end - start));
    if (!item.empty()) out.push_back(item);
    start = end + 1;
  }
  return out;
}

}  // namespace

void RunConfig::merge_text(std::string_view text, const std::string& origin) {
  std::size_t start = 0, line_no = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const std::string line = trim(text.substr(start, end - start));
    start = end + 1;
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": expected 'key = value'");
    }
    try {
      set(trim(std::string_view(line).substr(0, eq)), trim(std::string_view(line).substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

void RunConfig::merge_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  merge_text(buf.str(), path.string());
}

std::optional<std::string> RunConfig::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::string RunConfig::get_or(const std::string& key, const std::string& fallback) const {
  return get(key).value_or(fallback);
}

std::string RunConfig::require(const std::string& key) const {
  auto v = get(key);
  if (!v || v->empty()) throw ConfigError("missing required setting '" + key + "'");
  return *v;
}

namespace {

template <typename T>
T parse_number(const std::string& key, const std::string& v) {
  T out{};
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) {
    throw ConfigError("setting '" + key + "' expects a number, got '" + v + "'");
  }
  return out;
}

}  // namespace

std::size_t RunConfig::get_size(const std::string& key, std::size_t fallback) const {
  auto v = get(key);
  return v ? parse_number<std::size_t>(key, *v) : fallback;
}

std::uint64_t RunConfig::get_u64(const std::string& key, std::uint64_t fallback) const {
  auto v = get(key);
  return v ? parse_number<std::uint64_t>(key, *v) : fallback;
}

double RunConfig::get_double(const std::string& key, double fallback) const {
  auto v = get(key);
  return v ? parse_number<double>(key, *v) : fallback;
}

bool RunConfig::get_bool(const std::string& key, bool fallback) const {
  auto v = get(key);
  if (!v) return fallback;
  if (*v == "true" || *v == "1" || *v == "yes") return true;
  if (*v == "false" || *v == "0" || *v == "no") return false;
  throw ConfigError("setting '" + key + "' expects true or false, got '" + *v + "'");
}

ModelSpec spec_from_config(const RunConfig& cfg) {
  ModelSpec spec;
  spec.modality = parse_modality(cfg.get_or("modality", "multi"));
  if (spec.has_image()) {
    spec.visual = parse_visual(cfg.get_or("visual", "residual"));
    spec.image_size = cfg.get_size("image_size", 64);
    spec.visual_width = cfg.get_size("visual_width", 16);
  }
  if (spec.has_text()) {
    TextEncoderConfig t;
    t.layers = cfg.get_size("layers", t.layers);
    t.heads = cfg.get_size("heads", t.heads);
    t.d_model = cfg.get_size("d_model", t.d_model);
    t.n = cfg.get_size("seq_len", t.n);
    t.dropout = cfg.get_double("dropout", t.dropout);
    t.vocab_size = cfg.get_size("vocab_size", 1000);
    spec.text = t;
    spec.text_variant = parse_variant(cfg.get_or("variant", "original"));
  }
  spec.validate();
  return spec;
}

TrainConfig train_config_from(const RunConfig& cfg) {
  TrainConfig t;
  t.learning_rate = cfg.get_double("learning_rate", t.learning_rate);
  t.batch_size = cfg.get_size("batch_size", t.batch_size);
  t.max_epochs = cfg.get_size("max_epochs", t.max_epochs);
  t.patience = cfg.get_size("patience", t.patience);
  t.seed = cfg.get_u64("seed", 0);
  t.dropout = cfg.get_double("dropout", t.dropout);
  t.early_stop = cfg.get_bool("early_stop", true);
  t.validate();
  return t;
}

std::string model_name(const ModelSpec& spec) {
  std::string name(to_string(spec.modality));
  if (spec.visual) name += "_" + std::string(to_string(*spec.visual));
  if (spec.text) name += "_" + std::string(to_string(spec.text_variant));
  return name;
}

namespace {

fs::path parent_or_dot(const fs::path& p) {
  auto parent = p.parent_path();
  return parent.empty() ? fs::path(".") : parent;
}

void prepare_out(const fs::path& out) {
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec || !fs::is_directory(out)) throw InputError("cannot create output directory " + out.string());
}

std::optional<SplitSpec> custom_split_spec(const RunConfig& cfg) {
  static const char* keys[] = {"train_begin",      "train_end",      "validation_begin", "validation_end",
                               "continuous_begin", "continuous_end", "delay_begin",      "delay_end"};
  const bool any = std::any_of(std::begin(keys), std::end(keys), [&](const char* k) { return cfg.has(k); });
  if (!any) return std::nullopt;
  auto day = [&](const char* key) {
    try {
      return parse_timestamp(cfg.require(key));
    } catch (const InputError& e) {
      throw ConfigError(std::string("setting '") + key + "': " + e.what());
    }
  };
  // End dates are inclusive in the configuration.
  auto range = [&](const char* b, const char* e) { return DateRange{day(b), day(e) + std::chrono::days(1)}; };
  SplitSpec spec{range("train_begin", "train_end"), range("validation_begin", "validation_end"),
                 range("continuous_begin", "continuous_end"), range("delay_begin", "delay_end")};
  spec.validate();
  return spec;
}

std::vector<Org> parse_orgs(const std::string& list) {
  std::vector<Org> orgs;
  for (const auto& item : split_list(list)) {
    Org o;
    try {
      o = parse_org(item);
    } catch (const InputError& e) {
      throw ConfigError(e.what());
    }
    if (o == Org::Background) throw ConfigError("Background is the negative pool, not a subset");
    if (std::find(orgs.begin(), orgs.end(), o) == orgs.end()) orgs.push_back(o);
  }
  if (orgs.empty()) throw ConfigError("no subsets requested");
  return orgs;
}

std::vector<Split> parse_splits(const std::string& list) {
  std::vector<Split> splits;
  for (const auto& item : split_list(list)) {
    try {
      splits.push_back(parse_split(item));
    } catch (const InputError& e) {
      throw ConfigError(e.what());
    }
  }
  if (splits.empty()) throw ConfigError("no splits requested");
  return splits;
}

std::string image_ref_from(const fs::path& image_dir, const std::string& ref, const fs::path& out) {
  const fs::path target = (fs::absolute(image_dir) / ref).lexically_normal();
  const fs::path rel = target.lexically_relative(fs::absolute(out).lexically_normal());
  return rel.empty() ? target.generic_string() : rel.generic_string();
}

bool by_time(const TweetRecord& a, const TweetRecord& b) {
  if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
  return a.id < b.id;
}

std::string fixed(double v, int digits) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

Org resolve_subset(const RunConfig& cfg, std::span<const TweetRecord> records) {
  if (auto s = cfg.get("subset")) {
    const auto orgs = parse_orgs(*s);
    if (orgs.size() != 1) throw ConfigError("'subset' names exactly one organisation");
    return orgs.front();
  }
  std::optional<Org> found;
  for (const auto& r : records) {
    if (!r.subset) continue;
    if (found && *found != *r.subset) {
      throw ConfigError("corpus holds several subsets; choose one with 'subset'");
    }
    found = r.subset;
  }
  if (!found) throw InputError("corpus records carry no subset; run build-corpus first");
  return *found;
}

struct LoadedModel {
  Checkpoint ckpt;
  std::optional<Vocab> vocab;
};

LoadedModel load_trained(const fs::path& ckpt_path) {
  LoadedModel m{load_checkpoint(ckpt_path), std::nullopt};
  if (m.ckpt.spec.has_text()) {
    if (m.ckpt.vocab_ref.empty()) throw InputError("checkpoint " + ckpt_path.string() + " names no vocabulary");
    m.vocab = Vocab::load(parent_or_dot(ckpt_path) / m.ckpt.vocab_ref);
    if (m.vocab->size() != m.ckpt.spec.text->vocab_size) {
      throw InputError("vocabulary size " + std::to_string(m.vocab->size()) + " does not match the checkpoint (" +
                       std::to_string(m.ckpt.spec.text->vocab_size) + ")");
    }
  }
  return m;
}

void check_requested_modality(const RunConfig& cfg, const ModelSpec& spec) {
  if (auto m = cfg.get("modality"); m && parse_modality(*m) != spec.modality) {
    throw ConfigError("requested modality '" + *m + "' but the checkpoint holds a '" +
                      std::string(to_string(spec.modality)) + "' model");
  }
  if (auto v = cfg.get("visual"); v && spec.visual && parse_visual(*v) != *spec.visual) {
    throw ConfigError("requested visual extractor '" + *v + "' but the checkpoint uses '" +
                      std::string(to_string(*spec.visual)) + "'");
  }
}

std::string file_token(const std::string& s) {
  std::string out;
  for (char c : s) out.push_back(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' ? c : '_');
  return out;
}

}  // namespace

void cmd_build_corpus(const RunConfig& cfg, std::ostream& log) {
  const fs::path input = cfg.require("input");
  const fs::path out = cfg.require("out");
  const fs::path image_dir = cfg.get_or("image_dir", parent_or_dot(input).string());
  const std::uint64_t seed = cfg.get_u64("seed", 0);
  const std::size_t k = cfg.get_size("k_hashtags", 15);
  if (k == 0) throw ConfigError("k_hashtags must be at least 1");
  const auto subsets = parse_orgs(cfg.get_or("subsets", "IRA,Russian,Iranian"));
  const auto custom = custom_split_spec(cfg);

  auto records = read_raw_jsonl(input);
  const std::size_t before = records.size();
  std::erase_if(records, [](const TweetRecord& r) { return !r.english; });
  log << "read " << before << " records, " << before - records.size() << " dropped as non-English\n";
  for (auto& r : records) {
    if (!r.image_ref) continue;
    const fs::path p = image_dir / *r.image_ref;
    if (!fs::exists(p)) throw InputError("record '" + r.id + "': image " + p.string() + " not found");
    r.image_hash = image_hash(to_grayscale(load_image(p)));
  }

  std::vector<TweetRecord> negatives_all;
  for (const auto& r : records) {
    if (r.org == Org::Background) negatives_all.push_back(r);
  }

  Rng rng(seed);
  std::vector<TweetRecord> output;
  std::ostringstream stats;
  std::ostringstream keyword_report;
  stats << "subset\tsplit\tbegin\tend\tpositive\tnegative\ttotal\n";
  for (Org org : subsets) {
    std::vector<TweetRecord> pos;
    for (const auto& r : records) {
      if (r.org == org) pos.push_back(r);
    }
    pos = dedup(std::move(pos));
    auto neg = purge_positives_from_negatives(dedup(negatives_all), pos);
    const auto keywords = top_k_hashtags(std::span<const TweetRecord>(pos), k);
    keyword_report << "top-" << k << " hashtags (" << to_string(org) << ")\n";
    for (const auto& h : keywords) keyword_report << h.hashtag << '\t' << fixed(h.score, 6) << '\n';
    Rng sub_rng = rng.split(static_cast<std::uint64_t>(org));
    std::vector<TweetRecord> balanced;
    if (keywords.empty()) {
      log << "warning: subset " << to_string(org) << " has no hashtags; it contributes no records\n";
    } else {
      std::vector<std::string> kw;
      for (const auto& h : keywords) kw.push_back(h.hashtag);
      pos = filter_by_keywords(std::move(pos), kw);
      neg = filter_by_keywords(std::move(neg), kw);
      if (neg.empty()) log << "warning: subset " << to_string(org) << " has an empty negative pool\n";
      balanced = balanced_monthly_sample(std::move(pos), std::move(neg), sub_rng);
    }
    const SplitSpec spec = custom ? *custom : SplitSpec::published(org);
    auto parts = split_temporal(std::move(balanced), spec);
    for (Split s : {Split::Train, Split::Validation, Split::Continuous, Split::Delay}) {
      auto& part = parts[s];
      std::sort(part.begin(), part.end(), by_time);
      const auto npos = std::count_if(part.begin(), part.end(),
                                      [](const TweetRecord& r) { return r.label == Label::Sponsored; });
      const DateRange& range = spec.range(s);
      stats << to_string(org) << '\t' << to_string(s) << '\t' << format_date(range.begin) << '\t'
            << format_date(range.end - std::chrono::days(1)) << '\t' << npos << '\t'
            << static_cast<long>(part.size()) - npos << '\t' << part.size() << '\n';
      for (auto& r : part) {
        r.subset = org;
        output.push_back(std::move(r));
      }
    }
  }

  prepare_out(out);
  for (auto& r : output) {
    if (r.image_ref) r.image_ref = image_ref_from(image_dir, *r.image_ref, out);
  }
  write_corpus_jsonl(out / "corpus.jsonl", output);
  std::ofstream st(out / "stats.txt", std::ios::binary);
  st << stats.str() << '\n' << keyword_report.str();
  if (!st) throw InputError("failed writing " + (out / "stats.txt").string());
  log << "wrote " << output.size() << " records to " << (out / "corpus.jsonl").string() << '\n';
}

void cmd_variants(const RunConfig& cfg, std::ostream& log) {
  const fs::path corpus = cfg.require("corpus");
  const fs::path out = cfg.require("out");
  const VariantKind kind = parse_variant(cfg.get_or("variant", "original"));
  auto records = read_corpus_jsonl(corpus);
  prepare_out(out);
  write_corpus_jsonl(out / "variants.jsonl", records, kind);
  log << "wrote " << records.size() << " " << to_string(kind) << " variants\n";
}

void cmd_train(const RunConfig& cfg, std::ostream& log) {
  const fs::path corpus = cfg.require("corpus");
  const fs::path out = cfg.require("out");
  const fs::path image_dir = cfg.get_or("image_dir", parent_or_dot(corpus).string());
  ModelSpec spec = spec_from_config(cfg);
  const TrainConfig tc = train_config_from(cfg);
  const std::uint64_t seed = cfg.get_u64("seed", 0);

  const auto records = read_corpus_jsonl(corpus);
  const Org subset = resolve_subset(cfg, records);
  const auto train_recs = select(records, subset, Split::Train);
  const auto val_recs = select(records, subset, Split::Validation);
  if (train_recs.empty()) throw InputError("subset " + std::string(to_string(subset)) + " has no train split");
  if (val_recs.empty()) throw InputError("subset " + std::string(to_string(subset)) + " has no validation split");

  std::optional<Vocab> vocab;
  if (spec.has_text()) {
    vocab = build_vocab(variant_texts(train_recs, spec.text_variant), spec.text->vocab_size);
    spec.text->vocab_size = vocab->size();
  }
  spec.validate();
  const auto images = image_dir_source(image_dir);
  const auto train_set = make_samples(train_recs, spec, vocab ? &*vocab : nullptr, images);
  const auto val_set = make_samples(val_recs, spec, vocab ? &*vocab : nullptr, images);

  Model model(spec, seed);
  log << "training " << model_name(spec) << " on " << to_string(subset) << ": " << train_set.size() << " train / "
      << val_set.size() << " validation samples, " << model.parameter_count() << " parameters\n";
  auto result = train(model, train_set, val_set, tc, [&](const EpochRecord& e) {
    log << "epoch " << e.epoch << " loss " << fixed(e.train_loss, 6) << " val_f1 " << fixed(e.val_f1, 4) << '\n';
  });

  prepare_out(out);
  if (vocab) vocab->save(out / "vocab.txt");
  result.best.vocab_ref = vocab ? "vocab.txt" : "";
  save_checkpoint(out / "checkpoint.bin", result.best);
  write_history_csv(out / "history.csv", result.history);
  log << "best epoch " << result.best_epoch << "; wrote " << (out / "checkpoint.bin").string() << '\n';
}

void cmd_evaluate(const RunConfig& cfg, std::ostream& log) {
  const fs::path corpus = cfg.require("corpus");
  const fs::path out = cfg.require("out");
  const fs::path ckpt_path = cfg.get_or("checkpoint", (out / "checkpoint.bin").string());
  const fs::path image_dir = cfg.get_or("image_dir", parent_or_dot(corpus).string());
  const auto splits = parse_splits(cfg.get_or("splits", "continuous,delay"));

  auto loaded = load_trained(ckpt_path);
  check_requested_modality(cfg, loaded.ckpt.spec);
  const auto records = read_corpus_jsonl(corpus);
  const Org subset = resolve_subset(cfg, records);
  Model model(loaded.ckpt);
  const ModelSpec& spec = model.spec();
  const std::string name = model_name(spec);
  const auto images = image_dir_source(image_dir);

  std::vector<NamedReport> rows;
  for (Split s : splits) {
    const auto recs = select(records, subset, s);
    if (recs.empty()) {
      throw InputError("subset " + std::string(to_string(subset)) + " has no " + std::string(to_string(s)) + " split");
    }
    const auto samples = make_samples(recs, spec, loaded.vocab ? &*loaded.vocab : nullptr, images);
    rows.push_back({name, std::string(to_string(s)), evaluate_model(model, samples)});
    log << name << ' ' << to_string(s) << " f1 " << fixed(rows.back().report.f1, 4) << " auc "
        << fixed(rows.back().report.auc, 4) << '\n';
  }
  prepare_out(out);
  write_metrics_csv(out / "metrics.csv", rows);
  for (const auto& r : rows) write_roc_csv(out / ("roc_" + r.model + "_" + r.split + ".csv"), r.report.roc);
}

void cmd_explain(const RunConfig& cfg, std::ostream& log) {
  const fs::path corpus = cfg.require("corpus");
  const fs::path out = cfg.require("out");
  const fs::path ckpt_path = cfg.get_or("checkpoint", (out / "checkpoint.bin").string());
  const fs::path image_dir = cfg.get_or("image_dir", parent_or_dot(corpus).string());
  const std::string id = cfg.require("record");
  const std::size_t target = cfg.get_size("target_class", 1);
  if (target > 1) throw ConfigError("target_class must be 0 or 1");

  auto loaded = load_trained(ckpt_path);
  const auto records = read_corpus_jsonl(corpus);
  auto it = std::find_if(records.begin(), records.end(), [&](const TweetRecord& r) { return r.id == id; });
  if (it == records.end()) throw InputError("record '" + id + "' not found in " + corpus.string());
  const ModelSpec& spec = loaded.ckpt.spec;
  if (spec.has_image() && !it->image_ref) {
    throw InputError("record '" + id + "' has no image, but the " + std::string(to_string(spec.modality)) +
                     " model needs one");
  }
  if (spec.has_text() && it->std_text.empty()) {
    throw InputError("record '" + id + "' has no text, but the " + std::string(to_string(spec.modality)) +
                     " model needs it");
  }
  Model model(loaded.ckpt);
  const Sample sample = make_sample(*it, spec, loaded.vocab ? &*loaded.vocab : nullptr, image_dir_source(image_dir));

  std::optional<GradCamMap> cam;
  std::optional<WordImportance> words;
  if (spec.has_image()) cam = grad_cam(model, sample, static_cast<int>(target));
  if (spec.has_text()) words = attention_importance(model, *sample.tokens);

  prepare_out(out);
  const std::string tag = file_token(id);
  if (cam) {
    write_heatmap_csv(out / ("heatmap_" + tag + ".csv"), cam->heatmap);
    write_heatmap_pgm(out / ("heatmap_" + tag + ".pgm"), cam->heatmap);
    log << "Grad-CAM from " << cam->layer << " written\n";
  }
  if (words) {
    write_words_csv(out / ("words_" + tag + ".csv"), *words);
    log << "word importance for " << words->words.size() << " entries written\n";
  }
}

void cmd_xorg(const RunConfig& cfg, std::ostream& log) {
  const fs::path corpus = cfg.require("corpus");
  const fs::path out = cfg.require("out");
  const fs::path image_dir = cfg.get_or("image_dir", parent_or_dot(corpus).string());
  ModelSpec spec = spec_from_config(cfg);
  const TrainConfig tc = train_config_from(cfg);
  const std::uint64_t seed = cfg.get_u64("seed", 0);
  const auto orgs = parse_orgs(cfg.get_or("subsets", "IRA,Russian,Iranian"));
  if (orgs.size() != 3) throw ConfigError("xorg needs exactly three subsets, got " + std::to_string(orgs.size()));

  const auto records = read_corpus_jsonl(corpus);
  for (Org o : orgs) {
    if (select(records, o, std::nullopt).empty()) {
      throw InputError("corpus has no records for subset " + std::string(to_string(o)) +
                       "; xorg needs three organisations");
    }
  }
  std::optional<Vocab> vocab;
  if (spec.has_text()) {
    std::vector<TweetRecord> train_all;
    for (Org o : orgs) {
      auto part = select(records, o, Split::Train);
      train_all.insert(train_all.end(), part.begin(), part.end());
    }
    if (train_all.empty()) throw InputError("no train split in any subset");
    vocab = build_vocab(variant_texts(train_all, spec.text_variant), spec.text->vocab_size);
    spec.text->vocab_size = vocab->size();
  }
  spec.validate();
  const auto images = image_dir_source(image_dir);
  std::vector<OrgData> data;
  for (Org o : orgs) {
    OrgData d;
    d.org = o;
    auto build = [&](Split s) {
      return make_samples(select(records, o, s), spec, vocab ? &*vocab : nullptr, images);
    };
    d.train = build(Split::Train);
    d.validation = build(Split::Validation);
    d.continuous = build(Split::Continuous);
    d.delay = build(Split::Delay);
    data.push_back(std::move(d));
  }
  log << "cross-organisation experiment with " << model_name(spec) << '\n';
  const auto rows = cross_org_experiment(data, spec, tc, seed);
  prepare_out(out);
  write_xorg_csv(out / "xorg.csv", rows);
  for (const auto& r : rows) {
    log << to_string(r.target) << ": baseline " << fixed(r.baseline_continuous, 3) << '/'
        << fixed(r.baseline_delay, 3) << " multi " << fixed(r.multi_continuous, 3) << '/'
        << fixed(r.multi_delay, 3) << '\n';
  }
}

void cmd_make_synthetic(const RunConfig& cfg, std::ostream& log) {
  const fs::path out = cfg.require("out");
  SyntheticOptions opts;
  const SyntheticKind kind = parse_synthetic_kind(cfg.get_or("kind", "separable"));
  opts.records = cfg.get_size("records", opts.records);
  opts.image_size = cfg.get_size("image_size", 64);
  opts.seed = cfg.get_u64("seed", 0);
  auto corpus = make_synthetic(kind, opts);
  prepare_out(out);
  write_synthetic(corpus, out);
  log << "wrote " << corpus.records.size() << " synthetic " << to_string(kind) << " records to "
      << (out / "corpus.jsonl").string() << '\n';
}

}  // namespace propnet
