#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "propnet/cli.hpp"
#include "propnet/error.hpp"

namespace {

struct FlagSpec {
  const char* flag;
  const char* key;
  const char* help;
};

// Flags shared by every subcommand; each maps onto one configuration key.
const FlagSpec kFlags[] = {
    {"--seed", "seed", "random seed"},
    {"--out", "out", "output directory"},
    {"--input", "input", "raw JSONL archive (build-corpus)"},
    {"--image-dir", "image_dir", "directory image paths are relative to"},
    {"--corpus", "corpus", "built corpus JSONL"},
    {"--checkpoint", "checkpoint", "checkpoint file (default <out>/checkpoint.bin)"},
    {"--subset", "subset", "organisation subset: IRA, Russian or Iranian"},
    {"--subsets", "subsets", "comma-separated organisation subsets"},
    {"--modality", "modality", "image, text or multi"},
    {"--visual", "visual", "residual, plain, branch, style, content, stylecontent, imagestructure"},
    {"--variant", "variant", "original, tag, miss or structure"},
    {"--splits", "splits", "comma-separated splits to evaluate"},
    {"--k-hashtags", "k_hashtags", "number of topic hashtags kept (default 15)"},
    {"--image-size", "image_size", "image side length (default 64)"},
    {"--seq-len", "seq_len", "token sequence length (default 48)"},
    {"--max-epochs", "max_epochs", "epoch budget (default 50)"},
    {"--record", "record", "record id to explain"},
    {"--kind", "kind", "synthetic corpus kind"},
    {"--records", "records", "synthetic corpus size"},
};

struct Invocation {
  std::string config_file;
  std::map<std::string, std::string> flags;
  std::vector<std::string> sets;
  bool no_early_stop = false;
};

CLI::App* add_command(CLI::App& app, const std::string& name, const std::string& help, Invocation& inv) {
  CLI::App* sub = app.add_subcommand(name, help);
  sub->add_option("--config", inv.config_file, "key = value configuration file");
  for (const auto& f : kFlags) sub->add_option(f.flag, inv.flags[f.key], f.help);
  sub->add_option("--set", inv.sets, "override any configuration key (key=value)");
  sub->add_flag("--no-early-stop", inv.no_early_stop, "train every epoch and keep the last");
  return sub;
}

propnet::RunConfig build_config(CLI::App* sub, const Invocation& inv) {
  propnet::RunConfig cfg;
  if (!inv.config_file.empty()) cfg.merge_file(inv.config_file);
  for (const auto& f : kFlags) {
    if (sub->count(f.flag) > 0) cfg.set(f.key, inv.flags.at(f.key));
  }
  for (const auto& kv : inv.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw propnet::ConfigError("--set expects key=value, got '" + kv + "'");
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (inv.no_early_stop) cfg.set("early_stop", "false");
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"propnet: state-sponsored propaganda identification pipeline"};
  app.require_subcommand(1);
  Invocation inv;
  using Command = void (*)(const propnet::RunConfig&, std::ostream&);
  const std::vector<std::tuple<std::string, std::string, Command>> commands = {
      {"build-corpus", "standardize, deduplicate, balance and split a raw archive", propnet::cmd_build_corpus},
      {"variants", "emit the Original/Tag/Miss/Structure text variant per record", propnet::cmd_variants},
      {"train", "train a model on a corpus subset", propnet::cmd_train},
      {"evaluate", "score a checkpoint on test splits", propnet::cmd_evaluate},
      {"explain", "Grad-CAM heatmap and word importance for one record", propnet::cmd_explain},
      {"xorg", "cross-organisation generalizability table", propnet::cmd_xorg},
      {"make-synthetic", "", propnet::cmd_make_synthetic},
  };
  std::vector<std::pair<CLI::App*, Command>> subs;
  for (const auto& [name, help, fn] : commands) {
    CLI::App* sub = add_command(app, name, help, inv);
    if (help.empty()) sub->group("");
    subs.emplace_back(sub, fn);
  }
  CLI11_PARSE(app, argc, argv);

  for (const auto& [sub, fn] : subs) {
    if (!sub->parsed()) continue;
    try {
      fn(build_config(sub, inv), std::cerr);
    } catch (const propnet::ConfigError& e) {
      std::cerr << "configuration error: " << e.what() << '\n';
      return 2;
    } catch (const propnet::Error& e) {
      std::cerr << "error: " << e.what() << '\n';
      return 1;
    } catch (const std::exception& e) {
      std::cerr << "unexpected failure: " << e.what() << '\n';
      return 1;
    }
  }
  return 0;
}
