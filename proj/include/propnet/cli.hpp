#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "propnet/model.hpp"
#include "propnet/training.hpp"

namespace propnet {

// Flat key/value run configuration. Unknown keys are rejected on entry.
class RunConfig {
 public:
  static const std::vector<std::string>& known_keys();

  void set(const std::string& key, std::string value);
  // `key = value` lines; '#' starts a comment line.
  void merge_file(const std::filesystem::path& path);
  void merge_text(std::string_view text, const std::string& origin = "<config>");

  bool has(const std::string& key) const { return values_.contains(key); }
  std::optional<std::string> get(const std::string& key) const;
  std::string get_or(const std::string& key, const std::string& fallback) const;
  std::string require(const std::string& key) const;
  std::size_t get_size(const std::string& key, std::size_t fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  const std::map<std::string, std::string>& values() const noexcept { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

// Spec from modality/visual/variant/image_size/visual_width/seq_len/layers/
// heads/d_model/dropout keys; text.vocab_size is left to the caller.
ModelSpec spec_from_config(const RunConfig& cfg);
TrainConfig train_config_from(const RunConfig& cfg);

// Each command validates the whole configuration before creating files
// under `out` and throws propnet::Error on failure.
void cmd_build_corpus(const RunConfig& cfg, std::ostream& log);
void cmd_variants(const RunConfig& cfg, std::ostream& log);
void cmd_train(const RunConfig& cfg, std::ostream& log);
void cmd_evaluate(const RunConfig& cfg, std::ostream& log);
void cmd_explain(const RunConfig& cfg, std::ostream& log);
void cmd_xorg(const RunConfig& cfg, std::ostream& log);
void cmd_make_synthetic(const RunConfig& cfg, std::ostream& log);

// Report name of a trained model, e.g. multi_residual_original.
std::string model_name(const ModelSpec& spec);

}  // namespace propnet
