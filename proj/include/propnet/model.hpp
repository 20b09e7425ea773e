#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "propnet/image.hpp"
#include "propnet/numerics/ops.hpp"
#include "propnet/numerics/rng.hpp"
#include "propnet/numerics/tape.hpp"
#include "propnet/textvariants.hpp"
#include "propnet/tokenizer.hpp"

namespace propnet {

enum class Modality { ImageOnly, TextOnly, MultiModal };
enum class VisualExtractorKind { ResidualCNN, PlainCNN, BranchCNN, Style, Content, StyleContent, ImageStructure };

// Command-line names: image / text / multi.
std::string_view to_string(Modality m);
Modality parse_modality(std::string_view text);
// Command-line names: residual, plain, branch, style, content,
// stylecontent, imagestructure.
std::string_view to_string(VisualExtractorKind k);
VisualExtractorKind parse_visual(std::string_view text);

struct TextEncoderConfig {
  std::size_t layers = 2;
  std::size_t heads = 4;
  std::size_t d_model = 64;
  std::size_t n = 48;
  double dropout = 0.1;
  std::size_t vocab_size = 0;

  void validate() const;
  friend bool operator==(const TextEncoderConfig&, const TextEncoderConfig&) = default;
};

struct ModelSpec {
  Modality modality = Modality::MultiModal;
  std::optional<VisualExtractorKind> visual;
  std::optional<TextEncoderConfig> text;
  std::size_t image_size = 64;
  // Channel width of the first stage; later stages use 2× and 4×.
  std::size_t visual_width = 16;
  // Text rewrite applied before tokenisation.
  VariantKind text_variant = VariantKind::Original;

  void validate() const;
  bool has_image() const { return modality != Modality::TextOnly; }
  bool has_text() const { return modality != Modality::ImageOnly; }
  std::size_t visual_feature_length() const;
  std::size_t text_feature_length() const;
  // |R_V| + |R_T| over the active modalities.
  std::size_t classifier_width() const;

  // key = value lines, stable order.
  std::string to_text() const;
  static ModelSpec from_text(std::string_view text);

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

// Feature length of one extractor at first-stage width `width`.
std::size_t visual_feature_length(VisualExtractorKind kind, std::size_t width);

inline constexpr std::size_t kContentHidden = 512;
inline constexpr std::size_t kContentOut = 256;

// Grayscale raster in, same-size map of per-pixel text likelihood in [0, 1] out.
using TextProbabilityMapProvider = std::function<GrayRaster(const GrayRaster&)>;

// Horizontal-gradient magnitude averaged over 9×9 windows (clipped at the
// borders), scaled by 4 and clamped to [0, 1].
GrayRaster default_text_probability_map(const GrayRaster& gray);

struct Sample {
  std::optional<Tensor> image;  // [3×S×S] in [0, 1]
  std::optional<TokenSequence> tokens;
  int label = 0;
  std::string id;
};

struct ForwardOptions {
  bool training = false;
  double dropout = 0.0;
  Rng* rng = nullptr;
};

struct VisualOutput {
  Var features;                  // R_V
  std::optional<Var> cam_layer;  // maps used by Grad-CAM, [K×h×w]
};

struct TextOutput {
  Var features;      // R_T
  Tensor attention;  // [layers×heads×n×n]
};

struct ForwardResult {
  Var logits;  // [2]
  Var probs;   // softmax(logits)
  std::optional<VisualOutput> visual;
  std::optional<TextOutput> text;
};

struct Classification {
  Var logits;
  Var probs;
};

// R_I = [R_V; R_T], logits = W_c R_I + b_c, p = softmax(logits).
// Throws ConfigError when |R_I| does not match W_c.
Classification fuse_and_classify(const std::optional<Var>& r_v, const std::optional<Var>& r_t, Var w_c, Var b_c);

// -log p[label] for one sample, computed by log-sum-exp on the logits.
Var classification_loss(Var logits, int label);

struct Checkpoint {
  ModelSpec spec;
  std::string vocab_ref;
  std::map<std::string, Tensor> parameters;

  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

class Model {
 public:
  // Glorot-uniform weights, zero biases, unit layer-norm gains.
  Model(ModelSpec spec, std::uint64_t seed, TextProbabilityMapProvider provider = default_text_probability_map);
  explicit Model(const Checkpoint& ckpt, TextProbabilityMapProvider provider = default_text_probability_map);
  Model(const Model&) = delete;
  Model& operator=(const Model&) = delete;

  const ModelSpec& spec() const noexcept { return spec_; }
  std::map<std::string, Parameter>& parameters() noexcept { return params_; }
  const std::map<std::string, Parameter>& parameters() const noexcept { return params_; }
  Parameter& parameter(const std::string& name);
  std::size_t parameter_count() const;

  VisualOutput visual_forward(Tape& tape, const Tensor& image, const ForwardOptions& opts = {});
  TextOutput text_forward(Tape& tape, const TokenSequence& tokens, const ForwardOptions& opts = {});
  Classification classify(Tape& tape, const std::optional<Var>& r_v, const std::optional<Var>& r_t);
  // A missing image is replaced by a black image and missing tokens by an
  // empty text, so every sample can be scored by every modality mix.
  ForwardResult forward(Tape& tape, const Sample& sample, const ForwardOptions& opts = {});
  // p[1], the sponsored-class probability.
  double predict(const Sample& sample);

  Checkpoint snapshot(std::string vocab_ref = {}) const;
  void load(const Checkpoint& ckpt);
  void zero_grad();

 private:
  void add_param(const std::string& name, Shape shape, double limit, Rng& rng);
  void add_conv(const std::string& name, std::size_t in, std::size_t out, std::size_t k, Rng& rng);
  void add_dense(const std::string& name, std::size_t in, std::size_t out, Rng& rng);
  void init_visual(Rng& rng);
  void init_text(Rng& rng);

  Var param(Tape& tape, const std::string& name);
  Var conv(Tape& tape, Var x, const std::string& name, std::size_t stride, std::size_t padding);
  Var dense(Tape& tape, Var x, const std::string& name);
  Var branch_cnn(Tape& tape, Var x, std::optional<Var>& cam);
  Var plain_stage(Tape& tape, Var x, std::size_t stage, Var* last_conv);

  ModelSpec spec_;
  TextProbabilityMapProvider provider_;
  std::map<std::string, Parameter> params_;
};

}  // namespace propnet
