#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "propnet/model.hpp"

namespace propnet {

struct GradCamMap {
  Tensor heatmap;  // [S×S], values in [0, 1]
  std::string layer;
  int target_class = 1;
};

struct WordImportance {
  std::vector<std::string> words;  // [CLS], source words..., [SEP]
  std::vector<double> scores;
};

// Parameter prefix of the layer whose maps feed Grad-CAM.
std::string cam_layer_name(VisualExtractorKind kind);

// ReLU(Σ_k α_k A^k) with α_k the spatial mean of grads[k], bilinearly
// resized to out_size × out_size and divided by its maximum when positive.
Tensor grad_cam_map(const Tensor& maps, const Tensor& grads, std::size_t out_size);

// Gradient of the pre-softmax logit of `target_class` at the extractor's
// final convolutional maps.
GradCamMap grad_cam(Model& model, const Sample& sample, int target_class);

// Head-averaged last-layer attention [n×n] with the [SEP] row zeroed.
Tensor attention_aggregation_input(const Tensor& attention, const TokenSequence& tokens);
// Column sums of the aggregation input, [PAD] folded into [SEP], subword
// positions summed per word, softmax over the word list.
WordImportance word_importance(const Tensor& attention, const TokenSequence& tokens);
WordImportance attention_importance(Model& model, const TokenSequence& tokens);

void write_heatmap_csv(const std::filesystem::path& path, const Tensor& heatmap);
void write_heatmap_pgm(const std::filesystem::path& path, const Tensor& heatmap);
void write_words_csv(const std::filesystem::path& path, const WordImportance& importance);

}  // namespace propnet
