#include "propnet/explain.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "propnet/error.hpp"
#include "propnet/image.hpp"

namespace propnet {

std::string cam_layer_name(VisualExtractorKind kind) {
  switch (kind) {
    case VisualExtractorKind::ResidualCNN: return "visual.s2.b1";
    case VisualExtractorKind::PlainCNN: return "visual.s3.c1";
    case VisualExtractorKind::BranchCNN:
    case VisualExtractorKind::ImageStructure: return "visual.br.c2";
    case VisualExtractorKind::Content:
    case VisualExtractorKind::StyleContent: return "visual.content.local";
    case VisualExtractorKind::Style: break;
  }
  throw ExplanationError("extractor '" + std::string(to_string(kind)) +
                         "' has no convolutional maps ahead of its pooling (gram path)");
}

Tensor grad_cam_map(const Tensor& maps, const Tensor& grads, std::size_t out_size) {
  if (maps.rank() != 3 || maps.shape() != grads.shape()) {
    throw DimensionError("grad_cam_map: maps " + shape_to_string(maps.shape()) + " and gradients " +
                         shape_to_string(grads.shape()) + " must be equal [K×h×w] tensors");
  }
  const std::size_t K = maps.dim(0), h = maps.dim(1), w = maps.dim(2), hw = h * w;
  Tensor cam({1, h, w});
  for (std::size_t k = 0; k < K; ++k) {
    double alpha = 0.0;
    for (std::size_t i = 0; i < hw; ++i) alpha += grads[k * hw + i];
    alpha /= static_cast<double>(hw);
    for (std::size_t i = 0; i < hw; ++i) cam[i] += alpha * maps[k * hw + i];
  }
  for (double& v : cam.data()) v = std::max(v, 0.0);
  Tensor up = resize_bilinear(cam, out_size, out_size).reshaped({out_size, out_size});
  double mx = 0.0;
  for (double& v : up.data()) {
    v = std::max(v, 0.0);
    mx = std::max(mx, v);
  }
  if (mx > 0.0) {
    for (double& v : up.data()) v /= mx;
  }
  return up;
}

GradCamMap grad_cam(Model& model, const Sample& sample, int target_class) {
  const ModelSpec& spec = model.spec();
  if (!spec.visual) throw ExplanationError("Grad-CAM needs a visual sub-network; the model is text-only");
  if (target_class != 0 && target_class != 1) {
    throw ExplanationError("target class must be 0 or 1, got " + std::to_string(target_class));
  }
  GradCamMap out;
  out.layer = cam_layer_name(*spec.visual);
  out.target_class = target_class;
  Tape tape;
  auto fwd = model.forward(tape, sample);
  Var cam_layer = *fwd.visual->cam_layer;
  Var y = ops::slice_rows(fwd.logits, static_cast<std::size_t>(target_class), 1);
  tape.backward(y);
  out.heatmap = grad_cam_map(cam_layer.value(), tape.grad(cam_layer), spec.image_size);
  // The backward pass must not leave gradients behind on the model.
  model.zero_grad();
  return out;
}

Tensor attention_aggregation_input(const Tensor& attention, const TokenSequence& tokens) {
  if (attention.rank() != 4) {
    throw ExplanationError("attention must be [layers×heads×n×n], got " + shape_to_string(attention.shape()));
  }
  const std::size_t L = attention.dim(0), H = attention.dim(1), n = attention.dim(2);
  if (attention.dim(3) != n || tokens.length() != n) {
    throw ExplanationError("attention " + shape_to_string(attention.shape()) + " does not fit " +
                           std::to_string(tokens.length()) + " tokens");
  }
  Tensor a({n, n});
  const double* last = attention.raw() + (L - 1) * H * n * n;
  for (std::size_t h = 0; h < H; ++h)
    for (std::size_t i = 0; i < n * n; ++i) a[i] += last[h * n * n + i];
  for (double& v : a.data()) v /= static_cast<double>(H);
  const std::size_t sep = tokens.sep_position();
  for (std::size_t j = 0; j < n; ++j) a.at(sep, j) = 0.0;
  return a;
}

WordImportance word_importance(const Tensor& attention, const TokenSequence& tokens) {
  const Tensor a = attention_aggregation_input(attention, tokens);
  const std::size_t n = tokens.length();
  const std::size_t sep = tokens.sep_position();
  const std::size_t words = tokens.words.size();
  std::vector<double> raw(words + 2, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    double col = 0.0;
    for (std::size_t i = 0; i < n; ++i) col += a.at(i, j);
    std::size_t slot;
    if (j == 0) slot = 0;
    else if (tokens.word_index[j]) slot = 1 + *tokens.word_index[j];
    else slot = words + 1;  // [SEP] and every [PAD]
    if (j != 0 && !tokens.word_index[j] && j != sep && tokens.ids[j] != kPadId) {
      throw ExplanationError("position " + std::to_string(j) + " has no source word");
    }
    raw[slot] += col;
  }
  WordImportance out;
  out.words.push_back("[CLS]");
  out.words.insert(out.words.end(), tokens.words.begin(), tokens.words.end());
  out.words.push_back("[SEP]");
  const double mx = *std::max_element(raw.begin(), raw.end());
  double total = 0.0;
  out.scores.resize(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) total += out.scores[i] = std::exp(raw[i] - mx);
  for (double& s : out.scores) s /= total;
  return out;
}

WordImportance attention_importance(Model& model, const TokenSequence& tokens) {
  if (!model.spec().text) throw ExplanationError("attention importance needs a text sub-network; the model is image-only");
  Tape tape;
  auto out = model.text_forward(tape, tokens);
  return word_importance(out.attention, tokens);
}

void write_heatmap_csv(const std::filesystem::path& path, const Tensor& heatmap) {
  if (heatmap.rank() != 2) throw DimensionError("heatmap must be a matrix");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  char buf[32];
  for (std::size_t r = 0; r < heatmap.dim(0); ++r) {
    for (std::size_t c = 0; c < heatmap.dim(1); ++c) {
      std::snprintf(buf, sizeof buf, "%.6f", heatmap.at(r, c));
      out << (c ? "," : "") << buf;
    }
    out << '\n';
  }
}

void write_heatmap_pgm(const std::filesystem::path& path, const Tensor& heatmap) {
  if (heatmap.rank() != 2) throw DimensionError("heatmap must be a matrix");
  GrayRaster raster(heatmap.dim(1), heatmap.dim(0));
  for (std::size_t i = 0; i < heatmap.size(); ++i) raster.values[i] = std::clamp(heatmap[i], 0.0, 1.0);
  write_pgm(path, raster);
}

void write_words_csv(const std::filesystem::path& path, const WordImportance& importance) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << "word,score\n";
  char buf[32];
  for (std::size_t i = 0; i < importance.words.size(); ++i) {
    std::string w = importance.words[i];
    if (w.find_first_of(",\"\n") != std::string::npos) {
      std::string q = "\"";
      for (char c : w) {
        if (c == '"') q += '"';
        q += c;
      }
      w = q + "\"";
    }
    std::snprintf(buf, sizeof buf, "%.9f", importance.scores[i]);
    out << w << ',' << buf << '\n';
  }
}

}  // namespace propnet
