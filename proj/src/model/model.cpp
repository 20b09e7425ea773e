#include "propnet/model.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "propnet/error.hpp"

namespace propnet {

GrayRaster default_text_probability_map(const GrayRaster& gray) {
  const std::size_t w = gray.width, h = gray.height;
  GrayRaster out(w, h);
  if (w == 0 || h == 0) return out;
  std::vector<double> grad(w * h);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const std::size_t xl = x == 0 ? 0 : x - 1;
      const std::size_t xr = x + 1 == w ? x : x + 1;
      grad[y * w + x] = std::abs(gray.at(y, xr) - gray.at(y, xl));
    }
  }
  // Summed-area table for the clipped 9×9 mean.
  std::vector<double> sat((w + 1) * (h + 1), 0.0);
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x)
      sat[(y + 1) * (w + 1) + x + 1] =
          grad[y * w + x] + sat[y * (w + 1) + x + 1] + sat[(y + 1) * (w + 1) + x] - sat[y * (w + 1) + x];
  constexpr std::size_t r = 4;
  constexpr double gain = 4.0;
  for (std::size_t y = 0; y < h; ++y) {
    const std::size_t y0 = y >= r ? y - r : 0, y1 = std::min(h, y + r + 1);
    for (std::size_t x = 0; x < w; ++x) {
      const std::size_t x0 = x >= r ? x - r : 0, x1 = std::min(w, x + r + 1);
      const double total =
          sat[y1 * (w + 1) + x1] - sat[y0 * (w + 1) + x1] - sat[y1 * (w + 1) + x0] + sat[y0 * (w + 1) + x0];
      const double mean = total / static_cast<double>((y1 - y0) * (x1 - x0));
      out.at(y, x) = std::clamp(gain * mean, 0.0, 1.0);
    }
  }
  return out;
}

Classification fuse_and_classify(const std::optional<Var>& r_v, const std::optional<Var>& r_t, Var w_c, Var b_c) {
  std::vector<Var> parts;
  if (r_v) parts.push_back(*r_v);
  if (r_t) parts.push_back(*r_t);
  if (parts.empty()) throw ConfigError("fuse_and_classify: no representation supplied");
  Var r_i = parts.size() == 1 ? parts[0] : ops::concat(parts);
  const std::size_t width = r_i.value().size();
  if (w_c.shape().size() != 2 || w_c.shape()[1] != width || w_c.shape()[0] != 2 || b_c.shape() != Shape{2}) {
    throw ConfigError("fuse_and_classify: representation width " + std::to_string(width) +
                      " does not fit classifier " + shape_to_string(w_c.shape()) + " / " +
                      shape_to_string(b_c.shape()));
  }
  Var logits = ops::add(ops::reshape(ops::matmul(w_c, ops::reshape(r_i, Shape{width, 1})), Shape{2}), b_c);
  return {logits, ops::softmax(logits)};
}

Var classification_loss(Var logits, int label) {
  if (label != 0 && label != 1) throw InputError("label must be 0 or 1, got " + std::to_string(label));
  return ops::cross_entropy(logits, static_cast<std::size_t>(label));
}

Model::Model(ModelSpec spec, std::uint64_t seed, TextProbabilityMapProvider provider)
    : spec_(std::move(spec)), provider_(std::move(provider)) {
  spec_.validate();
  if (spec_.visual == VisualExtractorKind::ImageStructure && !provider_) {
    throw ConfigError("imagestructure extractor needs a text-probability-map provider");
  }
  Rng rng(seed);
  if (spec_.visual) init_visual(rng);
  if (spec_.text) init_text(rng);
  add_dense("cls", spec_.classifier_width(), 2, rng);
}

Model::Model(const Checkpoint& ckpt, TextProbabilityMapProvider provider) : Model(ckpt.spec, 0, std::move(provider)) {
  load(ckpt);
}

Parameter& Model::parameter(const std::string& name) {
  auto it = params_.find(name);
  if (it == params_.end()) throw ConfigError("no parameter named '" + name + "'");
  return it->second;
}

std::size_t Model::parameter_count() const {
  std::size_t n = 0;
  for (const auto& [name, p] : params_) n += p.value.size();
  return n;
}

void Model::add_param(const std::string& name, Shape shape, double limit, Rng& rng) {
  Tensor t(std::move(shape));
  if (limit > 0) {
    for (double& v : t.data()) v = rng.uniform(-limit, limit);
  }
  params_.emplace(name, Parameter(name, std::move(t)));
}

void Model::add_conv(const std::string& name, std::size_t in, std::size_t out, std::size_t k, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>((in + out) * k * k));
  add_param(name + ".w", {out, in, k, k}, limit, rng);
  add_param(name + ".b", {out}, 0.0, rng);
}

void Model::add_dense(const std::string& name, std::size_t in, std::size_t out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
  add_param(name + ".w", {out, in}, limit, rng);
  add_param(name + ".b", {out}, 0.0, rng);
}

void Model::init_visual(Rng& rng) {
  const std::size_t b = spec_.visual_width;
  const std::size_t widths[4] = {b, 2 * b, 4 * b, 4 * b};
  const auto kind = *spec_.visual;
  auto plain_stages = [&](std::size_t count) {
    std::size_t in = 3;
    for (std::size_t s = 0; s < count; ++s) {
      add_conv("visual.s" + std::to_string(s) + ".c0", in, widths[s], 3, rng);
      add_conv("visual.s" + std::to_string(s) + ".c1", widths[s], widths[s], 3, rng);
      in = widths[s];
    }
  };
  auto branch = [&](std::size_t in) {
    add_conv("visual.br.b1", in, b / 2, 1, rng);
    add_conv("visual.br.b3", in, b, 3, rng);
    add_conv("visual.br.b5", in, b / 2, 5, rng);
    add_conv("visual.br.c1", 2 * b, 4 * b, 3, rng);
    add_conv("visual.br.c2", 4 * b, 4 * b, 3, rng);
  };
  switch (kind) {
    case VisualExtractorKind::ResidualCNN:
      add_conv("visual.stem", 3, b, 3, rng);
      for (std::size_t s = 0; s < 3; ++s) {
        const std::string st = "visual.s" + std::to_string(s);
        if (s > 0) add_conv(st + ".down", widths[s - 1], widths[s], 3, rng);
        for (std::size_t blk = 0; blk < 2; ++blk) {
          add_conv(st + ".b" + std::to_string(blk) + ".c0", widths[s], widths[s], 3, rng);
          add_conv(st + ".b" + std::to_string(blk) + ".c1", widths[s], widths[s], 3, rng);
        }
      }
      break;
    case VisualExtractorKind::PlainCNN: plain_stages(4); break;
    case VisualExtractorKind::Style: plain_stages(2); break;
    case VisualExtractorKind::Content:
    case VisualExtractorKind::StyleContent:
      plain_stages(3);
      add_conv("visual.content.local", 4 * b, 4 * b, 3, rng);
      add_dense("visual.content.fc1", 4 * b, kContentHidden, rng);
      add_dense("visual.content.fc2", kContentHidden, kContentOut, rng);
      break;
    case VisualExtractorKind::BranchCNN: branch(3); break;
    case VisualExtractorKind::ImageStructure: branch(1); break;
  }
}

void Model::init_text(Rng& rng) {
  const auto& cfg = *spec_.text;
  const std::size_t d = cfg.d_model;
  add_param("text.tok_emb", {cfg.vocab_size, d}, std::sqrt(6.0 / static_cast<double>(cfg.vocab_size + d)), rng);
  add_param("text.pos_emb", {cfg.n, d}, std::sqrt(6.0 / static_cast<double>(cfg.n + d)), rng);
  const double sq = std::sqrt(6.0 / static_cast<double>(2 * d));
  const double ff = std::sqrt(6.0 / static_cast<double>(5 * d));
  for (std::size_t l = 0; l < cfg.layers; ++l) {
    const std::string p = "text.l" + std::to_string(l);
    for (const char* m : {"q", "k", "v", "o"}) {
      add_param(p + ".w" + m, {d, d}, sq, rng);
      add_param(p + ".b" + m, {d}, 0.0, rng);
    }
    add_param(p + ".ln1.g", {d}, 0.0, rng);
    params_.at(p + ".ln1.g").value.fill(1.0);
    add_param(p + ".ln1.b", {d}, 0.0, rng);
    add_param(p + ".ff1.w", {d, 4 * d}, ff, rng);
    add_param(p + ".ff1.b", {4 * d}, 0.0, rng);
    add_param(p + ".ff2.w", {4 * d, d}, ff, rng);
    add_param(p + ".ff2.b", {d}, 0.0, rng);
    add_param(p + ".ln2.g", {d}, 0.0, rng);
    params_.at(p + ".ln2.g").value.fill(1.0);
    add_param(p + ".ln2.b", {d}, 0.0, rng);
  }
}

Var Model::param(Tape& tape, const std::string& name) { return tape.parameter(parameter(name)); }

Var Model::conv(Tape& tape, Var x, const std::string& name, std::size_t stride, std::size_t padding) {
  return ops::add_channel_bias(ops::conv2d(x, param(tape, name + ".w"), stride, padding), param(tape, name + ".b"));
}

Var Model::dense(Tape& tape, Var x, const std::string& name) {
  Var w = param(tape, name + ".w");
  const std::size_t in = w.shape()[1], out = w.shape()[0];
  return ops::add(ops::reshape(ops::matmul(w, ops::reshape(x, Shape{in, 1})), Shape{out}), param(tape, name + ".b"));
}

Var Model::plain_stage(Tape& tape, Var x, std::size_t stage, Var* last_conv) {
  const std::string st = "visual.s" + std::to_string(stage);
  x = ops::relu(conv(tape, x, st + ".c0", 1, 1));
  x = ops::relu(conv(tape, x, st + ".c1", 1, 1));
  if (last_conv) *last_conv = x;
  return ops::max_pool2d(x, 2);
}

Var Model::branch_cnn(Tape& tape, Var x, std::optional<Var>& cam) {
  const Var parts[3] = {ops::relu(conv(tape, x, "visual.br.b1", 1, 0)), ops::relu(conv(tape, x, "visual.br.b3", 1, 1)),
                        ops::relu(conv(tape, x, "visual.br.b5", 1, 2))};
  x = ops::max_pool2d(ops::concat(parts), 2);
  x = ops::max_pool2d(ops::relu(conv(tape, x, "visual.br.c1", 1, 1)), 2);
  Var last = ops::relu(conv(tape, x, "visual.br.c2", 1, 1));
  cam = last;
  return ops::global_avg_pool(ops::max_pool2d(last, 2));
}

VisualOutput Model::visual_forward(Tape& tape, const Tensor& image, const ForwardOptions&) {
  if (!spec_.visual) throw ConfigError("model has no visual sub-network");
  const std::size_t S = spec_.image_size;
  if (image.shape() != Shape{3, S, S}) {
    throw InputError("visual input must be " + shape_to_string({3, S, S}) + ", got " + shape_to_string(image.shape()));
  }
  VisualOutput out;
  Var x = tape.constant(image);
  switch (*spec_.visual) {
    case VisualExtractorKind::ResidualCNN: {
      x = ops::relu(conv(tape, x, "visual.stem", 1, 1));
      for (std::size_t s = 0; s < 3; ++s) {
        const std::string st = "visual.s" + std::to_string(s);
        if (s > 0) x = ops::relu(conv(tape, x, st + ".down", 2, 1));
        for (std::size_t blk = 0; blk < 2; ++blk) {
          const std::string bp = st + ".b" + std::to_string(blk);
          Var y = ops::relu(conv(tape, x, bp + ".c0", 1, 1));
          y = conv(tape, y, bp + ".c1", 1, 1);
          x = ops::relu(ops::add(x, y));
        }
      }
      out.cam_layer = x;
      out.features = ops::global_avg_pool(x);
      break;
    }
    case VisualExtractorKind::PlainCNN: {
      Var last;
      for (std::size_t s = 0; s < 4; ++s) x = plain_stage(tape, x, s, &last);
      out.cam_layer = last;
      out.features = ops::global_avg_pool(x);
      break;
    }
    case VisualExtractorKind::Style: {
      Var style_layer;
      x = plain_stage(tape, x, 0, nullptr);
      plain_stage(tape, x, 1, &style_layer);
      out.features = ops::upper_triangle(ops::gram_matrix(style_layer));
      break;
    }
    case VisualExtractorKind::Content:
    case VisualExtractorKind::StyleContent: {
      Var style_layer, content_layer;
      x = plain_stage(tape, x, 0, nullptr);
      x = plain_stage(tape, x, 1, &style_layer);
      plain_stage(tape, x, 2, &content_layer);
      Var local = ops::relu(conv(tape, content_layer, "visual.content.local", 1, 1));
      out.cam_layer = local;
      Var h = ops::relu(dense(tape, ops::global_avg_pool(local), "visual.content.fc1"));
      Var content = ops::relu(dense(tape, h, "visual.content.fc2"));
      if (*spec_.visual == VisualExtractorKind::Content) {
        out.features = content;
      } else {
        const Var parts[2] = {ops::upper_triangle(ops::gram_matrix(style_layer)), content};
        out.features = ops::concat(parts);
      }
      break;
    }
    case VisualExtractorKind::BranchCNN: out.features = branch_cnn(tape, x, out.cam_layer); break;
    case VisualExtractorKind::ImageStructure: {
      if (!provider_) throw ConfigError("imagestructure extractor needs a text-probability-map provider");
      const GrayRaster map = provider_(tensor_to_grayscale(image));
      if (map.width != S || map.height != S || map.values.size() != S * S) {
        throw ConfigError("text-probability-map provider changed the raster shape");
      }
      for (double v : map.values) {
        if (!(v >= 0.0 && v <= 1.0)) throw ConfigError("text-probability-map value outside [0, 1]");
      }
      out.features = branch_cnn(tape, tape.constant(Tensor({1, S, S}, map.values)), out.cam_layer);
      break;
    }
  }
  return out;
}

TextOutput Model::text_forward(Tape& tape, const TokenSequence& tokens, const ForwardOptions& opts) {
  if (!spec_.text) throw ConfigError("model has no text sub-network");
  const auto& cfg = *spec_.text;
  if (tokens.ids.size() != cfg.n || tokens.mask.size() != cfg.n) {
    throw InputError("token sequence length " + std::to_string(tokens.ids.size()) + " does not match n = " +
                     std::to_string(cfg.n));
  }
  Rng fallback(0);
  Rng& rng = opts.rng ? *opts.rng : fallback;
  const bool drop = opts.training && opts.dropout > 0.0;
  auto dropout = [&](Var v) { return drop ? ops::dropout(v, opts.dropout, true, rng) : v; };

  std::vector<int> positions(cfg.n);
  for (std::size_t i = 0; i < cfg.n; ++i) positions[i] = static_cast<int>(i);
  Var h = ops::add(ops::embedding(param(tape, "text.tok_emb"), tokens.ids),
                   ops::embedding(param(tape, "text.pos_emb"), positions));
  h = dropout(h);

  TextOutput out;
  out.attention = Tensor({cfg.layers, cfg.heads, cfg.n, cfg.n});
  for (std::size_t l = 0; l < cfg.layers; ++l) {
    const std::string p = "text.l" + std::to_string(l);
    ops::AttentionProjections proj{param(tape, p + ".wq"), param(tape, p + ".wk"), param(tape, p + ".wv"),
                                   param(tape, p + ".wo"), param(tape, p + ".bq"), param(tape, p + ".bk"),
                                   param(tape, p + ".bv"), param(tape, p + ".bo")};
    auto att = ops::multi_head_attention(h, h, h, proj, cfg.heads, tokens.mask);
    std::copy(att.weights.data().begin(), att.weights.data().end(),
              out.attention.data().begin() + static_cast<std::ptrdiff_t>(l * cfg.heads * cfg.n * cfg.n));
    h = ops::layer_norm(ops::add(h, dropout(att.output)), param(tape, p + ".ln1.g"), param(tape, p + ".ln1.b"));
    Var f = ops::relu(ops::add_row_bias(ops::matmul(h, param(tape, p + ".ff1.w")), param(tape, p + ".ff1.b")));
    f = ops::add_row_bias(ops::matmul(f, param(tape, p + ".ff2.w")), param(tape, p + ".ff2.b"));
    h = ops::layer_norm(ops::add(h, dropout(f)), param(tape, p + ".ln2.g"), param(tape, p + ".ln2.b"));
  }
  out.features = ops::row(h, 0);
  return out;
}

Classification Model::classify(Tape& tape, const std::optional<Var>& r_v, const std::optional<Var>& r_t) {
  return fuse_and_classify(r_v, r_t, param(tape, "cls.w"), param(tape, "cls.b"));
}

ForwardResult Model::forward(Tape& tape, const Sample& sample, const ForwardOptions& opts) {
  ForwardResult res;
  std::optional<Var> r_v, r_t;
  if (spec_.has_image()) {
    const std::size_t S = spec_.image_size;
    res.visual = visual_forward(tape, sample.image ? *sample.image : Tensor({3, S, S}), opts);
    r_v = res.visual->features;
  }
  if (spec_.has_text()) {
    if (sample.tokens) {
      res.text = text_forward(tape, *sample.tokens, opts);
    } else {
      res.text = text_forward(tape, encode("", Vocab(), spec_.text->n), opts);
    }
    r_t = res.text->features;
  }
  auto cls = classify(tape, r_v, r_t);
  res.logits = cls.logits;
  res.probs = cls.probs;
  return res;
}

double Model::predict(const Sample& sample) {
  Tape tape;
  return forward(tape, sample).probs.value()[1];
}

Checkpoint Model::snapshot(std::string vocab_ref) const {
  Checkpoint ckpt;
  ckpt.spec = spec_;
  ckpt.vocab_ref = std::move(vocab_ref);
  for (const auto& [name, p] : params_) ckpt.parameters.emplace(name, p.value);
  return ckpt;
}

void Model::load(const Checkpoint& ckpt) {
  if (!(ckpt.spec == spec_)) throw ConfigError("checkpoint spec does not match the model");
  if (ckpt.parameters.size() != params_.size()) {
    throw ConfigError("checkpoint has " + std::to_string(ckpt.parameters.size()) + " parameters, model expects " +
                      std::to_string(params_.size()));
  }
  for (auto& [name, p] : params_) {
    auto it = ckpt.parameters.find(name);
    if (it == ckpt.parameters.end()) throw ConfigError("checkpoint lacks parameter '" + name + "'");
    if (it->second.shape() != p.value.shape()) {
      throw ConfigError("checkpoint parameter '" + name + "' has shape " + shape_to_string(it->second.shape()) +
                        ", model expects " + shape_to_string(p.value.shape()));
    }
    p.value = it->second;
    p.zero_grad();
  }
}

void Model::zero_grad() {
  for (auto& [name, p] : params_) p.zero_grad();
}

}  // namespace propnet
