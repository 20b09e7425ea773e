#include <charconv>
#include <map>
#include <sstream>

#include "propnet/error.hpp"
#include "propnet/model.hpp"

namespace propnet {

std::string_view to_string(Modality m) {
  switch (m) {
    case Modality::ImageOnly: return "image";
    case Modality::TextOnly: return "text";
    case Modality::MultiModal: return "multi";
  }
  return "?";
}

Modality parse_modality(std::string_view text) {
  if (text == "image" || text == "image-only") return Modality::ImageOnly;
  if (text == "text" || text == "text-only") return Modality::TextOnly;
  if (text == "multi" || text == "multi-modal") return Modality::MultiModal;
  throw ConfigError("unknown modality '" + std::string(text) + "' (expected image, text or multi)");
}

std::string_view to_string(VisualExtractorKind k) {
  switch (k) {
    case VisualExtractorKind::ResidualCNN: return "residual";
    case VisualExtractorKind::PlainCNN: return "plain";
    case VisualExtractorKind::BranchCNN: return "branch";
    case VisualExtractorKind::Style: return "style";
    case VisualExtractorKind::Content: return "content";
    case VisualExtractorKind::StyleContent: return "stylecontent";
    case VisualExtractorKind::ImageStructure: return "imagestructure";
  }
  return "?";
}

VisualExtractorKind parse_visual(std::string_view text) {
  for (auto k : {VisualExtractorKind::ResidualCNN, VisualExtractorKind::PlainCNN, VisualExtractorKind::BranchCNN,
                 VisualExtractorKind::Style, VisualExtractorKind::Content, VisualExtractorKind::StyleContent,
                 VisualExtractorKind::ImageStructure}) {
    if (text == to_string(k)) return k;
  }
  throw ConfigError("unknown visual extractor '" + std::string(text) + "'");
}

void TextEncoderConfig::validate() const {
  if (layers == 0) throw ConfigError("text encoder needs at least one layer");
  if (heads == 0 || d_model == 0 || d_model % heads != 0) {
    throw ConfigError("d_model " + std::to_string(d_model) + " is not divisible by " + std::to_string(heads) +
                      " heads");
  }
  if (n < 3) throw ConfigError("sequence length must be at least 3, got " + std::to_string(n));
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("text dropout must lie in [0, 1)");
  if (vocab_size <= 4) throw ConfigError("text encoder vocab_size must exceed the 4 special tokens");
}

std::size_t visual_feature_length(VisualExtractorKind kind, std::size_t width) {
  const std::size_t k_style = 2 * width;
  switch (kind) {
    case VisualExtractorKind::ResidualCNN:
    case VisualExtractorKind::PlainCNN:
    case VisualExtractorKind::BranchCNN:
    case VisualExtractorKind::ImageStructure: return 4 * width;
    case VisualExtractorKind::Style: return k_style * (k_style + 1) / 2;
    case VisualExtractorKind::Content: return kContentOut;
    case VisualExtractorKind::StyleContent: return k_style * (k_style + 1) / 2 + kContentOut;
  }
  return 0;
}

void ModelSpec::validate() const {
  if (has_image() != visual.has_value()) {
    throw ConfigError(std::string("modality '") + std::string(to_string(modality)) +
                      (visual ? "' must not carry a visual extractor" : "' requires a visual extractor"));
  }
  if (has_text() != text.has_value()) {
    throw ConfigError(std::string("modality '") + std::string(to_string(modality)) +
                      (text ? "' must not carry a text encoder" : "' requires a text encoder"));
  }
  if (text) text->validate();
  if (visual) {
    if (image_size < 4) throw ConfigError("image size must be at least 4, got " + std::to_string(image_size));
    if (visual_width < 2 || visual_width % 2 != 0) {
      throw ConfigError("visual width must be an even number ≥ 2, got " + std::to_string(visual_width));
    }
  }
}

std::size_t ModelSpec::visual_feature_length() const {
  return visual ? propnet::visual_feature_length(*visual, visual_width) : 0;
}

std::size_t ModelSpec::text_feature_length() const { return text ? text->d_model : 0; }

std::size_t ModelSpec::classifier_width() const { return visual_feature_length() + text_feature_length(); }

std::string ModelSpec::to_text() const {
  std::ostringstream out;
  out << "modality = " << to_string(modality) << '\n';
  if (visual) {
    out << "visual = " << to_string(*visual) << '\n';
    out << "image_size = " << image_size << '\n';
    out << "visual_width = " << visual_width << '\n';
  }
  if (text) {
    out << "text.layers = " << text->layers << '\n';
    out << "text.heads = " << text->heads << '\n';
    out << "text.d_model = " << text->d_model << '\n';
    out << "text.n = " << text->n << '\n';
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof buf, text->dropout);
    out << "text.dropout = " << std::string_view(buf, static_cast<std::size_t>(res.ptr - buf)) << '\n';
    out << "text.vocab_size = " << text->vocab_size << '\n';
    out << "text.variant = " << to_string(text_variant) << '\n';
  }
  return out.str();
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::size_t to_size(std::string_view key, std::string_view v) {
  std::size_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) {
    throw ConfigError("model spec: '" + std::string(key) + "' expects an integer, got '" + std::string(v) + "'");
  }
  return out;
}

double to_double(std::string_view key, std::string_view v) {
  double out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) {
    throw ConfigError("model spec: '" + std::string(key) + "' expects a number, got '" + std::string(v) + "'");
  }
  return out;
}

}  // namespace

ModelSpec ModelSpec::from_text(std::string_view text) {
  std::map<std::string, std::string, std::less<>> kv;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = trim(text.substr(start, end - start));
    start = end + 1;
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError("model spec: line without '=': " + std::string(line));
    kv[std::string(trim(line.substr(0, eq)))] = std::string(trim(line.substr(eq + 1)));
  }
  auto take = [&](std::string_view key) -> std::optional<std::string> {
    auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    std::string v = it->second;
    kv.erase(it);
    return v;
  };
  ModelSpec spec;
  auto modality = take("modality");
  if (!modality) throw ConfigError("model spec: missing 'modality'");
  spec.modality = parse_modality(*modality);
  if (auto v = take("visual")) spec.visual = parse_visual(*v);
  if (auto v = take("image_size")) spec.image_size = to_size("image_size", *v);
  if (auto v = take("visual_width")) spec.visual_width = to_size("visual_width", *v);
  if (spec.has_text()) {
    TextEncoderConfig cfg;
    if (auto v = take("text.layers")) cfg.layers = to_size("text.layers", *v);
    if (auto v = take("text.heads")) cfg.heads = to_size("text.heads", *v);
    if (auto v = take("text.d_model")) cfg.d_model = to_size("text.d_model", *v);
    if (auto v = take("text.n")) cfg.n = to_size("text.n", *v);
    if (auto v = take("text.dropout")) cfg.dropout = to_double("text.dropout", *v);
    if (auto v = take("text.vocab_size")) cfg.vocab_size = to_size("text.vocab_size", *v);
    spec.text = cfg;
    if (auto v = take("text.variant")) spec.text_variant = parse_variant(*v);
  }
  if (!kv.empty()) throw ConfigError("model spec: unknown key '" + kv.begin()->first + "'");
  spec.validate();
  return spec;
}

}  // namespace propnet
