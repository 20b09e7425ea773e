#include "propnet/dataset.hpp"

#include "propnet/error.hpp"

namespace propnet {

ImageSource image_dir_source(std::filesystem::path root) {
  return [root = std::move(root)](const TweetRecord& r) -> std::optional<Image> {
    if (!r.image_ref) return std::nullopt;
    const auto path = root / *r.image_ref;
    if (!std::filesystem::exists(path)) {
      throw InputError("record '" + r.id + "': image " + path.string() + " not found");
    }
    return load_image(path);
  };
}

ImageSource image_map_source(const std::map<std::string, Image>& images) {
  return [&images](const TweetRecord& r) -> std::optional<Image> {
    if (!r.image_ref) return std::nullopt;
    auto it = images.find(*r.image_ref);
    if (it == images.end()) throw InputError("record '" + r.id + "': no image '" + *r.image_ref + "'");
    return it->second;
  };
}

std::vector<std::string> variant_texts(std::span<const TweetRecord> records, VariantKind kind) {
  std::vector<std::string> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(apply_variant(r.std_text, kind));
  return out;
}

Sample make_sample(const TweetRecord& record, const ModelSpec& spec, const Vocab* vocab, const ImageSource& images) {
  Sample s;
  s.id = record.id;
  s.label = static_cast<int>(record.label);
  if (spec.has_image()) {
    if (auto img = images ? images(record) : std::nullopt) s.image = image_to_tensor(*img, spec.image_size);
  }
  if (spec.has_text()) {
    if (!vocab) throw ConfigError("text modality needs a vocabulary");
    s.tokens = encode(apply_variant(record.std_text, spec.text_variant), *vocab, spec.text->n);
  }
  return s;
}

std::vector<Sample> make_samples(std::span<const TweetRecord> records, const ModelSpec& spec, const Vocab* vocab,
                                 const ImageSource& images) {
  std::vector<Sample> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(make_sample(r, spec, vocab, images));
  return out;
}

std::vector<TweetRecord> select(std::span<const TweetRecord> records, std::optional<Org> subset,
                                std::optional<Split> split) {
  std::vector<TweetRecord> out;
  for (const auto& r : records) {
    if (subset && r.subset != subset) continue;
    if (split && r.split != split) continue;
    out.push_back(r);
  }
  return out;
}

}  // namespace propnet
