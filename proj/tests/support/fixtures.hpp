#pragma once

#include <vector>

#include "propnet/dataset.hpp"
#include "propnet/synthetic.hpp"
#include "propnet/tokenizer.hpp"

namespace propnet::testing {

struct SplitSamples {
  Vocab vocab;
  std::vector<Sample> train, validation, continuous, delay;
};

// Samples of every split of `corpus`, restricted to `subset` when given,
// with a vocabulary built from the training texts.
inline SplitSamples samples_from(const SyntheticCorpus& corpus, ModelSpec& spec, std::optional<Org> subset = {},
                                 std::size_t vocab_size = 200) {
  SplitSamples out;
  const auto train = select(corpus.records, subset, Split::Train);
  const auto images = image_map_source(corpus.images);
  if (spec.text) {
    out.vocab = build_vocab(variant_texts(train, spec.text_variant), vocab_size);
    spec.text->vocab_size = out.vocab.size();
  }
  const Vocab* vocab = spec.text ? &out.vocab : nullptr;
  out.train = make_samples(train, spec, vocab, images);
  out.validation = make_samples(select(corpus.records, subset, Split::Validation), spec, vocab, images);
  out.continuous = make_samples(select(corpus.records, subset, Split::Continuous), spec, vocab, images);
  out.delay = make_samples(select(corpus.records, subset, Split::Delay), spec, vocab, images);
  return out;
}

}  // namespace propnet::testing
