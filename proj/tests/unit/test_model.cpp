#include <cmath>
#include <filesystem>

#include "doctest.h"
#include "propnet/error.hpp"
#include "propnet/model.hpp"
#include "support/gradcheck.hpp"

using namespace propnet;
using propnet::testing::check_model;
using propnet::testing::random_tensor;

namespace {

ModelSpec micro_spec(Modality m, VisualExtractorKind kind = VisualExtractorKind::ResidualCNN) {
  ModelSpec s;
  s.modality = m;
  if (m != Modality::TextOnly) s.visual = kind;
  if (m != Modality::ImageOnly) s.text = TextEncoderConfig{1, 2, 8, 6, 0.0, 12};
  s.image_size = 8;
  s.visual_width = 2;
  return s;
}

TokenSequence tokens_of(std::vector<int> real, std::size_t n) {
  TokenSequence t;
  t.ids.push_back(kClsId);
  t.mask.push_back(1);
  t.word_index.push_back(std::nullopt);
  for (std::size_t i = 0; i < real.size(); ++i) {
    t.ids.push_back(real[i]);
    t.mask.push_back(1);
    t.word_index.push_back(i);
    t.words.push_back("w" + std::to_string(i));
  }
  t.ids.push_back(kSepId);
  t.mask.push_back(1);
  t.word_index.push_back(std::nullopt);
  while (t.ids.size() < n) {
    t.ids.push_back(kPadId);
    t.mask.push_back(0);
    t.word_index.push_back(std::nullopt);
  }
  return t;
}

}  // namespace

TEST_CASE("feature lengths per extractor kind") {
  const std::size_t K = 32;  // width 16 -> stage-2 channels
  CHECK(visual_feature_length(VisualExtractorKind::Style, 16) == K * (K + 1) / 2);
  CHECK(visual_feature_length(VisualExtractorKind::Content, 16) == 256);
  CHECK(visual_feature_length(VisualExtractorKind::StyleContent, 16) ==
        visual_feature_length(VisualExtractorKind::Style, 16) + 256);
  for (auto kind : {VisualExtractorKind::ResidualCNN, VisualExtractorKind::PlainCNN, VisualExtractorKind::BranchCNN,
                    VisualExtractorKind::Style, VisualExtractorKind::Content, VisualExtractorKind::StyleContent,
                    VisualExtractorKind::ImageStructure}) {
    ModelSpec s = micro_spec(Modality::ImageOnly, kind);
    Model m(s, 1);
    Tape tape;
    Rng rng(3);
    auto out = m.visual_forward(tape, random_tensor({3, 8, 8}, rng, 0, 1));
    CAPTURE(to_string(kind));
    CHECK(out.features.value().size() == s.visual_feature_length());
  }
}

TEST_CASE("spec validation and text round trip") {
  ModelSpec s = micro_spec(Modality::MultiModal);
  CHECK(ModelSpec::from_text(s.to_text()) == s);
  ModelSpec bad = s;
  bad.visual.reset();
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = micro_spec(Modality::TextOnly);
  bad.text->heads = 3;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  CHECK_THROWS_AS(ModelSpec::from_text("bogus = 1\n"), ConfigError);
}

TEST_CASE("zero image through residual extractor gives zero features") {
  Model m(micro_spec(Modality::ImageOnly), 4);
  Tape tape;
  auto out = m.visual_forward(tape, Tensor({3, 8, 8}));
  for (double v : out.features.value().data()) CHECK(v == 0.0);
}

TEST_CASE("classifier head examples") {
  Tape tape;
  Var r = tape.constant(Tensor::vector({0.3, -2.0, 5.0}));
  Var w = tape.constant(Tensor({2, 3}));
  auto c = fuse_and_classify(r, std::nullopt, w, tape.constant(Tensor::vector({0, 0})));
  CHECK(c.probs.value()[0] == doctest::Approx(0.5));
  CHECK(classification_loss(c.logits, 1).value().item() == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  c = fuse_and_classify(r, std::nullopt, w, tape.constant(Tensor::vector({0, std::log(3.0)})));
  CHECK(c.probs.value()[0] == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(c.probs.value()[1] == doctest::Approx(0.75).epsilon(1e-12));
  Var wrong = tape.constant(Tensor({2, 4}));
  CHECK_THROWS_AS(fuse_and_classify(r, std::nullopt, wrong, tape.constant(Tensor::vector({0, 0}))), ConfigError);

  // A dominant logit drives the loss to zero.
  Var sure = tape.constant(Tensor::vector({-800.0, 800.0}));
  CHECK(classification_loss(sure, 1).value().item() == doctest::Approx(0.0));
}

TEST_CASE("permuting fused parts with matching weight columns keeps probabilities") {
  Rng rng(9);
  Tape tape;
  Tensor a = random_tensor({3}, rng), b = random_tensor({2}, rng);
  Tensor w = random_tensor({2, 5}, rng), bias = random_tensor({2}, rng);
  Tensor w_swapped({2, 5});
  for (std::size_t r = 0; r < 2; ++r) {
    for (std::size_t j = 0; j < 2; ++j) w_swapped.at(r, j) = w.at(r, 3 + j);
    for (std::size_t j = 0; j < 3; ++j) w_swapped.at(r, 2 + j) = w.at(r, j);
  }
  auto p1 = fuse_and_classify(tape.constant(a), tape.constant(b), tape.constant(w), tape.constant(bias));
  auto p2 = fuse_and_classify(tape.constant(b), tape.constant(a), tape.constant(w_swapped), tape.constant(bias));
  CHECK(p1.probs.value()[1] == doctest::Approx(p2.probs.value()[1]).epsilon(1e-12));
}

TEST_CASE("zero classifier gives ln 2 on any input") {
  Model m(micro_spec(Modality::MultiModal), 2);
  m.parameter("cls.w").value.fill(0.0);
  Rng rng(1);
  Sample s{random_tensor({3, 8, 8}, rng, 0, 1), tokens_of({5, 6}, 6), 1, "x"};
  Tape tape;
  auto r = m.forward(tape, s);
  CHECK(classification_loss(r.logits, 1).value().item() == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("text encoder masks padding and returns stochastic attention rows") {
  Model m(micro_spec(Modality::TextOnly), 5);
  const TokenSequence t = tokens_of({4, 7}, 6);
  Tape t1;
  auto out = m.text_forward(t1, t);
  CHECK(out.attention.shape() == Shape{1, 2, 6, 6});
  for (std::size_t h = 0; h < 2; ++h)
    for (std::size_t i = 0; i < 6; ++i) {
      double row = 0;
      for (std::size_t j = 0; j < 6; ++j) row += out.attention[(h * 6 + i) * 6 + j];
      CHECK(row == doctest::Approx(1.0).epsilon(1e-9));
    }

  auto& emb = m.parameter("text.tok_emb").value;
  for (std::size_t j = 0; j < 8; ++j) emb.at(kPadId, j) += 3.0;
  auto& pos = m.parameter("text.pos_emb").value;
  for (std::size_t j = 0; j < 8; ++j) pos.at(5, j) -= 2.0;
  Tape t2;
  auto again = m.text_forward(t2, t);
  for (std::size_t j = 0; j < 8; ++j) CHECK(again.features.value()[j] == doctest::Approx(out.features.value()[j]).epsilon(1e-12));

  TokenSequence shorter = tokens_of({4}, 5);
  Tape t3;
  CHECK_THROWS_AS(m.text_forward(t3, shorter), InputError);
}

TEST_CASE("default text probability map") {
  GrayRaster flat(12, 12, 0.4);
  const auto z = default_text_probability_map(flat);
  CHECK(z.width == 12);
  CHECK(z.height == 12);
  for (double v : z.values) CHECK(v == 0.0);

  GrayRaster edge(20, 10, 0.0);
  for (std::size_t y = 0; y < 10; ++y)
    for (std::size_t x = 10; x < 20; ++x) edge.at(y, x) = 1.0;
  const auto m = default_text_probability_map(edge);
  for (std::size_t y = 0; y < 10; ++y) {
    CHECK(m.at(y, 9) > 0.0);
    CHECK(m.at(y, 10) > 0.0);
    CHECK(m.at(y, 0) == 0.0);
    CHECK(m.at(y, 19) == 0.0);
    for (std::size_t x = 0; x < 20; ++x) {
      CHECK(m.at(y, x) >= 0.0);
      CHECK(m.at(y, x) <= 1.0);
    }
  }
}

TEST_CASE("image structure extractor requires a provider") {
  ModelSpec s = micro_spec(Modality::ImageOnly, VisualExtractorKind::ImageStructure);
  CHECK_THROWS_AS(Model(s, 1, TextProbabilityMapProvider{}), ConfigError);
}

TEST_CASE("checkpoint round trip preserves spec and parameters") {
  Model m(micro_spec(Modality::MultiModal, VisualExtractorKind::BranchCNN), 11);
  const auto ckpt = m.snapshot("vocab.txt");
  const auto path = std::filesystem::temp_directory_path() / "propnet_ckpt_test.bin";
  save_checkpoint(path, ckpt);
  const auto back = load_checkpoint(path);
  CHECK(back == ckpt);
  Model restored(back);
  Rng rng(2);
  Sample s{random_tensor({3, 8, 8}, rng, 0, 1), tokens_of({5}, 6), 0, "s"};
  CHECK(restored.predict(s) == m.predict(s));

  std::filesystem::resize_file(path, std::filesystem::file_size(path) - 3);
  CHECK_THROWS_AS(load_checkpoint(path), InputError);
  std::filesystem::remove(path);
}

TEST_CASE("end-to-end micro model gradients agree with finite differences") {
  Rng rng(77);
  for (auto kind : {VisualExtractorKind::ResidualCNN, VisualExtractorKind::PlainCNN, VisualExtractorKind::BranchCNN,
                    VisualExtractorKind::Style, VisualExtractorKind::Content, VisualExtractorKind::StyleContent,
                    VisualExtractorKind::ImageStructure}) {
    Model m(micro_spec(Modality::MultiModal, kind), 3);
    propnet::testing::jitter_parameters(m, rng);
    Sample s{random_tensor({3, 8, 8}, rng, 0, 1), tokens_of({4, 9, 5}, 6), 1, "g"};
    CAPTURE(to_string(kind));
    CHECK(check_model(m, s, rng) < 1e-5);
  }
}
