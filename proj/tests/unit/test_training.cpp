#include <cmath>

#include "doctest.h"
#include "propnet/error.hpp"
#include "propnet/training.hpp"
#include "support/fixtures.hpp"

using namespace propnet;
using propnet::testing::samples_from;

namespace {

ModelSpec small_text_spec() {
  ModelSpec s;
  s.modality = Modality::TextOnly;
  s.text = TextEncoderConfig{1, 2, 8, 12, 0.0, 0};
  s.image_size = 16;
  return s;
}

SyntheticCorpus small_corpus(SyntheticKind kind, std::size_t records = 120) {
  SyntheticOptions o;
  o.records = records;
  o.image_size = 16;
  o.seed = 4;
  return make_synthetic(kind, o);
}

}  // namespace

TEST_CASE("zero-epoch budget returns the initial parameters") {
  ModelSpec spec = small_text_spec();
  auto data = samples_from(small_corpus(SyntheticKind::TextInformative), spec);
  Model m(spec, 1);
  const auto initial = m.snapshot();
  TrainConfig cfg;
  cfg.max_epochs = 0;
  const auto r = train(m, data.train, data.validation, cfg);
  CHECK(r.history.empty());
  CHECK(r.best_epoch == 0);
  CHECK(r.best.parameters == initial.parameters);
}

TEST_CASE("training is deterministic for a fixed seed") {
  ModelSpec spec = small_text_spec();
  auto data = samples_from(small_corpus(SyntheticKind::TextInformative), spec);
  TrainConfig cfg;
  cfg.max_epochs = 3;
  cfg.patience = 2;
  cfg.batch_size = 8;
  cfg.seed = 9;
  Model a(spec, 5), b(spec, 5);
  const auto ra = train(a, data.train, data.validation, cfg);
  const auto rb = train(b, data.train, data.validation, cfg);
  CHECK(ra.best == rb.best);
  REQUIRE(ra.history.size() == rb.history.size());
  for (std::size_t i = 0; i < ra.history.size(); ++i) CHECK(ra.history[i].train_loss == rb.history[i].train_loss);
}

TEST_CASE("one manual step on the classifier bias matches the closed form") {
  ModelSpec spec = small_text_spec();
  auto data = samples_from(small_corpus(SyntheticKind::TextInformative), spec);
  Model m(spec, 2);
  const Sample& s = data.train.front();
  Tensor probs;
  {
    Tape tape;
    auto r = m.forward(tape, s);
    probs = r.probs.value();
    tape.backward(classification_loss(r.logits, s.label));
  }
  const Tensor before = m.parameter("cls.b").value;
  const double lr = 0.3;
  sgd_step(m, lr);
  const Tensor& after = m.parameter("cls.b").value;
  for (std::size_t c = 0; c < 2; ++c) {
    const double y = static_cast<int>(c) == s.label ? 1.0 : 0.0;
    CHECK(after[c] == doctest::Approx(before[c] - lr * (probs[c] - y)).epsilon(1e-12));
  }
  for (const auto& [name, p] : m.parameters())
    for (double g : p.grad.data()) CHECK(g == 0.0);
}

TEST_CASE("early stopping keeps the best validation epoch") {
  ModelSpec spec = small_text_spec();
  auto data = samples_from(small_corpus(SyntheticKind::TextInformative), spec);
  Model m(spec, 3);
  TrainConfig cfg;
  cfg.max_epochs = 12;
  cfg.patience = 2;
  cfg.batch_size = 8;
  cfg.learning_rate = 0.2;
  const auto r = train(m, data.train, data.validation, cfg);
  REQUIRE(!r.history.empty());
  const double best = r.history[r.best_epoch - 1].val_f1;
  for (std::size_t i = 0; i < r.best_epoch - 1; ++i) CHECK(r.history[i].val_f1 < best);
  for (const auto& e : r.history) CHECK(e.val_f1 <= best);
  CHECK(r.history.size() <= r.best_epoch + cfg.patience);
  CHECK(m.snapshot().parameters == r.best.parameters);

  Model n(spec, 3);
  cfg.early_stop = false;
  cfg.max_epochs = 4;
  const auto all = train(n, data.train, data.validation, cfg);
  CHECK(all.history.size() == 4);
  CHECK(all.best_epoch == 4);
}

TEST_CASE("train loss decreases on separable data") {
  ModelSpec spec = small_text_spec();
  auto data = samples_from(small_corpus(SyntheticKind::TextInformative, 200), spec);
  Model m(spec, 8);
  TrainConfig cfg;
  cfg.max_epochs = 6;
  cfg.early_stop = false;
  cfg.batch_size = 8;
  cfg.dropout = 0.0;
  cfg.learning_rate = 0.1;
  const auto r = train(m, data.train, data.validation, cfg);
  int decreases = 0;
  for (std::size_t i = 1; i < 6; ++i) decreases += r.history[i].train_loss <= r.history[i - 1].train_loss;
  CHECK(decreases >= 4);
}

TEST_CASE("training errors") {
  ModelSpec spec = small_text_spec();
  auto data = samples_from(small_corpus(SyntheticKind::TextInformative), spec);
  Model m(spec, 1);
  TrainConfig cfg;
  CHECK_THROWS_AS(train(m, {}, data.validation, cfg), InputError);
  CHECK_THROWS_AS(train(m, data.train, {}, cfg), InputError);
  TrainConfig bad = cfg;
  bad.learning_rate = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = cfg;
  bad.patience = 60;
  CHECK_THROWS_AS(bad.validate(), ConfigError);

  m.parameter("cls.b").value[0] = std::nan("");
  cfg.max_epochs = 2;
  cfg.patience = 1;
  try {
    train(m, data.train, data.validation, cfg);
    FAIL("expected TrainingError");
  } catch (const TrainingError& e) {
    CHECK(std::string(e.what()).find("epoch 1") != std::string::npos);
  }
}
