#include "propnet/training.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "propnet/error.hpp"
#include "propnet/evaluation.hpp"

namespace propnet {

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw ConfigError("learning rate must be positive");
  if (batch_size == 0) throw ConfigError("batch size must be positive");
  if (patience == 0) throw ConfigError("patience must be positive");
  if (max_epochs > 0 && patience > max_epochs) {
    throw ConfigError("patience (" + std::to_string(patience) + ") exceeds max_epochs (" +
                      std::to_string(max_epochs) + ")");
  }
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout must lie in [0, 1)");
}

void sgd_step(Model& model, double learning_rate) {
  for (auto& [name, p] : model.parameters()) {
    if (p.grad.shape() != p.value.shape()) continue;
    auto v = p.value.data();
    auto g = p.grad.data();
    for (std::size_t i = 0; i < v.size(); ++i) v[i] -= learning_rate * g[i];
    p.zero_grad();
  }
}

TrainResult train(Model& model, std::span<const Sample> train_set, std::span<const Sample> validation_set,
                  const TrainConfig& cfg, const std::function<void(const EpochRecord&)>& on_epoch) {
  cfg.validate();
  if (train_set.empty()) throw InputError("training split is empty");
  if (validation_set.empty()) throw InputError("validation split is empty");

  TrainResult result;
  result.best = model.snapshot();
  if (cfg.max_epochs == 0) return result;

  Rng rng(cfg.seed);
  Rng shuffle_rng = rng.split(1);
  Rng dropout_rng = rng.split(2);
  ForwardOptions opts{true, cfg.dropout, &dropout_rng};
  const auto val_labels = labels_of(validation_set);

  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  double best_f1 = -1.0;
  std::size_t since_best = 0;
  model.zero_grad();

  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double loss_total = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      const double inv_b = 1.0 / static_cast<double>(end - start);
      for (std::size_t i = start; i < end; ++i) {
        const Sample& s = train_set[order[i]];
        Tape tape;
        auto fwd = model.forward(tape, s, opts);
        Var loss = classification_loss(fwd.logits, s.label);
        const double lv = loss.value().item();
        if (!std::isfinite(lv)) {
          throw TrainingError("loss became non-finite in epoch " + std::to_string(epoch) + " (sample '" + s.id +
                              "')");
        }
        loss_total += lv;
        tape.backward(ops::scale(loss, inv_b));
      }
      sgd_step(model, cfg.learning_rate);
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_total / static_cast<double>(order.size());
    const auto scores = score_samples(model, validation_set);
    rec.val_f1 = classification_metrics(scores, val_labels).f1;
    result.history.push_back(rec);
    if (on_epoch) on_epoch(rec);

    if (!cfg.early_stop) {
      result.best = model.snapshot();
      result.best_epoch = epoch;
      continue;
    }
    if (rec.val_f1 > best_f1) {
      best_f1 = rec.val_f1;
      result.best = model.snapshot();
      result.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= cfg.patience) {
      break;
    }
  }
  model.load(result.best);
  return result;
}

void write_history_csv(const std::filesystem::path& path, std::span<const EpochRecord> history) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << "epoch,train_loss,val_f1\n";
  char buf[96];
  for (const auto& r : history) {
    std::snprintf(buf, sizeof buf, "%zu,%.10f,%.6f\n", r.epoch, r.train_loss, r.val_f1);
    out << buf;
  }
  if (!out) throw InputError("failed writing " + path.string());
}

}  // namespace propnet
