#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include "propnet/model.hpp"

namespace propnet {

struct TrainConfig {
  double learning_rate = 0.05;
  std::size_t batch_size = 32;
  std::size_t max_epochs = 50;
  std::size_t patience = 5;
  std::uint64_t seed = 0;
  double dropout = 0.1;
  // Off: run every epoch and keep the last one.
  bool early_stop = true;

  void validate() const;
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_f1 = 0.0;
};

struct TrainResult {
  Checkpoint best;
  std::size_t best_epoch = 0;  // 0 when no epoch ran
  std::vector<EpochRecord> history;
};

// θ ← θ − lr·grad for every parameter, then clears the gradients.
void sgd_step(Model& model, double learning_rate);

// Shuffled mini-batch SGD on the mean cross-entropy; validation F1 after
// every epoch selects the returned checkpoint, which is also loaded back
// into `model`.
TrainResult train(Model& model, std::span<const Sample> train_set, std::span<const Sample> validation_set,
                  const TrainConfig& cfg, const std::function<void(const EpochRecord&)>& on_epoch = {});

void write_history_csv(const std::filesystem::path& path, std::span<const EpochRecord> history);

}  // namespace propnet
