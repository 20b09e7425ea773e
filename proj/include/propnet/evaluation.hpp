#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "propnet/corpus.hpp"
#include "propnet/model.hpp"

namespace propnet {

struct TrainConfig;

struct Metrics {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  friend bool operator==(const RocPoint&, const RocPoint&) = default;
};

struct RocCurve {
  std::vector<RocPoint> points;
  double auc = 0.0;
};

struct EvalReport {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::vector<RocPoint> roc;
  double auc = 0.0;
  double tpr_at_zero_fpr = 0.0;
};

// Positive prediction iff score > threshold; empty denominators give 0.
Metrics classification_metrics(std::span<const double> scores, std::span<const int> labels, double threshold = 0.5);
// One point per distinct score (descending) plus (0,0); trapezoidal area.
RocCurve roc_and_auc(std::span<const double> scores, std::span<const int> labels);
// Share of positives scoring strictly above every negative.
double tpr_at_zero_fpr(std::span<const double> scores, std::span<const int> labels);
EvalReport evaluate_scores(std::span<const double> scores, std::span<const int> labels, double threshold = 0.5);
// Field-wise mean of the scalar metrics; roc left empty.
EvalReport arithmetic_mean_report(std::span<const EvalReport> reports);

std::vector<double> score_samples(Model& model, std::span<const Sample> samples);
std::vector<int> labels_of(std::span<const Sample> samples);
EvalReport evaluate_model(Model& model, std::span<const Sample> samples);

struct OrgData {
  Org org = Org::IRA;
  std::vector<Sample> train;
  std::vector<Sample> validation;
  std::vector<Sample> continuous;
  std::vector<Sample> delay;
};

struct XorgRow {
  Org target = Org::IRA;
  double baseline_continuous = 0.0;
  double multi_continuous = 0.0;
  double baseline_delay = 0.0;
  double multi_delay = 0.0;
};

// For every target organisation: baseline = mean F1 of the two models
// trained on one other organisation each, multi = F1 of one model trained
// on the union of both. Models are initialised from `seed`.
std::vector<XorgRow> cross_org_experiment(std::span<const OrgData> orgs, const ModelSpec& spec,
                                          const TrainConfig& cfg, std::uint64_t seed);

struct NamedReport {
  std::string model;
  std::string split;
  EvalReport report;
};

void write_metrics_csv(const std::filesystem::path& path, std::span<const NamedReport> rows);
void write_roc_csv(const std::filesystem::path& path, std::span<const RocPoint> roc);
void write_xorg_csv(const std::filesystem::path& path, std::span<const XorgRow> rows);

}  // namespace propnet
