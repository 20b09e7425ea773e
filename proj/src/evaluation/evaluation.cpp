#include "propnet/evaluation.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <numeric>

#include "propnet/error.hpp"
#include "propnet/training.hpp"

namespace propnet {

namespace {

void check_inputs(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw InputError("score/label length mismatch: " + std::to_string(scores.size()) + " vs " +
                     std::to_string(labels.size()));
  }
  for (int l : labels) {
    if (l != 0 && l != 1) throw InputError("labels must be 0 or 1, got " + std::to_string(l));
  }
}

double ratio(double num, double den) { return den > 0 ? num / den : 0.0; }

}  // namespace

Metrics classification_metrics(std::span<const double> scores, std::span<const int> labels, double threshold) {
  check_inputs(scores, labels);
  if (scores.empty()) throw InputError("classification_metrics: no samples");
  double tp = 0, fp = 0, tn = 0, fn = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool pred = scores[i] > threshold;
    if (labels[i] == 1) (pred ? tp : fn) += 1;
    else (pred ? fp : tn) += 1;
  }
  Metrics m;
  m.accuracy = (tp + tn) / static_cast<double>(scores.size());
  m.precision = ratio(tp, tp + fp);
  m.recall = ratio(tp, tp + fn);
  m.f1 = ratio(2 * m.precision * m.recall, m.precision + m.recall);
  return m;
}

RocCurve roc_and_auc(std::span<const double> scores, std::span<const int> labels) {
  check_inputs(scores, labels);
  const auto pos = static_cast<double>(std::count(labels.begin(), labels.end(), 1));
  const auto neg = static_cast<double>(labels.size()) - pos;
  if (pos == 0 || neg == 0) throw EvaluationError("ROC needs at least one positive and one negative sample");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  RocCurve roc;
  roc.points.push_back({0.0, 0.0});
  double tp = 0, fp = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    const double s = scores[order[i]];
    while (i < order.size() && scores[order[i]] == s) {
      (labels[order[i]] == 1 ? tp : fp) += 1;
      ++i;
    }
    const RocPoint next{fp / neg, tp / pos};
    const RocPoint& prev = roc.points.back();
    roc.auc += (next.fpr - prev.fpr) * (next.tpr + prev.tpr) / 2.0;
    roc.points.push_back(next);
  }
  return roc;
}

double tpr_at_zero_fpr(std::span<const double> scores, std::span<const int> labels) {
  check_inputs(scores, labels);
  bool any_neg = false;
  double max_neg = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] == 0) {
      max_neg = any_neg ? std::max(max_neg, scores[i]) : scores[i];
      any_neg = true;
    }
  }
  if (!any_neg) throw EvaluationError("TPR at zero FPR needs at least one negative sample");
  double pos = 0, above = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] == 1) {
      pos += 1;
      if (scores[i] > max_neg) above += 1;
    }
  }
  return ratio(above, pos);
}

EvalReport evaluate_scores(std::span<const double> scores, std::span<const int> labels, double threshold) {
  const Metrics m = classification_metrics(scores, labels, threshold);
  auto roc = roc_and_auc(scores, labels);
  EvalReport r;
  r.accuracy = m.accuracy;
  r.precision = m.precision;
  r.recall = m.recall;
  r.f1 = m.f1;
  r.roc = std::move(roc.points);
  r.auc = roc.auc;
  r.tpr_at_zero_fpr = tpr_at_zero_fpr(scores, labels);
  return r;
}

EvalReport arithmetic_mean_report(std::span<const EvalReport> reports) {
  if (reports.empty()) throw EvaluationError("arithmetic_mean_report: no reports");
  EvalReport m;
  for (const auto& r : reports) {
    m.accuracy += r.accuracy;
    m.precision += r.precision;
    m.recall += r.recall;
    m.f1 += r.f1;
    m.auc += r.auc;
    m.tpr_at_zero_fpr += r.tpr_at_zero_fpr;
  }
  const auto n = static_cast<double>(reports.size());
  m.accuracy /= n;
  m.precision /= n;
  m.recall /= n;
  m.f1 /= n;
  m.auc /= n;
  m.tpr_at_zero_fpr /= n;
  return m;
}

std::vector<double> score_samples(Model& model, std::span<const Sample> samples) {
  std::vector<double> scores;
  scores.reserve(samples.size());
  for (const auto& s : samples) scores.push_back(model.predict(s));
  return scores;
}

std::vector<int> labels_of(std::span<const Sample> samples) {
  std::vector<int> labels;
  labels.reserve(samples.size());
  for (const auto& s : samples) labels.push_back(s.label);
  return labels;
}

EvalReport evaluate_model(Model& model, std::span<const Sample> samples) {
  const auto scores = score_samples(model, samples);
  return evaluate_scores(scores, labels_of(samples));
}

std::vector<XorgRow> cross_org_experiment(std::span<const OrgData> orgs, const ModelSpec& spec,
                                          const TrainConfig& cfg, std::uint64_t seed) {
  if (orgs.size() != 3) {
    throw InputError("cross-organisation experiment needs exactly three organisations, got " +
                     std::to_string(orgs.size()));
  }
  for (const auto& o : orgs) {
    const std::pair<const char*, const std::vector<Sample>*> splits[] = {
        {"train", &o.train}, {"validation", &o.validation}, {"continuous", &o.continuous}, {"delay", &o.delay}};
    for (const auto& [name, s] : splits) {
      if (s->empty()) {
        throw InputError("organisation " + std::string(to_string(o.org)) + " has no " + name + " split");
      }
    }
  }
  spec.validate();
  cfg.validate();

  auto fit = [&](const std::vector<const OrgData*>& sources) {
    std::vector<Sample> tr, va;
    for (const OrgData* o : sources) {
      tr.insert(tr.end(), o->train.begin(), o->train.end());
      va.insert(va.end(), o->validation.begin(), o->validation.end());
    }
    auto model = std::make_unique<Model>(spec, seed);
    train(*model, tr, va, cfg);
    return model;
  };
  auto f1_on = [](Model& m, const std::vector<Sample>& data) {
    const auto scores = score_samples(m, data);
    return classification_metrics(scores, labels_of(data)).f1;
  };

  std::vector<std::unique_ptr<Model>> single;
  for (const auto& o : orgs) single.push_back(fit({&o}));

  std::vector<XorgRow> rows;
  for (std::size_t t = 0; t < 3; ++t) {
    const std::size_t a = (t + 1) % 3, b = (t + 2) % 3;
    const auto& target = orgs[t];
    auto multi = fit({&orgs[std::min(a, b)], &orgs[std::max(a, b)]});
    XorgRow row;
    row.target = target.org;
    row.baseline_continuous = (f1_on(*single[a], target.continuous) + f1_on(*single[b], target.continuous)) / 2.0;
    row.baseline_delay = (f1_on(*single[a], target.delay) + f1_on(*single[b], target.delay)) / 2.0;
    row.multi_continuous = f1_on(*multi, target.continuous);
    row.multi_delay = f1_on(*multi, target.delay);
    rows.push_back(row);
  }
  return rows;
}

namespace {

std::ofstream open_csv(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  return out;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

void write_metrics_csv(const std::filesystem::path& path, std::span<const NamedReport> rows) {
  auto out = open_csv(path);
  out << "model,split,accuracy,precision,recall,f1,auc,tpr_at_zero_fpr\n";
  for (const auto& r : rows) {
    out << r.model << ',' << r.split << ',' << fmt(r.report.accuracy) << ',' << fmt(r.report.precision) << ','
        << fmt(r.report.recall) << ',' << fmt(r.report.f1) << ',' << fmt(r.report.auc) << ','
        << fmt(r.report.tpr_at_zero_fpr) << '\n';
  }
}

void write_roc_csv(const std::filesystem::path& path, std::span<const RocPoint> roc) {
  auto out = open_csv(path);
  out << "fpr,tpr\n";
  for (const auto& p : roc) out << fmt(p.fpr) << ',' << fmt(p.tpr) << '\n';
}

void write_xorg_csv(const std::filesystem::path& path, std::span<const XorgRow> rows) {
  auto out = open_csv(path);
  out << "target,baseline_continuous,multi_continuous,baseline_delay,multi_delay\n";
  for (const auto& r : rows) {
    out << to_string(r.target) << ',' << fmt(r.baseline_continuous) << ',' << fmt(r.multi_continuous) << ','
        << fmt(r.baseline_delay) << ',' << fmt(r.multi_delay) << '\n';
  }
}

}  // namespace propnet
