#include "ccnet/metrics.hpp"

#include <json.hpp>

#include "ccnet/error.hpp"

namespace ccnet {

namespace {
void check_counts(const ConfusionMatrix& cm) {
  if (cm.tp < 0 || cm.tn < 0 || cm.fp < 0 || cm.fn < 0)
    throw InputError("confusion matrix counts must be non-negative");
}
}  // namespace

double precision(const ConfusionMatrix& cm) {
  check_counts(cm);
  if (cm.tp + cm.fp == 0) throw InputError("precision undefined: no positive predictions");
  return static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fp);
}

double recall(const ConfusionMatrix& cm) {
  check_counts(cm);
  if (cm.tp + cm.fn == 0) throw InputError("recall undefined: no positive truths");
  return static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fn);
}

double accuracy(const ConfusionMatrix& cm, AccuracyVariant variant) {
  check_counts(cm);
  if (cm.total() == 0) throw InputError("accuracy undefined: empty confusion matrix");
  const auto numerator = variant == AccuracyVariant::standard ? cm.tp + cm.tn : cm.tp;
  return static_cast<double>(numerator) / static_cast<double>(cm.total());
}

std::string metrics_report(const ConfusionMatrix& cm) {
  const nlohmann::json j = {
      {"precision", precision(cm)},
      {"recall", recall(cm)},
      {"accuracy", accuracy(cm, AccuracyVariant::standard)},
      {"accuracy_as_printed", accuracy(cm, AccuracyVariant::as_printed)},
      {"tp", cm.tp},
      {"tn", cm.tn},
      {"fp", cm.fp},
      {"fn", cm.fn},
  };
  return j.dump();
}

}  // namespace ccnet
