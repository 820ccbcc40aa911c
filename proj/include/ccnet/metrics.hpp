#pragma once

#include <string>

namespace ccnet {

// Congested is the positive class: fp counts non-congested frames read as
// congested, fn counts congested frames read as non-congested.
struct ConfusionMatrix {
  long long tp = 0;
  long long tn = 0;
  long long fp = 0;
  long long fn = 0;

  long long total() const { return tp + tn + fp + fn; }
};

// tp / (tp + fp); throws when no positive predictions exist.
double precision(const ConfusionMatrix& cm);

// tp / (tp + fn); throws when no positive truths exist.
double recall(const ConfusionMatrix& cm);

// standard: (tp + tn) / total. as_printed keeps the quirk of counting only
// true positives in the numerator over all four cells: tp / total. The
// as-printed value can never exceed the standard one.
enum class AccuracyVariant { standard, as_printed };

double accuracy(const ConfusionMatrix& cm, AccuracyVariant variant = AccuracyVariant::standard);

// One JSON object (single line) with precision, recall, both accuracy
// variants, and the raw counts.
std::string metrics_report(const ConfusionMatrix& cm);

}  // namespace ccnet
