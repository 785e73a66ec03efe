#pragma once

#include <optional>
#include <span>

namespace objgan {

/// Threshold metrics plus threshold-free AUC. Positive label = malicious and
/// a score strictly above the threshold raises an alert.
struct DetectionMetrics {
  double accuracy = 0.0;
  std::optional<double> auc;  // undefined when only one class is present
  double alert_rate = 0.0;
  double recall = 0.0;
  double precision = 0.0;
  long true_positives = 0;
  long alerts = 0;
};

DetectionMetrics evaluate_discriminator(std::span<const double> scores, std::span<const int> labels,
                                        double threshold);

/// Mann-Whitney AUC with tied scores counted as one half.
std::optional<double> roc_auc(std::span<const double> scores, std::span<const int> labels);

/// Smallest threshold whose alert rate (score > threshold) is closest to `rate`.
double threshold_for_alert_rate(std::span<const double> scores, double rate);

}  // namespace objgan
