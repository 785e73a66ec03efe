#include "objgan/detection_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace objgan {

std::optional<double> roc_auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw std::invalid_argument("roc_auc: size mismatch");
  const auto n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] < scores[b]; });

  // Average ranks over tie groups, then Mann-Whitney U.
  double positive_rank_sum = 0.0;
  std::size_t positives = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) {
      if (labels[order[k]] != 0) {
        positive_rank_sum += avg_rank;
        ++positives;
      }
    }
    i = j + 1;
  }
  const std::size_t negatives = n - positives;
  if (positives == 0 || negatives == 0) return std::nullopt;
  const double p = static_cast<double>(positives);
  const double u = positive_rank_sum - p * (p + 1.0) / 2.0;
  return u / (p * static_cast<double>(negatives));
}

DetectionMetrics evaluate_discriminator(std::span<const double> scores, std::span<const int> labels,
                                        double threshold) {
  if (scores.size() != labels.size()) throw std::invalid_argument("evaluate_discriminator: size mismatch");
  if (scores.empty()) throw std::invalid_argument("evaluate_discriminator: empty set");
  DetectionMetrics m;
  long correct = 0;
  long positives = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool alert = scores[i] > threshold;
    const bool positive = labels[i] != 0;
    positives += positive;
    m.alerts += alert;
    m.true_positives += alert && positive;
    correct += alert == positive;
  }
  const double n = static_cast<double>(scores.size());
  m.accuracy = correct / n;
  m.alert_rate = m.alerts / n;
  m.recall = positives > 0 ? static_cast<double>(m.true_positives) / positives : 0.0;
  m.precision = m.alerts > 0 ? static_cast<double>(m.true_positives) / m.alerts : 0.0;
  m.auc = roc_auc(scores, labels);
  return m;
}

double threshold_for_alert_rate(std::span<const double> scores, double rate) {
  if (scores.empty()) throw std::invalid_argument("threshold_for_alert_rate: empty scores");
  std::vector<double> sorted(scores.begin(), scores.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  const double n = static_cast<double>(sorted.size());
  // Candidate thresholds sit at each distinct score (alerting everything strictly above it)
  // plus just below the minimum (alerting everything).
  double best_threshold = sorted.front();
  double best_gap = std::abs(0.0 - rate);
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (i + 1 < sorted.size() && sorted[i + 1] == sorted[i]) continue;
    const double alerted = static_cast<double>(i + 1) / n;
    const double candidate = i + 1 < sorted.size() ? sorted[i + 1] : std::nextafter(sorted.back(), -INFINITY);
    const double gap = std::abs(alerted - rate);
    if (gap < best_gap) {
      best_gap = gap;
      best_threshold = candidate;
    }
  }
  return best_threshold;
}

}  // namespace objgan
