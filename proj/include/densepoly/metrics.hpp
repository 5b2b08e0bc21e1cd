#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "densepoly/geometry.hpp"
#include "densepoly/polygonize.hpp"

namespace densepoly::metrics {

using poly::ScoredPolygon;

/// The sweep 0.50, 0.55, ..., 0.95.
const std::array<double, 10>& iou_thresholds();

/// Exact area(a & b) / area(a | b). Throws DomainError unless both rings are
/// simple with positive area.
double polygon_iou(const Ring& a, const Ring& b);

struct MatchPair {
  std::size_t pred;
  std::size_t gt;
  double iou;
};

struct MatchSet {
  double threshold = 0.5;
  std::vector<MatchPair> pairs;
  std::vector<std::size_t> unmatched_preds;
  std::vector<std::size_t> unmatched_gts;
};

/// Sparse IoU table: for each prediction, (gt index, IoU > 0) pairs.
using IouTable = std::vector<std::vector<std::pair<std::size_t, double>>>;

IouTable iou_table(const std::vector<ScoredPolygon>& preds, const std::vector<Ring>& gts);

/// Greedy matching: predictions by descending score (ties by index), each to
/// the unmatched ground truth with the highest IoU >= tau (ties by index).
MatchSet match_instances(const std::vector<ScoredPolygon>& preds, const std::vector<Ring>& gts,
                         double tau);
MatchSet match_with_table(const std::vector<ScoredPolygon>& preds, std::size_t n_gts,
                          const IouTable& table, double tau);

struct PrF1 {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Precision is 0 without predictions; recall is 1 without ground truth.
/// Throws ValidationError when the counts cannot hold the match set.
PrF1 pr_f1_at(const MatchSet& ms, std::size_t n_preds, std::size_t n_gts);

/// 101-point interpolated average precision. No ground truth: 1 without
/// predictions, 0 with any.
double ap_at(const std::vector<ScoredPolygon>& preds, const std::vector<Ring>& gts, double tau);

struct ThresholdRow {
  double threshold = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double ap = 0.0;
};

struct MetricsReport {
  double f1_50 = 0.0, f1_75 = 0.0;
  double ap_50 = 0.0, ap_75 = 0.0;
  double ar_50 = 0.0, ar_75 = 0.0;
  double map = 0.0, mar = 0.0;
  std::vector<ThresholdRow> per_threshold;

  /// Throws ValidationError if any value leaves [0, 1].
  void validate() const;
};

MetricsReport evaluate(const std::vector<ScoredPolygon>& preds, const std::vector<Ring>& gts);

struct ImageInstances {
  std::vector<ScoredPolygon> preds;
  std::vector<Ring> gts;
};

/// Pools detections over images: one precision-recall sweep over all
/// predictions, matches made within each image.
MetricsReport evaluate_dataset(const std::vector<ImageInstances>& images);

}  // namespace densepoly::metrics
