// Challenge evaluation metrics.
//
// Tracks 1 and 2 (image / video classification) are ranked by ROC AUC with
// Fake as the positive class. Track 3 (temporal localization) uses
// ActivityNet-style interpolated AP at a set of tIoU thresholds plus AR@2.

#ifndef FORGELOC_METRICS_HPP_
#define FORGELOC_METRICS_HPP_

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "forgeloc/core.hpp"

namespace forgeloc {

/// |a ∩ b| / |a ∪ b| in frames; 0 for disjoint segments.
inline double tiou(const TemporalSegment& a, const TemporalSegment& b) {
  const FrameIndex inter = std::max<FrameIndex>(0, std::min(a.end, b.end) - std::max(a.start, b.start));
  const FrameIndex uni = a.length() + b.length() - inter;
  return uni > 0 ? static_cast<double>(inter) / static_cast<double>(uni) : 0.0;
}

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  double threshold = 0.0;
};

namespace detail {

inline void check_roc_inputs(std::span<const double> scores, std::span<const BinaryLabel> labels,
                             std::size_t& positives, std::size_t& negatives) {
  if (scores.size() != labels.size()) {
    throw std::invalid_argument("roc: scores and labels differ in length");
  }
  positives = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), BinaryLabel::Fake));
  negatives = labels.size() - positives;
  if (positives == 0 || negatives == 0) {
    throw std::invalid_argument("roc: need at least one fake and one real item");
  }
  for (double s : scores) {
    if (!std::isfinite(s)) throw std::invalid_argument("roc: non-finite score");
  }
}

}  // namespace detail

/// ROC points from (0, 0) to (1, 1), one per distinct score taken as an
/// inclusive "score >= threshold is fake" cut, in descending threshold order.
/// FPR = FP / (FP + TN), TPR = TP / (TP + FN).
inline std::vector<RocPoint> roc_curve(std::span<const double> scores,
                                       std::span<const BinaryLabel> labels) {
  std::size_t positives = 0, negatives = 0;
  detail::check_roc_inputs(scores, labels, positives, negatives);

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  std::vector<RocPoint> curve;
  curve.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double cut = scores[order[i]];
    for (; i < order.size() && scores[order[i]] == cut; ++i) {
      is_fake(labels[order[i]]) ? ++tp : ++fp;
    }
    curve.push_back({static_cast<double>(fp) / static_cast<double>(negatives),
                     static_cast<double>(tp) / static_cast<double>(positives), cut});
  }
  return curve;
}

/// Trapezoidal area under roc_curve. Tied scores form a diagonal step and
/// so contribute one half, matching the concordant-pair statistic.
inline double roc_auc(std::span<const double> scores, std::span<const BinaryLabel> labels) {
  const auto curve = roc_curve(scores, labels);
  double area = 0.0;
  for (std::size_t i = 1; i < curve.size(); ++i) {
    area += (curve[i].fpr - curve[i - 1].fpr) * (curve[i].tpr + curve[i - 1].tpr) * 0.5;
  }
  return area;
}

/// 0.50, 0.55, ..., 0.95.
inline std::vector<double> default_tiou_grid() {
  std::vector<double> grid;
  for (int pct = 50; pct <= 95; pct += 5) grid.push_back(pct / 100.0);
  return grid;
}

struct PrecisionRecallCurve {
  /// Per rank, after sorting all proposals by descending confidence.
  std::vector<bool> true_positive;
  std::vector<double> precision;
  std::vector<double> recall;
  /// max over ranks j >= i of precision[j].
  std::vector<double> interpolated_precision;
  std::size_t ground_truth_count = 0;
};

namespace detail {

struct PooledProposal {
  const std::string* video_id;
  Proposal proposal;
};

inline bool rank_before(const PooledProposal& a, const PooledProposal& b) {
  if (a.proposal.confidence != b.proposal.confidence) {
    return a.proposal.confidence > b.proposal.confidence;
  }
  if (*a.video_id != *b.video_id) return *a.video_id < *b.video_id;
  if (a.proposal.segment.start != b.proposal.segment.start) {
    return a.proposal.segment.start < b.proposal.segment.start;
  }
  return a.proposal.segment.end < b.proposal.segment.end;
}

using SegmentIndex = std::map<std::string, std::vector<TemporalSegment>>;

inline SegmentIndex index_segments(const std::vector<GroundTruthRecord>& gt, std::size_t& total) {
  SegmentIndex index;
  total = 0;
  for (const auto& record : gt) {
    index[record.video_id] = record.segments;
    total += record.segments.size();
  }
  return index;
}

// Greedy one-to-one matching in the given (already ranked) order: each
// proposal takes the unmatched same-video segment with the highest tIoU,
// provided that tIoU >= threshold.
inline std::vector<bool> match_ranked(const std::vector<PooledProposal>& ranked,
                                      const SegmentIndex& index, double tiou_thresh) {
  std::map<std::string, std::vector<bool>> used;
  std::vector<bool> hits(ranked.size(), false);
  for (std::size_t r = 0; r < ranked.size(); ++r) {
    auto it = index.find(*ranked[r].video_id);
    if (it == index.end()) continue;
    auto& taken = used[it->first];
    taken.resize(it->second.size(), false);
    double best = -1.0;
    std::size_t best_idx = 0;
    for (std::size_t g = 0; g < it->second.size(); ++g) {
      if (taken[g]) continue;
      const double overlap = tiou(ranked[r].proposal.segment, it->second[g]);
      if (overlap > best) {
        best = overlap;
        best_idx = g;
      }
    }
    if (best >= tiou_thresh) {
      taken[best_idx] = true;
      hits[r] = true;
    }
  }
  return hits;
}

inline void require_tiou_threshold(double t) {
  if (!(t > 0.0 && t <= 1.0)) throw std::invalid_argument("tIoU threshold must lie in (0, 1]");
}

}  // namespace detail

inline PrecisionRecallCurve precision_recall_curve(const ProposalMap& predictions,
                                                   const std::vector<GroundTruthRecord>& gt,
                                                   double tiou_thresh) {
  detail::require_tiou_threshold(tiou_thresh);
  PrecisionRecallCurve curve;
  const auto index = detail::index_segments(gt, curve.ground_truth_count);
  if (curve.ground_truth_count == 0) {
    throw std::invalid_argument("average precision: ground truth has no forged segments");
  }

  std::vector<detail::PooledProposal> ranked;
  for (const auto& [video_id, proposals] : predictions) {
    for (const auto& p : proposals) ranked.push_back({&video_id, p});
  }
  std::sort(ranked.begin(), ranked.end(), detail::rank_before);
  curve.true_positive = detail::match_ranked(ranked, index, tiou_thresh);

  std::size_t tp = 0;
  for (std::size_t r = 0; r < ranked.size(); ++r) {
    if (curve.true_positive[r]) ++tp;
    curve.precision.push_back(static_cast<double>(tp) / static_cast<double>(r + 1));
    curve.recall.push_back(static_cast<double>(tp) / static_cast<double>(curve.ground_truth_count));
  }
  curve.interpolated_precision = curve.precision;
  for (std::size_t r = curve.interpolated_precision.size(); r-- > 1;) {
    curve.interpolated_precision[r - 1] =
        std::max(curve.interpolated_precision[r - 1], curve.interpolated_precision[r]);
  }
  return curve;
}

/// Interpolated AP over globally pooled proposals. Recall only moves at true
/// positives, each by 1 / #segments, so the area is a sum over those ranks.
inline double average_precision(const ProposalMap& predictions,
                                 const std::vector<GroundTruthRecord>& gt, double tiou_thresh) {
  const auto curve = precision_recall_curve(predictions, gt, tiou_thresh);
  double ap = 0.0;
  for (std::size_t r = 0; r < curve.true_positive.size(); ++r) {
    if (curve.true_positive[r]) ap += curve.interpolated_precision[r];
  }
  return ap / static_cast<double>(curve.ground_truth_count);
}

/// Recall with each video limited to its top-k proposals, averaged over the grid.
inline double average_recall_at_k(const ProposalMap& predictions,
                                  const std::vector<GroundTruthRecord>& gt, std::size_t k,
                                  const std::vector<double>& tiou_grid) {
  if (k == 0) throw std::invalid_argument("average_recall_at_k: k must be >= 1");
  if (tiou_grid.empty()) throw std::invalid_argument("average_recall_at_k: empty tIoU grid");
  for (double t : tiou_grid) detail::require_tiou_threshold(t);
  std::size_t total = 0;
  const auto index = detail::index_segments(gt, total);
  if (total == 0) throw std::invalid_argument("average recall: ground truth has no forged segments");

  std::vector<detail::PooledProposal> kept;
  for (const auto& [video_id, proposals] : predictions) {
    std::vector<detail::PooledProposal> mine;
    for (const auto& p : proposals) mine.push_back({&video_id, p});
    std::sort(mine.begin(), mine.end(), detail::rank_before);
    if (mine.size() > k) mine.resize(k);
    kept.insert(kept.end(), mine.begin(), mine.end());
  }
  std::sort(kept.begin(), kept.end(), detail::rank_before);

  double recall_sum = 0.0;
  for (double t : tiou_grid) {
    const auto hits = detail::match_ranked(kept, index, t);
    const auto matched = std::count(hits.begin(), hits.end(), true);
    recall_sum += static_cast<double>(matched) / static_cast<double>(total);
  }
  return recall_sum / static_cast<double>(tiou_grid.size());
}

enum class Track { ImageClassification = 1, VideoClassification = 2, TemporalLocalization = 3 };

using VideoScores = std::map<std::string, double>;
using Predictions = std::variant<VideoScores, ProposalMap>;

struct LocalizationEvalConfig {
  std::vector<double> tiou_grid = default_tiou_grid();
  std::size_t recall_top_k = 2;
};

struct EvalReport {
  Track track = Track::ImageClassification;
  std::optional<double> auc;
  std::map<double, double> ap_per_tiou;
  std::optional<double> ar_at_k;
  std::size_t recall_top_k = 2;
  std::chrono::nanoseconds runtime{0};
};

class IdMismatchError : public std::invalid_argument {
 public:
  IdMismatchError(std::vector<std::string> missing, std::vector<std::string> extra)
      : std::invalid_argument(describe(missing, extra)),
        missing_(std::move(missing)),
        extra_(std::move(extra)) {}

  const std::vector<std::string>& missing() const { return missing_; }
  const std::vector<std::string>& extra() const { return extra_; }

 private:
  static std::string describe(const std::vector<std::string>& missing,
                              const std::vector<std::string>& extra) {
    std::string msg = "prediction/ground-truth video ids differ;";
    auto list = [&msg](const char* name, const std::vector<std::string>& ids) {
      msg += std::string(" ") + name + " [";
      for (std::size_t i = 0; i < ids.size(); ++i) msg += (i ? "," : "") + ids[i];
      msg += "]";
    };
    list("missing", missing);
    list("extra", extra);
    return msg;
  }

  std::vector<std::string> missing_;
  std::vector<std::string> extra_;
};

namespace detail {

template <typename Map>
void check_ids(const Map& predictions, const std::vector<GroundTruthRecord>& gt,
               bool require_all) {
  std::map<std::string, bool> seen;
  for (const auto& record : gt) seen.emplace(record.video_id, false);
  std::vector<std::string> missing, extra;
  for (const auto& entry : predictions) {
    auto it = seen.find(entry.first);
    if (it == seen.end()) {
      extra.push_back(entry.first);
    } else {
      it->second = true;
    }
  }
  if (require_all) {
    for (const auto& [id, found] : seen) {
      if (!found) missing.push_back(id);
    }
  }
  if (!missing.empty() || !extra.empty()) throw IdMismatchError(std::move(missing), std::move(extra));
}

}  // namespace detail

/// Tracks 1-2 expect VideoScores covering exactly the ground-truth ids.
/// Track 3 expects a ProposalMap whose ids are a subset of the ground truth
/// (a video without proposals may be omitted).
inline EvalReport evaluate_track(Track track, const Predictions& predictions,
                                 const std::vector<GroundTruthRecord>& gt,
                                 const LocalizationEvalConfig& cfg = {}) {
  const auto started = std::chrono::steady_clock::now();
  EvalReport report;
  report.track = track;
  report.recall_top_k = cfg.recall_top_k;
  if (track == Track::TemporalLocalization) {
    const auto* proposals = std::get_if<ProposalMap>(&predictions);
    if (proposals == nullptr) throw std::invalid_argument("track 3 needs temporal proposals");
    detail::check_ids(*proposals, gt, false);
    for (double t : cfg.tiou_grid) report.ap_per_tiou[t] = average_precision(*proposals, gt, t);
    report.ar_at_k = average_recall_at_k(*proposals, gt, cfg.recall_top_k, cfg.tiou_grid);
  } else {
    const auto* scores = std::get_if<VideoScores>(&predictions);
    if (scores == nullptr) throw std::invalid_argument("tracks 1-2 need per-item scores");
    detail::check_ids(*scores, gt, true);
    std::vector<double> values;
    std::vector<BinaryLabel> labels;
    for (const auto& record : gt) {
      values.push_back(scores->at(record.video_id));
      labels.push_back(record.label);
    }
    report.auc = roc_auc(values, labels);
  }
  report.runtime = std::chrono::duration_cast<std::chrono::nanoseconds>(
      std::chrono::steady_clock::now() - started);
  return report;
}

}  // namespace forgeloc

#endif  // FORGELOC_METRICS_HPP_
