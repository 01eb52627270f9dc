// Decoders from per-frame scores/labels to temporal proposals, plus
// temporal NMS and forward-fill label propagation.
//
// Three decoders are provided:
//   stride_segments          each fake sampled frame n claims the window
//                            [n - floor(k/2), n + ceil(k/2)) for stride k.
//   sliding_window_segments  windows of consecutive sampled frames whose mean
//                            score clears the threshold are merged.
//   rule_segments            equal-label runs, short real runs absorbed into
//                            fake ones, long fake runs ranked and kept.
// multi_threshold_decode runs rule_segments at several thresholds and fuses
// the results with temporal_nms.

#ifndef FORGELOC_LOCALIZATION_HPP_
#define FORGELOC_LOCALIZATION_HPP_

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "forgeloc/core.hpp"
#include "forgeloc/metrics.hpp"
#include "forgeloc/scoring.hpp"

namespace forgeloc {

enum class DecodeStrategy { StrideSegments, SlidingWindow, RuleBased };

struct DecoderConfig {
  DecodeStrategy strategy = DecodeStrategy::RuleBased;
  /// Rule-based decoding uses all of them; the other strategies use the first.
  std::vector<double> thresholds = {0.4, 0.5, 0.6};
  /// Original-frame spacing of the samples; 0 infers it from the series.
  FrameIndex stride = 0;
  /// In sampled frames.
  std::size_t window_len = 2;
  std::size_t min_real_run = 4;
  std::size_t min_proposal_len = 10;
  std::size_t max_proposals = 4;
  double nms_tiou = 0.5;
};

inline void validate(const DecoderConfig& cfg) {
  if (cfg.thresholds.empty()) throw std::invalid_argument("decoder: at least one threshold required");
  for (double t : cfg.thresholds) {
    if (!(t > 0.0 && t < 1.0)) throw std::invalid_argument("decoder: thresholds must lie in (0, 1)");
  }
  if (!std::is_sorted(cfg.thresholds.begin(), cfg.thresholds.end())) {
    throw std::invalid_argument("decoder: thresholds must be sorted ascending");
  }
  if (cfg.stride < 0) throw std::invalid_argument("decoder: stride must be positive (or 0 to infer)");
  if (cfg.window_len == 0) throw std::invalid_argument("decoder: window length must be >= 1");
  if (cfg.max_proposals == 0) throw std::invalid_argument("decoder: top-k must be >= 1");
  if (!(cfg.nms_tiou > 0.0 && cfg.nms_tiou <= 1.0)) {
    throw std::invalid_argument("decoder: NMS tIoU must lie in (0, 1]");
  }
}

/// Original frames owned by sampled frame i: from its index up to the next
/// sample. The first sample also owns everything before it and the last
/// everything after it, so the extents tile [0, num_frames).
inline TemporalSegment sample_extent(const std::vector<FrameIndex>& indices, std::size_t i,
                                     FrameIndex num_frames) {
  const FrameIndex start = i == 0 ? 0 : indices[i];
  const FrameIndex end = i + 1 < indices.size() ? indices[i + 1] : num_frames;
  return {start, end};
}

/// Extent of sampled frames [first, last).
inline TemporalSegment run_extent(const std::vector<FrameIndex>& indices, std::size_t first,
                                  std::size_t last, FrameIndex num_frames) {
  return {sample_extent(indices, first, num_frames).start,
          sample_extent(indices, last - 1, num_frames).end};
}

/// Unclipped window a fake frame claims under the stride rule.
inline TemporalSegment stride_footprint(FrameIndex frame, FrameIndex stride) {
  return {frame - stride / 2, frame + (stride + 1) / 2};
}

/// Mean sample spacing rounded up, so footprints of neighbouring uniform
/// samples always touch; a single sample spans the whole video.
inline FrameIndex infer_stride(const std::vector<FrameIndex>& indices, FrameIndex num_frames) {
  if (indices.size() < 2) return num_frames;
  const FrameIndex span = indices.back() - indices.front();
  const auto gaps = static_cast<FrameIndex>(indices.size() - 1);
  return std::max<FrameIndex>(1, (span + gaps - 1) / gaps);
}

inline FrameIndex infer_stride(const FrameScoreSeries& series) {
  return infer_stride(series.indices(), series.num_frames());
}

inline std::vector<Proposal> stride_segments(const FrameScoreSeries& series, double threshold,
                                             FrameIndex stride, FrameIndex num_frames) {
  detail::require_threshold(threshold);
  if (stride <= 0) throw std::invalid_argument("stride_segments: stride must be positive");
  std::vector<Proposal> out;
  double score_sum = 0.0;
  std::size_t contributors = 0;
  auto close = [&] {
    if (contributors > 0) out.back().confidence = score_sum / static_cast<double>(contributors);
  };
  for (const auto& [frame, score] : series.entries()) {
    if (!(score > threshold)) continue;
    const auto clipped = clip_segment(stride_footprint(frame, stride), num_frames);
    if (!clipped) continue;
    if (!out.empty() && clipped->start <= out.back().segment.end) {
      out.back().segment.end = std::max(out.back().segment.end, clipped->end);
    } else {
      close();
      out.push_back({*clipped, 0.0});
      score_sum = 0.0;
      contributors = 0;
    }
    score_sum += score;
    ++contributors;
  }
  close();
  return out;
}

inline std::vector<Proposal> sliding_window_segments(const FrameScoreSeries& series,
                                                     double threshold, std::size_t window_len,
                                                     FrameIndex num_frames) {
  detail::require_threshold(threshold);
  if (window_len == 0) throw std::invalid_argument("sliding_window_segments: window_len must be >= 1");
  std::vector<Proposal> out;
  if (series.empty()) return out;
  const auto indices = series.indices();
  const auto scores = series.scores();
  const std::size_t w = std::min(window_len, scores.size());

  bool open = false;
  std::size_t run_first = 0, run_last = 0;
  double run_conf = 0.0;
  auto flush = [&] {
    if (!open) return;
    if (auto seg = clip_segment(run_extent(indices, run_first, run_last, num_frames), num_frames)) {
      out.push_back({*seg, run_conf});
    }
    open = false;
  };

  // Summed afresh per window: a running sum drifts and can push a mean past 1.
  for (std::size_t i = 0; i + w <= scores.size(); ++i) {
    double window_sum = 0.0;
    for (std::size_t k = i; k < i + w; ++k) window_sum += scores[k];
    const double mean = window_sum / static_cast<double>(w);
    if (!(mean > threshold)) continue;
    if (open && i <= run_last) {
      run_last = i + w;
      run_conf = std::max(run_conf, mean);
    } else {
      flush();
      open = true;
      run_first = i;
      run_last = i + w;
      run_conf = mean;
    }
  }
  flush();
  return out;
}

/// Runs of equal label over sampled frames, as [first, last) pairs.
struct LabelRun {
  BinaryLabel label;
  std::size_t first;
  std::size_t last;

  std::size_t length() const { return last - first; }
};

inline std::vector<LabelRun> label_runs(const std::vector<BinaryLabel>& labels) {
  std::vector<LabelRun> runs;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (!runs.empty() && runs.back().label == labels[i]) {
      runs.back().last = i + 1;
    } else {
      runs.push_back({labels[i], i, i + 1});
    }
  }
  return runs;
}

namespace detail {

inline std::vector<BinaryLabel> require_known(const FrameLabelSequence& labels) {
  std::vector<BinaryLabel> known;
  known.reserve(labels.size());
  for (const auto& label : labels) {
    if (!label) throw std::invalid_argument("decoder: unknown frame label; forward-fill first");
    known.push_back(*label);
  }
  return known;
}

inline void sort_by_start(std::vector<Proposal>& proposals) {
  std::sort(proposals.begin(), proposals.end(), [](const Proposal& a, const Proposal& b) {
    if (a.segment.start != b.segment.start) return a.segment.start < b.segment.start;
    return a.segment.end < b.segment.end;
  });
}

}  // namespace detail

/// Output is sorted by start; confidence is the mean frame score of the run.
inline std::vector<Proposal> rule_segments(const FrameLabelSequence& labels,
                                           const FrameScoreSeries& scores,
                                           const DecoderConfig& cfg, FrameIndex num_frames) {
  auto known = detail::require_known(labels);
  if (known.size() != scores.size()) {
    throw std::invalid_argument("rule_segments: label count differs from scored frame count");
  }

  for (const auto& run : label_runs(known)) {
    if (run.label == BinaryLabel::Real && run.length() < cfg.min_real_run) {
      std::fill(known.begin() + static_cast<std::ptrdiff_t>(run.first),
                known.begin() + static_cast<std::ptrdiff_t>(run.last), BinaryLabel::Fake);
    }
  }

  const auto indices = scores.indices();
  const auto values = scores.scores();
  struct Candidate {
    LabelRun run;
    double mean;
  };
  std::vector<Candidate> candidates;
  for (const auto& run : label_runs(known)) {
    if (run.label != BinaryLabel::Fake || run.length() <= cfg.min_proposal_len) continue;
    double sum = 0.0;
    for (std::size_t i = run.first; i < run.last; ++i) sum += values[i];
    candidates.push_back({run, sum / static_cast<double>(run.length())});
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Candidate& a, const Candidate& b) { return a.mean > b.mean; });
  if (candidates.size() > cfg.max_proposals) candidates.resize(cfg.max_proposals);

  std::vector<Proposal> out;
  for (const auto& c : candidates) {
    if (auto seg = clip_segment(run_extent(indices, c.run.first, c.run.last, num_frames), num_frames)) {
      out.push_back({*seg, c.mean});
    }
  }
  detail::sort_by_start(out);
  return out;
}

/// Greedy NMS. Ranking is by confidence, then earlier start, then shorter
/// length; a proposal is dropped when its tIoU with a kept one exceeds
/// `tiou_thresh`. Survivors are returned in ranking order.
inline std::vector<Proposal> temporal_nms(std::vector<Proposal> proposals, double tiou_thresh) {
  if (!(tiou_thresh > 0.0 && tiou_thresh <= 1.0)) {
    throw std::invalid_argument("temporal_nms: threshold must lie in (0, 1]");
  }
  std::sort(proposals.begin(), proposals.end(), [](const Proposal& a, const Proposal& b) {
    if (a.confidence != b.confidence) return a.confidence > b.confidence;
    if (a.segment.start != b.segment.start) return a.segment.start < b.segment.start;
    return a.segment.length() < b.segment.length();
  });
  std::vector<Proposal> kept;
  for (const auto& candidate : proposals) {
    const bool suppressed = std::any_of(kept.begin(), kept.end(), [&](const Proposal& k) {
      return tiou(k.segment, candidate.segment) > tiou_thresh;
    });
    if (!suppressed) kept.push_back(candidate);
  }
  return kept;
}

inline std::vector<Proposal> multi_threshold_decode(const FrameScoreSeries& series,
                                                    const DecoderConfig& cfg,
                                                    FrameIndex num_frames) {
  validate(cfg);
  if (series.empty()) return {};
  std::vector<Proposal> pooled;
  for (double t : cfg.thresholds) {
    auto found = rule_segments(threshold_labels(series, t), series, cfg, num_frames);
    pooled.insert(pooled.end(), found.begin(), found.end());
  }
  auto kept = temporal_nms(std::move(pooled), cfg.nms_tiou);
  detail::sort_by_start(kept);
  return kept;
}

/// Dispatches on cfg.strategy; the single-threshold decoders use cfg.thresholds.front().
inline std::vector<Proposal> decode(const FrameScoreSeries& series, const DecoderConfig& cfg,
                                    FrameIndex num_frames) {
  validate(cfg);
  switch (cfg.strategy) {
    case DecodeStrategy::StrideSegments:
      return stride_segments(series, cfg.thresholds.front(),
                             cfg.stride > 0 ? cfg.stride : infer_stride(series), num_frames);
    case DecodeStrategy::SlidingWindow:
      return sliding_window_segments(series, cfg.thresholds.front(), cfg.window_len, num_frames);
    case DecodeStrategy::RuleBased:
      return multi_threshold_decode(series, cfg, num_frames);
  }
  throw std::invalid_argument("decode: unknown strategy");
}

/// Unknown labels take the nearest known label before them; a leading gap
/// takes the first known label.
inline FrameLabelSequence forward_fill_labels(const FrameLabelSequence& partial) {
  auto first_known = std::find_if(partial.begin(), partial.end(),
                                  [](const FrameLabel& l) { return l.has_value(); });
  if (first_known == partial.end()) {
    throw std::invalid_argument("forward_fill_labels: no known label to propagate");
  }
  FrameLabelSequence filled(partial.size());
  BinaryLabel last = **first_known;
  for (std::size_t i = 0; i < partial.size(); ++i) {
    if (partial[i]) last = *partial[i];
    filled[i] = last;
  }
  return filled;
}

}  // namespace forgeloc

#endif  // FORGELOC_LOCALIZATION_HPP_
