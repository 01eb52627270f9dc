// Per-frame scorers and frame-to-video score aggregation.

#ifndef FORGELOC_SCORING_HPP_
#define FORGELOC_SCORING_HPP_

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

#include "forgeloc/core.hpp"
#include "forgeloc/sampling.hpp"

namespace forgeloc {

/// Produces a fakeness score in [0, 1] for one frame of one video.
/// Implementations must be deterministic and safe for concurrent reads.
class FrameScorer {
 public:
  virtual ~FrameScorer() = default;
  virtual double score(std::string_view video_id, FrameIndex frame) const = 0;
};

struct SyntheticScorerConfig {
  double noise_sigma = 0.0;
  double flip_prob = 0.0;
  std::uint64_t seed = 0;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// FNV-1a over the id, then mixed with seed and frame so that every
// (seed, video, frame) triple owns an independent random stream.
inline std::uint64_t frame_stream_key(std::uint64_t seed, std::string_view video_id,
                                      FrameIndex frame) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : video_id) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return splitmix64(splitmix64(seed ^ h) ^ static_cast<std::uint64_t>(frame));
}

}  // namespace detail

/// Noisy stand-in for a trained frame classifier: 1 inside forged segments,
/// 0 elsewhere, optionally flipped, plus Gaussian noise, clamped to [0, 1].
inline double synth_score(const GroundTruthRecord& gt, FrameIndex frame,
                          const SyntheticScorerConfig& cfg) {
  if (frame < 0 || frame >= gt.num_frames) {
    throw std::out_of_range("synth_score: frame " + std::to_string(frame) + " outside video '" +
                            gt.video_id + "'");
  }
  if (cfg.noise_sigma < 0.0 || !(cfg.flip_prob >= 0.0 && cfg.flip_prob <= 1.0)) {
    throw std::invalid_argument("synth_score: need noise_sigma >= 0 and flip_prob in [0, 1]");
  }
  double base = gt.is_forged_frame(frame) ? 1.0 : 0.0;
  Rng rng(detail::frame_stream_key(cfg.seed, gt.video_id, frame));
  if (cfg.flip_prob > 0.0 && std::bernoulli_distribution(cfg.flip_prob)(rng)) base = 1.0 - base;
  if (cfg.noise_sigma > 0.0) base += std::normal_distribution<double>(0.0, cfg.noise_sigma)(rng);
  return std::clamp(base, 0.0, 1.0);
}

class SyntheticScorer final : public FrameScorer {
 public:
  SyntheticScorer(const std::vector<GroundTruthRecord>& truth, SyntheticScorerConfig cfg)
      : cfg_(cfg) {
    for (const auto& gt : truth) truth_.emplace(gt.video_id, gt);
  }

  double score(std::string_view video_id, FrameIndex frame) const override {
    auto it = truth_.find(std::string(video_id));
    if (it == truth_.end()) {
      throw std::out_of_range("SyntheticScorer: unknown video '" + std::string(video_id) + "'");
    }
    return synth_score(it->second, frame, cfg_);
  }

 private:
  std::map<std::string, GroundTruthRecord> truth_;
  SyntheticScorerConfig cfg_;
};

/// Serves precomputed scores, e.g. from a frame-score file.
class PrecomputedScorer final : public FrameScorer {
 public:
  explicit PrecomputedScorer(std::map<std::string, FrameScoreSeries> series)
      : series_(std::move(series)) {}

  double score(std::string_view video_id, FrameIndex frame) const override {
    auto it = series_.find(std::string(video_id));
    if (it == series_.end()) {
      throw std::out_of_range("PrecomputedScorer: unknown video '" + std::string(video_id) + "'");
    }
    auto entry = it->second.entries().find(frame);
    if (entry == it->second.entries().end()) {
      throw std::out_of_range("PrecomputedScorer: no score for frame " + std::to_string(frame) +
                              " of '" + std::string(video_id) + "'");
    }
    return entry->second;
  }

 private:
  std::map<std::string, FrameScoreSeries> series_;
};

/// Queries `scorer` at every distinct scheduled frame.
inline FrameScoreSeries score_schedule(const FrameScorer& scorer, const std::string& video_id,
                                       FrameIndex num_frames, const SampleSchedule& schedule) {
  FrameScoreSeries series(video_id, num_frames);
  for (FrameIndex idx : schedule.indices) {
    if (series.entries().count(idx) == 0) series.insert(idx, scorer.score(video_id, idx));
  }
  return series;
}

namespace detail {

inline void require_threshold(double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw std::invalid_argument("threshold must lie in (0, 1)");
  }
}

}  // namespace detail

/// Mean score of frames above `threshold`; mean of all frames if none are.
inline double video_score(const FrameScoreSeries& series, double threshold) {
  detail::require_threshold(threshold);
  if (series.empty()) {
    throw std::invalid_argument("video_score: empty series for '" + series.video_id() + "'");
  }
  double fake_sum = 0.0, all_sum = 0.0;
  std::size_t fake_count = 0;
  for (const auto& [frame, score] : series.entries()) {
    all_sum += score;
    if (score > threshold) {
      fake_sum += score;
      ++fake_count;
    }
  }
  return fake_count > 0 ? fake_sum / static_cast<double>(fake_count)
                        : all_sum / static_cast<double>(series.size());
}

/// Fake where score > threshold (strict), in sampled-frame order.
inline FrameLabelSequence threshold_labels(const FrameScoreSeries& series, double threshold) {
  detail::require_threshold(threshold);
  if (series.empty()) {
    throw std::invalid_argument("threshold_labels: empty series for '" + series.video_id() + "'");
  }
  FrameLabelSequence labels;
  labels.reserve(series.size());
  for (const auto& [frame, score] : series.entries()) {
    labels.emplace_back(score > threshold ? BinaryLabel::Fake : BinaryLabel::Real);
  }
  return labels;
}

}  // namespace forgeloc

#endif  // FORGELOC_SCORING_HPP_
