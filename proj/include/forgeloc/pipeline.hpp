// End-to-end runs: per-video decoding over a worker pool, and the synthetic
// simulator (ground truth -> sampled synthetic scores -> decode -> evaluate).

#ifndef FORGELOC_PIPELINE_HPP_
#define FORGELOC_PIPELINE_HPP_

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "forgeloc/core.hpp"
#include "forgeloc/io.hpp"
#include "forgeloc/localization.hpp"
#include "forgeloc/metrics.hpp"
#include "forgeloc/sampling.hpp"
#include "forgeloc/scoring.hpp"

namespace forgeloc {

/// Frames per video sampled at test time by the uniform-16 pipeline.
inline constexpr FrameIndex kStrideDecoderSamples = 16;
/// One frame every 10 for the sliding-window pipeline.
inline constexpr FrameIndex kSlidingDecoderStride = 10;
/// Frames per video fed to the rule-based decoder.
inline constexpr FrameIndex kRuleDecoderSamples = 30;
/// Frame-level fake threshold for the video score.
inline constexpr double kVideoScoreThreshold = 0.5;

inline std::size_t default_workers() {
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs fn(i) for i in [0, n) on up to `workers` threads. The first exception
/// thrown by any task is rethrown after all threads have joined.
inline void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn) {
  workers = std::max<std::size_t>(1, std::min(workers, n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

/// Decodes every series; the result is keyed (and therefore ordered) by
/// video id regardless of worker count. Videos with no proposals are omitted.
inline ProposalMap localize_all(const ScoreMap& scores, const DecoderConfig& cfg, std::size_t workers) {
  validate(cfg);
  std::vector<const FrameScoreSeries*> items;
  for (const auto& entry : scores) items.push_back(&entry.second);
  std::vector<std::vector<Proposal>> decoded(items.size());
  parallel_for(items.size(), workers, [&](std::size_t i) {
    decoded[i] = decode(*items[i], cfg, items[i]->num_frames());
  });
  ProposalMap out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (!decoded[i].empty()) out.emplace(items[i]->video_id(), std::move(decoded[i]));
  }
  return out;
}

/// Re-homes each series onto its ground-truth frame count.
inline ScoreMap align_to_ground_truth(const ScoreMap& scores, const std::vector<GroundTruthRecord>& gt) {
  std::map<std::string, FrameIndex> frames;
  for (const auto& record : gt) frames.emplace(record.video_id, record.num_frames);
  ScoreMap out;
  for (const auto& [id, series] : scores) {
    auto it = frames.find(id);
    const FrameIndex n = it == frames.end() ? series.num_frames() : it->second;
    out.emplace(id, FrameScoreSeries(id, n, series.entries()));
  }
  return out;
}

/// Per-video score via the fake-frame average rule.
inline VideoScores aggregate_video_scores(const ScoreMap& scores, double threshold = kVideoScoreThreshold) {
  VideoScores out;
  for (const auto& [id, series] : scores) out.emplace(id, video_score(series, threshold));
  return out;
}

/// The test-time schedule each decoding strategy expects.
inline SampleSchedule schedule_for(DecodeStrategy strategy, FrameIndex num_frames) {
  switch (strategy) {
    case DecodeStrategy::StrideSegments:
      return uniform_sample(num_frames, kStrideDecoderSamples);
    case DecodeStrategy::SlidingWindow:
      return stride_sample(num_frames, kSlidingDecoderStride);
    case DecodeStrategy::RuleBased:
      return uniform_sample(num_frames, kRuleDecoderSamples);
  }
  throw std::invalid_argument("schedule_for: unknown strategy");
}

struct SimulationConfig {
  std::size_t n_videos = 200;
  FrameIndex frames_per_video = 301;
  double sigma = 0.0;
  double flip_prob = 0.0;
  double fake_fraction = 0.5;
  std::uint64_t seed = 42;
  DecoderConfig decoder;
  LocalizationEvalConfig eval;
  std::size_t workers = 1;
};

inline void validate(const SimulationConfig& cfg) {
  if (cfg.n_videos == 0) throw std::invalid_argument("simulate: n_videos must be >= 1");
  if (cfg.frames_per_video <= 0) throw std::invalid_argument("simulate: frames_per_video must be >= 1");
  if (cfg.sigma < 0.0) throw std::invalid_argument("simulate: sigma must be >= 0");
  if (!(cfg.flip_prob >= 0.0 && cfg.flip_prob <= 1.0)) throw std::invalid_argument("simulate: flip_prob must lie in [0, 1]");
  if (!(cfg.fake_fraction >= 0.0 && cfg.fake_fraction <= 1.0)) {
    throw std::invalid_argument("simulate: fake_fraction must lie in [0, 1]");
  }
  if (cfg.workers == 0) throw std::invalid_argument("simulate: workers must be >= 1");
  validate(cfg.decoder);
}

/// Shortest fake run and real gap (in sampled frames) that a decoder can
/// recover exactly from noiseless scores.
struct RunLimits {
  std::size_t min_len = 1;
  std::size_t min_gap = 1;
  /// Leading/trailing real runs must be empty or at least this long.
  std::size_t min_edge_gap = 1;
};

inline RunLimits run_limits(const DecoderConfig& cfg) {
  switch (cfg.strategy) {
    case DecodeStrategy::StrideSegments:
      return {};
    case DecodeStrategy::SlidingWindow:
      return {cfg.window_len, std::max<std::size_t>(1, cfg.window_len - 1), 1};
    case DecodeStrategy::RuleBased:
      return {cfg.min_proposal_len + 1, std::max<std::size_t>(1, cfg.min_real_run),
              std::max<std::size_t>(1, cfg.min_real_run)};
  }
  return {};
}

/// Frames covered by sampled run [first, last) under the strategy's decoder.
inline TemporalSegment decoder_footprint(const DecoderConfig& cfg, const std::vector<FrameIndex>& indices,
                                         std::size_t first, std::size_t last, FrameIndex num_frames,
                                         FrameIndex stride) {
  if (cfg.strategy == DecodeStrategy::StrideSegments) {
    return {std::max<FrameIndex>(0, stride_footprint(indices[first], stride).start),
            std::min(num_frames, stride_footprint(indices[last - 1], stride).end)};
  }
  return run_extent(indices, first, last, num_frames);
}

/// Draws one or two forged runs on the sampling grid and maps them to frames.
inline GroundTruthRecord simulate_ground_truth(const std::string& video_id, FrameIndex num_frames,
                                               bool fake, const DecoderConfig& cfg, Rng& rng) {
  GroundTruthRecord gt{video_id, num_frames, BinaryLabel::Real, {}};
  if (!fake) return gt;

  const auto schedule = schedule_for(cfg.strategy, num_frames);
  std::vector<FrameIndex> indices = schedule.indices;
  indices.erase(std::unique(indices.begin(), indices.end()), indices.end());
  const std::size_t m = indices.size();
  const RunLimits limits = run_limits(cfg);
  if (limits.min_len > m) return gt;

  std::size_t runs = std::uniform_int_distribution<int>(0, 1)(rng) == 0 ? 1 : 2;
  if (runs == 2 && 2 * limits.min_len + limits.min_gap > m) runs = 1;

  // Slots: lead gap, len_1, [gap, len_2], trail gap.
  std::vector<std::size_t> slots(2 * runs + 1, 0);
  for (std::size_t r = 0; r < runs; ++r) slots[2 * r + 1] = limits.min_len;
  for (std::size_t r = 1; r < runs; ++r) slots[2 * r] = limits.min_gap;
  std::size_t used = 0;
  for (auto s : slots) used += s;
  std::uniform_int_distribution<std::size_t> pick(0, slots.size() - 1);
  for (std::size_t spare = m - used; spare > 0; --spare) ++slots[pick(rng)];
  // Short edge gaps would be absorbed by the decoder; give them to the run.
  if (slots.front() > 0 && slots.front() < limits.min_edge_gap) {
    slots[1] += slots.front();
    slots.front() = 0;
  }
  if (slots.back() > 0 && slots.back() < limits.min_edge_gap) {
    slots[slots.size() - 2] += slots.back();
    slots.back() = 0;
  }

  const FrameIndex stride = cfg.stride > 0 ? cfg.stride : infer_stride(indices, num_frames);
  gt.label = BinaryLabel::Fake;
  std::size_t cursor = slots.front();
  for (std::size_t r = 0; r < runs; ++r) {
    const std::size_t len = slots[2 * r + 1];
    gt.segments.push_back(decoder_footprint(cfg, indices, cursor, cursor + len, num_frames, stride));
    cursor += len + slots[2 * r + 2];
  }
  return gt;
}

struct SimulationResult {
  std::vector<GroundTruthRecord> ground_truth;
  ScoreMap scores;
  ProposalMap proposals;
  EvalReport report;
};

/// Fully determined by cfg (including its seed); worker count never changes the output.
inline SimulationResult simulate(const SimulationConfig& cfg) {
  validate(cfg);
  const auto started = std::chrono::steady_clock::now();
  SimulationResult result;
  Rng rng(cfg.seed);
  std::bernoulli_distribution is_fake_video(cfg.fake_fraction);
  char name[32];
  for (std::size_t v = 0; v < cfg.n_videos; ++v) {
    std::snprintf(name, sizeof name, "sim%05zu", v);
    // The first video is always forged so the localization metrics are defined.
    const bool fake = v == 0 || is_fake_video(rng);
    result.ground_truth.push_back(simulate_ground_truth(name, cfg.frames_per_video, fake, cfg.decoder, rng));
  }

  const SyntheticScorer scorer(result.ground_truth,
                               {cfg.sigma, cfg.flip_prob, detail::splitmix64(cfg.seed ^ 0x5c0e5ULL)});
  std::vector<FrameScoreSeries> series(result.ground_truth.size(),
                                       FrameScoreSeries("pending", 1));
  parallel_for(series.size(), cfg.workers, [&](std::size_t i) {
    const auto& gt = result.ground_truth[i];
    series[i] = score_schedule(scorer, gt.video_id, gt.num_frames,
                               schedule_for(cfg.decoder.strategy, gt.num_frames));
  });
  for (auto& s : series) result.scores.emplace(s.video_id(), std::move(s));

  result.proposals = localize_all(result.scores, cfg.decoder, cfg.workers);
  result.report = evaluate_track(Track::TemporalLocalization, result.proposals, result.ground_truth, cfg.eval);

  bool has_real = false, has_fake = false;
  for (const auto& gt : result.ground_truth) (is_fake(gt.label) ? has_fake : has_real) = true;
  if (has_real && has_fake) {
    result.report.auc = evaluate_track(Track::VideoClassification, aggregate_video_scores(result.scores),
                                       result.ground_truth)
                            .auc;
  }
  result.report.runtime = std::chrono::duration_cast<std::chrono::nanoseconds>(
      std::chrono::steady_clock::now() - started);
  return result;
}

}  // namespace forgeloc

#endif  // FORGELOC_PIPELINE_HPP_
