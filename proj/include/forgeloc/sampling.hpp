// Frame-index schedulers: test-time uniform/stride sampling and the
// training-time window samplers for real and forged videos.

#ifndef FORGELOC_SAMPLING_HPP_
#define FORGELOC_SAMPLING_HPP_

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include "forgeloc/core.hpp"

namespace forgeloc {

using Rng = std::mt19937_64;

struct SampleSchedule {
  std::vector<FrameIndex> indices;
  bool padded = false;

  friend bool operator==(const SampleSchedule&, const SampleSchedule&) = default;
};

namespace detail {

inline void require_positive(FrameIndex value, const char* what) {
  if (value <= 0) throw std::invalid_argument(std::string(what) + " must be positive");
}

// Appends `count` consecutive frames starting at `first`, clamped to `last`
// (the final available frame). Returns true if any index was repeated.
inline bool append_run(std::vector<FrameIndex>& out, FrameIndex first, FrameIndex last,
                       FrameIndex count) {
  bool padded = false;
  for (FrameIndex k = 0; k < count; ++k) {
    FrameIndex idx = first + k;
    if (idx > last) {
      idx = last;
      padded = true;
    }
    out.push_back(idx);
  }
  return padded;
}

inline FrameIndex uniform_start(Rng& rng, FrameIndex lo, FrameIndex hi) {
  return std::uniform_int_distribution<FrameIndex>(lo, hi)(rng);
}

}  // namespace detail

/// Endpoint-inclusive equal spacing: index_j = round(j * (n - 1) / (count - 1)).
/// Short videos are returned whole and padded with their last frame.
inline SampleSchedule uniform_sample(FrameIndex num_frames, FrameIndex count) {
  detail::require_positive(num_frames, "uniform_sample: num_frames");
  detail::require_positive(count, "uniform_sample: count");
  SampleSchedule out;
  out.indices.reserve(static_cast<std::size_t>(count));
  if (num_frames < count) {
    out.padded = detail::append_run(out.indices, 0, num_frames - 1, count);
    return out;
  }
  if (count == 1) {
    out.indices.push_back(0);
    return out;
  }
  const FrameIndex span = num_frames - 1;
  const FrameIndex gaps = count - 1;
  for (FrameIndex j = 0; j < count; ++j) {
    // Round half up in integer arithmetic.
    out.indices.push_back((2 * j * span + gaps) / (2 * gaps));
  }
  return out;
}

inline SampleSchedule stride_sample(FrameIndex num_frames, FrameIndex stride) {
  detail::require_positive(num_frames, "stride_sample: num_frames");
  detail::require_positive(stride, "stride_sample: stride");
  SampleSchedule out;
  for (FrameIndex idx = 0; idx < num_frames; idx += stride) out.indices.push_back(idx);
  return out;
}

/// A random window of consecutive frames from a real video.
inline SampleSchedule train_sample_real(FrameIndex num_frames, FrameIndex window, Rng& rng) {
  detail::require_positive(num_frames, "train_sample_real: num_frames");
  detail::require_positive(window, "train_sample_real: window");
  SampleSchedule out;
  out.indices.reserve(static_cast<std::size_t>(window));
  const FrameIndex start =
      num_frames >= window ? detail::uniform_start(rng, 0, num_frames - window) : 0;
  out.padded = detail::append_run(out.indices, start, num_frames - 1, window);
  return out;
}

struct ForgerySample {
  SampleSchedule schedule;
  FrameLabelSequence labels;
  /// Set when one class had no frames at all and the other filled the window.
  bool degenerate = false;
};

/// Fake-frame share drawn when the caller does not fix alpha.
inline double draw_alpha(Rng& rng) { return std::uniform_real_distribution<double>(0.2, 0.8)(rng); }

/// Draws round(alpha * window) fake frames as one run inside a randomly
/// chosen forged segment and the rest as one run inside a randomly chosen
/// real region. A side that runs out of frames repeats its last frame.
inline ForgerySample train_sample_forgery(const GroundTruthRecord& gt, FrameIndex window,
                                          double alpha, Rng& rng) {
  validate(gt);
  detail::require_positive(window, "train_sample_forgery: window");
  if (gt.label != BinaryLabel::Fake || gt.segments.empty()) {
    throw std::invalid_argument("train_sample_forgery: needs a fake video with forged segments");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("train_sample_forgery: alpha must lie in (0, 1)");
  }

  std::vector<TemporalSegment> real_regions;
  FrameIndex cursor = 0;
  for (const auto& seg : gt.segments) {
    if (seg.start > cursor) real_regions.push_back({cursor, seg.start});
    cursor = seg.end;
  }
  if (cursor < gt.num_frames) real_regions.push_back({cursor, gt.num_frames});

  FrameIndex fake_count = static_cast<FrameIndex>(std::lround(alpha * static_cast<double>(window)));
  FrameIndex real_count = window - fake_count;

  ForgerySample out;
  if (real_regions.empty() && real_count > 0) {
    fake_count = window;
    real_count = 0;
    out.degenerate = true;
  }

  std::vector<std::pair<FrameIndex, BinaryLabel>> drawn;
  drawn.reserve(static_cast<std::size_t>(window));
  auto draw_run = [&](const std::vector<TemporalSegment>& pool, FrameIndex count, BinaryLabel label) {
    if (count == 0) return;
    const auto& region = pool[static_cast<std::size_t>(
        detail::uniform_start(rng, 0, static_cast<FrameIndex>(pool.size()) - 1))];
    const FrameIndex start =
        region.length() >= count ? detail::uniform_start(rng, region.start, region.end - count)
                                 : region.start;
    std::vector<FrameIndex> run;
    out.schedule.padded |= detail::append_run(run, start, region.end - 1, count);
    for (FrameIndex idx : run) drawn.emplace_back(idx, label);
  };
  draw_run(gt.segments, fake_count, BinaryLabel::Fake);
  draw_run(real_regions, real_count, BinaryLabel::Real);
  out.schedule.padded |= out.degenerate;

  std::stable_sort(drawn.begin(), drawn.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  for (const auto& [idx, label] : drawn) {
    out.schedule.indices.push_back(idx);
    out.labels.emplace_back(label);
  }
  return out;
}

}  // namespace forgeloc

#endif  // FORGELOC_SAMPLING_HPP_
