// Domain types shared by every forgeloc module.
//
// All temporal quantities are integer frame indices; segments are half-open
// [start, end) so disjointness and union lengths are exact.

#ifndef FORGELOC_CORE_HPP_
#define FORGELOC_CORE_HPP_

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace forgeloc {

using FrameIndex = std::int64_t;

/// Fake is the positive class.
enum class BinaryLabel : std::uint8_t { Real = 0, Fake = 1 };

inline constexpr bool is_fake(BinaryLabel label) { return label == BinaryLabel::Fake; }

inline constexpr BinaryLabel flip(BinaryLabel label) {
  return label == BinaryLabel::Fake ? BinaryLabel::Real : BinaryLabel::Fake;
}

struct TemporalSegment {
  FrameIndex start = 0;
  FrameIndex end = 0;

  constexpr FrameIndex length() const { return end > start ? end - start : 0; }
  constexpr bool valid() const { return start < end; }
  constexpr bool contains(FrameIndex frame) const { return frame >= start && frame < end; }

  friend constexpr bool operator==(const TemporalSegment&, const TemporalSegment&) = default;
};

/// Intersects `seg` with [0, num_frames); std::nullopt when nothing is left.
inline std::optional<TemporalSegment> clip_segment(TemporalSegment seg, FrameIndex num_frames) {
  if (num_frames <= 0) {
    throw std::invalid_argument("clip_segment: num_frames must be positive");
  }
  TemporalSegment clipped{std::max<FrameIndex>(seg.start, 0), std::min(seg.end, num_frames)};
  if (!clipped.valid()) return std::nullopt;
  return clipped;
}

struct Proposal {
  TemporalSegment segment;
  double confidence = 0.0;

  friend bool operator==(const Proposal&, const Proposal&) = default;
};

inline void validate_proposal(const Proposal& p) {
  if (!p.segment.valid() || p.segment.start < 0) {
    throw std::invalid_argument("proposal segment must satisfy 0 <= start < end");
  }
  if (!(p.confidence >= 0.0 && p.confidence <= 1.0)) {
    throw std::invalid_argument("proposal confidence must lie in [0, 1]");
  }
}

/// Sparse per-video map from sampled frame index to fakeness score.
class FrameScoreSeries {
 public:
  FrameScoreSeries(std::string video_id, FrameIndex num_frames,
                   std::map<FrameIndex, double> entries = {})
      : video_id_(std::move(video_id)), num_frames_(num_frames), entries_(std::move(entries)) {
    if (num_frames_ <= 0) {
      throw std::invalid_argument("FrameScoreSeries '" + video_id_ + "': num_frames must be positive");
    }
    for (const auto& [frame, score] : entries_) check_entry(frame, score);
  }

  const std::string& video_id() const { return video_id_; }
  FrameIndex num_frames() const { return num_frames_; }
  const std::map<FrameIndex, double>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  std::vector<FrameIndex> indices() const {
    std::vector<FrameIndex> out;
    out.reserve(entries_.size());
    for (const auto& entry : entries_) out.push_back(entry.first);
    return out;
  }

  std::vector<double> scores() const {
    std::vector<double> out;
    out.reserve(entries_.size());
    for (const auto& entry : entries_) out.push_back(entry.second);
    return out;
  }

  /// Returns false if the frame was already present.
  bool insert(FrameIndex frame, double score) {
    check_entry(frame, score);
    return entries_.emplace(frame, score).second;
  }

  friend bool operator==(const FrameScoreSeries&, const FrameScoreSeries&) = default;

 private:
  void check_entry(FrameIndex frame, double score) const {
    if (frame < 0 || frame >= num_frames_) {
      throw std::invalid_argument("FrameScoreSeries '" + video_id_ + "': frame " +
                                  std::to_string(frame) + " outside [0, " +
                                  std::to_string(num_frames_) + ")");
    }
    if (!(score >= 0.0 && score <= 1.0)) {
      throw std::invalid_argument("FrameScoreSeries '" + video_id_ + "': score outside [0, 1]");
    }
  }

  std::string video_id_;
  FrameIndex num_frames_;
  std::map<FrameIndex, double> entries_;
};

struct GroundTruthRecord {
  std::string video_id;
  FrameIndex num_frames = 0;
  BinaryLabel label = BinaryLabel::Real;
  std::vector<TemporalSegment> segments;

  bool is_forged_frame(FrameIndex frame) const {
    return std::any_of(segments.begin(), segments.end(),
                       [frame](const TemporalSegment& s) { return s.contains(frame); });
  }

  friend bool operator==(const GroundTruthRecord&, const GroundTruthRecord&) = default;
};

/// Throws std::invalid_argument naming the first violated invariant.
inline void validate(const GroundTruthRecord& gt) {
  const std::string where = "ground truth '" + gt.video_id + "': ";
  if (gt.video_id.empty()) throw std::invalid_argument("ground truth: empty video_id");
  if (gt.num_frames <= 0) throw std::invalid_argument(where + "num_frames must be positive");
  if (gt.label == BinaryLabel::Real && !gt.segments.empty()) {
    throw std::invalid_argument(where + "real video cannot have forged segments");
  }
  for (std::size_t i = 0; i < gt.segments.size(); ++i) {
    const auto& s = gt.segments[i];
    if (!s.valid()) throw std::invalid_argument(where + "segment start must be < end");
    if (s.start < 0 || s.end > gt.num_frames) {
      throw std::invalid_argument(where + "segment outside [0, num_frames)");
    }
    if (i > 0 && gt.segments[i - 1].end > s.start) {
      throw std::invalid_argument(where + "segments must be sorted and pairwise disjoint");
    }
  }
}

/// Per sampled frame; std::nullopt marks a frame the model did not label.
using FrameLabel = std::optional<BinaryLabel>;
using FrameLabelSequence = std::vector<FrameLabel>;

using ProposalMap = std::map<std::string, std::vector<Proposal>>;

}  // namespace forgeloc

#endif  // FORGELOC_CORE_HPP_
