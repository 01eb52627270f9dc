// Random ground-truth, score and proposal collections for round-trip tests.

#ifndef FORGELOC_TESTS_GENERATORS_HPP_
#define FORGELOC_TESTS_GENERATORS_HPP_

#include <random>
#include <string>
#include <vector>

#include "forgeloc/io.hpp"

namespace forgeloc::testing {

inline std::string random_id(std::mt19937_64& rng) {
  static const char kChars[] = "abcdefghijklmnopqrstuvwxyz0123456789_-./ \"\\\xc3\xa9";
  std::uniform_int_distribution<std::size_t> len(1, 12), pick(0, sizeof kChars - 2);
  std::string id;
  const std::size_t n = len(rng);
  while (id.size() < n) {
    const char c = kChars[pick(rng)];
    if (c == '\xc3' || c == '\xa9') {
      id += "\xc3\xa9";  // keep the UTF-8 pair intact
    } else {
      id += c;
    }
  }
  return id;
}

/// Either exact to 12 significant digits (what writers emit) or a raw double.
inline double random_unit_score(std::mt19937_64& rng, bool quantized) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double s = (rng() % 17 == 0) ? static_cast<double>(rng() % 2) : u(rng);
  return quantized ? round_significant(s) : s;
}

inline std::vector<GroundTruthRecord> random_ground_truth(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> videos(0, 6), frames(1, 5000), segs(0, 4);
  std::vector<GroundTruthRecord> out;
  std::set<std::string> ids;
  const int n = videos(rng);
  for (int v = 0; v < n; ++v) {
    GroundTruthRecord gt;
    do gt.video_id = random_id(rng);
    while (!ids.insert(gt.video_id).second);
    gt.num_frames = frames(rng);
    gt.label = rng() % 2 ? BinaryLabel::Fake : BinaryLabel::Real;
    if (is_fake(gt.label)) {
      FrameIndex cursor = 0;
      const int k = segs(rng);
      for (int s = 0; s < k && cursor < gt.num_frames; ++s) {
        const FrameIndex start = cursor + static_cast<FrameIndex>(rng() % 50);
        if (start >= gt.num_frames) break;
        const FrameIndex end = std::min(gt.num_frames, start + 1 + static_cast<FrameIndex>(rng() % 300));
        gt.segments.push_back({start, end});
        cursor = end;
      }
    }
    out.push_back(std::move(gt));
  }
  return out;
}

inline ScoreMap random_scores(std::mt19937_64& rng, bool quantized) {
  std::uniform_int_distribution<int> videos(0, 5), frames(1, 400), count(1, 40);
  ScoreMap out;
  const int n = videos(rng);
  for (int v = 0; v < n; ++v) {
    const std::string id = random_id(rng);
    FrameScoreSeries series(id, frames(rng));
    const int k = count(rng);
    for (int i = 0; i < k; ++i) {
      series.insert(static_cast<FrameIndex>(rng() % static_cast<std::uint64_t>(series.num_frames())),
                    random_unit_score(rng, quantized));
    }
    out.emplace(id, std::move(series));
  }
  return out;
}

/// Lists are non-empty and already in writer order.
inline ProposalMap random_proposals(std::mt19937_64& rng, bool quantized) {
  std::uniform_int_distribution<int> videos(0, 5), count(1, 8), start(0, 2000), len(1, 500);
  ProposalMap out;
  const int n = videos(rng);
  for (int v = 0; v < n; ++v) {
    auto& list = out[random_id(rng)];
    list.clear();
    const int k = count(rng);
    for (int i = 0; i < k; ++i) {
      const FrameIndex s = start(rng);
      list.push_back({{s, s + len(rng)}, random_unit_score(rng, quantized)});
    }
    sort_proposals_for_output(list);
  }
  return out;
}

}  // namespace forgeloc::testing

#endif  // FORGELOC_TESTS_GENERATORS_HPP_
