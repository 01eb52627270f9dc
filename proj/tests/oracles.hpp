// Test-only reference implementations. Each one takes a different route from
// the library code it checks: pair counting instead of curve integration,
// frame enumeration instead of interval arithmetic, label-array rewriting
// instead of run lists.

#ifndef FORGELOC_TESTS_ORACLES_HPP_
#define FORGELOC_TESTS_ORACLES_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "forgeloc/core.hpp"

namespace forgeloc::oracle {

/// P(random positive outscores random negative), ties counted 1/2.
inline double concordant_pair_auc(const std::vector<double>& scores, const std::vector<BinaryLabel>& labels) {
  double concordant = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != BinaryLabel::Fake) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] != BinaryLabel::Real) continue;
      ++pairs;
      if (scores[i] > scores[j]) {
        concordant += 1.0;
      } else if (scores[i] == scores[j]) {
        concordant += 0.5;
      }
    }
  }
  return concordant / static_cast<double>(pairs);
}

/// Counts member frames one by one.
inline double enumerated_tiou(const TemporalSegment& a, const TemporalSegment& b) {
  const FrameIndex lo = std::min(a.start, b.start);
  const FrameIndex hi = std::max(a.end, b.end);
  int inter = 0, uni = 0;
  for (FrameIndex f = lo; f < hi; ++f) {
    const bool in_a = f >= a.start && f < a.end;
    const bool in_b = f >= b.start && f < b.end;
    inter += in_a && in_b;
    uni += in_a || in_b;
  }
  return uni ? static_cast<double>(inter) / uni : 0.0;
}

/// ActivityNet's interpolated_prec_rec: pad with sentinels, take the running
/// max from the right, and sum precision times recall increments.
inline double activitynet_interpolated_ap(const std::vector<double>& precision,
                                          const std::vector<double>& recall) {
  std::vector<double> mprec{0.0};
  mprec.insert(mprec.end(), precision.begin(), precision.end());
  mprec.push_back(0.0);
  std::vector<double> mrec{0.0};
  mrec.insert(mrec.end(), recall.begin(), recall.end());
  mrec.push_back(1.0);
  for (std::size_t i = mprec.size() - 1; i-- > 0;) mprec[i] = std::max(mprec[i], mprec[i + 1]);
  double ap = 0.0;
  for (std::size_t i = 1; i < mrec.size(); ++i) {
    if (mrec[i] != mrec[i - 1]) ap += (mrec[i] - mrec[i - 1]) * mprec[i];
  }
  return ap;
}

struct OracleProposal {
  FrameIndex start;
  FrameIndex end;
  double confidence;
};

/// Literal execution of the third-place post-processing on a label array:
///  1. frames with equal labels form segments,
///  2. every frame of a real segment shorter than `min_real` becomes fake,
///  3. fake segments longer than `min_len` are candidates,
///  4. the `top_k` candidates with the highest mean score are kept.
/// Sampled frame i owns original frames [idx[i], idx[i+1]) (first from 0,
/// last to num_frames). Output sorted by start.
inline std::vector<OracleProposal> literal_rule_decoder(const std::vector<int>& labels,
                                                        const std::vector<double>& scores,
                                                        const std::vector<FrameIndex>& indices,
                                                        FrameIndex num_frames, int min_real, int min_len,
                                                        int top_k) {
  const int n = static_cast<int>(labels.size());
  std::vector<int> relabeled = labels;
  for (int i = 0; i < n; ++i) {
    if (labels[i] != 0) continue;
    int left = i, right = i;
    while (left > 0 && labels[left - 1] == 0) --left;
    while (right + 1 < n && labels[right + 1] == 0) ++right;
    if (right - left + 1 < min_real) relabeled[i] = 1;
  }

  struct Candidate {
    int first, last;
    double mean;
  };
  std::vector<Candidate> candidates;
  for (int i = 0; i < n;) {
    if (relabeled[i] != 1) {
      ++i;
      continue;
    }
    int j = i;
    double sum = 0.0;
    while (j < n && relabeled[j] == 1) sum += scores[j++];
    if (j - i > min_len) candidates.push_back({i, j, sum / (j - i)});
    i = j;
  }
  // Selection by repeated maximum; the earliest start wins ties.
  std::vector<Candidate> chosen;
  std::vector<bool> taken(candidates.size(), false);
  for (int round = 0; round < top_k; ++round) {
    int best = -1;
    for (int c = 0; c < static_cast<int>(candidates.size()); ++c) {
      if (taken[c]) continue;
      if (best < 0 || candidates[c].mean > candidates[best].mean) best = c;
    }
    if (best < 0) break;
    taken[best] = true;
    chosen.push_back(candidates[best]);
  }
  std::sort(chosen.begin(), chosen.end(), [](const Candidate& a, const Candidate& b) { return a.first < b.first; });

  std::vector<OracleProposal> out;
  for (const auto& c : chosen) {
    const FrameIndex start = c.first == 0 ? 0 : indices[c.first];
    const FrameIndex end = c.last < n ? indices[c.last] : num_frames;
    out.push_back({start, end, c.mean});
  }
  return out;
}

}  // namespace forgeloc::oracle

#endif  // FORGELOC_TESTS_ORACLES_HPP_
