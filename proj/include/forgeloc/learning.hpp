// Toy-scale metric-learning machinery with hand-derived gradients:
//   - a FIFO queue of past forgery features; each fake in the batch is pulled
//     toward its most similar queue entry,
//   - a learnable positive (real) center that all real features are pulled to,
//   - pairwise patch consistency (cosine similarity matrix),
//   - temporal similarity targets and their soft cross-entropy loss.
//
// Queue entries are constants: gradients flow only into batch features and
// the center.

#ifndef FORGELOC_LEARNING_HPP_
#define FORGELOC_LEARNING_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <deque>
#include <functional>
#include <ostream>
#include <random>
#include <stdexcept>
#include <vector>

#include "forgeloc/core.hpp"
#include "forgeloc/sampling.hpp"

namespace forgeloc {

using Feature = std::vector<double>;

inline double dot(const Feature& u, const Feature& v) {
  if (u.size() != v.size()) throw std::invalid_argument("feature dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
  return s;
}

inline double norm(const Feature& u) { return std::sqrt(dot(u, u)); }

inline Feature normalized(Feature u) {
  const double n = norm(u);
  if (!(n > 0.0) || !std::isfinite(n)) throw std::invalid_argument("cannot normalize a zero feature");
  for (double& x : u) x /= n;
  return u;
}

inline bool is_unit(const Feature& u, double tol = 1e-9) { return std::abs(norm(u) - 1.0) <= tol; }

inline double cosine_similarity(const Feature& u, const Feature& v) {
  const double nu = norm(u), nv = norm(v);
  if (nu == 0.0 || nv == 0.0) throw std::invalid_argument("cosine_similarity: zero vector");
  return dot(u, v) / (nu * nv);
}

/// d cos(u, v) / du = v / (|u||v|) - cos(u, v) * u / |u|^2.
inline Feature cosine_grad(const Feature& u, const Feature& v) {
  const double nu = norm(u), nv = norm(v);
  if (nu == 0.0 || nv == 0.0) throw std::invalid_argument("cosine_grad: zero vector");
  const double c = dot(u, v) / (nu * nv);
  Feature g(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) g[i] = v[i] / (nu * nv) - c * u[i] / (nu * nu);
  return g;
}

class FeatureQueue {
 public:
  explicit FeatureQueue(std::size_t capacity = 64) : capacity_(capacity) {
    if (capacity_ == 0) throw std::invalid_argument("FeatureQueue: capacity must be >= 1");
  }

  /// Enqueues a unit-norm feature, evicting the oldest entry when full.
  void push(Feature feature) {
    if (!is_unit(feature)) throw std::invalid_argument("FeatureQueue: entries must be unit-norm");
    if (!entries_.empty() && entries_.front().size() != feature.size()) {
      throw std::invalid_argument("FeatureQueue: feature dimension mismatch");
    }
    entries_.push_back(std::move(feature));
    while (entries_.size() > capacity_) entries_.pop_front();
  }

  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  /// Oldest first.
  const std::deque<Feature>& entries() const { return entries_; }

 private:
  std::size_t capacity_;
  std::deque<Feature> entries_;
};

inline FeatureQueue queue_update(FeatureQueue queue, const std::vector<Feature>& new_fakes) {
  for (const auto& f : new_fakes) queue.push(f);
  return queue;
}

struct LabeledFeature {
  Feature feature;
  BinaryLabel label = BinaryLabel::Real;
};

struct DfqResult {
  double loss = 0.0;
  /// One per batch entry.
  std::vector<Feature> feature_grads;
  Feature center_grad;
};

/// loss = mean_fake (1 - max_q cos(f, q)) + lambda * mean_real (1 - cos(r, center)).
/// An empty class contributes nothing.
inline DfqResult dfq_loss(const std::vector<LabeledFeature>& batch, const FeatureQueue& queue,
                          const Feature& center, double lambda = 1.0) {
  if (batch.empty()) throw std::invalid_argument("dfq_loss: empty batch");
  std::size_t fakes = 0, reals = 0;
  for (const auto& item : batch) is_fake(item.label) ? ++fakes : ++reals;
  if (fakes > 0 && queue.empty()) throw std::invalid_argument("dfq_loss: fake features need a non-empty queue");

  DfqResult out;
  out.center_grad.assign(center.size(), 0.0);
  out.feature_grads.reserve(batch.size());
  for (const auto& item : batch) {
    Feature grad;
    if (is_fake(item.label)) {
      const Feature* nearest = nullptr;
      double best = -2.0;
      for (const auto& q : queue.entries()) {
        const double c = cosine_similarity(item.feature, q);
        if (c > best) {
          best = c;
          nearest = &q;
        }
      }
      const double w = 1.0 / static_cast<double>(fakes);
      out.loss += w * (1.0 - best);
      grad = cosine_grad(item.feature, *nearest);
      for (double& g : grad) g *= -w;
    } else {
      const double w = lambda / static_cast<double>(reals);
      out.loss += w * (1.0 - cosine_similarity(item.feature, center));
      grad = cosine_grad(item.feature, center);
      for (double& g : grad) g *= -w;
      const Feature gc = cosine_grad(center, item.feature);
      for (std::size_t i = 0; i < gc.size(); ++i) out.center_grad[i] -= w * gc[i];
    }
    out.feature_grads.push_back(std::move(grad));
  }
  return out;
}

/// Dense row-major n x n matrix.
class SquareMatrix {
 public:
  explicit SquareMatrix(std::size_t n = 0, double fill = 0.0) : n_(n), data_(n * n, fill) {}

  std::size_t size() const { return n_; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }

  friend bool operator==(const SquareMatrix&, const SquareMatrix&) = default;

 private:
  std::size_t n_;
  std::vector<double> data_;
};

inline SquareMatrix patch_consistency_matrix(const std::vector<Feature>& patches) {
  if (patches.size() < 2) throw std::invalid_argument("patch_consistency_matrix: need >= 2 patches");
  SquareMatrix m(patches.size());
  for (std::size_t i = 0; i < patches.size(); ++i) {
    m(i, i) = 1.0;
    for (std::size_t j = i + 1; j < patches.size(); ++j) {
      m(i, j) = m(j, i) = cosine_similarity(patches[i], patches[j]);
    }
  }
  return m;
}

struct SimilarityTarget {
  SquareMatrix matrix;
  double same_value = 0.9;
  double diff_value = 0.0;
};

inline SimilarityTarget temporal_similarity_target(const FrameLabelSequence& labels,
                                                   double same_value = 0.9,
                                                   double diff_value = 0.0) {
  for (const auto& l : labels) {
    if (!l) throw std::invalid_argument("temporal_similarity_target: unknown label");
  }
  SimilarityTarget target{SquareMatrix(labels.size()), same_value, diff_value};
  for (std::size_t i = 0; i < labels.size(); ++i) {
    for (std::size_t j = 0; j < labels.size(); ++j) {
      target.matrix(i, j) = *labels[i] == *labels[j] ? same_value : diff_value;
    }
  }
  return target;
}

/// Predictions are clamped into [kProbEps, 1 - kProbEps] before the logs.
inline constexpr double kProbEps = 1e-7;

namespace detail {

inline void check_similarity_inputs(const SquareMatrix& predicted, const SimilarityTarget& target) {
  if (predicted.size() != target.matrix.size() || predicted.size() == 0) {
    throw std::invalid_argument("similarity_loss: dimension mismatch");
  }
}

inline double bce(double p, double t) { return -(t * std::log(p) + (1.0 - t) * std::log(1.0 - p)); }

}  // namespace detail

/// Mean elementwise binary cross-entropy against the soft target.
inline double similarity_loss(const SquareMatrix& predicted, const SimilarityTarget& target) {
  detail::check_similarity_inputs(predicted, target);
  const std::size_t n = predicted.size();
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double p = predicted(i, j);
      if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("similarity_loss: prediction outside [0, 1]");
      sum += detail::bce(std::clamp(p, kProbEps, 1.0 - kProbEps), target.matrix(i, j));
    }
  }
  return sum / static_cast<double>(n * n);
}

/// d similarity_loss / d predicted; zero where the clamp is active.
inline SquareMatrix similarity_loss_grad(const SquareMatrix& predicted, const SimilarityTarget& target) {
  detail::check_similarity_inputs(predicted, target);
  const std::size_t n = predicted.size();
  const double scale = 1.0 / static_cast<double>(n * n);
  SquareMatrix grad(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double p = predicted(i, j);
      if (p <= kProbEps || p >= 1.0 - kProbEps) continue;
      const double t = target.matrix(i, j);
      grad(i, j) = scale * (p - t) / (p * (1.0 - p));
    }
  }
  return grad;
}

/// Maps a cosine similarity to a probability.
inline double squash_cosine(double c) { return 0.5 * (1.0 + c); }

struct TokenSimilarityResult {
  double loss = 0.0;
  SquareMatrix predicted;
  std::vector<Feature> token_grads;
};

/// Frame tokens -> predicted[i][j] = squash(cos(t_i, t_j)) -> similarity_loss,
/// with gradients back to every token.
inline TokenSimilarityResult token_similarity_loss(const std::vector<Feature>& tokens,
                                                   const SimilarityTarget& target) {
  const std::size_t n = tokens.size();
  TokenSimilarityResult out;
  out.predicted = SquareMatrix(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      out.predicted(i, j) = squash_cosine(cosine_similarity(tokens[i], tokens[j]));
    }
  }
  out.loss = similarity_loss(out.predicted, target);
  const SquareMatrix dp = similarity_loss_grad(out.predicted, target);
  out.token_grads.assign(n, Feature(n ? tokens[0].size() : 0, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j || dp(i, j) == 0.0) continue;
      // p_ij depends on t_i and t_j symmetrically.
      const Feature gi = cosine_grad(tokens[i], tokens[j]);
      const Feature gj = cosine_grad(tokens[j], tokens[i]);
      for (std::size_t k = 0; k < gi.size(); ++k) {
        out.token_grads[i][k] += 0.5 * dp(i, j) * gi[k];
        out.token_grads[j][k] += 0.5 * dp(i, j) * gj[k];
      }
    }
  }
  return out;
}

inline double total_loss(double sim_loss, double cls_loss, double w_sim, double w_cls) {
  if (w_sim < 0.0 || w_cls < 0.0) throw std::invalid_argument("total_loss: weights must be >= 0");
  return w_sim * sim_loss + w_cls * cls_loss;
}

/// Central differences, one coordinate at a time.
inline Feature finite_diff_grad(const std::function<double(const Feature&)>& loss_fn, Feature params,
                                double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("finite_diff_grad: eps must be positive");
  Feature grad(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double saved = params[i];
    params[i] = saved + eps;
    const double up = loss_fn(params);
    params[i] = saved - eps;
    const double down = loss_fn(params);
    params[i] = saved;
    grad[i] = (up - down) / (2.0 * eps);
  }
  return grad;
}

struct ToyConfig {
  std::size_t dim = 4;
  std::size_t reals = 8;
  std::size_t fakes = 8;
  /// Fake prototypes; the fakes form this many clusters.
  std::size_t fake_clusters = 2;
  /// Gaussian spread around the prototypes before normalization.
  double spread = 0.35;
  std::size_t queue_capacity = 64;
  /// Historical fakes the queue starts with.
  std::size_t queue_seed_size = 16;
  double lambda = 1.0;
  std::uint64_t seed = 7;
};

struct ToyState {
  std::vector<LabeledFeature> batch;
  FeatureQueue queue;
  Feature center;
};

inline ToyState make_toy_state(const ToyConfig& cfg) {
  if (cfg.dim < 2) throw std::invalid_argument("toy: dimension must be >= 2");
  if (cfg.reals + cfg.fakes == 0) throw std::invalid_argument("toy: empty batch");
  if (cfg.fake_clusters == 0) throw std::invalid_argument("toy: need >= 1 fake cluster");
  if (cfg.spread < 0.0) throw std::invalid_argument("toy: spread must be >= 0");
  Rng rng(cfg.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto random_unit = [&] {
    Feature f(cfg.dim);
    for (double& x : f) x = gauss(rng);
    return normalized(std::move(f));
  };
  auto around = [&](const Feature& proto) {
    Feature f = proto;
    for (double& x : f) x += cfg.spread * gauss(rng);
    return normalized(std::move(f));
  };

  const Feature real_proto = random_unit();
  std::vector<Feature> fake_protos;
  for (std::size_t k = 0; k < cfg.fake_clusters; ++k) fake_protos.push_back(random_unit());

  ToyState state{{}, FeatureQueue(cfg.queue_capacity), random_unit()};
  for (std::size_t i = 0; i < cfg.reals; ++i) state.batch.push_back({around(real_proto), BinaryLabel::Real});
  for (std::size_t i = 0; i < cfg.fakes; ++i) {
    state.batch.push_back({around(fake_protos[i % fake_protos.size()]), BinaryLabel::Fake});
  }
  for (std::size_t i = 0; i < cfg.queue_seed_size; ++i) {
    state.queue.push(around(fake_protos[i % fake_protos.size()]));
  }
  return state;
}

/// Mean cosine between the real features and the center.
inline double real_center_cosine(const ToyState& state) {
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& item : state.batch) {
    if (is_fake(item.label)) continue;
    sum += cosine_similarity(item.feature, state.center);
    ++count;
  }
  return count ? sum / static_cast<double>(count) : 1.0;
}

struct TrajectoryPoint {
  std::size_t step = 0;
  double loss = 0.0;
  double mean_cosine = 0.0;

  friend bool operator==(const TrajectoryPoint&, const TrajectoryPoint&) = default;
};

/// Full-batch gradient descent on dfq_loss over the batch features and the
/// center, re-normalizing after every step. After each step the batch fakes
/// that produced the loss are enqueued. Point t of the trajectory describes
/// the state after t updates, so there are steps + 1 points.
inline std::vector<TrajectoryPoint> train_toy(ToyState state, std::size_t steps, double lr,
                                              double lambda = 1.0) {
  if (steps == 0) throw std::invalid_argument("train_toy: steps must be >= 1");
  if (!(lr >= 0.0)) throw std::invalid_argument("train_toy: lr must be >= 0");
  std::vector<TrajectoryPoint> trajectory;
  trajectory.reserve(steps + 1);
  for (std::size_t step = 0;; ++step) {
    const DfqResult res = dfq_loss(state.batch, state.queue, state.center, lambda);
    if (!std::isfinite(res.loss)) throw std::runtime_error("train_toy: loss diverged");
    trajectory.push_back({step, res.loss, real_center_cosine(state)});
    if (step == steps) break;

    std::vector<Feature> enqueued;
    for (std::size_t i = 0; i < state.batch.size(); ++i) {
      auto& f = state.batch[i].feature;
      if (is_fake(state.batch[i].label)) enqueued.push_back(f);
      for (std::size_t k = 0; k < f.size(); ++k) f[k] -= lr * res.feature_grads[i][k];
      f = normalized(std::move(f));
    }
    for (std::size_t k = 0; k < state.center.size(); ++k) state.center[k] -= lr * res.center_grad[k];
    state.center = normalized(std::move(state.center));
    state.queue = queue_update(std::move(state.queue), enqueued);
  }
  return trajectory;
}

/// Tab-separated "step loss mean_cosine" table with a header row.
inline void write_trajectory(std::ostream& os, const std::vector<TrajectoryPoint>& trajectory) {
  os << "step\tloss\tmean_cosine\n";
  char buf[96];
  for (const auto& p : trajectory) {
    std::snprintf(buf, sizeof buf, "%zu\t%.12g\t%.12g\n", p.step, p.loss, p.mean_cosine);
    os << buf;
  }
}

}  // namespace forgeloc

#endif  // FORGELOC_LEARNING_HPP_
