// Face-region handling as rectangle arithmetic: random outward expansion,
// top-k retention with a full-image fallback, gap filling across frames,
// and the 160x160 mosaic plan.

#ifndef FORGELOC_GEOMETRY_HPP_
#define FORGELOC_GEOMETRY_HPP_

#include <algorithm>
#include <numeric>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

#include "forgeloc/sampling.hpp"

namespace forgeloc {

struct FaceBox {
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 0.0;
  double y1 = 0.0;
  int image_w = 0;
  int image_h = 0;

  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  double area() const { return width() * height(); }

  static FaceBox full_image(int image_w, int image_h) {
    return {0.0, 0.0, static_cast<double>(image_w), static_cast<double>(image_h), image_w, image_h};
  }

  friend bool operator==(const FaceBox&, const FaceBox&) = default;
};

inline FaceBox clip_to_image(FaceBox box) {
  box.x0 = std::clamp(box.x0, 0.0, static_cast<double>(box.image_w));
  box.x1 = std::clamp(box.x1, 0.0, static_cast<double>(box.image_w));
  box.y0 = std::clamp(box.y0, 0.0, static_cast<double>(box.image_h));
  box.y1 = std::clamp(box.y1, 0.0, static_cast<double>(box.image_h));
  return box;
}

/// Grows the box by e = u * height, u ~ U[lo, hi], split evenly between
/// opposite edges (e/2 per edge), then clips to the image. lo == hi is the
/// deterministic test-time setting and does not touch the generator.
inline FaceBox expand_box(const FaceBox& box, double lo, double hi, Rng& rng) {
  if (!(lo >= 0.0 && lo <= hi)) throw std::invalid_argument("expand_box: need 0 <= lo <= hi");
  if (!(box.x0 < box.x1 && box.y0 < box.y1)) throw std::invalid_argument("expand_box: empty box");
  const double h = box.height();
  const double e = lo == hi ? lo * h : std::uniform_real_distribution<double>(lo * h, hi * h)(rng);
  const double half = e / 2.0;
  return clip_to_image({box.x0 - half, box.y0 - half, box.x1 + half, box.y1 + half, box.image_w,
                        box.image_h});
}

/// Keeps the `max_faces` largest boxes (earlier index wins ties), ordered by
/// area descending. With no detections the whole image stands in.
inline std::vector<FaceBox> select_top_faces(const std::vector<FaceBox>& boxes,
                                             std::size_t max_faces, int image_w, int image_h) {
  if (max_faces == 0) throw std::invalid_argument("select_top_faces: max_faces must be >= 1");
  if (boxes.empty()) return {FaceBox::full_image(image_w, image_h)};
  std::vector<std::size_t> order(boxes.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return boxes[a].area() > boxes[b].area(); });
  order.resize(std::min(order.size(), max_faces));
  std::vector<FaceBox> out;
  out.reserve(order.size());
  for (std::size_t i : order) out.push_back(boxes[i]);
  return out;
}

struct CellRect {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;

  friend bool operator==(const CellRect&, const CellRect&) = default;
};

struct MosaicPlacement {
  std::size_t source = 0;
  CellRect cell;
};

struct MosaicLayout {
  static constexpr int kCanvas = 160;
  std::vector<MosaicPlacement> placements;
};

/// Face i (area-descending order from select_top_faces) goes to cell i,
/// row-major: one face fills the canvas, two share horizontal bands, three or
/// four use a 2x2 grid.
inline MosaicLayout mosaic_layout(std::size_t face_count) {
  if (face_count < 1 || face_count > 4) {
    throw std::invalid_argument("mosaic_layout: face count must lie in [1, 4]");
  }
  constexpr int full = MosaicLayout::kCanvas;
  constexpr int half = full / 2;
  MosaicLayout layout;
  if (face_count == 1) {
    layout.placements.push_back({0, {0, 0, full, full}});
  } else if (face_count == 2) {
    layout.placements.push_back({0, {0, 0, full, half}});
    layout.placements.push_back({1, {0, half, full, half}});
  } else {
    for (std::size_t i = 0; i < face_count; ++i) {
      const int row = static_cast<int>(i) / 2;
      const int col = static_cast<int>(i) % 2;
      layout.placements.push_back({i, {col * half, row * half, half, half}});
    }
  }
  return layout;
}

/// Missing boxes are interpolated coordinate-wise between the nearest known
/// frames on either side; missing boxes at the ends copy the nearest known one.
inline std::vector<FaceBox> interpolate_missing_box(const std::vector<std::optional<FaceBox>>& boxes) {
  std::vector<std::size_t> known;
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    if (boxes[i]) known.push_back(i);
  }
  if (known.empty()) throw std::invalid_argument("interpolate_missing_box: no detected box");

  std::vector<FaceBox> out(boxes.size());
  std::size_t next = 0;
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    while (next < known.size() && known[next] < i) ++next;
    if (boxes[i]) {
      out[i] = *boxes[i];
    } else if (next == 0) {
      out[i] = *boxes[known.front()];
    } else if (next == known.size()) {
      out[i] = *boxes[known.back()];
    } else {
      const FaceBox& a = *boxes[known[next - 1]];
      const FaceBox& b = *boxes[known[next]];
      const double t = static_cast<double>(i - known[next - 1]) /
                       static_cast<double>(known[next] - known[next - 1]);
      auto lerp = [t](double u, double v) { return u + t * (v - u); };
      out[i] = {lerp(a.x0, b.x0), lerp(a.y0, b.y0), lerp(a.x1, b.x1), lerp(a.y1, b.y1),
                a.image_w, a.image_h};
    }
  }
  return out;
}

}  // namespace forgeloc

#endif  // FORGELOC_GEOMETRY_HPP_
