#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

#include "graspcap/core/rigid_transform.hpp"

namespace graspcap::align {

/// Static 3-d tree over a point set, exact nearest neighbour.
class KdTree {
 public:
  struct Hit {
    std::size_t index = 0;
    double squared_distance = std::numeric_limits<double>::infinity();
  };

  KdTree() = default;

  explicit KdTree(Points points) : points_(std::move(points)) {
    order_.resize(points_.size());
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    nodes_.reserve(points_.size());
    if (!points_.empty()) build(0, points_.size(), 0);
  }

  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  const Points& points() const { return points_; }

  Hit nearest(const Vec3& q) const {
    Hit best;
    if (!nodes_.empty()) search(0, q, best);
    return best;
  }

 private:
  static constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();

  struct Node {
    std::uint32_t point;  // index into points_
    std::uint32_t left = kNone, right = kNone;
    std::uint8_t axis;
  };

  std::uint32_t build(std::size_t lo, std::size_t hi, int depth) {
    // Split on the axis of largest extent; keeps the tree balanced on flat clouds.
    Vec3 mn = points_[order_[lo]], mx = mn;
    for (std::size_t i = lo; i < hi; ++i) {
      mn = mn.cwiseMin(points_[order_[i]]);
      mx = mx.cwiseMax(points_[order_[i]]);
    }
    int axis = 0;
    (mx - mn).maxCoeff(&axis);
    const std::size_t mid = lo + (hi - lo) / 2;
    std::nth_element(order_.begin() + static_cast<std::ptrdiff_t>(lo),
                     order_.begin() + static_cast<std::ptrdiff_t>(mid),
                     order_.begin() + static_cast<std::ptrdiff_t>(hi),
                     [&](std::size_t a, std::size_t b) { return points_[a][axis] < points_[b][axis]; });
    const auto id = static_cast<std::uint32_t>(nodes_.size());
    nodes_.push_back({static_cast<std::uint32_t>(order_[mid]), kNone, kNone,
                      static_cast<std::uint8_t>(axis)});
    if (mid > lo) {
      const auto l = build(lo, mid, depth + 1);
      nodes_[id].left = l;
    }
    if (mid + 1 < hi) {
      const auto r = build(mid + 1, hi, depth + 1);
      nodes_[id].right = r;
    }
    return id;
  }

  void search(std::uint32_t id, const Vec3& q, Hit& best) const {
    const Node& n = nodes_[id];
    const Vec3& p = points_[n.point];
    const double d2 = (p - q).squaredNorm();
    if (d2 < best.squared_distance || (d2 == best.squared_distance && n.point < best.index)) {
      best.squared_distance = d2;
      best.index = n.point;
    }
    const double diff = q[n.axis] - p[n.axis];
    const std::uint32_t near = diff < 0 ? n.left : n.right;
    const std::uint32_t far = diff < 0 ? n.right : n.left;
    if (near != kNone) search(near, q, best);
    if (far != kNone && diff * diff <= best.squared_distance) search(far, q, best);
  }

  Points points_;
  std::vector<std::size_t> order_;
  std::vector<Node> nodes_;
};

}  // namespace graspcap::align
