#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <vector>

namespace stereorig::cloud {

struct CloudPoint {
  double x_mm = 0.0;
  double y_mm = 0.0;
  double z_mm = 0.0;
  double intensity = 0.0;
  std::size_t heading_index = 0; // capture that produced the point

  bool operator==(const CloudPoint &) const = default;
};

struct BoundingBox {
  double min[3] = {std::numeric_limits<double>::infinity(),
                   std::numeric_limits<double>::infinity(),
                   std::numeric_limits<double>::infinity()};
  double max[3] = {-std::numeric_limits<double>::infinity(),
                   -std::numeric_limits<double>::infinity(),
                   -std::numeric_limits<double>::infinity()};

  bool empty() const noexcept { return min[0] > max[0]; }
};

class PointCloud {
public:
  PointCloud() = default;
  explicit PointCloud(std::vector<CloudPoint> pts) : points_(std::move(pts)) {
    for (const auto &p : points_)
      grow(p);
  }

  void push_back(const CloudPoint &p) {
    points_.push_back(p);
    grow(p);
  }

  const std::vector<CloudPoint> &points() const noexcept { return points_; }
  std::size_t size() const noexcept { return points_.size(); }
  bool empty() const noexcept { return points_.empty(); }
  const BoundingBox &bounds() const noexcept { return bounds_; }

  bool operator==(const PointCloud &o) const { return points_ == o.points_; }

private:
  void grow(const CloudPoint &p) {
    const double c[3] = {p.x_mm, p.y_mm, p.z_mm};
    for (int i = 0; i < 3; ++i) {
      bounds_.min[i] = std::min(bounds_.min[i], c[i]);
      bounds_.max[i] = std::max(bounds_.max[i], c[i]);
    }
  }

  std::vector<CloudPoint> points_;
  BoundingBox bounds_;
};

} // namespace stereorig::cloud
