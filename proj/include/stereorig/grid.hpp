#pragma once

#include <cmath>
#include <algorithm>
#include <cstddef>
#include <cstring>
#include <limits>
#include <span>
#include <vector>

#include "stereorig/errors.hpp"

namespace stereorig {

/// Row-major 2D buffer. Used for intensity images, disparity and depth maps,
/// and per-pixel ownership.
template <typename T> class Grid {
public:
  using value_type = T;

  Grid() = default;
  Grid(int width, int height, T fill = T{})
      : width_(width), height_(height) {
    if (width < 0 || height < 0)
      throw DomainError("grid dimensions must be nonnegative");
    data_.assign(static_cast<std::size_t>(width) * height, fill);
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  bool contains(int x, int y) const noexcept {
    return x >= 0 && y >= 0 && x < width_ && y < height_;
  }

  T &operator()(int x, int y) noexcept { return data_[index(x, y)]; }
  const T &operator()(int x, int y) const noexcept {
    return data_[index(x, y)];
  }

  // Out-of-bounds reads return `outside`.
  T at_or(int x, int y, T outside) const noexcept {
    return contains(x, y) ? data_[index(x, y)] : outside;
  }

  std::span<T> row(int y) noexcept {
    return {data_.data() + static_cast<std::size_t>(y) * width_,
            static_cast<std::size_t>(width_)};
  }
  std::span<const T> row(int y) const noexcept {
    return {data_.data() + static_cast<std::size_t>(y) * width_,
            static_cast<std::size_t>(width_)};
  }

  std::span<T> data() noexcept { return data_; }
  std::span<const T> data() const noexcept { return data_; }

  bool operator==(const Grid &) const = default;

private:
  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * width_ + x;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

using Image = Grid<double>;

/// Sentinel for per-pixel real-valued maps (no disparity, no depth).
inline constexpr double kNoValue = std::numeric_limits<double>::quiet_NaN();

inline bool has_value(double v) noexcept { return !std::isnan(v); }

/// Bitwise comparison, so NaN sentinels compare equal to themselves.
template <typename T>
bool bitwise_equal(const Grid<T> &a, const Grid<T> &b) {
  return a.width() == b.width() && a.height() == b.height() &&
         std::equal(a.data().begin(), a.data().end(), b.data().begin(),
                    [](const T &x, const T &y) {
                      return std::memcmp(&x, &y, sizeof(T)) == 0;
                    });
}

} // namespace stereorig
