#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "error.hpp"

namespace gperc {

template <int D>
using Point = std::array<double, D>;

template <int D>
double distance_squared(const Point<D> &a, const Point<D> &b) {
  double s = 0.0;
  for (int i = 0; i < D; ++i) {
    const double t = a[i] - b[i];
    s += t * t;
  }
  return s;
}

template <int D>
double distance(const Point<D> &a, const Point<D> &b) {
  return std::sqrt(distance_squared<D>(a, b));
}

/// Uniform grid over the box [0, L]^D mapping cells to point ids. The cell
/// side is at least the interaction range, so neighbours of a point lie in the
/// 3^D block of cells around it.
template <int D>
class CellIndex {
public:
  CellIndex() = default;
  CellIndex(double box_side, double min_cell_side) { reset(box_side, min_cell_side); }

  void reset(double box_side, double min_cell_side) {
    if (!(box_side > 0.0) || !(min_cell_side > 0.0))
      throw Error(ErrorCode::ConfigError, "cell index needs positive box and cell sides");
    per_axis_ = std::max(1, static_cast<int>(std::floor(box_side / min_cell_side)));
    side_ = box_side / per_axis_;
    std::size_t total = 1;
    for (int i = 0; i < D; ++i) total *= static_cast<std::size_t>(per_axis_);
    cells_.assign(total, {});
  }

  [[nodiscard]] int per_axis() const { return per_axis_; }
  [[nodiscard]] double cell_side() const { return side_; }
  [[nodiscard]] std::size_t cell_count() const { return cells_.size(); }

  [[nodiscard]] std::array<int, D> coords(const Point<D> &x) const {
    std::array<int, D> c{};
    for (int i = 0; i < D; ++i)
      c[i] = std::clamp(static_cast<int>(std::floor(x[i] / side_)), 0, per_axis_ - 1);
    return c;
  }

  [[nodiscard]] std::size_t linear(const std::array<int, D> &c) const {
    std::size_t id = 0;
    for (int i = D - 1; i >= 0; --i) id = id * static_cast<std::size_t>(per_axis_) + static_cast<std::size_t>(c[i]);
    return id;
  }

  [[nodiscard]] std::size_t cell_of(const Point<D> &x) const { return linear(coords(x)); }

  void insert(std::size_t cell, std::uint32_t id) { cells_[cell].push_back(id); }

  void erase(std::size_t cell, std::uint32_t id) {
    auto &v = cells_[cell];
    auto it = std::find(v.begin(), v.end(), id);
    *it = v.back();
    v.pop_back();
  }

  void rename(std::size_t cell, std::uint32_t from, std::uint32_t to) {
    auto &v = cells_[cell];
    *std::find(v.begin(), v.end(), from) = to;
  }

  [[nodiscard]] std::span<const std::uint32_t> cell(std::size_t id) const { return cells_[id]; }

  /// Calls fn(id) for every point id in the 3^D block of cells around x.
  template <class Fn>
  void for_each_near(const Point<D> &x, Fn &&fn) const {
    const auto c = coords(x);
    std::array<int, D> lo{}, hi{};
    for (int i = 0; i < D; ++i) {
      lo[i] = std::max(c[i] - 1, 0);
      hi[i] = std::min(c[i] + 1, per_axis_ - 1);
    }
    std::array<int, D> cur = lo;
    while (true) {
      for (std::uint32_t id : cells_[linear(cur)]) fn(id);
      int axis = 0;
      while (axis < D && ++cur[axis] > hi[axis]) {
        cur[axis] = lo[axis];
        ++axis;
      }
      if (axis == D) break;
    }
  }

  /// Per-cell sorted id lists, for comparing two indices independent of insertion order.
  [[nodiscard]] std::vector<std::vector<std::uint32_t>> canonical() const {
    auto out = cells_;
    for (auto &v : out) std::sort(v.begin(), v.end());
    return out;
  }

private:
  int per_axis_ = 1;
  double side_ = 1.0;
  std::vector<std::vector<std::uint32_t>> cells_;
};

/// Finite point set in the box [0, L]^D with a cell index kept in sync with
/// every insertion, removal and move.
template <int D>
class Configuration {
public:
  Configuration() = default;
  Configuration(double box_side, double index_cell_side)
      : box_(box_side), min_cell_side_(index_cell_side), index_(box_side, index_cell_side) {}

  [[nodiscard]] double box_side() const { return box_; }
  [[nodiscard]] double volume() const { return std::pow(box_, D); }
  [[nodiscard]] std::size_t size() const { return points_.size(); }
  [[nodiscard]] bool empty() const { return points_.empty(); }
  [[nodiscard]] std::span<const Point<D>> points() const { return points_; }
  [[nodiscard]] const Point<D> &operator[](std::size_t i) const { return points_[i]; }
  [[nodiscard]] const CellIndex<D> &index() const { return index_; }

  [[nodiscard]] bool contains(const Point<D> &x) const {
    for (int i = 0; i < D; ++i)
      if (!(x[i] >= 0.0 && x[i] <= box_)) return false;
    return true;
  }

  std::size_t add(const Point<D> &x) {
    const auto id = static_cast<std::uint32_t>(points_.size());
    points_.push_back(x);
    cell_ids_.push_back(index_.cell_of(x));
    index_.insert(cell_ids_.back(), id);
    return id;
  }

  /// Removes point i; the last point takes its id.
  void remove(std::size_t i) {
    const auto last = static_cast<std::uint32_t>(points_.size() - 1);
    index_.erase(cell_ids_[i], static_cast<std::uint32_t>(i));
    if (i != last) {
      index_.rename(cell_ids_[last], last, static_cast<std::uint32_t>(i));
      points_[i] = points_[last];
      cell_ids_[i] = cell_ids_[last];
    }
    points_.pop_back();
    cell_ids_.pop_back();
  }

  void move(std::size_t i, const Point<D> &to) {
    const std::size_t new_cell = index_.cell_of(to);
    if (new_cell != cell_ids_[i]) {
      index_.erase(cell_ids_[i], static_cast<std::uint32_t>(i));
      index_.insert(new_cell, static_cast<std::uint32_t>(i));
      cell_ids_[i] = new_cell;
    }
    points_[i] = to;
  }

  /// A fresh index built from the current points, for audits.
  [[nodiscard]] CellIndex<D> rebuilt_index() const {
    CellIndex<D> fresh(box_, min_cell_side_);
    for (std::size_t i = 0; i < points_.size(); ++i)
      fresh.insert(fresh.cell_of(points_[i]), static_cast<std::uint32_t>(i));
    return fresh;
  }

private:
  double box_ = 1.0;
  double min_cell_side_ = 1.0;
  std::vector<Point<D>> points_;
  std::vector<std::size_t> cell_ids_;
  CellIndex<D> index_;
};

/// Calls fn(i, j) once for every pair i < j with |x_i - x_j| <= h (and for
/// some pairs farther apart). Points are binned on a grid of side h anchored
/// at their bounding box; bins are sorted keys, so memory is O(n).
template <int D, class Fn>
void for_each_close_pair(std::span<const Point<D>> pts, double h, Fn &&fn) {
  static_assert(D >= 1 && D <= 3, "bins are packed into 21 bits per axis");
  const std::size_t n = pts.size();
  if (n < 2) return;
  Point<D> lo = pts[0];
  for (const auto &p : pts)
    for (int i = 0; i < D; ++i) lo[i] = std::min(lo[i], p[i]);
  constexpr std::int64_t max_bin = (1 << 21) - 2;
  std::vector<std::array<std::int64_t, D>> bins(n);
  std::vector<std::pair<std::uint64_t, std::uint32_t>> sorted(n);
  auto key_of = [](const std::array<std::int64_t, D> &b) {
    std::uint64_t k = 0;
    for (int i = 0; i < D; ++i) k = (k << 21) | static_cast<std::uint64_t>(b[i]);
    return k;
  };
  for (std::size_t i = 0; i < n; ++i) {
    for (int a = 0; a < D; ++a) {
      bins[i][a] = static_cast<std::int64_t>(std::floor((pts[i][a] - lo[a]) / h)) + 1;
      if (bins[i][a] > max_bin) throw Error(ErrorCode::PreconditionViolated, "point set too wide for the bin side");
    }
    sorted[i] = {key_of(bins[i]), static_cast<std::uint32_t>(i)};
  }
  std::sort(sorted.begin(), sorted.end());

  std::array<int, D> off{};
  off.fill(-1);
  while (true) {
    for (std::size_t i = 0; i < n; ++i) {
      auto b = bins[i];
      for (int a = 0; a < D; ++a) b[a] += off[a];
      const std::uint64_t key = key_of(b);
      auto it = std::lower_bound(sorted.begin(), sorted.end(), std::make_pair(key, std::uint32_t{0}));
      for (; it != sorted.end() && it->first == key; ++it)
        if (it->second > i) fn(static_cast<std::uint32_t>(i), it->second);
    }
    int axis = 0;
    while (axis < D && ++off[axis] > 1) {
      off[axis] = -1;
      ++axis;
    }
    if (axis == D) break;
  }
}

/// Smallest pairwise distance (infinity for fewer than two points). Searches
/// neighbouring bins first and falls back to all pairs only when no pair is
/// closer than the bin side.
template <int D>
double min_pair_distance(std::span<const Point<D>> pts) {
  const std::size_t n = pts.size();
  if (n < 2) return std::numeric_limits<double>::infinity();
  Point<D> lo = pts[0], hi = pts[0];
  for (const auto &p : pts)
    for (int i = 0; i < D; ++i) {
      lo[i] = std::min(lo[i], p[i]);
      hi[i] = std::max(hi[i], p[i]);
    }
  double extent = 0.0;
  for (int i = 0; i < D; ++i) extent = std::max(extent, hi[i] - lo[i]);
  const double h = std::max(extent / std::max(1.0, std::floor(std::pow(static_cast<double>(n), 1.0 / D))), 1e-300);
  double best = std::numeric_limits<double>::infinity();
  for_each_close_pair<D>(pts, h, [&](std::uint32_t i, std::uint32_t j) { best = std::min(best, distance_squared<D>(pts[i], pts[j])); });
  if (best > h * h) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) best = std::min(best, distance_squared<D>(pts[i], pts[j]));
  }
  return std::sqrt(best);
}

} // namespace gperc
