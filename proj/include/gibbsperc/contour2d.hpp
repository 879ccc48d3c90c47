#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "bounds.hpp"
#include "configuration.hpp"
#include "error.hpp"

namespace gperc {

using Point2 = Point<2>;

struct Cell {
  int k = 0;
  int l = 0;
  friend constexpr bool operator==(const Cell &, const Cell &) = default;
  friend constexpr auto operator<=>(const Cell &, const Cell &) = default;
};

/// Square cells of side q = 2d + delta. The origin point sits at the centre of
/// cell (0, 0); cell (k, l) covers origin + [(k-1/2)q, (k+1/2)q) x [(l-1/2)q, (l+1/2)q).
/// The extent holds only cells lying entirely inside the box.
struct CellGrid {
  double q = 1.0;
  double delta = 0.0;
  Point2 origin{};
  int kmin = 0, kmax = 0, lmin = 0, lmax = 0;

  /// Grid for the box [0, L]^2 centred at the box centre.
  static CellGrid for_box(double box, double d, double delta) {
    if (!(delta > 0.0) || !(d > 0.0)) throw Error(ErrorCode::PreconditionViolated, "cell grid needs d > 0 and delta > 0");
    CellGrid g;
    g.q = 2.0 * d + delta;
    g.delta = delta;
    g.origin = {box / 2.0, box / 2.0};
    const int half = static_cast<int>(std::floor(box / (2.0 * g.q) - 0.5 + 1e-12));
    if (half < 0) throw Error(ErrorCode::PreconditionViolated, "box smaller than one cell");
    g.kmin = g.lmin = -half;
    g.kmax = g.lmax = half;
    return g;
  }

  [[nodiscard]] double d() const { return (q - delta) / 2.0; }
  [[nodiscard]] double area() const { return q * q; }
  [[nodiscard]] int width() const { return kmax - kmin + 1; }
  [[nodiscard]] int height() const { return lmax - lmin + 1; }
  [[nodiscard]] std::size_t cell_count() const { return static_cast<std::size_t>(width()) * static_cast<std::size_t>(height()); }

  [[nodiscard]] bool in_extent(Cell c) const { return c.k >= kmin && c.k <= kmax && c.l >= lmin && c.l <= lmax; }

  [[nodiscard]] Point2 centre(Cell c) const { return {origin[0] + c.k * q, origin[1] + c.l * q}; }

  /// Cell containing x on the unbounded lattice.
  [[nodiscard]] Cell lattice_cell(const Point2 &x) const {
    return {static_cast<int>(std::floor((x[0] - origin[0]) / q + 0.5)),
            static_cast<int>(std::floor((x[1] - origin[1]) / q + 0.5))};
  }

  [[nodiscard]] std::size_t linear(Cell c) const {
    return static_cast<std::size_t>(c.l - lmin) * static_cast<std::size_t>(width()) + static_cast<std::size_t>(c.k - kmin);
  }
  [[nodiscard]] Cell cell_at(std::size_t id) const {
    return {kmin + static_cast<int>(id % static_cast<std::size_t>(width())),
            lmin + static_cast<int>(id / static_cast<std::size_t>(width()))};
  }

  /// Largest r such that the ring of cells at Chebyshev distance r fits in the extent.
  [[nodiscard]] int max_ring() const { return std::min({kmax, -kmin, lmax, -lmin}); }
};

/// Dense per-cell flag over a grid's extent.
class CellMask {
public:
  CellMask() = default;
  CellMask(const CellGrid &grid, bool value) : grid_(grid), bits_(grid.cell_count(), value ? 1 : 0) {}

  [[nodiscard]] const CellGrid &grid() const { return grid_; }
  [[nodiscard]] bool operator[](Cell c) const { return grid_.in_extent(c) && bits_[grid_.linear(c)] != 0; }
  void set(Cell c, bool v) {
    if (grid_.in_extent(c)) bits_[grid_.linear(c)] = v ? 1 : 0;
  }
  [[nodiscard]] std::size_t count() const { return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), 1)); }

  /// Cells with the flag set, in (l, k) raster order.
  [[nodiscard]] std::vector<Cell> cells() const {
    std::vector<Cell> out;
    for (std::size_t i = 0; i < bits_.size(); ++i)
      if (bits_[i]) out.push_back(grid_.cell_at(i));
    return out;
  }

private:
  CellGrid grid_;
  std::vector<std::uint8_t> bits_;
};

/// Cells of the extent that contain no point.
inline CellMask empty_cells(std::span<const Point2> pts, const CellGrid &grid) {
  CellMask mask(grid, true);
  for (const auto &x : pts) mask.set(grid.lattice_cell(x), false);
  return mask;
}

struct Contour {
  std::vector<Cell> cells;  // in counter-clockwise cycle order
  bool encloses_origin = false;

  [[nodiscard]] std::size_t n() const { return cells.size(); }
};

struct ContourReport {
  std::vector<Contour> contours;  // innermost first
};

namespace detail {

constexpr std::array<std::array<int, 2>, 4> kSteps{{{1, 0}, {-1, 0}, {0, 1}, {0, -1}}};

/// Winding number of the closed lattice polygon through cell centres around
/// the centre of cell (0, 0).
inline int winding_around_origin(std::span<const Cell> cyc) {
  int wn = 0;
  const std::size_t n = cyc.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Cell a = cyc[i];
    const Cell b = cyc[(i + 1) % n];
    const long cross = static_cast<long>(b.k - a.k) * (0 - a.l) - static_cast<long>(0 - a.k) * (b.l - a.l);
    if (a.l <= 0) {
      if (b.l > 0 && cross > 0) ++wn;
    } else if (b.l <= 0 && cross < 0) {
      --wn;
    }
  }
  return wn;
}

inline long twice_signed_area(std::span<const Cell> cyc) {
  long s = 0;
  for (std::size_t i = 0; i < cyc.size(); ++i) {
    const Cell a = cyc[i];
    const Cell b = cyc[(i + 1) % cyc.size()];
    s += static_cast<long>(a.k) * b.l - static_cast<long>(b.k) * a.l;
  }
  return s;
}

/// Shortest cycle of allowed cells crossing the cut {(k,0)-(k,1) : k >= 1} an
/// odd number of times. Such a cycle is simple and chordless (a chord would
/// split it into two shorter cycles, one of them still odd).
inline std::optional<std::vector<Cell>> shortest_enclosing_cycle(const CellMask &allowed) {
  const CellGrid &g = allowed.grid();
  const std::size_t N = g.cell_count();
  std::vector<std::int32_t> dist(2 * N);
  std::vector<std::int64_t> parent(2 * N);
  std::optional<std::vector<Cell>> best;
  std::size_t best_len = std::numeric_limits<std::size_t>::max();

  auto crosses_cut = [](Cell a, Cell b) {
    return a.k == b.k && a.k >= 1 && std::min(a.l, b.l) == 0 && std::max(a.l, b.l) == 1;
  };

  for (int k = 1; k <= g.kmax; ++k) {
    const Cell start{k, 0};
    if (!allowed[start]) continue;
    std::fill(dist.begin(), dist.end(), -1);
    const std::size_t s0 = g.linear(start);
    const std::size_t target = N + s0;
    std::deque<std::size_t> queue{s0};
    dist[s0] = 0;
    parent[s0] = -1;
    while (!queue.empty() && dist[target] < 0) {
      const std::size_t node = queue.front();
      queue.pop_front();
      if (static_cast<std::size_t>(dist[node]) + 1 >= best_len) break;
      const std::size_t layer = node / N;
      const Cell c = g.cell_at(node % N);
      for (const auto &st : kSteps) {
        const Cell nb{c.k + st[0], c.l + st[1]};
        if (!allowed[nb]) continue;
        const std::size_t nl = crosses_cut(c, nb) ? 1 - layer : layer;
        const std::size_t next = nl * N + g.linear(nb);
        if (dist[next] >= 0) continue;
        dist[next] = dist[node] + 1;
        parent[next] = static_cast<std::int64_t>(node);
        queue.push_back(next);
      }
    }
    if (dist[target] < 0 || static_cast<std::size_t>(dist[target]) >= best_len) continue;
    std::vector<Cell> cyc;
    for (std::int64_t node = parent[target]; node >= 0; node = parent[static_cast<std::size_t>(node)])
      cyc.push_back(g.cell_at(static_cast<std::size_t>(node) % N));
    best_len = cyc.size();
    best = std::move(cyc);
  }
  if (best && twice_signed_area(*best) < 0) std::reverse(best->begin(), best->end());
  return best;
}

/// Cells strictly inside the closed cell curve `cyc`: not reachable from
/// outside the extent through 4-steps that avoid the curve.
inline CellMask enclosed_cells(const CellGrid &g, std::span<const Cell> cyc) {
  CellMask on_curve(g, false);
  for (Cell c : cyc) on_curve.set(c, true);
  CellMask outside(g, false);
  std::deque<Cell> queue;
  auto seed = [&](Cell c) {
    if (!on_curve[c] && !outside[c]) {
      outside.set(c, true);
      queue.push_back(c);
    }
  };
  for (int k = g.kmin; k <= g.kmax; ++k) {
    seed({k, g.lmin});
    seed({k, g.lmax});
  }
  for (int l = g.lmin; l <= g.lmax; ++l) {
    seed({g.kmin, l});
    seed({g.kmax, l});
  }
  while (!queue.empty()) {
    const Cell c = queue.front();
    queue.pop_front();
    for (const auto &st : kSteps) {
      const Cell nb{c.k + st[0], c.l + st[1]};
      if (g.in_extent(nb)) seed(nb);
    }
  }
  CellMask inside(g, false);
  for (int l = g.lmin; l <= g.lmax; ++l)
    for (int k = g.kmin; k <= g.kmax; ++k)
      if (!outside[{k, l}] && !on_curve[{k, l}]) inside.set({k, l}, true);
  return inside;
}

} // namespace detail

/// True iff the cells form a contour: every cell has exactly two 4-neighbours
/// in the set and the set is connected (its bond graph is a single cycle).
inline bool is_contour(std::span<const Cell> cells) {
  if (cells.size() < 4) return false;
  std::vector<Cell> sorted(cells.begin(), cells.end());
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) return false;
  auto has = [&](Cell c) { return std::binary_search(sorted.begin(), sorted.end(), c); };
  for (Cell c : sorted) {
    int deg = 0;
    for (const auto &st : detail::kSteps) deg += has({c.k + st[0], c.l + st[1]}) ? 1 : 0;
    if (deg != 2) return false;
  }
  std::vector<Cell> stack{sorted.front()};
  std::vector<Cell> seen{sorted.front()};
  while (!stack.empty()) {
    const Cell c = stack.back();
    stack.pop_back();
    for (const auto &st : detail::kSteps) {
      const Cell nb{c.k + st[0], c.l + st[1]};
      if (has(nb) && std::find(seen.begin(), seen.end(), nb) == seen.end()) {
        seen.push_back(nb);
        stack.push_back(nb);
      }
    }
  }
  return seen.size() == sorted.size();
}

/// True iff the closed curve through the centres of `cyc` (in order) winds around the origin.
inline bool encloses_origin(std::span<const Cell> cyc) { return detail::winding_around_origin(cyc) != 0; }

/// Nested empty-cell contours around the origin cell, innermost first. Each
/// level is the shortest enclosing chordless cycle of empty cells outside the
/// previous contour; the search stops when no further cycle exists.
inline ContourReport c_contours_around_origin(const CellMask &empty) {
  const CellGrid &g = empty.grid();
  if (!g.in_extent({0, 0})) throw Error(ErrorCode::PreconditionViolated, "origin cell outside the grid");
  ContourReport report;
  CellMask allowed = empty;
  allowed.set({0, 0}, false);
  while (auto cyc = detail::shortest_enclosing_cycle(allowed)) {
    const auto inside = detail::enclosed_cells(g, *cyc);
    for (Cell c : *cyc) allowed.set(c, false);
    for (Cell c : inside.cells()) allowed.set(c, false);
    Contour ct;
    ct.encloses_origin = encloses_origin(*cyc);
    ct.cells = std::move(*cyc);
    report.contours.push_back(std::move(ct));
  }
  return report;
}

// ---------------------------------------------------------------------------
// Contour statistics

struct EnvelopeParams {
  double beta = 0.0;
  double lambda = 1.0;
  double m = 0.0;
  double eps = 0.0;
  double alpha = 0.0;

  [[nodiscard]] double G() const { return g_function(beta, lambda, m, eps); }
  /// c(beta) e^{-n alpha G} with c(beta) = e^{beta m}; NaN unless G > 0.
  [[nodiscard]] double envelope(std::size_t n) const {
    const double G_val = G();
    if (!(G_val > 0.0)) return std::nan("");
    return std::exp(beta * m - static_cast<double>(n) * alpha * G_val);
  }
};

struct ContourRow {
  std::size_t n = 0;
  std::size_t count = 0;  // snapshots with a detected contour of length n
  double empirical_freq = 0.0;
  double envelope = std::nan("");
};

struct ContourStatistics {
  std::size_t snapshots = 0;
  std::vector<ContourRow> rows;  // every even n from 8 to the largest ring or observed length
};

inline ContourStatistics contour_statistics(std::span<const std::vector<Point2>> snapshots, const CellGrid &grid,
                                            const std::optional<EnvelopeParams> &env = std::nullopt) {
  if (snapshots.empty()) throw Error(ErrorCode::EmptyInput, "contour_statistics needs at least one snapshot");
  std::size_t n_max = 8 * static_cast<std::size_t>(std::max(1, grid.max_ring()));
  std::vector<std::vector<std::size_t>> lengths;
  lengths.reserve(snapshots.size());
  for (const auto &pts : snapshots) {
    const auto report = c_contours_around_origin(empty_cells(pts, grid));
    std::vector<std::size_t> ls;
    for (const auto &c : report.contours) ls.push_back(c.n());
    std::sort(ls.begin(), ls.end());
    ls.erase(std::unique(ls.begin(), ls.end()), ls.end());
    if (!ls.empty()) n_max = std::max(n_max, ls.back());
    lengths.push_back(std::move(ls));
  }
  ContourStatistics out;
  out.snapshots = snapshots.size();
  for (std::size_t n = 8; n <= n_max; n += 2) {
    ContourRow row;
    row.n = n;
    for (const auto &ls : lengths) row.count += std::binary_search(ls.begin(), ls.end(), n) ? 1 : 0;
    row.empirical_freq = static_cast<double>(row.count) / static_cast<double>(snapshots.size());
    if (env) row.envelope = env->envelope(n);
    out.rows.push_back(row);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Necklace construction

/// Greedy walk along the closed polygon (vertices in order): from each point the
/// next one is the first point further along the curve at Euclidean distance
/// `step`. A point is only placed if at least `step` of arc remains before the
/// start, so consecutive points (including the closing pair) are >= step apart
/// along the curve.
inline std::vector<Point2> necklace_on_curve(std::span<const Point2> polygon, double step) {
  std::vector<Point2> out;
  const std::size_t nv = polygon.size();
  if (nv < 2 || !(step > 0.0)) return out;
  std::vector<double> seg_len(nv);
  double perimeter = 0.0;
  for (std::size_t i = 0; i < nv; ++i) {
    seg_len[i] = distance<2>(polygon[i], polygon[(i + 1) % nv]);
    perimeter += seg_len[i];
  }
  const double tol = 1e-9 * perimeter;
  Point2 x = polygon[0];
  out.push_back(x);
  std::size_t seg = 0;  // current segment index
  double u = 0.0;       // parameter within the segment
  double arc = 0.0;     // arc position of (seg, u)
  while (true) {
    bool found = false;
    while (seg < nv) {
      const Point2 &P = polygon[seg];
      const Point2 &Q = polygon[(seg + 1) % nv];
      const double dx = Q[0] - P[0], dy = Q[1] - P[1];
      const double px = P[0] - x[0], py = P[1] - x[1];
      const double a = dx * dx + dy * dy;
      const double b = 2.0 * (px * dx + py * dy);
      const double c = px * px + py * py - step * step;
      if (a > 0.0) {
        const double disc = b * b - 4.0 * a * c;
        if (disc >= 0.0) {
          // Roots a rounding error outside [u, 1] (landing on a vertex) are clamped.
          const double raw = (-b + std::sqrt(disc)) / (2.0 * a);
          const double slack = 1e-9 * step / std::sqrt(a);
          if (raw >= u - slack && raw <= 1.0 + slack) {
            const double root = std::clamp(raw, u, 1.0);
            arc += (root - u) * seg_len[seg];
            u = root;
            found = true;
            break;
          }
        }
      }
      arc += (1.0 - u) * seg_len[seg];
      ++seg;
      u = 0.0;
    }
    if (!found || arc > perimeter - step + tol) break;
    const Point2 &P = polygon[seg];
    const Point2 &Q = polygon[(seg + 1) % nv];
    x = {P[0] + u * (Q[0] - P[0]), P[1] + u * (Q[1] - P[1])};
    out.push_back(x);
  }
  return out;
}

/// Polygon through the centres of a contour's cells.
inline std::vector<Point2> contour_polygon(const Contour &contour, const CellGrid &grid) {
  std::vector<Point2> poly;
  poly.reserve(contour.cells.size());
  for (Cell c : contour.cells) poly.push_back(grid.centre(c));
  return poly;
}

/// Necklace point set D for a contour with attraction window [a, a + eps]:
/// consecutive points at distance a + eps/2. Requires n > 2 sqrt(2) a / d.
inline std::vector<Point2> necklace_points(const Contour &contour, const CellGrid &grid, double a, double eps) {
  const double n = static_cast<double>(contour.n());
  if (!(n > 2.0 * std::numbers::sqrt2 * a / grid.d()))
    throw Error(ErrorCode::ContourTooShort, "contour length " + std::to_string(contour.n()) + " <= 2 sqrt(2) a / d");
  const auto poly = contour_polygon(contour, grid);
  return necklace_on_curve(poly, a + eps / 2.0);
}

/// Upper bound floor(q n / (a + eps/2)) on the necklace size.
inline std::size_t necklace_upper_bound(std::size_t n, double q, double a, double eps) {
  return static_cast<std::size_t>(std::floor(q * static_cast<double>(n) / (a + eps / 2.0) + 1e-9));
}

// ---------------------------------------------------------------------------
// Coin covering and b-contours

/// A lattice cell lying entirely inside the closed disc B_r(centre), if any.
/// Among covered cells the one whose farthest corner is nearest wins.
inline std::optional<Cell> coin_covers_cell(const Point2 &centre, double r, const CellGrid &grid) {
  if (!(r > 0.0)) return std::nullopt;
  const Cell mid = grid.lattice_cell(centre);
  const int reach = static_cast<int>(std::ceil(r / grid.q)) + 1;
  std::optional<Cell> best;
  double best_far = std::numeric_limits<double>::infinity();
  const double r2 = r * r;
  for (int l = mid.l - reach; l <= mid.l + reach; ++l) {
    for (int k = mid.k - reach; k <= mid.k + reach; ++k) {
      const Point2 c = grid.centre({k, l});
      double far = 0.0;
      for (int sx = -1; sx <= 1; sx += 2)
        for (int sy = -1; sy <= 1; sy += 2) {
          const Point2 corner{c[0] + sx * grid.q / 2.0, c[1] + sy * grid.q / 2.0};
          far = std::max(far, distance_squared<2>(corner, centre));
        }
      if (far <= r2 && far < best_far) {
        best_far = far;
        best = Cell{k, l};
      }
    }
  }
  return best;
}

/// Whether a closed curve around `origin` stays farther than ell from every
/// point, searched on a fine lattice of step h <= ell/8 centred at `origin`
/// inside [0, box]^2. A site is free when its distance to every point exceeds
/// ell + h, so any reported curve is genuine.
inline bool b_contour_exists(std::span<const Point2> pts, double box, double ell, const Point2 &origin,
                             double fine_step = 0.0) {
  if (!(ell > 0.0)) throw Error(ErrorCode::PreconditionViolated, "ell must be > 0");
  const double h = fine_step > 0.0 ? std::min(fine_step, ell / 8.0) : ell / 8.0;
  const int imin = -static_cast<int>(std::floor(origin[0] / h));
  const int imax = static_cast<int>(std::floor((box - origin[0]) / h));
  const int jmin = -static_cast<int>(std::floor(origin[1] / h));
  const int jmax = static_cast<int>(std::floor((box - origin[1]) / h));
  const int w = imax - imin + 1;
  const int ht = jmax - jmin + 1;
  std::vector<std::uint8_t> blocked(static_cast<std::size_t>(w) * static_cast<std::size_t>(ht), 0);
  auto idx = [&](int i, int j) { return static_cast<std::size_t>(j - jmin) * static_cast<std::size_t>(w) + static_cast<std::size_t>(i - imin); };

  const double reach = ell + h;
  const double reach2 = reach * reach;
  for (const auto &x : pts) {
    const double cx = (x[0] - origin[0]) / h;
    const double cy = (x[1] - origin[1]) / h;
    const int i0 = std::max(imin, static_cast<int>(std::floor(cx - reach / h)));
    const int i1 = std::min(imax, static_cast<int>(std::ceil(cx + reach / h)));
    const int j0 = std::max(jmin, static_cast<int>(std::floor(cy - reach / h)));
    const int j1 = std::min(jmax, static_cast<int>(std::ceil(cy + reach / h)));
    for (int j = j0; j <= j1; ++j)
      for (int i = i0; i <= i1; ++i) {
        const double sx = origin[0] + i * h - x[0];
        const double sy = origin[1] + j * h - x[1];
        if (sx * sx + sy * sy <= reach2) blocked[idx(i, j)] = 1;
      }
  }
  if (imin > 0 || imax < 0 || jmin > 0 || jmax < 0) return false;
  blocked[idx(0, 0)] = 1;

  // A free 4-cycle around the origin exists iff the 8-connected blocked
  // component of the origin stays off the lattice border.
  std::vector<std::uint8_t> seen(blocked.size(), 0);
  std::vector<std::pair<int, int>> stack{{0, 0}};
  seen[idx(0, 0)] = 1;
  while (!stack.empty()) {
    const auto [i, j] = stack.back();
    stack.pop_back();
    if (i == imin || i == imax || j == jmin || j == jmax) return false;
    for (int dj = -1; dj <= 1; ++dj)
      for (int di = -1; di <= 1; ++di) {
        const int ni = i + di, nj = j + dj;
        const auto id = idx(ni, nj);
        if (blocked[id] && !seen[id]) {
          seen[id] = 1;
          stack.emplace_back(ni, nj);
        }
      }
  }
  return true;
}

inline bool b_contour_exists(std::span<const Point2> pts, double ell, const CellGrid &grid, double box,
                             double fine_step = 0.0) {
  return b_contour_exists(pts, box, ell, grid.origin, fine_step);
}

} // namespace gperc
