#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "configuration.hpp"
#include "error.hpp"
#include "parallel.hpp"
#include "potential.hpp"
#include "rng.hpp"
#include "sampler.hpp"
#include "stats.hpp"

namespace gperc {

/// Union-find with path halving and union by size.
class DisjointSet {
public:
  explicit DisjointSet(std::size_t n) : parent_(n), size_(n, 1) { std::iota(parent_.begin(), parent_.end(), 0u); }

  std::uint32_t find(std::uint32_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  bool unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
    return true;
  }

private:
  std::vector<std::uint32_t> parent_;
  std::vector<std::uint32_t> size_;
};

/// Partition of a point set into l-clusters. Labels are numbered in order of
/// the first point of each cluster.
struct ClusterPartition {
  std::vector<std::uint32_t> labels;
  std::vector<std::size_t> sizes;
  double ell = 0.0;

  [[nodiscard]] std::size_t cluster_count() const { return sizes.size(); }
};

/// l-clusters: points are joined when their distance is <= ell. Candidate
/// pairs come from a hash grid of bin side ell (3^D neighbouring bins).
template <int D>
ClusterPartition clusters(std::span<const Point<D>> pts, double ell) {
  if (!(ell > 0.0)) throw Error(ErrorCode::PreconditionViolated, "connection radius must be > 0");
  ClusterPartition out;
  out.ell = ell;
  const std::size_t n = pts.size();
  if (n == 0) return out;

  DisjointSet ds(n);
  const double ell2 = ell * ell;
  for_each_close_pair<D>(pts, ell, [&](std::uint32_t i, std::uint32_t j) {
    if (distance_squared<D>(pts[i], pts[j]) <= ell2) ds.unite(i, j);
  });

  out.labels.assign(n, 0);
  std::vector<std::uint32_t> root_label(n, std::numeric_limits<std::uint32_t>::max());
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint32_t r = ds.find(static_cast<std::uint32_t>(i));
    if (root_label[r] == std::numeric_limits<std::uint32_t>::max()) {
      root_label[r] = static_cast<std::uint32_t>(out.sizes.size());
      out.sizes.push_back(0);
    }
    out.labels[i] = root_label[r];
    ++out.sizes[root_label[r]];
  }
  return out;
}

/// True iff some cluster has a point within ell of the face x_axis = 0 and a
/// point within ell of the face x_axis = L.
template <int D>
bool crossing(std::span<const Point<D>> pts, const ClusterPartition &part, double box, int axis = 0) {
  std::vector<std::uint8_t> touches(part.cluster_count(), 0);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (pts[i][axis] <= part.ell) touches[part.labels[i]] |= 1;
    if (pts[i][axis] >= box - part.ell) touches[part.labels[i]] |= 2;
  }
  return std::any_of(touches.begin(), touches.end(), [](std::uint8_t t) { return t == 3; });
}

template <int D>
bool crossing(const Configuration<D> &cfg, double ell, int axis = 0) {
  const auto pts = cfg.points();
  return crossing<D>(pts, clusters<D>(pts, ell), cfg.box_side(), axis);
}

/// Labels of the clusters that start within ell of `origin`.
template <int D>
std::vector<std::uint32_t> origin_clusters(std::span<const Point<D>> pts, const ClusterPartition &part,
                                           const Point<D> &origin) {
  std::vector<std::uint32_t> out;
  const double ell2 = part.ell * part.ell;
  for (std::size_t i = 0; i < pts.size(); ++i)
    if (distance_squared<D>(pts[i], origin) <= ell2) out.push_back(part.labels[i]);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

/// True iff a cluster starting within ell of `origin` has points within ell of both faces along `axis`.
template <int D>
bool origin_cluster_crosses(std::span<const Point<D>> pts, const ClusterPartition &part, const Point<D> &origin,
                            double box, int axis = 0) {
  const auto start = origin_clusters<D>(pts, part, origin);
  std::vector<std::uint8_t> touches(part.cluster_count(), 0);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (pts[i][axis] <= part.ell) touches[part.labels[i]] |= 1;
    if (pts[i][axis] >= box - part.ell) touches[part.labels[i]] |= 2;
  }
  return std::any_of(start.begin(), start.end(), [&](std::uint32_t c) { return touches[c] == 3; });
}

/// True iff the cluster of the particle nearest the box centre has a point
/// within ell of any face.
template <int D>
bool centre_reaches_boundary(std::span<const Point<D>> pts, const ClusterPartition &part, double box) {
  if (pts.empty()) return false;
  Point<D> centre{};
  centre.fill(box / 2.0);
  std::size_t nearest = 0;
  for (std::size_t i = 1; i < pts.size(); ++i)
    if (distance_squared<D>(pts[i], centre) < distance_squared<D>(pts[nearest], centre)) nearest = i;
  const auto target = part.labels[nearest];
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (part.labels[i] != target) continue;
    for (int a = 0; a < D; ++a)
      if (pts[i][a] <= part.ell || pts[i][a] >= box - part.ell) return true;
  }
  return false;
}

// ---------------------------------------------------------------------------
// Cluster-size statistics

struct ClusterSizeStats {
  double size_biased_mean = 0.0;  // mean size of the cluster of a uniformly chosen particle
  std::size_t max = 0;
  std::size_t particles = 0;      // particles contributing to the mean
  std::map<std::size_t, std::size_t> histogram;  // cluster size -> number of clusters
};

/// Restricts the size-biased mean to particles at distance >= margin from
/// every face of the box [0, box]^D, which removes the free-boundary deficit.
struct InteriorWindow {
  double box = 0.0;
  double margin = 0.0;
};

template <int D>
ClusterSizeStats mean_cluster_size(std::span<const std::vector<Point<D>>> snapshots, double ell,
                                   std::optional<InteriorWindow> window = std::nullopt) {
  if (snapshots.empty()) throw Error(ErrorCode::EmptyInput, "mean_cluster_size needs at least one snapshot");
  ClusterSizeStats out;
  double weighted = 0.0;
  for (const auto &pts : snapshots) {
    const auto part = clusters<D>(std::span<const Point<D>>(pts), ell);
    for (std::size_t s : part.sizes) {
      ++out.histogram[s];
      out.max = std::max(out.max, s);
    }
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (window) {
        bool inside = true;
        for (int a = 0; a < D; ++a)
          inside = inside && pts[i][a] >= window->margin && pts[i][a] <= window->box - window->margin;
        if (!inside) continue;
      }
      weighted += static_cast<double>(part.sizes[part.labels[i]]);
      ++out.particles;
    }
  }
  out.size_biased_mean = out.particles == 0 ? 0.0 : weighted / static_cast<double>(out.particles);
  return out;
}

template <int D>
ClusterSizeStats mean_cluster_size(std::span<const Snapshot<D>> snapshots, double ell,
                                   std::optional<InteriorWindow> window = std::nullopt) {
  std::vector<std::vector<Point<D>>> pts;
  pts.reserve(snapshots.size());
  for (const auto &s : snapshots) pts.push_back(s.points);
  return mean_cluster_size<D>(std::span<const std::vector<Point<D>>>(pts), ell, window);
}

// ---------------------------------------------------------------------------
// Percolation-function estimate

enum class PercolationProxy { Crossing, CentreToBoundary };

struct ThetaEstimate {
  double theta_hat = 0.0;
  Interval ci95;
  std::size_t successes = 0;
  std::size_t replicas = 0;
  double mean_cluster_size = 0.0;
  std::string caveat =
      "finite box with empty boundary condition; theta is estimated by a box-crossing proxy, not infinite-volume "
      "percolation";
};

/// Runs `replicas` independent chains (seed of replica i derived from
/// mc.seed and i), each for burn_in + n_sweeps sweeps, and reports the share
/// whose final configuration percolates according to `proxy`.
template <int D>
ThetaEstimate theta_estimate(const McParams &mc, const PotentialSpec &p, double ell, std::size_t replicas,
                             unsigned threads = 1, PercolationProxy proxy = PercolationProxy::Crossing,
                             int axis = 0) {
  if (replicas == 0) throw Error(ErrorCode::ConfigError, "replicas must be >= 1");
  validate_params(mc, p);
  std::vector<std::uint8_t> hit(replicas, 0);
  std::vector<std::vector<Point<D>>> finals(replicas);
  parallel_for(replicas, threads, [&](std::size_t r) {
    McParams local = mc;
    local.seed = stream_seed(mc.seed, r);
    const auto cfg = equilibrated_configuration<D>(local, p);
    const auto pts = cfg.points();
    const auto part = clusters<D>(pts, ell);
    hit[r] = proxy == PercolationProxy::Crossing ? crossing<D>(pts, part, cfg.box_side(), axis)
                                                 : centre_reaches_boundary<D>(pts, part, cfg.box_side());
    finals[r].assign(pts.begin(), pts.end());
  });
  ThetaEstimate out;
  out.replicas = replicas;
  out.successes = static_cast<std::size_t>(std::count(hit.begin(), hit.end(), 1));
  out.theta_hat = static_cast<double>(out.successes) / static_cast<double>(replicas);
  out.ci95 = wilson_interval(out.successes, replicas);
  out.mean_cluster_size =
      mean_cluster_size<D>(std::span<const std::vector<Point<D>>>(finals), ell).size_biased_mean;
  return out;
}

} // namespace gperc
