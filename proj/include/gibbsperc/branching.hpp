#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include "bounds.hpp"
#include "parallel.hpp"
#include "rng.hpp"
#include "stats.hpp"

namespace gperc {

/// Offspring distribution on {0, ..., n_B} obtained from the offspring-count
/// bound: p_K = min(1, bound(K)) for K >= 1 and p_0 takes what is left.
struct OffspringLaw {
  std::vector<double> masses;  // masses[K] = P(K offspring)
  double mean = 0.0;
  // sum_{K>=1} min(1, bound(K)) >= 1: masses were rescaled and the law no
  // longer dominates, so extinction checks do not apply.
  bool supercritical_by_bound = false;
  double lambda = 0.0;
  double beta = 0.0;
  BoundConstants constants;

  [[nodiscard]] std::size_t max_offspring() const { return masses.empty() ? 0 : masses.size() - 1; }
};

namespace detail {
inline double law_mean(const std::vector<double> &masses) {
  double m = 0.0;
  for (std::size_t k = 1; k < masses.size(); ++k) m += static_cast<double>(k) * masses[k];
  return m;
}
} // namespace detail

/// Builds a law directly from masses (normalised if they do not sum to one).
inline OffspringLaw make_offspring_law(std::vector<double> masses) {
  if (masses.empty()) throw Error(ErrorCode::EmptyInput, "offspring law needs at least one mass");
  double total = 0.0;
  for (double p : masses) {
    if (!(p >= 0.0)) throw Error(ErrorCode::PreconditionViolated, "offspring masses must be >= 0");
    total += p;
  }
  if (!(total > 0.0)) throw Error(ErrorCode::PreconditionViolated, "offspring masses sum to zero");
  for (double &p : masses) p /= total;
  OffspringLaw law;
  law.masses = std::move(masses);
  law.mean = detail::law_mean(law.masses);
  return law;
}

inline OffspringLaw dominating_offspring_law(double lambda, double beta, const BoundConstants &c) {
  OffspringLaw law;
  law.lambda = lambda;
  law.beta = beta;
  law.constants = c;
  const long kmax = c.max_offspring();
  law.masses.assign(static_cast<std::size_t>(std::max(0L, kmax)) + 1, 0.0);
  double tail = 0.0;
  for (long k = 1; k <= kmax; ++k) {
    const double p = std::min(1.0, offspring_count_bound(k, lambda, beta, c));
    law.masses[static_cast<std::size_t>(k)] = p;
    tail += p;
  }
  if (tail >= 1.0) {
    law.supercritical_by_bound = true;
    law.masses[0] = 0.0;
    for (double &p : law.masses) p /= tail;
  } else {
    law.masses[0] = 1.0 - tail;
  }
  law.mean = detail::law_mean(law.masses);
  return law;
}

struct GwRun {
  bool extinct = false;
  std::uint64_t total_size = 0;   // individuals ever born, ancestor included
  std::uint64_t generations = 0;  // non-empty generations, ancestor's included
};

/// Galton-Watson process from one ancestor. Stops as not extinct once
/// `max_generations` generations were alive or the population exceeds
/// `max_population`.
inline GwRun simulate_gw(const OffspringLaw &law, std::uint64_t max_generations, Xoshiro256 &rng,
                         std::uint64_t max_population = 10'000'000) {
  std::vector<double> cdf(law.masses.size());
  double acc = 0.0;
  for (std::size_t k = 0; k < law.masses.size(); ++k) cdf[k] = (acc += law.masses[k]);
  auto draw = [&] {
    const double u = rng.uniform() * acc;
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    return static_cast<std::uint64_t>(std::min<std::ptrdiff_t>(it - cdf.begin(), static_cast<std::ptrdiff_t>(cdf.size()) - 1));
  };

  GwRun run;
  std::uint64_t alive = 1;
  run.total_size = 1;
  while (alive > 0) {
    ++run.generations;
    if (run.generations >= max_generations || alive > max_population) return run;
    std::uint64_t next = 0;
    for (std::uint64_t i = 0; i < alive; ++i) next += draw();
    alive = next;
    run.total_size += next;
  }
  run.extinct = true;
  return run;
}

struct GwSummary {
  bool skipped = false;  // law flagged or mean >= 1
  double law_mean = 0.0;
  std::size_t replicas = 0;
  double extinction_rate = 0.0;
  double mean_total_size = 0.0;
  double total_size_se = 0.0;
  double size_bound = std::numeric_limits<double>::infinity();  // 1 / (1 - mean)
  bool size_bound_check = false;  // mean_total_size <= size_bound + 3 se
};

/// Monte-Carlo extinction rate and mean total progeny of the law, replica i
/// using stream i of `seed`.
inline GwSummary extinction_and_size(const OffspringLaw &law, std::size_t replicas, std::uint64_t seed,
                                     unsigned threads = 1, std::uint64_t max_generations = 10'000) {
  GwSummary out;
  out.law_mean = law.mean;
  out.replicas = replicas;
  if (law.supercritical_by_bound || !(law.mean < 1.0) || replicas == 0) {
    out.skipped = true;
    return out;
  }
  out.size_bound = 1.0 / (1.0 - law.mean);
  std::vector<double> sizes(replicas);
  std::vector<std::uint8_t> extinct(replicas);
  parallel_for(replicas, threads, [&](std::size_t r) {
    Xoshiro256 rng(stream_seed(seed, r));
    const auto run = simulate_gw(law, max_generations, rng);
    sizes[r] = static_cast<double>(run.total_size);
    extinct[r] = run.extinct ? 1 : 0;
  });
  const auto ms = mean_se(sizes);
  out.extinction_rate =
      static_cast<double>(std::count(extinct.begin(), extinct.end(), 1)) / static_cast<double>(replicas);
  out.mean_total_size = ms.mean;
  out.total_size_se = ms.se;
  out.size_bound_check = ms.mean <= out.size_bound + 3.0 * ms.se;
  return out;
}

inline GwSummary extinction_and_size(double lambda, double beta, const BoundConstants &c, std::size_t replicas,
                                     std::uint64_t seed, unsigned threads = 1) {
  return extinction_and_size(dominating_offspring_law(lambda, beta, c), replicas, seed, threads);
}

} // namespace gperc
