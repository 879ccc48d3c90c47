#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <variant>
#include <vector>

#include "configuration.hpp"
#include "error.hpp"
#include "potential.hpp"
#include "rng.hpp"

namespace gperc {

struct MoveMix {
  double birth = 0.35;
  double death = 0.35;
  double translate = 0.30;
};

/// Parameters of one grand-canonical chain in the box [0, L]^D with empty
/// boundary condition.
struct McParams {
  double lambda = 1.0;
  double beta = 0.0;
  double box = 10.0;
  std::uint64_t seed = 1;
  std::size_t n_sweeps = 100;
  std::size_t burn_in = 100;
  std::size_t thin = 1;
  MoveMix move_mix{};
  double r_cut = 0.0;  // 0 selects default_cutoff()
};

/// Radius beyond which psi < 1e-6 M, kept in [g, max(g, L/2)].
inline double default_cutoff(const PotentialSpec &p, double box) {
  double raw = p.g;
  if (const auto *sw = std::get_if<SquareWell>(&p.family)) {
    raw = std::max(p.g, sw->well_end);
  } else {
    const auto &pt = std::get<PowerTail>(p.family);
    raw = std::max(p.g, std::pow(pt.amplitude / (1e-6 * p.M), 1.0 / pt.exponent));
  }
  return std::max(p.g, std::min(raw, box / 2.0));
}

inline void validate_params(const McParams &mc, const PotentialSpec &p) {
  auto fail = [](const std::string &msg) { throw Error(ErrorCode::ConfigError, msg); };
  if (!(mc.lambda > 0.0)) fail("lambda must be > 0");
  if (!(mc.beta >= 0.0)) fail("beta must be >= 0");
  if (!(mc.box > 0.0)) fail("box side must be > 0");
  if (mc.thin == 0) fail("thinning interval must be >= 1");
  const auto &mm = mc.move_mix;
  if (mm.birth < 0.0 || mm.death < 0.0 || mm.translate < 0.0) fail("move probabilities must be >= 0");
  if (std::abs(mm.birth + mm.death + mm.translate - 1.0) > 1e-9) fail("move probabilities must sum to 1");
  if (!(mm.birth > 0.0) || !(mm.death > 0.0)) fail("birth and death probabilities must both be positive");
  if (mc.r_cut != 0.0 && mc.r_cut < p.g) fail("r_cut must be >= g");
}

/// Sum of phi(|x - y|) over points y within r_cut of x, skipping index `skip`.
/// Short-circuits on the first hard-core hit.
template <int D>
Energy local_energy(const Configuration<D> &cfg, const Point<D> &x, const PotentialSpec &p, double r_cut,
                    std::size_t skip = std::numeric_limits<std::size_t>::max()) {
  const double rc2 = r_cut * r_cut;
  const double f2 = p.f * p.f;
  Energy total;
  bool hit = false;
  cfg.index().for_each_near(x, [&](std::uint32_t id) {
    if (hit || id == skip) return;
    const double r2 = distance_squared<D>(x, cfg[id]);
    if (r2 > rc2) return;
    if (r2 <= f2) {
      hit = true;
      return;
    }
    total += p.evaluate(std::sqrt(r2));
  });
  return hit ? Energy::hard_core() : total;
}

/// Total energy with each unordered pair within r_cut counted once.
template <int D>
Energy total_energy(const Configuration<D> &cfg, const PotentialSpec &p, double r_cut) {
  Energy total;
  for (std::size_t i = 0; i < cfg.size() && total.is_finite(); ++i) {
    cfg.index().for_each_near(cfg[i], [&](std::uint32_t j) {
      if (j <= i || total.is_hard_core()) return;
      const double r = distance<D>(cfg[i], cfg[j]);
      if (r <= r_cut) total += p.evaluate(r);
    });
  }
  return total;
}

/// True when every pair is farther apart than f; uses the cell index.
template <int D>
bool hard_core_respected(const Configuration<D> &cfg, double f) {
  if (f <= 0.0) return true;
  const double f2 = f * f;
  for (std::size_t i = 0; i < cfg.size(); ++i) {
    bool ok = true;
    cfg.index().for_each_near(cfg[i], [&](std::uint32_t j) {
      if (j != i && distance_squared<D>(cfg[i], cfg[j]) <= f2) ok = false;
    });
    if (!ok) return false;
  }
  return true;
}

enum class MoveKind { Birth = 0, Death = 1, Translate = 2 };

inline const char *to_string(MoveKind k) {
  switch (k) {
  case MoveKind::Birth: return "birth";
  case MoveKind::Death: return "death";
  case MoveKind::Translate: return "translate";
  }
  return "?";
}

struct StepOutcome {
  MoveKind kind = MoveKind::Birth;
  bool accepted = false;
  double delta_h = 0.0;  // +inf for a hard-core hit
};

struct MoveStats {
  std::array<std::uint64_t, 3> attempted{};
  std::array<std::uint64_t, 3> accepted{};

  [[nodiscard]] double rate(MoveKind k) const {
    const auto i = static_cast<std::size_t>(k);
    return attempted[i] == 0 ? 0.0 : static_cast<double>(accepted[i]) / static_cast<double>(attempted[i]);
  }
};

/// Metropolis-Hastings ratio for inserting a point with energy change dh into n points.
inline double birth_ratio(std::size_t n, double dh, double lambda, double beta, double volume, const MoveMix &mm) {
  return (mm.death / mm.birth) * lambda * volume / static_cast<double>(n + 1) * std::exp(-beta * dh);
}

/// Metropolis-Hastings ratio for deleting one of n points with energy change dh.
inline double death_ratio(std::size_t n, double dh, double lambda, double beta, double volume, const MoveMix &mm) {
  return (mm.birth / mm.death) * static_cast<double>(n) / (lambda * volume) * std::exp(-beta * dh);
}

/// Grand-canonical birth/death/translate sampler of the finite-volume Gibbs
/// density with empty boundary condition. Strictly sequential.
template <int D>
class GibbsSampler {
public:
  GibbsSampler(const PotentialSpec &p, const McParams &mc) : pot_(p), mc_(mc), rng_(mc.seed) {
    validate_params(mc_, pot_);
    r_cut_ = mc_.r_cut > 0.0 ? mc_.r_cut : default_cutoff(pot_, mc_.box);
    cfg_ = Configuration<D>(mc_.box, r_cut_);
    translate_radius_ = pot_.f > 0.0 ? pot_.f : pot_.d / 2.0;
    volume_ = cfg_.volume();
  }

  [[nodiscard]] const Configuration<D> &configuration() const { return cfg_; }
  [[nodiscard]] double energy() const { return energy_; }
  [[nodiscard]] double r_cut() const { return r_cut_; }
  [[nodiscard]] const MoveStats &stats() const { return stats_; }
  [[nodiscard]] const McParams &params() const { return mc_; }

  /// Moves per sweep: max(n, ceil(lambda |V|), 1), fixed at the start of the
  /// sweep, or the frozen value once freeze_sweep_length() was called.
  [[nodiscard]] std::size_t sweep_length() const {
    if (frozen_sweep_length_ > 0) return frozen_sweep_length_;
    const auto expected = static_cast<std::size_t>(std::ceil(mc_.lambda * volume_));
    return std::max<std::size_t>({cfg_.size(), expected, 1});
  }

  /// Pins the sweep length to its current value. Sampling with a length that
  /// tracks n makes the snapshot times depend on the sampled states, which
  /// biases the snapshots (visibly so for the particle count).
  void freeze_sweep_length() { frozen_sweep_length_ = sweep_length(); }

  StepOutcome step() {
    const double u = rng_.uniform();
    const auto &mm = mc_.move_mix;
    StepOutcome out;
    if (u < mm.birth) {
      out = try_birth();
    } else if (u < mm.birth + mm.death) {
      out = try_death();
    } else {
      out = try_translate();
    }
    const auto k = static_cast<std::size_t>(out.kind);
    ++stats_.attempted[k];
    if (out.accepted) {
      ++stats_.accepted[k];
      energy_ += out.delta_h;
    }
    return out;
  }

  void sweep() {
    const std::size_t n = sweep_length();
    for (std::size_t i = 0; i < n; ++i) step();
  }

  /// Places a point directly (setup and tests); returns false on a hard-core clash.
  bool insert(const Point<D> &x) {
    const Energy e = local_energy<D>(cfg_, x, pot_, r_cut_);
    if (e.is_hard_core() || !cfg_.contains(x)) return false;
    cfg_.add(x);
    energy_ += e.value();
    return true;
  }

private:
  Point<D> uniform_point() {
    Point<D> x{};
    for (int i = 0; i < D; ++i) x[i] = rng_.uniform(0.0, mc_.box);
    return x;
  }

  Point<D> ball_displacement() {
    while (true) {
      Point<D> v{};
      double r2 = 0.0;
      for (int i = 0; i < D; ++i) {
        v[i] = rng_.uniform(-1.0, 1.0);
        r2 += v[i] * v[i];
      }
      if (r2 <= 1.0) {
        for (auto &c : v) c *= translate_radius_;
        return v;
      }
    }
  }

  bool accept(double ratio) { return ratio >= 1.0 || rng_.uniform() < ratio; }

  StepOutcome try_birth() {
    StepOutcome out{MoveKind::Birth, false, 0.0};
    const Point<D> x = uniform_point();
    const Energy e = local_energy<D>(cfg_, x, pot_, r_cut_);
    if (e.is_hard_core()) {
      out.delta_h = e.value();
      return out;
    }
    out.delta_h = e.value();
    if (accept(birth_ratio(cfg_.size(), out.delta_h, mc_.lambda, mc_.beta, volume_, mc_.move_mix))) {
      cfg_.add(x);
      out.accepted = true;
    }
    return out;
  }

  StepOutcome try_death() {
    StepOutcome out{MoveKind::Death, false, 0.0};
    const std::size_t n = cfg_.size();
    if (n == 0) return out;
    const std::size_t i = rng_.below(n);
    out.delta_h = -local_energy<D>(cfg_, cfg_[i], pot_, r_cut_, i).value();
    if (accept(death_ratio(n, out.delta_h, mc_.lambda, mc_.beta, volume_, mc_.move_mix))) {
      cfg_.remove(i);
      out.accepted = true;
    }
    return out;
  }

  StepOutcome try_translate() {
    StepOutcome out{MoveKind::Translate, false, 0.0};
    const std::size_t n = cfg_.size();
    if (n == 0) return out;
    const std::size_t i = rng_.below(n);
    Point<D> to = cfg_[i];
    const auto disp = ball_displacement();
    for (int k = 0; k < D; ++k) to[k] += disp[k];
    if (!cfg_.contains(to)) return out;
    const Energy e_new = local_energy<D>(cfg_, to, pot_, r_cut_, i);
    if (e_new.is_hard_core()) {
      out.delta_h = e_new.value();
      return out;
    }
    const double e_old = local_energy<D>(cfg_, cfg_[i], pot_, r_cut_, i).value();
    out.delta_h = e_new.value() - e_old;
    if (accept(std::exp(-mc_.beta * out.delta_h))) {
      cfg_.move(i, to);
      out.accepted = true;
    }
    return out;
  }

  PotentialSpec pot_;
  McParams mc_;
  Xoshiro256 rng_;
  Configuration<D> cfg_;
  double r_cut_ = 0.0;
  double translate_radius_ = 0.0;
  double volume_ = 0.0;
  double energy_ = 0.0;
  std::size_t frozen_sweep_length_ = 0;
  MoveStats stats_;
};

template <int D>
struct Snapshot {
  std::size_t sweep = 0;
  std::vector<Point<D>> points;
};

struct ChainDiagnostics {
  MoveStats stats;
  std::vector<double> density;  // per sweep, n / |V|
  std::vector<double> energy;   // per sweep, accumulated energy
  double r_cut = 0.0;
  /// Bound on |neglected tail energy| per particle: (2/f)^nu times the psi lattice
  /// sum beyond r_cut. NaN without a hard core.
  double tail_energy_bound = std::nan("");
  double final_energy_drift = 0.0;  // |accumulated - recomputed| at the end
  std::string rng = std::string(Xoshiro256::name);
};

template <int D>
struct ChainResult {
  std::vector<Snapshot<D>> snapshots;
  ChainDiagnostics diagnostics;
};

inline double neglected_tail_bound(const PotentialSpec &p, int nu, double r_cut) {
  if (p.f <= 0.0) return std::nan("");
  // A square well has nothing beyond its end.
  if (std::holds_alternative<SquareWell>(p.family) && r_cut >= p.g) return 0.0;
  const auto sum = psi_lattice_sum(p, nu, static_cast<long>(std::floor(r_cut)));
  return std::pow(2.0 / p.f, nu) * sum.value;
}

/// Runs burn_in + n_sweeps sweeps from the empty configuration. Snapshots are
/// taken every `thin` sweeps after burn-in; the sweep length is frozen when
/// burn-in ends. If `on_snapshot` is set, snapshots
/// are streamed to it instead of being stored.
template <int D>
ChainResult<D> run_chain(const McParams &mc, const PotentialSpec &p,
                         const std::function<void(const Snapshot<D> &)> &on_snapshot = {}) {
  GibbsSampler<D> sampler(p, mc);
  ChainResult<D> out;
  auto &diag = out.diagnostics;
  diag.r_cut = sampler.r_cut();
  diag.tail_energy_bound = neglected_tail_bound(p, D, sampler.r_cut());
  const std::size_t total = mc.burn_in + mc.n_sweeps;
  diag.density.reserve(total);
  diag.energy.reserve(total);
  for (std::size_t s = 1; s <= total; ++s) {
    if (s == mc.burn_in + 1) sampler.freeze_sweep_length();
    sampler.sweep();
    diag.density.push_back(static_cast<double>(sampler.configuration().size()) / sampler.configuration().volume());
    diag.energy.push_back(sampler.energy());
    if (s > mc.burn_in && (s - mc.burn_in) % mc.thin == 0) {
      const auto pts = sampler.configuration().points();
      Snapshot<D> snap{s, std::vector<Point<D>>(pts.begin(), pts.end())};
      if (on_snapshot)
        on_snapshot(snap);
      else
        out.snapshots.push_back(std::move(snap));
    }
  }
  diag.stats = sampler.stats();
  diag.final_energy_drift =
      std::abs(sampler.energy() - total_energy<D>(sampler.configuration(), p, sampler.r_cut()).value());
  return out;
}

/// Final configuration of a chain run for burn_in + n_sweeps sweeps.
template <int D>
Configuration<D> equilibrated_configuration(const McParams &mc, const PotentialSpec &p) {
  GibbsSampler<D> sampler(p, mc);
  const std::size_t total = mc.burn_in + mc.n_sweeps;
  for (std::size_t s = 0; s < total; ++s) {
    if (s == mc.burn_in) sampler.freeze_sweep_length();
    sampler.sweep();
  }
  return sampler.configuration();
}

} // namespace gperc
