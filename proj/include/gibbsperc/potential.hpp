#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <variant>
#include <vector>

#include "error.hpp"

namespace gperc {

/// Pair energy that may be a hard-core hit. The hard-core state is a flag, not
/// an IEEE infinity, so sums short-circuit instead of propagating inf/nan.
class Energy {
public:
  constexpr Energy() = default;
  constexpr explicit Energy(double value) : value_(value) {}

  static constexpr Energy hard_core() {
    Energy e;
    e.hard_core_ = true;
    return e;
  }

  [[nodiscard]] constexpr bool is_hard_core() const { return hard_core_; }
  [[nodiscard]] constexpr bool is_finite() const { return !hard_core_; }

  /// Finite value; +inf for a hard-core hit (only for reporting).
  [[nodiscard]] constexpr double value() const {
    return hard_core_ ? std::numeric_limits<double>::infinity() : value_;
  }

  constexpr Energy &operator+=(Energy other) {
    if (hard_core_) return *this;
    if (other.hard_core_) {
      hard_core_ = true;
      value_ = 0.0;
      return *this;
    }
    value_ += other.value_;
    return *this;
  }

  friend constexpr Energy operator+(Energy a, Energy b) { return a += b; }
  friend constexpr bool operator==(const Energy &, const Energy &) = default;

private:
  double value_ = 0.0;
  bool hard_core_ = false;
};

/// Square well: u0 on (f, d), -well_depth on [d, well_end), 0 beyond.
struct SquareWell {
  double u0 = 0.0;
  double well_depth = 1.0;
  double well_end = 2.0;
};

/// Power tail: u0 on (f, d), -well_depth on [d, g), -amplitude * r^-exponent on [g, inf).
struct PowerTail {
  double u0 = 0.0;
  double well_depth = 1.0;
  double exponent = 4.0;
  double amplitude = 1.0;
};

using PotentialFamily = std::variant<SquareWell, PowerTail>;

/// Radial pair potential with hard core f, sign change at d, tail onset g and
/// depth M. Isotropy and translation invariance hold by construction.
struct PotentialSpec {
  double f = 0.0;
  double d = 1.0;
  double g = 2.0;
  double M = 1.0;
  PotentialFamily family = SquareWell{};

  [[nodiscard]] Energy evaluate(double r) const {
    if (r <= f) return Energy::hard_core();
    return std::visit([&](const auto &fam) { return Energy(profile(fam, r)); }, family);
  }

  /// Positive, non-increasing majorant of -phi on [g, inf).
  [[nodiscard]] double psi(double r) const {
    return std::visit([&](const auto &fam) { return psi_of(fam, r); }, family);
  }

  [[nodiscard]] std::string family_name() const {
    return std::holds_alternative<SquareWell>(family) ? "square_well" : "power_tail";
  }

private:
  [[nodiscard]] double profile(const SquareWell &w, double r) const {
    if (r < d) return w.u0;
    if (r < w.well_end) return -w.well_depth;
    return 0.0;
  }
  [[nodiscard]] double profile(const PowerTail &p, double r) const {
    if (r < d) return p.u0;
    if (r < g) return -p.well_depth;
    return -p.amplitude * std::pow(r, -p.exponent);
  }
  [[nodiscard]] static double psi_of(const SquareWell &w, double r) {
    return r < w.well_end ? std::max(w.well_depth, 0.0) : 0.0;
  }
  [[nodiscard]] static double psi_of(const PowerTail &p, double r) {
    return p.amplitude * std::pow(r, -p.exponent);
  }
};

/// Square well with g at the end of the well (so psi vanishes beyond g) and M = well_depth.
inline PotentialSpec make_square_well(double f, double d, double u0, double well_depth,
                                      double well_end) {
  // M is the magnitude of the well, so a sign error in the depth shows up as a
  // shape violation beyond d rather than as a structural error.
  return PotentialSpec{f, d, well_end, std::abs(well_depth), SquareWell{u0, well_depth, well_end}};
}

inline PotentialSpec make_power_tail(double f, double d, double g, double u0, double well_depth,
                                     double exponent, double amplitude) {
  const double depth = std::max(well_depth, amplitude * std::pow(g, -exponent));
  return PotentialSpec{f, d, g, depth, PowerTail{u0, well_depth, exponent, amplitude}};
}

// ---------------------------------------------------------------------------
// Shape validation

struct ShapeViolation {
  double r = 0.0;
  double value = 0.0;
  std::string expected;
};

struct ValidationReport {
  bool ok = true;
  std::vector<std::string> structural;
  std::vector<ShapeViolation> violations;
};

/// Checks the parameter relations and scans r on a grid up to `horizon`
/// (default 10 g). On (f, d) phi must be >= 0; on [d, inf) it must lie in
/// [-M, 0]; on [g, inf) it must satisfy -phi <= psi. The crossover point d is
/// assigned to the attractive side (the two closed intervals share it).
inline ValidationReport validate_shape(const PotentialSpec &p, double grid_step = 0.0,
                                       double horizon = 0.0) {
  ValidationReport report;
  auto structural = [&](bool cond, const char *msg) {
    if (!cond) report.structural.emplace_back(msg);
  };
  structural(p.f >= 0.0, "hard-core radius f must be >= 0");
  structural(p.d > 0.0, "crossover radius d must be > 0");
  structural(p.d >= p.f, "need d >= f");
  structural(p.g > p.d, "tail onset g must exceed d");
  structural(p.M > 0.0, "depth M must be > 0");
  if (const auto *pt = std::get_if<PowerTail>(&p.family)) {
    structural(pt->exponent > 0.0, "power-tail exponent must be > 0");
    structural(pt->amplitude > 0.0, "power-tail amplitude must be > 0");
  }
  if (const auto *sw = std::get_if<SquareWell>(&p.family)) {
    structural(sw->well_end > p.d, "square well must end beyond d");
  }
  if (!report.structural.empty()) {
    report.ok = false;
    return report;
  }

  if (grid_step <= 0.0) grid_step = (p.g - p.f) / 1e4;
  if (horizon <= 0.0) horizon = 10.0 * p.g;

  auto check = [&](double r) {
    const Energy e = p.evaluate(r);
    if (e.is_hard_core()) {
      report.violations.push_back({r, e.value(), "finite outside the hard core"});
      return;
    }
    const double v = e.value();
    if (r < p.d) {
      if (v < 0.0) report.violations.push_back({r, v, ">= 0 on (f, d)"});
      return;
    }
    if (v > 0.0) report.violations.push_back({r, v, "<= 0 on [d, inf)"});
    if (v < -p.M) report.violations.push_back({r, v, ">= -M"});
    if (r >= p.g && -v > p.psi(r)) report.violations.push_back({r, v, "-phi <= psi on [g, inf)"});
  };

  const auto steps = static_cast<std::size_t>(std::ceil((horizon - p.f) / grid_step));
  for (std::size_t k = 1; k <= steps; ++k) check(p.f + static_cast<double>(k) * grid_step);
  check(p.d);
  check(p.g);
  if (const auto *sw = std::get_if<SquareWell>(&p.family)) check(std::nextafter(sw->well_end, 0.0));

  report.ok = report.violations.empty();
  return report;
}

// ---------------------------------------------------------------------------
// Tail quantities

/// I = int_g^inf r^(nu-1) psi(r) dr, in closed form for the built-in families.
inline double tail_integral(const PotentialSpec &p, int nu) {
  if (const auto *sw = std::get_if<SquareWell>(&p.family)) {
    if (sw->well_end <= p.g || sw->well_depth <= 0.0) return 0.0;
    return sw->well_depth * (std::pow(sw->well_end, nu) - std::pow(p.g, nu)) / nu;
  }
  const auto &pt = std::get<PowerTail>(p.family);
  if (pt.exponent <= nu)
    throw Error(ErrorCode::DivergentTail,
                "power tail exponent " + std::to_string(pt.exponent) + " <= dimension " +
                    std::to_string(nu));
  return pt.amplitude * std::pow(p.g, nu - pt.exponent) / (pt.exponent - nu);
}

struct LatticeTailSum {
  double value = 0.0;      // partial sum plus remainder bound when truncated early
  double partial = 0.0;    // sum of the explicitly evaluated terms
  double remainder = 0.0;  // upper bound on the neglected terms
  std::size_t terms = 0;
};

/// Shell volume polynomial (m+1)^nu - m^nu, so that a shell has volume kappa times this.
inline double shell_polynomial(double m, int nu) { return std::pow(m + 1.0, nu) - std::pow(m, nu); }

/// Sum_{m >= m_start} ((m+1)^nu - m^nu) psi(m), summed directly until an integral
/// bound on the remainder drops below rel_tol of the partial sum. If the term
/// budget runs out the remainder bound is added, so `value` stays an upper bound.
inline LatticeTailSum psi_lattice_sum(const PotentialSpec &p, int nu, long m_start,
                                      double rel_tol = 1e-12,
                                      std::size_t max_terms = 10'000'000) {
  LatticeTailSum out;
  m_start = std::max(m_start, 1L);
  if (const auto *sw = std::get_if<SquareWell>(&p.family)) {
    for (long m = m_start; static_cast<double>(m) < sw->well_end; ++m, ++out.terms)
      out.partial += shell_polynomial(static_cast<double>(m), nu) * p.psi(static_cast<double>(m));
    out.value = out.partial;
    return out;
  }
  const auto &pt = std::get<PowerTail>(p.family);
  if (pt.exponent <= nu)
    throw Error(ErrorCode::DivergentTail, "lattice tail sum diverges for exponent <= dimension");
  // For m >= 1: shell(m) psi(m) <= amp nu 2^(nu-1) m^(nu-1-s), a decreasing function.
  const double coeff = pt.amplitude * nu * std::pow(2.0, nu - 1) / (pt.exponent - nu);
  auto remainder_after = [&](double last) { return coeff * std::pow(last, nu - pt.exponent); };
  long m = m_start;
  for (; out.terms < max_terms; ++m, ++out.terms) {
    const double md = static_cast<double>(m);
    out.partial += shell_polynomial(md, nu) * p.psi(md);
    if (remainder_after(md) < rel_tol * out.partial) break;
  }
  out.remainder = remainder_after(static_cast<double>(m));
  out.value = out.terms >= max_terms ? out.partial + out.remainder : out.partial;
  return out;
}

// ---------------------------------------------------------------------------
// Attraction window

struct AttractionWindow {
  double a = 0.0;
  double eps = 0.0;
};

/// An interval [a, a + eps] with phi <= -m throughout, eps <= cap and a >= d.
/// Uses the first attractive interval beyond d.
inline AttractionWindow attraction_window(const PotentialSpec &p, double m, double cap) {
  if (!(m > 0.0) || !(m < p.M))
    throw Error(ErrorCode::NoWindow, "attraction level must satisfy 0 < m < M");
  if (!(cap > 0.0)) throw Error(ErrorCode::NoWindow, "window cap must be positive");

  double lo = 0.0;
  double hi = 0.0;  // inclusive upper end
  bool found = false;
  if (const auto *sw = std::get_if<SquareWell>(&p.family)) {
    if (sw->well_depth >= m) {
      lo = p.d;
      hi = std::nextafter(sw->well_end, 0.0);
      found = true;
    }
  } else {
    const auto &pt = std::get<PowerTail>(p.family);
    const double reach = std::pow(pt.amplitude / m, 1.0 / pt.exponent) * (1.0 - 1e-12);
    const bool tail_ok = reach >= p.g;
    if (pt.well_depth >= m) {
      lo = p.d;
      hi = tail_ok ? reach : std::nextafter(p.g, 0.0);
      found = true;
    } else if (tail_ok) {
      lo = p.g;
      hi = reach;
      found = true;
    }
  }
  if (!found || hi <= lo)
    throw Error(ErrorCode::NoWindow, "no interval with phi <= -" + std::to_string(m));
  return {lo, std::min(cap, hi - lo)};
}

} // namespace gperc
