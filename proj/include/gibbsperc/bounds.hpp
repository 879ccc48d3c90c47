#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "error.hpp"
#include "potential.hpp"

namespace gperc {

/// Volume of the unit ball in R^nu.
inline double unit_ball_volume(int nu) {
  if (nu < 1) throw Error(ErrorCode::PreconditionViolated, "dimension must be >= 1");
  return std::pow(std::numbers::pi, nu / 2.0) / std::tgamma(nu / 2.0 + 1.0);
}

/// Constants of the non-percolation bound.
///
/// `n_B` is kept real-valued, (2 l / f)^nu, as it enters the exponent of the
/// mean bound; the integer offspring support is `max_offspring()`.
struct BoundConstants {
  int nu = 2;
  double kappa = 0.0;
  double ell = 0.0;
  double M = 0.0;
  double n_B = 0.0;
  long m0 = 0;
  double n0 = 0.0;
  double I = 0.0;    // tail integral of psi
  double I_P = 0.0;  // lattice sum of psi over the shells C_m, m >= m0
  double n1 = 0.0;
  double A = 0.0;

  /// Volume of the connection ball, kappa * ell^nu.
  [[nodiscard]] double ball_volume() const { return kappa * std::pow(ell, nu); }
  [[nodiscard]] long max_offspring() const { return static_cast<long>(std::floor(n_B + 1e-9)); }
};

inline BoundConstants bound_constants(const PotentialSpec &p, int nu, double ell) {
  if (!(p.f > 0.0)) throw Error(ErrorCode::PreconditionViolated, "non-percolation bound needs a hard core f > 0");
  if (!(ell > p.f)) throw Error(ErrorCode::PreconditionViolated, "non-percolation bound needs ell > f");
  BoundConstants c;
  c.nu = nu;
  c.kappa = unit_ball_volume(nu);
  c.ell = ell;
  c.M = p.M;
  const double half_core = std::pow(p.f / 2.0, nu);
  c.n_B = std::pow(ell, nu) / half_core;
  c.m0 = static_cast<long>(std::ceil(p.g));
  c.n0 = std::max(0.0, std::floor((std::pow(static_cast<double>(c.m0), nu) - std::pow(ell, nu)) / half_core));
  c.I = tail_integral(p, nu);
  c.I_P = psi_lattice_sum(p, nu, c.m0).value;
  c.n1 = p.M * c.n0 + std::pow(2.0 / p.f, nu) * c.I_P;
  c.A = c.n_B * (p.M * c.n_B + c.n1);
  return c;
}

/// -ln(lambda) - kappa l^nu lambda - ln(kappa l^nu); strictly decreasing in lambda.
inline double lambda_minus_residual(double lambda, const BoundConstants &c) {
  const double vol = c.ball_volume();
  return -std::log(lambda) - vol * lambda - std::log(vol);
}

/// Unique positive root of lambda_minus_residual, by bisection on
/// [1e-15, 10 / (kappa l^nu)] (200 iterations max). Iterates until the bracket
/// stops shrinking, which is well inside the 1e-12 relative tolerance.
inline double lambda_minus(const BoundConstants &c) {
  double lo = 1e-15;
  double hi = 10.0 / c.ball_volume();
  if (lambda_minus_residual(lo, c) <= 0.0)
    throw Error(ErrorCode::OutOfDomain, "ball volume too large to bracket lambda_minus");
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (lambda_minus_residual(mid, c) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

/// Upper bound e^{beta(K n1 + M K^2)} (lambda kappa l^nu)^K / K! on P(#offspring = K).
inline double offspring_count_bound(long K, double lambda, double beta, const BoundConstants &c) {
  const double k = static_cast<double>(K);
  const double log_bound =
      beta * (k * c.n1 + c.M * k * k) + k * std::log(lambda * c.ball_volume()) - std::lgamma(k + 1.0);
  return K == 0 ? 1.0 : std::exp(log_bound);
}

/// lambda kappa l^nu e^{beta n_B n1 + beta n_B^2 M} e^{lambda kappa l^nu}.
inline double offspring_mean_bound(double lambda, double beta, const BoundConstants &c) {
  const double x = lambda * c.ball_volume();
  return x * std::exp(beta * c.A + x);
}

/// Curve on which the mean bound equals one:
/// (-ln lambda - kappa l^nu lambda - ln(kappa l^nu)) / A.
inline double beta_minus(double lambda, const BoundConstants &c) {
  if (!(lambda > 0.0) || !(lambda < lambda_minus(c)))
    throw Error(ErrorCode::OutOfDomain, "beta_minus is defined on (0, lambda_minus)");
  return lambda_minus_residual(lambda, c) / c.A;
}

/// The same curve with the third term written as ln(kappa l^nu / A) instead of
/// ln(kappa l^nu) / A. Only for side-by-side comparison; it does not make the
/// mean bound equal one.
inline double beta_minus_printed(double lambda, const BoundConstants &c) {
  const double vol = c.ball_volume();
  return -std::log(lambda) / c.A - vol * lambda / c.A - std::log(vol / c.A);
}

// ---------------------------------------------------------------------------
// Percolation side

/// G(beta, lambda) = beta m + ln lambda + ln(pi eps^2 / 16).
inline double g_function(double beta, double lambda, double m, double eps) {
  return beta * m + std::log(lambda) + std::log(std::numbers::pi * eps * eps / 16.0);
}

/// Necklace density constant. Strict inequality a + eps/2 < 4d + 2 delta selects
/// the 1/sqrt(2) branch.
inline double alpha_constant(double a, double eps, double d, double delta) {
  const double step = a + eps / 2.0;
  if (step < 4.0 * d + 2.0 * delta) return 1.0 / std::numbers::sqrt2;
  return (2.0 * d + delta) / (step + 2.0 * d + delta);
}

/// The root of g_function(., lambda) = h, before clamping at zero.
inline double beta_plus_unclamped(double lambda, double m, double eps, double h) {
  return (-std::log(lambda) - std::log(std::numbers::pi * eps * eps / 16.0) + h) / m;
}

inline double beta_plus(double lambda, double m, double eps, double h) {
  return std::max(0.0, beta_plus_unclamped(lambda, m, eps, h));
}

/// Number of contours of length n around the origin is at most c^n.
inline constexpr double contour_count_constant = 3.0;

/// Parameters fixing the percolation curve. `a`, `eps` come from the attraction
/// window of the potential at level m with cap delta.
struct ContourParams {
  double m = 0.0;
  double delta = 0.0;
  double a = 0.0;
  double eps = 0.0;
  double d = 0.0;

  [[nodiscard]] double alpha() const { return alpha_constant(a, eps, d, delta); }
  [[nodiscard]] double h() const { return std::log(contour_count_constant) / alpha(); }
  [[nodiscard]] double cell_side() const { return 2.0 * d + delta; }
};

inline ContourParams make_contour_params(const PotentialSpec &p, double m, double delta) {
  if (!(delta > 0.0)) throw Error(ErrorCode::PreconditionViolated, "cell slack delta must be > 0");
  const auto w = attraction_window(p, m, delta);
  return ContourParams{m, delta, w.a, w.eps, p.d};
}

inline double beta_plus_canonical(double lambda, const ContourParams &cp) {
  return beta_plus(lambda, cp.m, cp.eps, cp.h());
}

/// Root of the canonical curve: e^h 16 / (pi eps^2).
inline double lambda_plus(const ContourParams &cp) {
  return std::exp(cp.h()) * 16.0 / (std::numbers::pi * cp.eps * cp.eps);
}

// ---------------------------------------------------------------------------
// Classification

enum class Verdict { NonPercolating, Percolating, Unknown };

inline const char *to_string(Verdict v) {
  switch (v) {
  case Verdict::NonPercolating: return "A-";
  case Verdict::Percolating: return "A+";
  case Verdict::Unknown: return "unknown";
  }
  return "unknown";
}

struct RegionClassification {
  Verdict verdict = Verdict::Unknown;
  std::optional<double> beta_minus_at_lambda;
  std::optional<double> beta_plus_at_lambda;
  /// Hypotheses of the two theorems, so Unknown verdicts can be explained.
  bool hard_core_hypothesis = false;    // f > 0 and ell > f
  bool percolation_hypothesis = false;  // nu = 2 and ell > 2 sqrt(2) d
};

inline bool percolation_hypothesis_holds(const PotentialSpec &p, int nu, double ell) {
  return nu == 2 && ell > 2.0 * std::numbers::sqrt2 * p.d;
}

/// Throws PreconditionViolated naming the failed condition of the percolation theorem.
inline void require_percolation_hypothesis(const PotentialSpec &p, int nu, double ell) {
  if (nu != 2)
    throw Error(ErrorCode::PreconditionViolated, "percolation theorem hypothesis requires nu = 2, got nu = " + std::to_string(nu));
  if (!(ell > 2.0 * std::numbers::sqrt2 * p.d))
    throw Error(ErrorCode::PreconditionViolated,
                "percolation theorem hypothesis requires ell > 2 sqrt(2) d, got ell = " + std::to_string(ell) +
                    ", 2 sqrt(2) d = " + std::to_string(2.0 * std::numbers::sqrt2 * p.d));
}

/// Classifies (lambda, beta). `contour` may be empty when the percolation side
/// is not requested; when it is given, the percolation hypothesis must hold.
/// A point found in both regions is reported as an error.
inline RegionClassification classify(double lambda, double beta, const PotentialSpec &p, int nu, double ell,
                                     const std::optional<ContourParams> &contour) {
  if (!(lambda > 0.0) || !(beta >= 0.0))
    throw Error(ErrorCode::PreconditionViolated, "classify needs lambda > 0 and beta >= 0");
  RegionClassification out;
  out.hard_core_hypothesis = p.f > 0.0 && ell > p.f;
  if (contour) require_percolation_hypothesis(p, nu, ell);
  out.percolation_hypothesis = contour.has_value();

  bool in_minus = false;
  if (out.hard_core_hypothesis) {
    const auto c = bound_constants(p, nu, ell);
    if (lambda < lambda_minus(c)) {
      const double bm = beta_minus(lambda, c);
      out.beta_minus_at_lambda = bm;
      in_minus = beta < bm;
    }
  }
  bool in_plus = false;
  if (out.percolation_hypothesis) {
    const double lp = lambda_plus(*contour);
    const double bp = beta_plus_canonical(lambda, *contour);
    out.beta_plus_at_lambda = bp;
    in_plus = lambda > lp || beta > bp;
  }
  if (in_minus && in_plus)
    throw Error(ErrorCode::PreconditionViolated, "point lies in both A- and A+; curve constants are inconsistent");
  out.verdict = in_minus ? Verdict::NonPercolating : in_plus ? Verdict::Percolating : Verdict::Unknown;
  return out;
}

// ---------------------------------------------------------------------------
// Phase diagram

struct PhaseRow {
  double lambda = 0.0;
  std::optional<double> beta_minus;
  std::optional<double> beta_plus;
  std::optional<double> beta_minus_printed;
  double lambda_minus = std::nan("");
  double lambda_plus = std::nan("");
  /// Curve ordering at this lambda: "ordered" (beta- < beta+), "inverted",
  /// "minus_only", "plus_only" or "none".
  std::string verdict;
};

inline std::vector<PhaseRow> phase_diagram(const std::vector<double> &lambda_grid, const PotentialSpec &p, int nu,
                                           double ell, const std::optional<ContourParams> &contour) {
  if (lambda_grid.empty()) throw Error(ErrorCode::EmptyGrid, "lambda grid is empty");
  for (std::size_t i = 0; i < lambda_grid.size(); ++i) {
    if (!(lambda_grid[i] > 0.0)) throw Error(ErrorCode::ConfigError, "lambda grid must be positive");
    if (i > 0 && !(lambda_grid[i] > lambda_grid[i - 1]))
      throw Error(ErrorCode::ConfigError, "lambda grid must be strictly increasing");
  }
  std::optional<BoundConstants> consts;
  if (p.f > 0.0 && ell > p.f) consts = bound_constants(p, nu, ell);
  if (contour) require_percolation_hypothesis(p, nu, ell);

  const double lm = consts ? lambda_minus(*consts) : std::nan("");
  const double lp = contour ? lambda_plus(*contour) : std::nan("");
  std::vector<PhaseRow> rows;
  rows.reserve(lambda_grid.size());
  for (double lambda : lambda_grid) {
    PhaseRow row;
    row.lambda = lambda;
    row.lambda_minus = lm;
    row.lambda_plus = lp;
    if (consts && lambda < lm) {
      row.beta_minus = beta_minus(lambda, *consts);
      row.beta_minus_printed = beta_minus_printed(lambda, *consts);
    }
    if (contour) row.beta_plus = beta_plus_canonical(lambda, *contour);
    if (row.beta_minus && row.beta_plus)
      row.verdict = *row.beta_minus < *row.beta_plus ? "ordered" : "inverted";
    else if (row.beta_minus)
      row.verdict = "minus_only";
    else if (row.beta_plus)
      row.verdict = "plus_only";
    else
      row.verdict = "none";
    rows.push_back(std::move(row));
  }
  return rows;
}

} // namespace gperc
