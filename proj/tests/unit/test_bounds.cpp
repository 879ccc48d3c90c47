#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "gibbsperc/bounds.hpp"
#include "gibbsperc/rng.hpp"

using namespace gperc;
using Catch::Approx;

namespace {

/// Constants with chosen ball volume and A, bypassing the potential.
BoundConstants synthetic(double ball_volume, double A) {
  BoundConstants c;
  c.nu = 1;
  c.kappa = 2.0;
  c.ell = ball_volume / 2.0;
  c.A = A;
  c.M = 1.0;
  c.n_B = 4.0;
  c.n1 = A / c.n_B - c.M * c.n_B;  // so that n_B (M n_B + n1) = A
  return c;
}

bool has_code(const Error &e, ErrorCode c) { return e.code() == c; }

} // namespace

TEST_CASE("unit ball volumes", "[bounds]") {
  CHECK(unit_ball_volume(1) == Approx(2.0));
  CHECK(unit_ball_volume(2) == Approx(std::numbers::pi));
  CHECK(unit_ball_volume(3) == Approx(4.0 * std::numbers::pi / 3.0));
}

TEST_CASE("bound constants of the reference square well", "[bounds]") {
  for (double M : {1.0, 2.5}) {
    const auto p = make_square_well(1.0, 2.0, 0.5, M, 3.0);
    const auto c = bound_constants(p, 2, 2.0);
    CHECK(c.m0 == 3);
    CHECK(c.n0 == 20.0);
    CHECK(c.I_P == 0.0);
    CHECK(c.n1 == 20.0 * M);
    CHECK(c.n_B == 16.0);
    CHECK(c.max_offspring() == 16);
    CHECK(c.A == 576.0 * M);
  }
}

TEST_CASE("n0 is clamped at zero when ell exceeds m0", "[bounds]") {
  const auto c = bound_constants(make_square_well(1.0, 2.0, 0.5, 1.0, 3.0), 2, 4.0);
  CHECK(c.n0 == 0.0);
  CHECK(c.n1 == 0.0);
}

TEST_CASE("positive constants and n_B >= 2^nu", "[bounds][property]") {
  Xoshiro256 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const int nu = 1 + static_cast<int>(rng.below(3));
    const double f = rng.uniform(0.2, 1.5);
    const double d = f + rng.uniform(0.1, 1.0);
    const double well_end = d + rng.uniform(0.2, 2.0);
    const double ell = f + rng.uniform(0.01, 3.0);
    const auto c = bound_constants(make_square_well(f, d, 0.5, rng.uniform(0.1, 3.0), well_end), nu, ell);
    CHECK(c.kappa > 0.0);
    CHECK(c.n_B >= std::pow(2.0, nu));
    CHECK(c.A > 0.0);
    CHECK(c.n1 >= 0.0);
    CHECK(c.n0 >= 0.0);
  }
}

TEST_CASE("bound constants preconditions", "[bounds]") {
  CHECK_THROWS_AS(bound_constants(make_square_well(0.0, 1.0, 0.0, 1.0, 2.0), 2, 2.0), Error);
  CHECK_THROWS_AS(bound_constants(make_square_well(1.0, 2.0, 0.0, 1.0, 3.0), 2, 1.0), Error);
  const auto diverging = make_power_tail(1.0, 2.0, 3.0, 0.0, 1.0, 2.0, 1.0);
  CHECK_THROWS_MATCHES(bound_constants(diverging, 2, 2.0), Error,
                       Catch::Matchers::Predicate<Error>([](const Error &e) { return has_code(e, ErrorCode::DivergentTail); }));
}

TEST_CASE("power-tail constants include the lattice sum", "[bounds]") {
  const auto p = make_power_tail(1.0, 2.0, 3.0, 0.0, 1.0, 5.0, 50.0);
  const auto c = bound_constants(p, 2, 2.0);
  CHECK(c.I_P > 0.0);
  CHECK(c.n1 == Approx(c.M * c.n0 + 4.0 * c.I_P));
  // I_P against the integral comparison: sum_{m>=3} t(m) <= t(3) + int_3^inf t.
  double direct = 0.0;
  for (int m = 3; m < 200000; ++m) direct += shell_polynomial(m, 2) * p.psi(m);
  CHECK(c.I_P == Approx(direct).epsilon(1e-9));
}

TEST_CASE("lambda_minus", "[bounds]") {
  SECTION("ball volume 1 gives the omega constant") {
    const auto c = synthetic(1.0, 1.0);
    CHECK(lambda_minus(c) == Approx(0.5671432904097838).epsilon(1e-12));
    CHECK(std::abs(lambda_minus_residual(lambda_minus(c), c)) < 1e-10);
  }
  SECTION("ball volume 10 gives a root below 0.1") {
    const auto c = synthetic(10.0, 1.0);
    CHECK(lambda_minus(c) < 0.1);
    CHECK(std::abs(lambda_minus_residual(lambda_minus(c), c)) < 1e-10);
  }
}

TEST_CASE("beta_minus", "[bounds]") {
  SECTION("A = 1, ball volume 1, lambda = 1/e") {
    const auto c = synthetic(1.0, 1.0);
    CHECK(beta_minus(std::exp(-1.0), c) == Approx(1.0 - std::exp(-1.0)).epsilon(1e-12));
  }
  SECTION("vanishes at lambda_minus") {
    const auto c = bound_constants(make_square_well(1.0, 2.0, 0.5, 1.0, 3.0), 2, 2.0);
    const double lm = lambda_minus(c);
    const double b = beta_minus(lm - 1e-12, c);
    CHECK(b >= 0.0);
    CHECK(b < 1e-9);
  }
  SECTION("outside the domain") {
    const auto c = synthetic(1.0, 1.0);
    CHECK_THROWS_MATCHES(beta_minus(0.6, c), Error,
                         Catch::Matchers::Predicate<Error>([](const Error &e) { return has_code(e, ErrorCode::OutOfDomain); }));
    CHECK_THROWS_AS(beta_minus(0.0, c), Error);
  }
  SECTION("increases without bound as lambda decreases") {
    const auto c = synthetic(1.0, 3.0);
    CHECK(beta_minus(1e-3, c) < beta_minus(1e-6, c));
    CHECK(beta_minus(1e-300, c) > 200.0);
  }
}

TEST_CASE("mean bound equals one on the beta_minus curve", "[bounds][property]") {
  Xoshiro256 rng(7);
  for (int trial = 0; trial < 500; ++trial) {
    const int nu = 1 + static_cast<int>(rng.below(3));
    const double f = rng.uniform(0.3, 1.2);
    const auto p = make_square_well(f, f + rng.uniform(0.1, 1.0), 0.2, rng.uniform(0.1, 2.0), f + rng.uniform(1.2, 3.0));
    const auto c = bound_constants(p, nu, f * rng.uniform(1.05, 3.0));
    const double lm = lambda_minus(c);
    const double lambda = lm * rng.uniform(1e-3, 0.999);
    const double b = beta_minus(lambda, c);
    CHECK(b > 0.0);
    CHECK(std::abs(offspring_mean_bound(lambda, b, c) - 1.0) < 1e-9);
    // Strictly inside the region the bound is below one.
    CHECK(offspring_mean_bound(lambda, 0.5 * b, c) < 1.0);
  }
}

TEST_CASE("printed beta_minus form differs from the consistent one", "[bounds]") {
  const auto c = bound_constants(make_square_well(1.0, 2.0, 0.5, 1.0, 3.0), 2, 2.0);
  const double lambda = 0.5 * lambda_minus(c);
  const double printed = beta_minus_printed(lambda, c);
  CHECK(printed != Approx(beta_minus(lambda, c)));
  CHECK(std::abs(offspring_mean_bound(lambda, printed, c) - 1.0) > 1e-3);
}

TEST_CASE("offspring count bound", "[bounds]") {
  const auto c = bound_constants(make_square_well(1.0, 2.0, 0.5, 1.0, 3.0), 2, 2.0);
  CHECK(offspring_count_bound(0, 0.01, 0.3, c) == 1.0);
  const double x = 0.01 * c.ball_volume();
  for (long k = 1; k <= 5; ++k) {
    CHECK(offspring_count_bound(k, 0.01, 0.0, c) == Approx(std::pow(x, k) / std::tgamma(k + 1.0)).epsilon(1e-12));
    CHECK(offspring_count_bound(k, 0.01, 0.2, c) > offspring_count_bound(k, 0.01, 0.1, c));
  }
}

TEST_CASE("offspring mean bound at beta = 0", "[bounds]") {
  const auto c = synthetic(1.0, 5.0);
  CHECK(offspring_mean_bound(1.0, 0.0, c) == Approx(std::exp(1.0)));
}

TEST_CASE("offspring mean bound below one across the A- region", "[bounds][property]") {
  const auto c = bound_constants(make_square_well(1.0, 1.5, 0.5, 0.7, 2.5), 2, 1.5);
  const double lm = lambda_minus(c);
  for (int i = 1; i < 50; ++i) {
    const double lambda = lm * i / 50.0;
    const double bm = beta_minus(lambda, c);
    for (int j = 0; j < 20; ++j) CHECK(offspring_mean_bound(lambda, bm * j / 20.0, c) < 1.0);
  }
}

TEST_CASE("g_function", "[bounds]") {
  const double eps = 4.0 / std::sqrt(std::numbers::pi);
  CHECK(g_function(2.0, 1.0, 0.5, eps) == Approx(1.0).epsilon(1e-12));
  CHECK(g_function(3.0, 0.2, 0.7, 0.5) - g_function(2.0, 0.2, 0.7, 0.5) == Approx(0.7));
  CHECK(g_function(0.0, 0.9 * 16.0 / (std::numbers::pi * 0.25), 1.0, 0.5) < 0.0);
}

TEST_CASE("alpha_constant branches", "[bounds]") {
  CHECK(alpha_constant(0.8, 0.4, 1.0, 0.1) == Approx(1.0 / std::sqrt(2.0)));
  // a + eps/2 = 4d + 2 delta exactly selects the second branch.
  CHECK(alpha_constant(4.0, 0.4, 1.0, 0.1) == Approx(1.0 / 3.0));
  Xoshiro256 rng(3);
  for (int i = 0; i < 1000; ++i) {
    const double al = alpha_constant(rng.uniform(0.1, 20.0), rng.uniform(0.01, 2.0), rng.uniform(0.1, 3.0), rng.uniform(0.01, 1.0));
    CHECK(al > 0.0);
    CHECK(al < 1.0);
  }
}

TEST_CASE("beta_plus", "[bounds]") {
  const double m = 0.8, eps = 0.4, h = 1.3;
  const double root = std::exp(h) * 16.0 / (std::numbers::pi * eps * eps);
  CHECK(beta_plus(root, m, eps, h) == Approx(0.0).margin(1e-12));
  CHECK(beta_plus(2.0 * root, m, eps, h) == 0.0);
  for (double lambda : {1e-6, 1e-3, 0.1, 1.0, 10.0, 1e3}) {
    for (double hh : {0.0, 0.5, 2.0}) {
      CHECK(g_function(beta_plus_unclamped(lambda, m, eps, hh), lambda, m, eps) == Approx(hh).margin(1e-12));
      CHECK(beta_plus(lambda, m, eps, hh) >= beta_plus(lambda, m, eps, 0.0));
    }
  }
  CHECK(beta_plus(1e-12, m, eps, h) > beta_plus(1e-6, m, eps, h));
}

TEST_CASE("canonical percolation curve", "[bounds]") {
  const auto p = make_square_well(0.5, 1.0, 1.0, 1.0, 1.5);
  const auto cp = make_contour_params(p, 0.9, 0.5);
  CHECK(cp.a == 1.0);
  CHECK(cp.alpha() == Approx(1.0 / std::sqrt(2.0)));
  CHECK(cp.h() == Approx(std::sqrt(2.0) * std::log(3.0)));
  CHECK(cp.h() == Approx(1.5537).epsilon(1e-4));
  CHECK(lambda_plus(cp) == Approx(std::exp(cp.h()) * 16.0 / (std::numbers::pi * cp.eps * cp.eps)));
  CHECK(beta_plus_canonical(lambda_plus(cp), cp) == Approx(0.0).margin(1e-12));
}

TEST_CASE("classify", "[bounds]") {
  const auto p = make_square_well(0.5, 1.0, 1.0, 1.0, 1.5);
  const double ell = 3.0;
  const auto cp = make_contour_params(p, 0.9, 0.5);
  const auto c = bound_constants(p, 2, ell);
  const double lm = lambda_minus(c);
  const double lp = lambda_plus(cp);

  SECTION("beta = 0 below lambda_minus is A-") {
    CHECK(classify(0.5 * lm, 0.0, p, 2, ell, cp).verdict == Verdict::NonPercolating);
  }
  SECTION("lambda above lambda_plus is A+ for any beta") {
    for (double beta : {0.0, 1.0, 50.0}) CHECK(classify(2.0 * lp, beta, p, 2, ell, cp).verdict == Verdict::Percolating);
  }
  SECTION("between the curves is unknown") {
    const double lambda = 0.5 * (lm + lp);
    const double bp = beta_plus_canonical(lambda, cp);
    const auto r = classify(lambda, 0.5 * bp, p, 2, ell, cp);
    CHECK(r.verdict == Verdict::Unknown);
    REQUIRE(r.beta_plus_at_lambda);
    CHECK_FALSE(r.beta_minus_at_lambda);
  }
  SECTION("percolation hypothesis enforced when contour parameters are supplied") {
    CHECK_THROWS_WITH(classify(1.0, 1.0, p, 2, 2.5, cp), Catch::Matchers::ContainsSubstring("ell > 2 sqrt(2) d"));
    CHECK_THROWS_WITH(classify(1.0, 1.0, p, 3, ell, cp), Catch::Matchers::ContainsSubstring("nu = 2"));
    CHECK(classify(1.0, 1.0, p, 2, 2.5, std::nullopt).verdict == Verdict::Unknown);
  }
  SECTION("regions are disjoint") {
    Xoshiro256 rng(5);
    for (int i = 0; i < 2000; ++i) {
      const double lambda = std::exp(rng.uniform(std::log(1e-6), std::log(10.0 * lp)));
      const double beta = rng.uniform(0.0, 20.0);
      const auto r = classify(lambda, beta, p, 2, ell, cp);
      if (r.verdict == Verdict::NonPercolating) {
        CHECK(lambda < lm);
        CHECK(beta < *r.beta_minus_at_lambda);
      }
      if (r.verdict == Verdict::Percolating) CHECK((lambda > lp || beta > *r.beta_plus_at_lambda));
    }
  }
}

TEST_CASE("phase diagram", "[bounds]") {
  const auto p = make_square_well(0.5, 1.0, 1.0, 1.0, 1.5);
  const auto cp = make_contour_params(p, 0.9, 0.5);
  std::vector<double> grid;
  for (int i = 0; i < 40; ++i) grid.push_back(std::pow(10.0, -5.0 + 0.15 * i));
  const auto rows = phase_diagram(grid, p, 2, 3.0, cp);
  REQUIRE(rows.size() == grid.size());
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].beta_minus && rows[i - 1].beta_minus) CHECK(*rows[i].beta_minus < *rows[i - 1].beta_minus);
    if (*rows[i - 1].beta_plus > 0.0) CHECK(*rows[i].beta_plus < *rows[i - 1].beta_plus);
  }
  for (const auto &r : rows) {
    CHECK(r.beta_minus.has_value() == (r.lambda < r.lambda_minus));
    if (r.beta_minus) CHECK(r.verdict == (*r.beta_minus < *r.beta_plus ? "ordered" : "inverted"));
  }
  CHECK_THROWS_MATCHES(phase_diagram({}, p, 2, 3.0, cp), Error,
                       Catch::Matchers::Predicate<Error>([](const Error &e) { return has_code(e, ErrorCode::EmptyGrid); }));
  CHECK_THROWS_AS(phase_diagram({0.2, 0.1}, p, 2, 3.0, cp), Error);
  CHECK_THROWS_AS(phase_diagram({0.1}, p, 2, 2.5, cp), Error);
}
