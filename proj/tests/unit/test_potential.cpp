#include <catch_amalgamated.hpp>

#include <cmath>

#include "gibbsperc/potential.hpp"

using namespace gperc;
using Catch::Approx;

namespace {
PotentialSpec example_well() { return make_square_well(1.0, 2.0, 0.5, 1.0, 3.0); }
} // namespace

TEST_CASE("square well evaluates piecewise", "[potential]") {
  const auto p = example_well();
  CHECK(p.evaluate(0.5).is_hard_core());
  CHECK(p.evaluate(1.0).is_hard_core());
  CHECK(p.evaluate(1.5).value() == 0.5);
  CHECK(p.evaluate(2.5).value() == -1.0);
  CHECK(p.evaluate(10.0).value() == 0.0);
  CHECK(p.evaluate(0.5).value() == std::numeric_limits<double>::infinity());
}

TEST_CASE("hard-core energies short-circuit sums", "[potential]") {
  Energy e(2.0);
  e += Energy::hard_core();
  CHECK(e.is_hard_core());
  e += Energy(-5.0);
  CHECK(e.is_hard_core());
  CHECK((Energy(1.0) + Energy(2.0)).value() == 3.0);
}

TEST_CASE("validate_shape accepts the built-in families", "[potential]") {
  CHECK(validate_shape(example_well()).ok);
  CHECK(validate_shape(make_power_tail(0.5, 1.0, 2.0, 0.3, 1.0, 4.0, 8.0)).ok);
}

TEST_CASE("validate_shape flags a positive well", "[potential]") {
  const auto p = make_square_well(1.0, 2.0, 0.5, -1.0, 3.0);
  const auto report = validate_shape(p);
  REQUIRE_FALSE(report.ok);
  REQUIRE_FALSE(report.violations.empty());
  for (const auto &v : report.violations) CHECK(v.r >= p.d);
}

TEST_CASE("validate_shape flags phi below -M", "[potential]") {
  // Tail amplitude above M g^s: phi(g) = -amp g^-s < -M.
  PotentialSpec p{0.5, 1.0, 2.0, 1.0, PowerTail{0.0, 1.0, 4.0, 2.0 * std::pow(2.0, 4.0)}};
  const auto report = validate_shape(p);
  REQUIRE_FALSE(report.ok);
  bool below_m = false;
  for (const auto &v : report.violations) below_m = below_m || (v.expected == ">= -M" && v.r >= p.g);
  CHECK(below_m);
}

TEST_CASE("validate_shape flags structural errors", "[potential]") {
  PotentialSpec p = example_well();
  p.g = p.d;
  const auto report = validate_shape(p);
  CHECK_FALSE(report.ok);
  CHECK_FALSE(report.structural.empty());
}

TEST_CASE("sign structure on a dense grid", "[potential][property]") {
  for (const auto &p : {example_well(), make_power_tail(0.5, 1.0, 2.0, 0.3, 1.0, 3.5, 5.0),
                        make_power_tail(0.0, 1.0, 1.5, 0.0, 0.7, 5.0, 2.0)}) {
    for (int k = 1; k <= 20000; ++k) {
      const double r = p.f + k * (10.0 * p.g - p.f) / 20000.0;
      const double v = p.evaluate(r).value();
      if (r < p.d) {
        CHECK(v >= 0.0);
      } else {
        CHECK(v <= 0.0);
        CHECK(v >= -p.M);
      }
      if (r >= p.g) CHECK(-v <= p.psi(r));
    }
  }
}

TEST_CASE("tail integral closed forms", "[potential]") {
  SECTION("psi = r^-4, nu = 2, g = 1 gives 1/2") {
    const auto p = make_power_tail(0.25, 0.5, 1.0, 0.0, 1.0, 4.0, 1.0);
    CHECK(tail_integral(p, 2) == Approx(0.5).epsilon(1e-12));
  }
  SECTION("square well ending at g has no tail") { CHECK(tail_integral(example_well(), 2) == 0.0); }
  SECTION("exponent equal to the dimension diverges") {
    const auto p = make_power_tail(0.25, 0.5, 1.0, 0.0, 1.0, 2.0, 1.0);
    CHECK_THROWS_MATCHES(tail_integral(p, 2), Error,
                         Catch::Matchers::Predicate<Error>([](const Error &e) { return e.code() == ErrorCode::DivergentTail; }));
  }
}

TEST_CASE("tail integral matches numerical quadrature", "[potential][property]") {
  // Oracle: composite Simpson in u = ln(r / g), where the integrand decays exponentially.
  for (int nu = 1; nu <= 3; ++nu) {
    for (double s : {nu + 0.5, nu + 1.0, nu + 3.0}) {
      const double g = 1.7, amp = 2.3;
      const auto p = make_power_tail(0.5, 1.0, g, 0.0, 1.0, s, amp);
      const double upper = 60.0 / (s - nu);
      auto integrand = [&](double u) {
        const double r = g * std::exp(u);
        return std::pow(r, nu - 1) * p.psi(r) * r;
      };
      const int n = 200000;
      const double h = upper / n;
      double acc = integrand(0.0) + integrand(upper);
      for (int i = 1; i < n; ++i) acc += integrand(i * h) * (i % 2 ? 4.0 : 2.0);
      const double simpson = acc * h / 3.0;
      CHECK(tail_integral(p, nu) == Approx(simpson).epsilon(1e-6));
    }
  }
}

TEST_CASE("lattice tail sum against integral comparison", "[potential][property]") {
  // For decreasing summands: sum_{m>=m0} t(m) <= t(m0) + int_{m0}^inf t.
  for (int nu = 1; nu <= 3; ++nu) {
    const double s = nu + 1.5;
    const auto p = make_power_tail(0.5, 1.0, 2.0, 0.0, 1.0, s, 3.0);
    const auto sum = psi_lattice_sum(p, nu, 2);
    REQUIRE(sum.value > 0.0);
    // Direct summation to a large cutoff plus the exact integral of the majorant.
    double direct = 0.0;
    const long cutoff = 2'000'000;
    for (long m = 2; m < cutoff; ++m) direct += shell_polynomial(static_cast<double>(m), nu) * p.psi(static_cast<double>(m));
    const double rem = 3.0 * nu * std::pow(2.0, nu - 1) * std::pow(static_cast<double>(cutoff), nu - s) / (s - nu);
    CHECK(sum.value <= direct + rem + 1e-12 * direct);
    CHECK(sum.value + sum.remainder >= direct * (1.0 - 1e-12));
  }
}

TEST_CASE("lattice tail sum stays an upper bound when the term budget runs out", "[potential]") {
  const auto p = make_power_tail(0.5, 1.0, 2.0, 0.0, 1.0, 2.2, 1.0);
  const auto capped = psi_lattice_sum(p, 2, 2, 1e-12, 1000);
  CHECK(capped.terms == 1000);
  CHECK(capped.value == Approx(capped.partial + capped.remainder));
  const auto fuller = psi_lattice_sum(p, 2, 2, 1e-12, 200000);
  CHECK(capped.value >= fuller.partial);
}

TEST_CASE("attraction window", "[potential]") {
  SECTION("square well depth 1 on [2, 3], m = 0.5, cap 0.4") {
    const auto w = attraction_window(example_well(), 0.5, 0.4);
    CHECK(w.a == 2.0);
    CHECK(w.eps == Approx(0.4));
  }
  SECTION("m = M is excluded") {
    CHECK_THROWS_AS(attraction_window(example_well(), 1.0, 0.4), Error);
  }
  SECTION("window stays below -m at 10x resolution") {
    for (const auto &p : {example_well(), make_power_tail(0.5, 1.0, 2.0, 0.3, 1.0, 4.0, 40.0),
                          make_power_tail(0.5, 1.0, 2.0, 0.3, 0.2, 3.0, 24.0)}) {
      for (double m : {0.1, 0.3, 0.9 * p.M}) {
        for (double cap : {0.05, 0.5, 5.0}) {
          AttractionWindow w;
          try {
            w = attraction_window(p, m, cap);
          } catch (const Error &e) {
            CHECK(e.code() == ErrorCode::NoWindow);
            continue;
          }
          CHECK(w.a >= p.d);
          CHECK(w.eps > 0.0);
          CHECK(w.eps <= cap);
          for (int k = 0; k <= 10000; ++k) CHECK(p.evaluate(w.a + w.eps * k / 10000.0).value() <= -m);
        }
      }
    }
  }
}
