#include <catch_amalgamated.hpp>

#include <cmath>

#include "gibbsperc/branching.hpp"

using namespace gperc;
using Catch::Approx;

namespace {

BoundConstants hard_core_constants() {
  return bound_constants(make_square_well(1.0, 1.2, 0.5, 1.0, 1.5), 2, 1.5);
}

} // namespace

TEST_CASE("degenerate laws", "[branching]") {
  Xoshiro256 rng(1);
  SECTION("no offspring") {
    const auto law = make_offspring_law({1.0});
    const auto run = simulate_gw(law, 100, rng);
    CHECK(run.extinct);
    CHECK(run.total_size == 1);
    CHECK(run.generations == 1);
  }
  SECTION("exactly one child never dies out") {
    const auto law = make_offspring_law({0.0, 1.0});
    CHECK(law.mean == 1.0);
    const auto run = simulate_gw(law, 500, rng);
    CHECK_FALSE(run.extinct);
    CHECK(run.generations == 500);
    CHECK(run.total_size == 500);
  }
  SECTION("two children every generation hits the population cap") {
    const auto run = simulate_gw(make_offspring_law({0.0, 0.0, 1.0}), 1000, rng, 1000);
    CHECK_FALSE(run.extinct);
    CHECK(run.total_size == 2047);  // 1 + 2 + ... + 1024
  }
  SECTION("invalid masses") {
    CHECK_THROWS_AS(make_offspring_law({}), Error);
    CHECK_THROWS_AS(make_offspring_law({0.0, 0.0}), Error);
  }
}

TEST_CASE("masses are normalised", "[branching]") {
  const auto law = make_offspring_law({2.0, 1.0, 1.0});
  CHECK(law.masses[0] == Approx(0.5));
  CHECK(law.mean == Approx(0.75));
}

TEST_CASE("subcritical law dies out with the expected progeny", "[branching]") {
  // Mean 0.5: E[total size] = 1 / (1 - 0.5) = 2.
  const auto law = make_offspring_law({0.6, 0.3, 0.1});
  REQUIRE(law.mean == Approx(0.5));
  const auto s = extinction_and_size(law, 20000, 5);
  CHECK_FALSE(s.skipped);
  CHECK(s.extinction_rate >= 0.999);
  CHECK(s.size_bound == Approx(2.0));
  CHECK(s.mean_total_size <= s.size_bound + 3.0 * s.total_size_se);
  CHECK(s.mean_total_size == Approx(2.0).margin(4.0 * s.total_size_se));
  CHECK(s.size_bound_check);
}

TEST_CASE("extinction probability of a supercritical law", "[branching]") {
  // p0 = 1/4, p2 = 3/4: smallest root of s = 1/4 + 3/4 s^2 is 1/3.
  const auto law = make_offspring_law({0.25, 0.0, 0.75});
  Xoshiro256 rng(3);
  int extinct = 0;
  const int n = 6000;
  for (int i = 0; i < n; ++i) extinct += simulate_gw(law, 200, rng, 100000).extinct ? 1 : 0;
  const double p = static_cast<double>(extinct) / n;
  CHECK(p == Approx(1.0 / 3.0).margin(4.0 * std::sqrt(p * (1 - p) / n)));
  // Critical and supercritical laws are not summarised.
  CHECK(extinction_and_size(law, 10, 1).skipped);
  CHECK(extinction_and_size(make_offspring_law({0.5, 0.0, 0.5}), 10, 1).skipped);
}

TEST_CASE("dominating law respects the offspring-count bound", "[branching][property]") {
  const auto c = hard_core_constants();
  const double lm = lambda_minus(c);
  Xoshiro256 rng(11);
  for (int i = 0; i < 200; ++i) {
    const double lambda = lm * rng.uniform(0.01, 0.99);
    const double beta = beta_minus(lambda, c) * rng.uniform(0.0, 0.99);
    const auto law = dominating_offspring_law(lambda, beta, c);
    REQUIRE_FALSE(law.supercritical_by_bound);
    CHECK(law.masses.size() == static_cast<std::size_t>(c.max_offspring()) + 1);
    double total = 0.0;
    for (std::size_t k = 0; k < law.masses.size(); ++k) {
      total += law.masses[k];
      CHECK(law.masses[k] >= 0.0);
      if (k > 0) CHECK(law.masses[k] <= offspring_count_bound(static_cast<long>(k), lambda, beta, c) * (1 + 1e-12));
    }
    CHECK(total == Approx(1.0).epsilon(1e-12));
    CHECK(law.mean <= offspring_mean_bound(lambda, beta, c) * (1 + 1e-12));
    CHECK(law.mean < 1.0);
  }
}

TEST_CASE("dominating law is flagged when the bounds exceed one", "[branching]") {
  const auto c = hard_core_constants();
  const auto law = dominating_offspring_law(5.0, 1.0, c);
  CHECK(law.supercritical_by_bound);
  CHECK(law.masses[0] == 0.0);
  double total = 0.0;
  for (double p : law.masses) total += p;
  CHECK(total == Approx(1.0));
  CHECK(extinction_and_size(law, 10, 1).skipped);
}

TEST_CASE("extinction summary is deterministic and thread-independent", "[branching]") {
  const auto c = hard_core_constants();
  const double lambda = 0.5 * lambda_minus(c);
  const auto a = extinction_and_size(lambda, 0.0, c, 5000, 42, 1);
  const auto b = extinction_and_size(lambda, 0.0, c, 5000, 42, 4);
  CHECK(a.mean_total_size == b.mean_total_size);
  CHECK(a.extinction_rate == b.extinction_rate);
  CHECK(a.extinction_rate == 1.0);
  const auto other = extinction_and_size(lambda, 0.0, c, 5000, 43, 1);
  CHECK(other.mean_total_size != a.mean_total_size);
}
