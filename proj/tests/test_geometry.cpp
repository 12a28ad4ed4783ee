#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "nfpos/geometry.hpp"
#include "nfpos/rng.hpp"

using namespace nfpos;

TEST_CASE("uca element coordinates match the closed form") {
  const ArrayConfig cfg = ArrayConfig::uca(64, 1.0, 3.5e9);
  const PolarPoint p1 = uca_element_coordinate(cfg, 1);
  CHECK(p1.angle_rad == doctest::Approx(kPi / 6.0).epsilon(1e-15));
  CHECK(p1.range_m == 1.0);

  const PolarPoint p64 = uca_element_coordinate(cfg, 64);
  CHECK(p64.angle_rad == doctest::Approx(kPi / 2.0).epsilon(1e-15));

  const ArrayConfig two = ArrayConfig::uca(2, 1.0, 3.5e9);
  CHECK(uca_element_coordinate(two, 2).angle_rad ==
        doctest::Approx(kPi / 6.0 + kPi / 3.0).epsilon(1e-15));
}

TEST_CASE("uca coordinate errors") {
  const ArrayConfig cfg = ArrayConfig::uca(8, 1.0, 3.5e9);
  CHECK_THROWS_AS(uca_element_coordinate(cfg, 0), DomainError);
  CHECK_THROWS_AS(uca_element_coordinate(cfg, 9), DomainError);
  const ArrayConfig lin = ArrayConfig::ula(8, 0.04, 3.5e9);
  CHECK_THROWS_AS(uca_element_coordinate(lin, 1), ConfigError);
  CHECK_THROWS_AS(ArrayConfig::uca(1, 1.0, 3.5e9), ConfigError);
  CHECK_THROWS_AS(ArrayConfig::uca(4, -1.0, 3.5e9), ConfigError);
}

TEST_CASE("layouts") {
  const ElementLayout uca = build_layout(ArrayConfig::uca(3, 1.0, 3.5e9));
  REQUIRE(uca.size() == 3);
  CHECK(uca.elements[0].angle_rad == doctest::Approx(kPi / 6.0));
  CHECK(uca.elements[1].angle_rad == doctest::Approx(kPi / 3.0));
  CHECK(uca.elements[2].angle_rad == doctest::Approx(kPi / 2.0));
  for (const auto& e : uca.elements) CHECK(e.range_m == 1.0);

  const ElementLayout ula = build_layout(ArrayConfig::ula(2, 0.1, 3.5e9));
  REQUIRE(ula.size() == 2);
  CHECK(ula.elements[0].range_m == doctest::Approx(0.1));
  CHECK(ula.elements[1].range_m == doctest::Approx(0.2));

  const ElementLayout big = build_layout(ArrayConfig::uca(64, 1.0, 3.5e9));
  for (int i = 1; i < 64; ++i)
    CHECK(big.elements[i].angle_rad > big.elements[i - 1].angle_rad);
}

TEST_CASE("uca angles symmetric about the arc center") {
  for (int n_el : {2, 3, 17, 64, 101}) {
    const ArrayConfig cfg = ArrayConfig::uca(n_el, 2.5, 3.5e9);
    for (int n = 1; n <= n_el; ++n) {
      const double a = uca_element_coordinate(cfg, n).angle_rad;
      const double b = uca_element_coordinate(cfg, n_el + 1 - n).angle_rad;
      CHECK(a + b == doctest::Approx(2.0 * kPi / 3.0).epsilon(1e-14));
    }
  }
}

TEST_CASE("fresnel bounds") {
  const double lambda = kSpeedOfLight / 3.5e9;
  const FresnelBounds b2 = fresnel_bounds(2.0, lambda);
  CHECK(b2.lower_m == doctest::Approx(5.991).epsilon(1e-3));
  CHECK(b2.upper_m == doctest::Approx(46.70).epsilon(1e-3));

  const FresnelBounds b1 = fresnel_bounds(1.0, lambda);
  CHECK(b1.lower_m == doctest::Approx(2.118).epsilon(1e-3));
  CHECK(b1.upper_m == doctest::Approx(11.675).epsilon(1e-3));

  const FresnelBounds eq = fresnel_bounds(lambda, lambda);
  CHECK(eq.lower_m == doctest::Approx(0.62 * lambda).epsilon(1e-12));
  CHECK(eq.upper_m == doctest::Approx(lambda).epsilon(1e-12));

  CHECK_THROWS_AS(fresnel_bounds(0.0, lambda), DomainError);
  CHECK_THROWS_AS(fresnel_bounds(1.0, -1.0), DomainError);
}

TEST_CASE("fresnel ordering holds above the crossover aperture") {
  // lower < upper iff 0.62 sqrt(D^3/l) < D^2/l iff D > 0.3844 l
  SplitMix64 rng(7);
  for (int i = 0; i < 1000; ++i) {
    const double lambda = rng.next_uniform(0.01, 1.0);
    const double d = lambda * rng.next_uniform(0.3845, 50.0);
    const FresnelBounds b = fresnel_bounds(d, lambda);
    CHECK(b.lower_m < b.upper_m);
  }
  const double lambda = 0.1;
  const FresnelBounds below = fresnel_bounds(0.3 * lambda, lambda);
  CHECK(below.lower_m > below.upper_m);
}

TEST_CASE("uca default aperture is the arc chord") {
  CHECK(uca_default_aperture(1.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(uca_default_aperture(2.0) == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("ula path difference, exact") {
  CHECK(ula_path_difference_exact(5.0, 0.0, 1, 1.0) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(ula_path_difference_exact(3.0, kPi / 2.0, 1, 1.0) ==
        doctest::Approx(std::sqrt(10.0) - 3.0).epsilon(1e-12));
  // direct re-evaluation with independent scalar arithmetic
  const double r = 5.0, eta = kPi / 3.0, delta = 0.0428;
  const int n = 2;
  const double x = n * delta;
  const double expect = std::sqrt(r * r + x * x - 2.0 * r * x * std::cos(eta)) - r;
  CHECK(ula_path_difference_exact(r, eta, n, delta) == doctest::Approx(expect).epsilon(1e-15));
}

TEST_CASE("ula path difference, taylor form") {
  // broadside: cos term vanishes, quadratic term has unit sin^2 factor
  for (double r : {1.0, 3.0, 42.0})
    CHECK(ula_path_difference_taylor(r, kPi / 2.0, 3, 0.01) ==
          doctest::Approx(0.03 * 0.03 / (2.0 * r)).epsilon(1e-12));
  // far-field limit: plane-wave linear term only
  const double far = ula_path_difference_taylor(1e9, 0.7, 5, 0.02);
  CHECK(far == doctest::Approx(-5 * 0.02 * std::cos(0.7)).epsilon(1e-9));
}

TEST_CASE("taylor remainder bounded by third order") {
  // |taylor - exact| <= (n*Delta)^3 / r^2 whenever n*Delta/r <= 0.05
  SplitMix64 rng(42);
  for (int i = 0; i < 1000; ++i) {
    const double r = rng.next_uniform(0.5, 100.0);
    const double eta = rng.next_uniform(0.0, kPi);
    const int n = 1 + static_cast<int>(rng.next_u64() % 64);
    const double ratio = rng.next_uniform(1e-4, 0.05);
    const double delta = ratio * r / n;
    const double exact = ula_path_difference_exact(r, eta, n, delta);
    const double taylor = ula_path_difference_taylor(r, eta, n, delta);
    const double x = n * delta;
    CHECK(std::abs(taylor - exact) <= x * x * x / (r * r));
  }
  // spot value from the remainder-bound regime
  const double exact = ula_path_difference_exact(5.0, kPi / 3.0, 2, 0.0428);
  const double taylor = ula_path_difference_taylor(5.0, kPi / 3.0, 2, 0.0428);
  const double x = 2 * 0.0428;
  CHECK(std::abs(taylor - exact) < x * x * x / 25.0);
}

TEST_CASE("near-field ratio") {
  CHECK(near_field_ratio(1, 1.0, 1.0) == doctest::Approx(1.0));
  CHECK(near_field_ratio(64, 0.0428, 2.0) == doctest::Approx(1.876).epsilon(1e-3));

  // At the Fresnel lower bound with D = N*Delta/2 and Delta = lambda/2 the
  // ratio equals 16/(0.3844*N); the quoted 41.6/N bound is that constant
  // rounded down, so it engages strictly above the boundary.
  const double lambda = kSpeedOfLight / 3.5e9;
  const int n = 1000;
  const double delta = lambda / 2.0;
  const double aperture = n * delta / 2.0;
  const double r_low = fresnel_bounds(aperture, lambda).lower_m;
  const double at_bound = near_field_ratio(n, delta, r_low);
  CHECK(at_bound == doctest::Approx(16.0 / 0.3844 / n).epsilon(1e-12));
  CHECK(near_field_ratio(n, delta, 1.01 * r_low) <= taylor_validity_bound(n));
  CHECK(taylor_validity_bound(n) == doctest::Approx(41.6 / n));
  CHECK(at_bound <= taylor_validity_bound(n) * 1.001);
}
