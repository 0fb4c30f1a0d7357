#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "osod/probability.hpp"
#include "support/reference.hpp"

using Catch::Approx;
using osod::Infeasible;
using osod::OutOfRange;
using osod::ProbabilityVector;

namespace {

const std::vector<double> kSection5 = {0.5, 0.5, 0.3, 0.1, 0.6, 0.7, 0.3};

// The 14-unit population with extreme probabilities, minus its first unit.
const std::vector<double> kExtremeTail = {0.90, 0.90, 0.02, 0.02, 0.98,
                                          0.99, 0.95, 0.99, 0.01, 0.01,
                                          0.99, 0.99, 0.99};

double round2(double v) { return std::round(v * 100.0) / 100.0; }

}  // namespace

TEST_CASE("validate keeps in-range probabilities", "[probability]") {
  const auto p = osod::validate(kSection5);
  REQUIRE(p.vector() == kSection5);
}

TEST_CASE("validate snaps values within eps of the bounds", "[probability]") {
  const auto p = osod::validate({1.0 + 1e-12, 0.0, -1e-12, 1.0 - 1e-10});
  REQUIRE(p.vector() == std::vector<double>{1.0, 0.0, 0.0, 1.0});
}

TEST_CASE("validate rejects out-of-band values", "[probability]") {
  try {
    osod::validate({1.2, 0.5});
    FAIL("expected OutOfRange");
  } catch (const OutOfRange& e) {
    CHECK(e.index() == 0);
    CHECK(e.value() == 1.2);
  }
  CHECK_THROWS_AS(osod::validate({0.5, -0.01}), OutOfRange);
  CHECK_THROWS_AS(osod::validate({std::nan("")}), OutOfRange);
}

TEST_CASE("scaling constant for a two-unit window", "[probability]") {
  const std::vector<double> probs = {0.1, 0.6};
  const double oracle = ref::bisect_c(probs, 1.0);
  REQUIRE(oracle == Approx(10.0 / 7.0).epsilon(1e-12));

  const auto sol = osod::solve_scaling_constant(probs, 1.0);
  CHECK(sol.c == Approx(oracle).epsilon(1e-12));
  CHECK(sol.scaled[0] == Approx(1.0 / 7.0).epsilon(1e-12));
  CHECK(sol.scaled[1] == Approx(6.0 / 7.0).epsilon(1e-12));
  CHECK(sol.capped.empty());
}

TEST_CASE("scaling constant on the extreme-probability tail", "[probability]") {
  const auto sol = osod::solve_scaling_constant(kExtremeTail, 9.59);
  const std::vector<double> expected = {1, 1, 0.20, 0.20, 1, 1, 1,
                                        1, 0.10, 0.10, 1, 1, 1};
  for (std::size_t k = 0; k < expected.size(); ++k) {
    CHECK(round2(sol.scaled[k]) == Approx(expected[k]));
  }
  CHECK(sol.capped.size() == 9);
  CHECK(sol.c == Approx(ref::bisect_c(kExtremeTail, 9.59)).epsilon(1e-10));
  CHECK(sol.scaled.sum() == Approx(9.59).margin(1e-9));
}

TEST_CASE("scaling to the current sum is the identity", "[probability]") {
  const auto sol = osod::solve_scaling_constant(std::vector{0.25, 0.25}, 0.5);
  CHECK(sol.c == Approx(1.0).epsilon(1e-12));
  CHECK(sol.scaled[0] == Approx(0.25));
  CHECK(sol.scaled[1] == Approx(0.25));
}

TEST_CASE("scaling infeasibility", "[probability]") {
  // Only two positive entries: mass 2.5 is out of reach.
  CHECK_THROWS_AS(osod::scaling_constant(std::vector{0.5, 0.5, 0.0}, 2.5),
                  Infeasible);
  // Scaling down below the count of ones is allowed.
  CHECK(osod::scaling_constant(std::vector{1.0, 1.0, 0.2}, 1.1) ==
        Approx(0.5).epsilon(1e-12));
  CHECK_THROWS_AS(osod::scaling_constant(std::vector{0.5}, -1.0), Infeasible);
  // Reaching exactly the positive count is fine: everything caps.
  const auto sol = osod::solve_scaling_constant(std::vector{0.5, 0.25, 0.0}, 2.0);
  CHECK(sol.c == Approx(4.0));
  CHECK(sol.scaled.vector() == std::vector<double>{1.0, 1.0, 0.0});
}

TEST_CASE("scaling constant matches the bisection oracle", "[probability][property]") {
  std::mt19937_64 gen(7);
  std::uniform_int_distribution<std::size_t> size(1, 40);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 2000; ++trial) {
    std::vector<double> p(size(gen));
    std::size_t ones = 0;
    for (auto& v : p) {
      const double r = unit(gen);
      v = r < 0.05 ? 1.0 : (r < 0.1 ? 0.0 : unit(gen));
      ones += v == 1.0;
    }
    std::size_t positive = 0;
    for (double v : p) positive += v > 0.0;
    double sum = 0.0;
    for (double v : p) sum += v;
    if (positive == 0) continue;
    const double target =
        sum + unit(gen) * (static_cast<double>(positive) - sum);
    const auto sol = osod::solve_scaling_constant(p, target);
    INFO("trial " << trial);
    double mass = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
      const double expected = std::min(sol.c * p[k], 1.0);
      CHECK(sol.scaled[k] == Approx(expected).margin(1e-9));
      mass += sol.scaled[k];
    }
    CHECK(std::abs(mass - target) <= 1e-9);
    if (target < static_cast<double>(positive) - 1e-6) {
      CHECK(sol.c == Approx(ref::bisect_c(p, target)).epsilon(1e-9));
    }
    // Monotone: a larger c never yields less mass.
    CHECK(ref::capped_mass(p, sol.c * 1.01) >= ref::capped_mass(p, sol.c) - 1e-12);
  }
}

TEST_CASE("scaling is idempotent when nothing caps", "[probability][property]") {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> unit(0.01, 0.99);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> p(1 + trial % 17);
    for (auto& v : p) v = unit(gen);
    const auto probs = osod::validate(p);
    const auto sol = osod::solve_scaling_constant(probs, probs.sum());
    for (std::size_t k = 0; k < p.size(); ++k) {
      CHECK(sol.scaled[k] == Approx(p[k]).margin(1e-9));
    }
  }
}

TEST_CASE("step feasibility conditions", "[probability]") {
  CHECK(osod::check_step_feasibility(osod::validate({0.5, 0.5}), 0));
  CHECK_FALSE(osod::check_step_feasibility(osod::validate({0.3, 0.3}), 0));
  CHECK_FALSE(osod::check_step_feasibility(osod::validate({1.0, 1.0, 0.5}), 0));
  // Later steps only look at the undecided tail.
  CHECK(osod::check_step_feasibility(osod::validate({1.0, 0.5, 0.5}), 1));
  CHECK_FALSE(osod::check_step_feasibility(osod::validate({0.5, 0.5}), 2));
}

TEST_CASE("non-negativity certificate", "[probability]") {
  CHECK(osod::result1_condition(0.5, 2.0));
  CHECK(osod::result1_condition(0.3, 10.0 / 7.0));
  // Rejection branch of the extreme population: 1 - 1/9.8333 = 0.8983.
  const double c = ref::bisect_c(kExtremeTail, 9.59);
  CHECK(c == Approx(9.8333).margin(1e-4));
  CHECK_FALSE(osod::result1_condition(0.85, c));
  CHECK_THROWS_AS(osod::result1_condition(0.5, 0.0), std::invalid_argument);
}

TEST_CASE("inclusion probabilities from an auxiliary variable", "[probability]") {
  const std::vector<double> equal = {1, 1, 1, 1};
  CHECK(osod::inclusion_from_auxiliary(equal, 2).vector() ==
        std::vector<double>{0.5, 0.5, 0.5, 0.5});

  const auto capped = osod::inclusion_from_auxiliary(std::vector<double>{10, 1, 1}, 2);
  CHECK(capped[0] == 1.0);
  CHECK(capped[1] == Approx(0.5));
  CHECK(capped[2] == Approx(0.5));

  const auto prop = osod::inclusion_from_auxiliary(std::vector<double>{1, 2, 3}, 1);
  CHECK(prop[0] == Approx(1.0 / 6.0));
  CHECK(prop[1] == Approx(2.0 / 6.0));
  CHECK(prop[2] == Approx(3.0 / 6.0));

  CHECK_THROWS_AS(osod::inclusion_from_auxiliary(std::vector<double>{1, 2}, 3),
                  Infeasible);
  CHECK_THROWS_AS(osod::inclusion_from_auxiliary(std::vector<double>{1, -2}, 1),
                  OutOfRange);
  CHECK(osod::inclusion_from_auxiliary(std::vector<double>{1, 2}, 2).vector() ==
        std::vector<double>{1.0, 1.0});
}

TEST_CASE("auxiliary probabilities sum to n and keep the order of x",
          "[probability][property]") {
  std::mt19937_64 gen(3);
  std::lognormal_distribution<double> x_dist(0.0, 1.5);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n_units = 5 + trial % 60;
    std::vector<double> x(n_units);
    for (auto& v : x) v = x_dist(gen);
    const double n = 1 + trial % (n_units - 1);
    const auto pi = osod::inclusion_from_auxiliary(x, n);
    CHECK(std::abs(pi.sum() - n) <= 1e-9);
    for (std::size_t a = 0; a < n_units; ++a) {
      for (std::size_t b = 0; b < n_units; ++b) {
        if (x[a] < x[b]) CHECK(pi[a] <= pi[b]);
      }
    }
  }
}
