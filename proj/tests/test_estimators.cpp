#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "osod/estimators.hpp"
#include "support/reference.hpp"

using Catch::Approx;
using osod::WindowPolicy;

namespace {

const std::vector<double> kSection5 = {0.5, 0.5, 0.3, 0.1, 0.6, 0.7, 0.3};

std::vector<double> random_y(std::mt19937_64& gen, std::size_t n) {
  std::normal_distribution<double> dist(10.0, 4.0);
  std::vector<double> y(n);
  for (auto& v : y) v = dist(gen);
  return y;
}

}  // namespace

TEST_CASE("expansion estimator on small samples", "[estimators]") {
  const std::vector<double> y = {3, 5};
  const std::vector<std::uint8_t> both = {1, 1};
  const std::vector<std::uint8_t> first = {1, 0};
  CHECK(osod::ht_estimate(both, y, osod::validate({1.0, 1.0})) == 8.0);
  CHECK(osod::ht_estimate(first, y, osod::validate({0.5, 0.5})) == 6.0);
  CHECK_THROWS_AS(osod::ht_estimate(first, y, osod::validate({0.0, 1.0})),
                  osod::ZeroProbabilitySelected);
  const std::vector<double> short_y = {1.0};
  CHECK_THROWS_AS(osod::ht_estimate(first, short_y, osod::validate({0.5, 0.5})),
                  std::invalid_argument);
}

TEST_CASE("self-weighting variable gives a constant estimate", "[estimators]") {
  const auto pv = osod::validate(kSection5);
  for (const auto& policy : {WindowPolicy::smallest(), WindowPolicy::full()}) {
    const auto design = osod::enumerate_design(pv, policy);
    for (const auto& [bits, p] : design.entries) {
      CHECK(osod::ht_estimate(osod::to_indicator(bits), kSection5, pv) ==
            Approx(3.0).margin(1e-12));
    }
    CHECK(std::abs(osod::true_variance(design, kSection5, pv)) <= 1e-9);
  }
}

TEST_CASE("variance of the two-point design", "[estimators]") {
  const auto pv = osod::validate({0.5, 0.5});
  const auto design = osod::enumerate_design(pv, WindowPolicy::smallest());
  const std::vector<double> y = {3, 5};
  CHECK(osod::true_variance(design, y, pv) == Approx(4.0).margin(1e-12));
  CHECK(osod::design_moment_variance(design, y, pv) == Approx(4.0).margin(1e-12));
}

TEST_CASE("census has zero estimated variance", "[estimators]") {
  const auto pv = osod::validate({1.0, 1.0, 1.0});
  const auto joint =
      osod::joint_inclusion(osod::enumerate_design(pv, WindowPolicy::smallest()));
  const std::vector<std::uint8_t> all = {1, 1, 1};
  const std::vector<double> y = {2, 7, 1};
  CHECK(osod::variance_estimate(all, joint, y, pv) == 0.0);
}

TEST_CASE("inconsistent joint probabilities are reported", "[estimators]") {
  const auto pv = osod::validate({0.5, 0.5});
  osod::JointInclusionMatrix joint(2);
  joint(0, 0) = 0.5;
  joint(1, 1) = 0.5;
  const std::vector<std::uint8_t> both = {1, 1};
  const std::vector<double> y = {1, 1};
  try {
    osod::variance_estimate(both, joint, y, pv);
    FAIL("expected ZeroJointProbability");
  } catch (const osod::ZeroJointProbability& e) {
    CHECK(std::string(e.what()).find("0") != std::string::npos);
  }
}

TEST_CASE("estimator identities hold on every exact design",
          "[estimators][property]") {
  std::mt19937_64 gen(43);
  const std::vector<WindowPolicy> policies = {
      WindowPolicy::smallest(), WindowPolicy::integer_sum(),
      WindowPolicy::fixed(2), WindowPolicy::full()};
  int unbiased_variance_checked = 0;
  for (int trial = 0; trial < 120; ++trial) {
    const std::size_t n = 2 + trial % 7;
    const auto probs = trial == 0 ? kSection5 : ref::random_integer_sum(gen, n);
    const auto pv = osod::validate(probs);
    const auto y = random_y(gen, probs.size());
    const double total = osod::stable_sum(y);
    for (const auto& policy : policies) {
      const auto design = osod::enumerate_design(pv, policy);
      const auto joint = osod::joint_inclusion(design);
      INFO("trial " << trial << " policy " << osod::to_string(policy));
      CHECK(osod::design_expectation(design, y, pv) ==
            Approx(total).margin(1e-9));
      const double var = osod::true_variance(joint, y, pv);
      CHECK(var == Approx(osod::design_moment_variance(design, y, pv)).margin(1e-9));
      double expected_estimate = 0.0;
      for (const auto& [bits, p] : design.entries) {
        expected_estimate +=
            p * osod::variance_estimate(osod::to_indicator(bits), joint, y, pv);
      }
      // Unbiased only when every pair in the population can be co-selected.
      bool every_pair = true;
      for (std::size_t k = 0; k < pv.size(); ++k) {
        for (std::size_t l = 0; l < pv.size(); ++l) {
          every_pair = every_pair && joint(k, l) > 0.0;
        }
      }
      if (every_pair) {
        ++unbiased_variance_checked;
        CHECK(expected_estimate == Approx(var).margin(1e-9));
      }
    }
  }
  CHECK(unbiased_variance_checked > 20);
}

TEST_CASE("variance estimator is unbiased on a small fixed-size design",
          "[estimators]") {
  const auto pv = osod::validate({0.4, 0.6, 0.5, 0.5});
  const auto design = osod::enumerate_design(pv, WindowPolicy::full());
  const auto joint = osod::joint_inclusion(design);
  const std::vector<double> y = {2.0, 9.0, 4.0, 1.0};
  double expected = 0.0;
  for (const auto& [bits, p] : design.entries) {
    expected += p * osod::variance_estimate(osod::to_indicator(bits), joint, y, pv);
  }
  bool every_pair = true;
  for (std::size_t k = 0; k < 4; ++k) {
    for (std::size_t l = 0; l < 4; ++l) every_pair = every_pair && joint(k, l) > 0.0;
  }
  REQUIRE(every_pair);
  CHECK(expected == Approx(osod::true_variance(joint, y, pv)).margin(1e-9));
}
