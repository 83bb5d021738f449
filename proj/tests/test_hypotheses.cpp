#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "transfer/hypotheses.hpp"
#include "transfer/io.hpp"

using namespace transfer;

TEST_CASE("threshold risk closed forms on the two-interval pair") {
  const auto [s, t] = example1_pair(0.1);
  const LossKind zo = LossKind::zero_one();

  CHECK(risk(ThresholdClassifier(0.0), s, zo) == 0.0);
  CHECK(risk(ThresholdClassifier(0.0), t, zo) == 0.0);
  CHECK(risk(ThresholdClassifier(0.05), s, zo) ==
        doctest::Approx(0.045).epsilon(1e-12));
  CHECK(risk(ThresholdClassifier(-0.5), s, zo) ==
        doctest::Approx(0.05).epsilon(1e-12));

  SampleSet all_correct;
  all_correct.dim = 1;
  all_correct.num_labels = 2;
  all_correct.xs = {-0.5, 0.5, 0.9};
  all_correct.ys = {1, 0, 0};
  CHECK(risk(ThresholdClassifier(0.0), all_correct, zo) == 0.0);
}

TEST_CASE("closed-form threshold risk matches Monte Carlo") {
  Rng rng(31);
  const LossKind zo = LossKind::zero_one();
  for (int trial = 0; trial < 8; ++trial) {
    const LabeledJoint joint = random_piecewise_joint(4, 2, rng);
    const double rho = rng.uniform(-1.0, 1.0);
    const double exact = risk(ThresholdClassifier(rho), joint, zo);
    const double mc = oracles::mc_threshold_risk(joint, rho, 100000,
                                                 1000 + static_cast<unsigned>(trial));
    CHECK(std::abs(exact - mc) <= 3.0 * std::sqrt(0.25 / 100000.0) + 1e-12);
  }
}

TEST_CASE("risk is affine in the domain") {
  Rng rng(32);
  for (int trial = 0; trial < 10; ++trial) {
    const LabeledJoint a = random_piecewise_joint(4, 2, rng);
    const LabeledJoint b = random_piecewise_joint(4, 2, rng);
    const double w = rng.uniform01();
    const LabeledJoint domains_ab[] = {a, b};
    const LabeledJoint mix = mixture(domains_ab, {{w, 1.0 - w}});
    const ThresholdClassifier h(rng.uniform(-1.0, 1.0));
    for (const LossKind& loss :
         {LossKind::zero_one(), LossKind::cross_entropy(1e-3)}) {
      const double lhs = risk(h, mix, loss);
      const double rhs = w * risk(h, a, loss) + (1.0 - w) * risk(h, b, loss);
      CHECK(std::abs(lhs - rhs) < 1e-12);
    }
  }
}

TEST_CASE("risk ranges for both losses") {
  Rng rng(33);
  const double clamp = 0.01;
  const double ce_lo = std::log2(1.0 / (1.0 - clamp));
  const double ce_hi = std::log2(1.0 / clamp);
  for (int trial = 0; trial < 10; ++trial) {
    const LabeledJoint joint = random_piecewise_joint(5, 2, rng);
    const ThresholdClassifier h(rng.uniform(-1.0, 1.0));
    const double zo = risk(h, joint, LossKind::zero_one());
    CHECK(zo >= 0.0);
    CHECK(zo <= 1.0);
    const double ce = risk(h, joint, LossKind::cross_entropy(clamp));
    CHECK(ce >= ce_lo - 1e-12);
    CHECK(ce <= ce_hi + 1e-12);
  }
}

TEST_CASE("delta-minimal set on the two-interval source") {
  const auto [s, t] = example1_pair(0.1);
  const HypothesisSpec grid = HypothesisSpec::grid(-1.0, 1.0);
  const LossKind zo = LossKind::zero_one();

  // 0.9 max(rho,0) + 0.1 max(-rho,0) <= 0.009  <=>  rho in [-0.09, 0.01].
  const MinimalSet set = delta_minimal_set(grid, s, zo, 0.009);
  REQUIRE(!set.members.empty());
  CHECK(set.eps_star == 0.0);
  double lo = 1.0, hi = -1.0;
  for (std::size_t index : set.members) {
    const double rho = set.enumeration.rhos[index];
    lo = std::min(lo, rho);
    hi = std::max(hi, rho);
    CHECK(0.9 * std::max(rho, 0.0) + 0.1 * std::max(-rho, 0.0) <= 0.009 + 1e-12);
  }
  CHECK(lo == doctest::Approx(-0.09).epsilon(0.02));
  CHECK(hi == doctest::Approx(0.01).epsilon(0.06));

  const MinimalSet exact_min = delta_minimal_set(grid, s, zo, 0.0);
  for (std::size_t index : exact_min.members)
    CHECK(risk(ThresholdClassifier(exact_min.enumeration.rhos[index]), s, zo) ==
          exact_min.eps_star);

  const MinimalSet everything = delta_minimal_set(grid, s, zo, 1.0);
  CHECK(everything.members.size() == everything.enumeration.size());

  CHECK_THROWS_AS(delta_minimal_set(HypothesisSpec::ball({0.0, 0.0}, 1.0), s, zo, 0.1),
                  ValidationError);
}

TEST_CASE("delta-minimal sets are monotone in the slack") {
  Rng rng(34);
  const HypothesisSpec grid = HypothesisSpec::grid(-1.0, 1.0, 201);
  for (int trial = 0; trial < 10; ++trial) {
    const LabeledJoint joint = random_piecewise_joint(4, 2, rng);
    const double d1 = 0.2 * rng.uniform01();
    const double d2 = d1 + 0.2 * rng.uniform01();
    const MinimalSet small = delta_minimal_set(grid, joint, LossKind::zero_one(), d1);
    const MinimalSet large = delta_minimal_set(grid, joint, LossKind::zero_one(), d2);
    for (std::size_t index : small.members)
      CHECK(std::find(large.members.begin(), large.members.end(), index) !=
            large.members.end());
  }
}

TEST_CASE("the clamped CE surrogate dominates the 0-1 loss") {
  Rng rng(35);
  for (int trial = 0; trial < 20; ++trial) {
    const LabeledJoint joint = random_piecewise_joint(4, 2, rng);
    const ThresholdClassifier h(rng.uniform(-1.0, 1.0));
    CHECK(surrogate_dominates_zero_one(h, joint, 0.01));
    const SampleSet draws = sample(joint, 200, 60 + static_cast<unsigned>(trial));
    CHECK(surrogate_dominates_zero_one(h, draws, 0.3));
  }

  // A confident always-correct classifier pays only the clamp cost; an
  // always-wrong one pays at least one bit.
  const double clamp = 0.05;
  const LabeledJoint one_sided = LabeledJoint::piecewise_uniform(
      2, {{-1.0, 0.0, 0, 1, 1.0}});
  const double correct_ce =
      risk(ThresholdClassifier(1.0), one_sided, LossKind::cross_entropy(clamp));
  CHECK(correct_ce == doctest::Approx(std::log2(1.0 / (1.0 - clamp))).epsilon(1e-12));
  const double wrong_ce =
      risk(ThresholdClassifier(-1.0), one_sided, LossKind::cross_entropy(clamp));
  CHECK(wrong_ce == doctest::Approx(std::log2(1.0 / clamp)).epsilon(1e-12));
  CHECK(wrong_ce >= 1.0);
}

TEST_CASE("cellwise classifiers integrate and predict consistently") {
  Rng rng(36);
  const LabeledJoint joint = random_piecewise_joint(5, 2, rng);
  const auto breaks = joint.breakpoints();
  std::vector<int> assignment(breaks.size() - 1);
  for (int& a : assignment)
    a = static_cast<int>(rng.next_u64() % 3) - 1;  // -1 is abstain
  const CellwiseClassifier h =
      CellwiseClassifier::piecewise(breaks, assignment);

  const double exact = risk(h, joint, LossKind::zero_one());
  const SampleSet draws = sample(joint, 100000, 4242);
  const double empirical = risk(h, draws, LossKind::zero_one());
  CHECK(std::abs(exact - empirical) <= 3.0 * std::sqrt(0.25 / 100000.0) + 1e-12);
}

TEST_CASE("grid enumeration covers the interval endpoints") {
  const auto gamma = enumerate_gamma(HypothesisSpec::grid(-0.01, 0.01, 11), {});
  CHECK(gamma.rhos.front() == -0.01);
  CHECK(gamma.rhos.back() == 0.01);
  CHECK(std::is_sorted(gamma.rhos.begin(), gamma.rhos.end()));
}

TEST_CASE("delta-minimal sets on sample sets") {
  const auto [s, t] = example1_pair(0.1);
  (void)t;
  const SampleSet draws = sample(s, 2000, 909);
  const HypothesisSpec grid = HypothesisSpec::grid(-1.0, 1.0, 201);
  const MinimalSet set = delta_minimal_set(grid, draws, LossKind::zero_one(), 0.01);
  REQUIRE(!set.members.empty());
  for (std::size_t index : set.members)
    CHECK(risk(ThresholdClassifier(set.enumeration.rhos[index]), draws,
               LossKind::zero_one()) <= set.eps_star + 0.01 + 1e-12);
  // The empirical optimum sits near the true one.
  CHECK(set.eps_star <= 0.02);
}

TEST_CASE("minimal sets serialize for reports") {
  const auto [s, t] = example1_pair(0.1);
  (void)t;
  const MinimalSet set = delta_minimal_set(HypothesisSpec::grid(-1.0, 1.0, 201),
                                           s, LossKind::zero_one(), 0.01);
  const auto j = io::to_json(set);
  CHECK(j.at("size").get<std::size_t>() == set.members.size());
  CHECK(j.at("eps_star").get<double>() == set.eps_star);
  CHECK(j.at("members").size() == set.members.size());
}
