#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "transfer/bounds.hpp"

using namespace transfer;

namespace {

SampleSet example1_draws(std::size_t m, std::uint64_t seed) {
  const auto [s, t] = example1_pair(0.1);
  (void)t;
  return sample(s, m, seed);
}

}  // namespace

TEST_CASE("Rademacher estimate of a singleton class is centered") {
  const SampleSet draws = example1_draws(400, 8);
  std::vector<std::shared_ptr<const Classifier>> one = {
      std::make_shared<ThresholdClassifier>(0.3)};
  const auto est = empirical_rademacher(HypothesisSpec::list(one), draws, 512, 5);
  CHECK(std::abs(est.estimate) <= 5.0 * est.std_err + 1e-12);
}

TEST_CASE("Rademacher estimate under shattering approaches one half") {
  // Eight distinct atoms; the explicit list realizes all 2^8 behaviors, so
  // the sup picks f = 1 exactly on the positive signs.
  std::vector<Cell> cells;
  for (int a = 0; a < 8; ++a) cells.push_back({0.0, 0.0, a, a % 2, 0.125});
  const LabeledJoint joint = LabeledJoint::discrete(2, std::move(cells));
  SampleSet draws;
  draws.dim = 1;
  draws.num_labels = 2;
  for (int a = 0; a < 8; ++a) {
    draws.xs.push_back(static_cast<double>(a));
    draws.ys.push_back(a % 2);
  }
  std::vector<int> atoms = {0, 1, 2, 3, 4, 5, 6, 7};
  std::vector<std::shared_ptr<const Classifier>> all;
  for (int code = 0; code < 256; ++code) {
    std::vector<int> assignment(8);
    for (int bit = 0; bit < 8; ++bit) assignment[bit] = (code >> bit) & 1;
    all.push_back(std::make_shared<CellwiseClassifier>(
        CellwiseClassifier::atoms(atoms, assignment)));
  }
  const auto est =
      empirical_rademacher(HypothesisSpec::list(std::move(all)), draws, 512, 7);
  CHECK(std::abs(est.estimate - 0.5) <= 5.0 * est.std_err + 1e-12);
  (void)joint;
}

TEST_CASE("loss-class and sign-class estimates obey the factor-two identity") {
  const SampleSet draws = example1_draws(600, 12);
  const HypothesisSpec grid = HypothesisSpec::grid(-1.0, 1.0, 101);
  const auto f_est = empirical_rademacher(grid, draws, 768, 21);
  const auto sign_est = empirical_rademacher_signs(grid, draws, 768, 22);
  const double tol =
      5.0 * std::sqrt(4.0 * f_est.std_err * f_est.std_err +
                      sign_est.std_err * sign_est.std_err) + 1e-12;
  CHECK(std::abs(2.0 * f_est.estimate - sign_est.estimate) <= tol);
}

TEST_CASE("per-draw identity against a hand-rolled oracle") {
  // 2 sup_h sum sigma_i 1(h != y_i) - sum sigma_i == sup_h sum sigma_i' h~(x_i)
  // with sigma_i' = -sigma_i y~_i, verified directly on a tiny instance.
  const double xs[] = {-0.7, -0.2, 0.1, 0.4, 0.8};
  const int ys[] = {1, 0, 1, 0, 0};
  const double rhos[] = {-0.5, 0.0, 0.3, 0.9};
  Rng rng(77);
  for (int draw = 0; draw < 64; ++draw) {
    double sigma[5];
    for (double& s : sigma) s = (rng.next_u64() & 1u) ? 1.0 : -1.0;
    double lhs = -1e300, rhs = -1e300, total = 0.0;
    for (double s : sigma) total += s;
    for (double rho : rhos) {
      double corr_f = 0.0, corr_sign = 0.0;
      for (int i = 0; i < 5; ++i) {
        const int pred = xs[i] < rho ? 1 : 0;
        corr_f += sigma[i] * (pred != ys[i] ? 1.0 : 0.0);
        const double y_pm = ys[i] == 1 ? 1.0 : -1.0;
        const double h_pm = pred == 1 ? 1.0 : -1.0;
        corr_sign += (-sigma[i] * y_pm) * h_pm;
      }
      lhs = std::max(lhs, corr_f);
      rhs = std::max(rhs, corr_sign);
    }
    CHECK(2.0 * lhs - total == doctest::Approx(rhs).epsilon(1e-12));
  }
}

TEST_CASE("assembled Rademacher slack values") {
  BoundInputs inputs;
  inputs.m = inputs.k = 1000;
  inputs.confidence = 0.05;
  inputs.r_m = inputs.r_k = 0.05;
  const BoundSlacks slack = rademacher_bound_value(inputs);
  CHECK(slack.one_sided == doctest::Approx(0.5872330448328795).epsilon(1e-12));
  CHECK(slack.symmetric == slack.one_sided);
  CHECK(slack.realizable == doctest::Approx(0.5 * slack.one_sided).epsilon(1e-15));

  // Vanishing estimates and huge samples shrink the slack to zero.
  BoundInputs tiny;
  tiny.m = tiny.k = 100000000;
  tiny.confidence = 0.05;
  tiny.r_m = tiny.r_k = 0.0;
  CHECK(rademacher_bound_value(tiny).one_sided < 2e-3);
}

TEST_CASE("VC bound values") {
  CHECK(vc_bound_value(1, 1000) ==
        doctest::Approx(0.12575973345218364).epsilon(1e-12));
  CHECK(vc_bound_value(5, 5) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));

  // d > m falls back to the binomial-sum form: sum_{i<=5} C(5,i) = 32.
  CHECK(vc_bound_value(10, 5) ==
        doctest::Approx(std::sqrt(2.0 / 5.0 * std::log(32.0))).epsilon(1e-9));

  double prev = 1e300;
  for (std::size_t m = 10; m <= 163840; m *= 2) {
    const double value = vc_bound_value(3, m);
    CHECK(value < prev);
    prev = value;
  }
}

TEST_CASE("Natarajan bound values") {
  CHECK(natarajan_bound_value(10, 10, 10000, 0.05, 1.0) ==
        doctest::Approx(0.05101135481781919).epsilon(1e-12));
  // K = 2 reduces to the VC-flavored rate.
  CHECK(natarajan_bound_value(4, 2, 500, 0.1, 2.0) ==
        doctest::Approx(2.0 * std::sqrt((4.0 * std::log(2.0) + std::log(10.0)) /
                                        500.0)).epsilon(1e-12));
  // Quadrupling m halves the value.
  CHECK(natarajan_bound_value(3, 5, 4000, 0.05, 1.0) ==
        doctest::Approx(0.5 * natarajan_bound_value(3, 5, 1000, 0.05, 1.0))
            .epsilon(1e-12));

  const BoundSlacks two = natarajan_two_domain_slacks(3, 4, 1000, 2000, 0.05, 1.0);
  CHECK(two.one_sided == doctest::Approx(2.0 * two.realizable).epsilon(1e-15));
}

TEST_CASE("estimation reduction holds at every sample size") {
  const auto [s, t] = example1_pair(0.1);
  const HypothesisSpec gamma = HypothesisSpec::grid(-1.0, 1.0, 201);
  const std::size_t ms[] = {100, 1000, 10000};
  const auto checks = estimation_reduction_check(s, t, gamma, ms, 2024);
  REQUIRE(checks.size() == 3);
  for (const EstimationCheck& check : checks) {
    CHECK(check.ok(1e-9));
    // Root-m rate of the empirical measure, within a factor of five.
    CHECK(std::abs(check.t_hat_one_sided - check.t_true_one_sided) <=
          5.0 / std::sqrt(static_cast<double>(check.m)));
  }
}

TEST_CASE("estimation terms vanish when the sample equals the distribution") {
  const auto [s, t] = example1_pair(0.1);
  const HypothesisSpec gamma = HypothesisSpec::grid(-1.0, 1.0, 201);
  const auto enumeration =
      enumerate_gamma(gamma, oracles::merged_kinks_for_test(s, t));
  const auto risks_s = enumeration_risks(enumeration, s, LossKind::zero_one());
  const auto risks_t = enumeration_risks(enumeration, t, LossKind::zero_one());
  const TransferReport truth =
      measures_from_risks(risks_s, risks_t, enumeration, LossKind::zero_one());
  const TransferReport same =
      measures_from_risks(risks_s, risks_t, enumeration, LossKind::zero_one());
  CHECK(truth.t_one_sided_st == same.t_one_sided_st);
  double est = 0.0;
  for (std::size_t i = 0; i < risks_s.size(); ++i)
    est = std::max(est, std::abs(risks_s[i] - risks_s[i]));
  CHECK(est == 0.0);
}

TEST_CASE("empirical Rademacher complexity is nonincreasing in m") {
  const HypothesisSpec grid = HypothesisSpec::grid(-1.0, 1.0, 101);
  double prev_estimate = 1e300;
  double prev_std_err = 0.0;
  for (std::size_t m : {std::size_t{100}, std::size_t{400}, std::size_t{1600}}) {
    const SampleSet draws = example1_draws(m, 3003);
    const auto est = empirical_rademacher(grid, draws, 512, 9);
    CHECK(est.estimate <= prev_estimate + 2.0 * (est.std_err + prev_std_err));
    prev_estimate = est.estimate;
    prev_std_err = est.std_err;
  }
}

TEST_CASE("coverage experiment is comfortably above the nominal level") {
  const auto [s, t] = example1_pair(0.1);
  const HypothesisSpec gamma = HypothesisSpec::grid(-1.0, 1.0, 201);
  const double covered = coverage_experiment(s, t, gamma, 400, 400, 50, 0.1, 32, 515);
  CHECK(covered >= 0.9);
}
