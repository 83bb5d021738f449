#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "transfer/nnet.hpp"

using namespace transfer;

namespace {

SampleSet random_batch(int dim, int num_labels, std::size_t m, std::uint64_t seed) {
  Rng rng(seed);
  SampleSet batch;
  batch.dim = dim;
  batch.num_labels = num_labels;
  for (std::size_t i = 0; i < m; ++i) {
    for (int d = 0; d < dim; ++d) batch.xs.push_back(rng.uniform(-1.5, 1.5));
    batch.ys.push_back(static_cast<int>(rng.next_u64() %
                                        static_cast<std::uint64_t>(num_labels)));
  }
  return batch;
}

}  // namespace

TEST_CASE("zero-weight head outputs the uniform distribution") {
  MlpArchitecture arch;
  arch.input_dim = 2;
  arch.hidden = {4};
  arch.feature_dim = 3;
  arch.num_labels = 4;
  MlpModel model(arch, 1);
  std::vector<double> zeros(model.head_param_count(), 0.0);
  model.set_head_params(zeros);
  const double x[] = {0.3, -0.8};
  std::vector<double> probs(4);
  model.forward({x, 2}, probs);
  for (double p : probs) CHECK(p == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("forward outputs respect the clamp") {
  MlpArchitecture arch;
  arch.input_dim = 2;
  arch.hidden = {8};
  arch.feature_dim = 4;
  arch.num_labels = 3;
  arch.clamp = 0.2;
  MlpModel model(arch, 7);
  Rng rng(9);
  std::vector<double> probs(3);
  for (int trial = 0; trial < 50; ++trial) {
    const double x[] = {rng.uniform(-3, 3), rng.uniform(-3, 3)};
    model.forward({x, 2}, probs);
    for (double p : probs) {
      CHECK(p >= 0.2);
      CHECK(p <= 0.8);
    }
  }
}

TEST_CASE("flat parameter views round-trip bit-exactly") {
  MlpArchitecture arch;
  arch.input_dim = 3;
  arch.hidden = {5, 4};
  arch.feature_dim = 2;
  arch.num_labels = 3;
  MlpModel model(arch, 11);
  const std::vector<double> head = model.head_params();
  const std::vector<double> feat = model.featurizer_params();
  model.set_head_params(head);
  model.set_featurizer_params(feat);
  CHECK(model.head_params() == head);
  CHECK(model.featurizer_params() == feat);
  CHECK(head.size() == model.head_param_count());
  CHECK(feat.size() == model.featurizer_param_count());
}

TEST_CASE("gradients match central finite differences") {
  struct ArchCase {
    int input;
    std::vector<int> hidden;
    int feature;
    int labels;
  };
  const ArchCase cases[] = {
      {2, {}, 3, 2}, {2, {4}, 3, 3}, {3, {4, 4}, 2, 2}, {2, {8}, 4, 3}};
  int case_id = 0;
  for (const ArchCase& c : cases) {
    MlpArchitecture arch;
    arch.input_dim = c.input;
    arch.hidden = c.hidden;
    arch.feature_dim = c.feature;
    arch.num_labels = c.labels;
    MlpModel model(arch, 100 + case_id);
    const SampleSet batch = random_batch(c.input, c.labels, 8, 200 + case_id);
    const LossKind ce = LossKind::cross_entropy(arch.clamp);

    auto [loss, grad] = loss_and_grad(model, batch, ce, true);
    (void)loss;

    std::vector<double> flat = model.head_params();
    const std::vector<double> feat = model.featurizer_params();
    flat.insert(flat.end(), feat.begin(), feat.end());
    const std::size_t head_n = model.head_param_count();

    auto eval = [&](const std::vector<double>& params) {
      MlpModel probe = model;
      probe.set_head_params({params.data(), head_n});
      probe.set_featurizer_params({params.data() + head_n, params.size() - head_n});
      return model_risk(probe, batch, ce);
    };
    const std::vector<double> fd =
        oracles::finite_difference_grad(eval, flat, 1e-6);
    CHECK(oracles::l2_relative_error(fd, grad) <= 1e-5);
    ++case_id;
  }
}

TEST_CASE("0-1 loss has no gradient") {
  MlpArchitecture arch;
  MlpModel model(arch, 5);
  const SampleSet batch = random_batch(arch.input_dim, arch.num_labels, 4, 6);
  CHECK_THROWS_AS(loss_and_grad(model, batch, LossKind::zero_one(), false),
                  ValidationError);
}

TEST_CASE("duplicating a single point leaves loss and gradient unchanged") {
  MlpArchitecture arch;
  arch.input_dim = 2;
  arch.hidden = {4};
  arch.feature_dim = 3;
  MlpModel model(arch, 21);
  SampleSet one = random_batch(2, 2, 1, 22);
  SampleSet two = one;
  two.xs.insert(two.xs.end(), one.xs.begin(), one.xs.end());
  two.ys.insert(two.ys.end(), one.ys.begin(), one.ys.end());
  const LossKind ce = LossKind::cross_entropy(arch.clamp);
  const auto [l1, g1] = loss_and_grad(model, one, ce, true);
  const auto [l2, g2] = loss_and_grad(model, two, ce, true);
  CHECK(l1 == l2);
  CHECK(g1 == g2);

  // Duplicating a whole batch changes nothing beyond accumulation rounding.
  SampleSet batch = random_batch(2, 2, 16, 23);
  SampleSet doubled = batch;
  doubled.xs.insert(doubled.xs.end(), batch.xs.begin(), batch.xs.end());
  doubled.ys.insert(doubled.ys.end(), batch.ys.begin(), batch.ys.end());
  const auto [lb, gb] = loss_and_grad(model, batch, ce, true);
  const auto [ld, gd] = loss_and_grad(model, doubled, ce, true);
  CHECK(lb == doctest::Approx(ld).epsilon(1e-13));
  for (std::size_t i = 0; i < gb.size(); ++i)
    CHECK(gb[i] == doctest::Approx(gd[i]).epsilon(1e-10));
}

TEST_CASE("a saturated correct head has zero gradient through the clamp") {
  MlpArchitecture arch;
  arch.input_dim = 1;
  arch.hidden = {};
  arch.feature_dim = 1;
  arch.num_labels = 2;
  MlpModel model(arch, 31);
  // Feature is relu(w x + b); force a large positive margin for label 1.
  model.set_featurizer_params(std::vector<double>{1.0, 2.0});  // w=1, b=2
  model.set_head_params(std::vector<double>{-40.0, 40.0, 0.0, 0.0});
  SampleSet batch;
  batch.dim = 1;
  batch.num_labels = 2;
  batch.xs = {0.5, 1.0};
  batch.ys = {1, 1};
  const auto [loss, grad] =
      loss_and_grad(model, batch, LossKind::cross_entropy(arch.clamp), true);
  CHECK(loss == doctest::Approx(-std::log2(1.0 - arch.clamp)).epsilon(1e-9));
  for (double g : grad) CHECK(std::abs(g) <= 1e-12);
}

TEST_CASE("ball projection") {
  const BallConstraint unit{{0.0, 0.0}, 1.0};
  const std::vector<double> far = {3.0, 4.0};
  const std::vector<double> projected = project_to_ball(far, unit);
  CHECK(projected[0] == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(projected[1] == doctest::Approx(0.8).epsilon(1e-15));

  const std::vector<double> inside = {0.3, -0.2};
  CHECK(project_to_ball(inside, unit) == inside);

  const BallConstraint point{{1.0, 2.0}, 0.0};
  CHECK(project_to_ball(far, point) == point.center);

  Rng rng(41);
  for (int trial = 0; trial < 50; ++trial) {
    BallConstraint ball{{rng.normal(), rng.normal(), rng.normal()},
                        0.5 * rng.uniform01()};
    std::vector<double> theta = {rng.normal() * 3, rng.normal() * 3,
                                 rng.normal() * 3};
    const auto once = project_to_ball(theta, ball);
    const auto twice = project_to_ball(once, ball);
    CHECK(once == twice);
    double d_once = 0.0, d_theta = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
      d_once += (once[i] - ball.center[i]) * (once[i] - ball.center[i]);
      d_theta += (theta[i] - ball.center[i]) * (theta[i] - ball.center[i]);
    }
    CHECK(d_once <= ball.radius * ball.radius * (1.0 + 1e-12) + 1e-15);
    CHECK(d_once <= d_theta + 1e-15);
  }
}

TEST_CASE("parametrization Lipschitz probe") {
  MlpArchitecture arch;
  arch.input_dim = 2;
  arch.hidden = {6};
  arch.feature_dim = 4;
  MlpModel model(arch, 51);
  const SampleSet mu = random_batch(2, 2, 400, 52);

  const double l_a = param_lipschitz_probe(model, mu, 40, 1);
  const double l_b = param_lipschitz_probe(model, mu, 40, 2);
  CHECK(l_a > 0.0);
  CHECK(l_a <= 2.0 * l_b);
  CHECK(l_b <= 2.0 * l_a);

  // Shrinking the perturbations stabilizes the local estimate.
  const double coarse = param_lipschitz_probe(model, mu, 60, 3, 0.02);
  const double fine = param_lipschitz_probe(model, mu, 60, 3, 0.01);
  CHECK(std::abs(coarse - fine) <= 0.1 * std::max(coarse, fine));

  CHECK_THROWS_AS(param_lipschitz_probe(model, mu, 5, 4, 0.0), ValidationError);
}

TEST_CASE("CE functional probes: Lipschitz and strong convexity") {
  const SampleSet binary_mu = random_batch(1, 2, 120, 61);
  const CeProbeReport binary = ce_functional_probes(binary_mu, 0.05, 500, 62);
  CHECK(binary.ok(1e-9));
  CHECK(binary.lambda == doctest::Approx(1.0 / (4.0 * std::log(2.0))));

  const SampleSet multi_mu = random_batch(1, 4, 120, 63);
  const CeProbeReport multi = ce_functional_probes(multi_mu, 0.02, 500, 64);
  CHECK(multi.ok(1e-9));
  CHECK(multi.lambda == doctest::Approx(1.0 / std::log(2.0)));
}

TEST_CASE("optimizers are deterministic and validated") {
  OptimizerSpec bad;
  bad.kind = OptimizerSpec::kGradientAscent;
  CHECK_THROWS_AS(Optimizer(bad, 3, false), ValidationError);

  OptimizerSpec adam;
  adam.kind = OptimizerSpec::kAdam;
  adam.lr = 0.05;
  std::vector<double> p1 = {1.0, -2.0}, p2 = {1.0, -2.0};
  Optimizer o1(adam, 2, false), o2(adam, 2, false);
  const std::vector<double> g = {0.3, -0.1};
  for (int i = 0; i < 10; ++i) {
    o1.step(p1, g);
    o2.step(p2, g);
  }
  CHECK(p1 == p2);
}
