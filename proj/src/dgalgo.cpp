#include "transfer/dgalgo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "transfer/kernels.hpp"

namespace transfer {

namespace {

constexpr double kLn2 = 0.6931471805599453094172321214582;

struct DomainCache {
  std::vector<double> features;
  std::vector<int> ys;
};

std::vector<DomainCache> cache_features(const MlpModel& model,
                                        std::span<const SampleSet> domains) {
  std::vector<DomainCache> caches;
  caches.reserve(domains.size());
  for (const SampleSet& d : domains)
    caches.push_back({compute_features(model, d), d.ys});
  return caches;
}

std::vector<double> head_losses(const MlpModel& model,
                                const std::vector<DomainCache>& caches,
                                const LossKind& loss) {
  std::vector<double> out(caches.size());
  for (std::size_t i = 0; i < caches.size(); ++i)
    out[i] = head_risk(model, caches[i].features, caches[i].ys, loss);
  return out;
}

std::size_t index_of_max(const std::vector<double>& v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

std::size_t index_of_min(const std::vector<double>& v) {
  return static_cast<std::size_t>(std::min_element(v.begin(), v.end()) - v.begin());
}

void validate_domains(const MlpModel& model, std::span<const SampleSet> domains) {
  require(!domains.empty(), "need at least one domain");
  for (const SampleSet& d : domains) {
    d.validate();
    require(d.dim == model.arch().input_dim, "domain dimension mismatch");
    require(d.num_labels == model.num_labels(), "domain label-count mismatch");
  }
}

std::vector<double> flat_params(const MlpModel& model) {
  std::vector<double> flat = model.head_params();
  const std::vector<double> feat = model.featurizer_params();
  flat.insert(flat.end(), feat.begin(), feat.end());
  return flat;
}

void set_flat_params(MlpModel& model, std::span<const double> flat) {
  const std::size_t head_n = model.head_param_count();
  model.set_head_params(flat.subspan(0, head_n));
  model.set_featurizer_params(flat.subspan(head_n));
}

}  // namespace

AttackResult attack_transferability(const MlpModel& model,
                                    std::span<const SampleSet> domains,
                                    const AttackConfig& cfg, std::uint64_t seed) {
  (void)seed;  // the full-batch ascent is deterministic
  validate_domains(model, domains);
  require(cfg.radius >= 0.0, "attack radius must be nonnegative");
  require(cfg.iterations >= 1, "attack needs at least one iteration");
  require(cfg.steps_per_selection >= 1, "need at least one ascent step");

  MlpModel work = model;
  const std::vector<DomainCache> caches = cache_features(model, domains);
  const LossKind ce = LossKind::cross_entropy(model.arch().clamp);
  const LossKind zo = LossKind::zero_one();

  AttackResult result;
  result.radius = cfg.radius;
  result.reference_loss = head_losses(work, caches, ce);
  for (const DomainCache& c : caches)
    result.reference_accuracy.push_back(
        1.0 - head_risk(work, c.features, c.ys, zo));

  const BallConstraint ball{model.head_params(), cfg.radius};
  std::vector<double> theta = ball.center;
  Optimizer ascender(cfg.ascent, theta.size(), /*maximize=*/true);
  std::vector<double> grad(theta.size());

  result.best_gap = -std::numeric_limits<double>::infinity();
  for (int t = 1; t <= cfg.iterations; ++t) {
    const std::vector<double> losses = head_losses(work, caches, ce);
    const std::size_t j = index_of_max(losses);
    const std::size_t k = index_of_min(losses);

    for (int s = 0; s < cfg.steps_per_selection; ++s) {
      std::fill(grad.begin(), grad.end(), 0.0);
      head_ce_risk_and_grad(work, caches[j].features, caches[j].ys, grad, 1.0);
      head_ce_risk_and_grad(work, caches[k].features, caches[k].ys, grad, -1.0);
      ascender.step(theta, grad);
      theta = project_to_ball(theta, ball);
      work.set_head_params(theta);
    }

    const double dist = std::sqrt(
        kernels::sq_dist(theta.data(), ball.center.data(), theta.size()));
    internal_check(dist <= cfg.radius * (1.0 + 1e-12) + 1e-15,
                   "attack iterate escaped the radius ball");

    AttackIterate iterate;
    iterate.iter = t;
    iterate.max_index = static_cast<int>(j);
    iterate.min_index = static_cast<int>(k);
    const std::vector<double> post = head_losses(work, caches, ce);
    iterate.gap = post[j] - post[k];
    for (std::size_t i = 0; i < caches.size(); ++i)
      iterate.domains.push_back(
          {post[i], 1.0 - head_risk(work, caches[i].features, caches[i].ys, zo)});
    if (iterate.gap > result.best_gap) {
      result.best_gap = iterate.gap;
      result.best_max_index = iterate.max_index;
      result.best_min_index = iterate.min_index;
      result.best_theta = theta;
      result.best_domains = iterate.domains;
    }
    result.trajectory.push_back(std::move(iterate));
  }
  return result;
}

ErmResult erm_train(std::span<const SampleSet> sources,
                    const MlpArchitecture& arch, const OptimizerSpec& opt,
                    std::uint64_t seed) {
  require(!sources.empty(), "ERM needs at least one source domain");
  MlpModel model(arch, seed);
  validate_domains(model, sources);
  require(opt.steps >= 0, "step count must be nonnegative");
  require(opt.kind != OptimizerSpec::kGradientAscent,
          "ERM needs a descent optimizer");

  ErmResult result{std::move(model), {}};
  if (opt.steps == 0) return result;

  const LossKind ce = LossKind::cross_entropy(arch.clamp);
  std::vector<double> params = flat_params(result.model);
  Optimizer descender(opt, params.size(), /*maximize=*/false);
  const double inv_n = 1.0 / static_cast<double>(sources.size());

  std::vector<double> grad(params.size());
  for (int step = 0; step < opt.steps; ++step) {
    std::fill(grad.begin(), grad.end(), 0.0);
    double mean_loss = 0.0;
    for (const SampleSet& domain : sources) {
      auto [loss, g] = loss_and_grad(result.model, domain, ce, true);
      mean_loss += inv_n * loss;
      kernels::axpy(inv_n, g.data(), grad.data(), grad.size());
    }
    result.objective.push_back(mean_loss);
    descender.step(params, grad);
    set_flat_params(result.model, params);
  }
  return result;
}

namespace {

// One inner adversarial phase: N projected ascent steps on theta', with the
// (max, min) pair re-selected before every step. Returns the final theta'.
std::vector<double> inner_ascent(const MlpModel& model,
                                 const std::vector<DomainCache>& caches,
                                 const std::vector<double>& theta,
                                 const TransferTrainConfig& cfg) {
  MlpModel work = model;
  const BallConstraint ball{theta, cfg.radius};
  std::vector<double> theta_adv = theta;
  work.set_head_params(theta_adv);
  Optimizer ascender(cfg.ascent, theta_adv.size(), /*maximize=*/true);
  const LossKind ce = LossKind::cross_entropy(model.arch().clamp);
  std::vector<double> grad(theta_adv.size());
  for (int n = 0; n < cfg.inner_steps; ++n) {
    const std::vector<double> losses = head_losses(work, caches, ce);
    const std::size_t j = index_of_max(losses);
    const std::size_t k = index_of_min(losses);
    std::fill(grad.begin(), grad.end(), 0.0);
    head_ce_risk_and_grad(work, caches[j].features, caches[j].ys, grad, 1.0);
    head_ce_risk_and_grad(work, caches[k].features, caches[k].ys, grad, -1.0);
    ascender.step(theta_adv, grad);
    theta_adv = project_to_ball(theta_adv, ball);
    work.set_head_params(theta_adv);
  }
  const double dist = std::sqrt(
      kernels::sq_dist(theta_adv.data(), theta.data(), theta_adv.size()));
  internal_check(dist <= cfg.radius * (1.0 + 1e-12) + 1e-15,
                 "inner iterate escaped the radius ball");
  return theta_adv;
}

}  // namespace

TrainResult transfer_train(std::span<const SampleSet> sources,
                           const MlpArchitecture& arch,
                           const TransferTrainConfig& cfg, std::uint64_t seed) {
  require(sources.size() >= 2, "the gap objective needs at least two sources");
  require(cfg.inner_steps >= 1, "need at least one inner ascent step");
  require(cfg.epochs >= 1, "need at least one epoch");
  require(cfg.radius >= 0.0, "radius must be nonnegative");

  MlpModel model(arch, seed);
  validate_domains(model, sources);
  const LossKind ce = LossKind::cross_entropy(arch.clamp);
  const LossKind zo = LossKind::zero_one();
  const double inv_n = 1.0 / static_cast<double>(sources.size());

  TrainResult result{std::move(model), {}, 0.0};
  std::vector<double> params = flat_params(result.model);
  Optimizer descender(cfg.descent, params.size(), /*maximize=*/false);
  const std::size_t head_n = result.model.head_param_count();

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const std::vector<DomainCache> caches = cache_features(result.model, sources);
    const std::vector<double> theta = result.model.head_params();
    const std::vector<double> losses = head_losses(result.model, caches, ce);

    EpochRecord record;
    record.epoch = epoch;
    record.max_loss = losses[index_of_max(losses)];
    record.min_loss = losses[index_of_min(losses)];
    record.mean_loss = kernels::sum(losses.data(), losses.size()) * inv_n;
    record.domain_loss = losses;
    for (const DomainCache& c : caches)
      record.domain_accuracy.push_back(
          1.0 - head_risk(result.model, c.features, c.ys, zo));

    // Adversarial phase: h' starts at h each epoch.
    const std::vector<double> theta_adv =
        inner_ascent(result.model, caches, theta, cfg);
    MlpModel adv = result.model;
    adv.set_head_params(theta_adv);
    const std::vector<double> adv_losses = head_losses(adv, caches, ce);
    const std::size_t j = index_of_max(adv_losses);
    const std::size_t k = index_of_min(adv_losses);
    record.gap_after_inner = adv_losses[j] - adv_losses[k];
    record.objective = record.mean_loss + cfg.lambda_weight * record.gap_after_inner;
    result.epochs.push_back(std::move(record));

    // Descent on (g, h): the mean term moves head and featurizer, the gap
    // term (h' fixed) moves the featurizer only.
    std::vector<double> grad(params.size(), 0.0);
    for (const SampleSet& domain : sources) {
      auto [loss, g] = loss_and_grad(result.model, domain, ce, true);
      (void)loss;
      kernels::axpy(inv_n, g.data(), grad.data(), grad.size());
    }
    if (cfg.lambda_weight != 0.0) {
      const std::vector<double> gj =
          featurizer_grad_for_head(result.model, theta_adv, sources[j]);
      const std::vector<double> gk =
          featurizer_grad_for_head(result.model, theta_adv, sources[k]);
      kernels::axpy(cfg.lambda_weight, gj.data(), grad.data() + head_n, gj.size());
      kernels::axpy(-cfg.lambda_weight, gk.data(), grad.data() + head_n, gk.size());
    }
    descender.step(params, grad);
    set_flat_params(result.model, params);
  }

  // Final empirical outer objective (unweighted printed form).
  const std::vector<DomainCache> caches = cache_features(result.model, sources);
  const std::vector<double> theta = result.model.head_params();
  const std::vector<double> losses = head_losses(result.model, caches, ce);
  const std::vector<double> theta_adv =
      inner_ascent(result.model, caches, theta, cfg);
  MlpModel adv = result.model;
  adv.set_head_params(theta_adv);
  const std::vector<double> adv_losses = head_losses(adv, caches, ce);
  result.eta = kernels::sum(losses.data(), losses.size()) * inv_n +
               (adv_losses[index_of_max(adv_losses)] -
                adv_losses[index_of_min(adv_losses)]);
  return result;
}

GuaranteeCertificate verify_optimization_guarantee(const TrainResult& result,
                                                   std::span<const SampleSet> sources,
                                                   double radius,
                                                   const GuaranteeConfig& cfg,
                                                   std::uint64_t seed) {
  require(cfg.n_mixture_pairs >= 1 && cfg.n_ball_samples >= 1,
          "certificate needs mixtures and ball samples");
  require(cfg.lipschitz_pairs >= 1, "certificate needs Lipschitz probe pairs");
  const MlpModel& model = result.model;
  validate_domains(model, sources);
  const std::size_t n = sources.size();
  const LossKind ce = LossKind::cross_entropy(model.arch().clamp);

  const std::vector<DomainCache> caches = cache_features(model, sources);
  const std::vector<double> theta = model.head_params();
  const std::vector<double> base_losses = head_losses(model, caches, ce);
  const double mean_loss =
      kernels::sum(base_losses.data(), base_losses.size()) /
      static_cast<double>(n);

  // Pooled sample for the generic parametrization probe.
  SampleSet pooled = sources[0];
  for (std::size_t i = 1; i < n; ++i) {
    pooled.xs.insert(pooled.xs.end(), sources[i].xs.begin(), sources[i].xs.end());
    pooled.ys.insert(pooled.ys.end(), sources[i].ys.begin(), sources[i].ys.end());
  }

  GuaranteeCertificate cert;
  cert.eta_train = result.eta;
  cert.radius = radius;
  cert.l_loss = 1.0 / (kLn2 * model.arch().clamp);
  cert.l_theta = param_lipschitz_probe(model, pooled, cfg.lipschitz_pairs,
                                       Rng::derive(seed, 0));

  // Ball samples; theta itself is always included so eta covers max_i at h.
  Rng rng(Rng::derive(seed, 1));
  std::vector<std::vector<double>> thetas = {theta};
  for (int s = 1; s < cfg.n_ball_samples; ++s) {
    std::vector<double> candidate = theta;
    std::vector<double> dir(theta.size());
    for (double& d : dir) d = rng.normal();
    const double norm = std::sqrt(kernels::dot(dir.data(), dir.data(), dir.size()));
    const double r =
        radius * std::pow(rng.uniform01(),
                          1.0 / static_cast<double>(theta.size()));
    if (norm > 0.0)
      kernels::axpy(r / norm, dir.data(), candidate.data(), candidate.size());
    thetas.push_back(project_to_ball(candidate, {theta, radius}));
  }

  // Per-sample per-source risks, the sampled gap sup, and the parametrization
  // ratios along the probed directions (so the recorded L_theta genuinely
  // dominates every pair the certificate evaluates).
  MlpModel work = model;
  std::vector<std::vector<double>> sample_losses;
  double max_gap = 0.0;
  for (const auto& candidate : thetas) {
    work.set_head_params(candidate);
    sample_losses.push_back(head_losses(work, caches, ce));
    const auto& l = sample_losses.back();
    max_gap = std::max(max_gap, l[index_of_max(l)] - l[index_of_min(l)]);
    const double dist = std::sqrt(
        kernels::sq_dist(candidate.data(), theta.data(), candidate.size()));
    if (dist > 1e-14) {
      for (const SampleSet& domain : sources)
        cert.l_theta = std::max(
            cert.l_theta,
            head_function_l1_distance(model, candidate, theta, domain) / dist);
    }
  }
  cert.eta_empirical = std::max(result.eta, mean_loss + max_gap);
  const double eta = cert.eta_empirical;
  const double lip_term = cert.l_loss * cert.l_theta * radius;

  // Random mixture pairs; the (pure max, pure min) pair is always included.
  Rng mix_rng(Rng::derive(seed, 2));
  std::vector<std::pair<std::vector<double>, std::vector<double>>> mixtures;
  {
    std::vector<double> pure_a(n, 0.0), pure_b(n, 0.0);
    pure_a[index_of_max(base_losses)] = 1.0;
    pure_b[index_of_min(base_losses)] = 1.0;
    mixtures.push_back({pure_a, pure_b});
  }
  auto random_weights = [&]() {
    std::vector<double> w(n);
    double total = 0.0;
    for (double& x : w) {
      x = -std::log(1.0 - mix_rng.uniform01());
      total += x;
    }
    for (double& x : w) x /= total;
    return w;
  };
  for (int p = 1; p < cfg.n_mixture_pairs; ++p)
    mixtures.push_back({random_weights(), random_weights()});

  cert.worst_realizable_slack = std::numeric_limits<double>::infinity();
  cert.worst_source_slack = std::numeric_limits<double>::infinity();
  cert.worst_target_slack = std::numeric_limits<double>::infinity();
  cert.worst_mixture_primitive_slack = std::numeric_limits<double>::infinity();
  cert.n_checks = 0;

  for (const auto& losses : sample_losses) {
    const double max_l = losses[index_of_max(losses)];
    const double min_l = losses[index_of_min(losses)];
    for (std::size_t i = 0; i < n; ++i)
      cert.worst_source_slack =
          std::min(cert.worst_source_slack, eta + lip_term - losses[i]);
    for (const auto& [pi_a, pi_b] : mixtures) {
      double eps_a = 0.0, eps_b = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        eps_a += pi_a[i] * losses[i];
        eps_b += pi_b[i] * losses[i];
      }
      const double diff = std::abs(eps_a - eps_b);
      cert.worst_mixture_primitive_slack =
          std::min(cert.worst_mixture_primitive_slack, (max_l - min_l) - diff);
      cert.worst_realizable_slack =
          std::min(cert.worst_realizable_slack, eta - diff);
      cert.worst_target_slack = std::min(
          cert.worst_target_slack,
          std::min(2.0 * eta + lip_term - eps_a, 2.0 * eta + lip_term - eps_b));
      ++cert.n_checks;
    }
  }
  return cert;
}

}  // namespace transfer
