#include "transfer/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "transfer/kernels.hpp"

namespace transfer {

namespace {

struct SortedSample {
  std::vector<double> xs;
  std::vector<int> ys;
};

SortedSample sort_by_x(const SampleSet& sample) {
  const std::size_t m = sample.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return sample.xs[a] < sample.xs[b];
  });
  SortedSample out;
  out.xs.resize(m);
  out.ys.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    out.xs[i] = sample.xs[order[i]];
    out.ys[i] = sample.ys[order[i]];
  }
  return out;
}

// Distinct prefix cut positions induced by the enumerated thresholds.
std::vector<std::size_t> cut_positions(const SortedSample& sorted,
                                       std::span<const double> rhos) {
  std::vector<std::size_t> cuts;
  cuts.reserve(rhos.size());
  for (double rho : rhos)
    cuts.push_back(static_cast<std::size_t>(
        std::lower_bound(sorted.xs.begin(), sorted.xs.end(), rho) -
        sorted.xs.begin()));
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  return cuts;
}

RademacherEstimate summarize(const std::vector<double>& sups) {
  RademacherEstimate out;
  out.n_draws = static_cast<int>(sups.size());
  const double n = static_cast<double>(sups.size());
  out.estimate = kernels::sum(sups.data(), sups.size()) / n;
  double var = 0.0;
  for (double s : sups) var += (s - out.estimate) * (s - out.estimate);
  if (sups.size() > 1) var /= (n - 1.0);
  out.std_err = std::sqrt(var / n);
  return out;
}

// Shared driver for the two threshold-family variants. `loss_mode` selects
// f_i = 1(h(x_i) != y_i) versus the raw +-1 outputs.
RademacherEstimate rademacher_thresholds(const GammaEnumeration& gamma,
                                         const SampleSet& sample,
                                         int n_sign_draws, std::uint64_t seed,
                                         bool loss_mode) {
  const SortedSample sorted = sort_by_x(sample);
  const std::size_t m = sorted.xs.size();
  const auto cuts = cut_positions(sorted, gamma.rhos);

  std::vector<double> sups;
  sups.reserve(static_cast<std::size_t>(n_sign_draws));
  std::vector<double> sigma(m);
  std::vector<double> prefix(m + 1);
  for (int draw = 0; draw < n_sign_draws; ++draw) {
    Rng rng(Rng::derive(seed, static_cast<std::uint64_t>(draw)));
    for (std::size_t i = 0; i < m; ++i)
      sigma[i] = (rng.next_u64() & 1u) ? 1.0 : -1.0;

    // prefix[c] = sign correlation at cut c, built incrementally.
    if (loss_mode) {
      double base = 0.0;
      for (std::size_t i = 0; i < m; ++i)
        if (sorted.ys[i] != 0) base += sigma[i];
      prefix[0] = base;
      for (std::size_t i = 0; i < m; ++i) {
        double delta = 0.0;
        if (sorted.ys[i] == 1)
          delta = -sigma[i];
        else if (sorted.ys[i] == 0)
          delta = sigma[i];
        prefix[i + 1] = prefix[i] + delta;
      }
    } else {
      double total = kernels::sum(sigma.data(), m);
      prefix[0] = -total;
      for (std::size_t i = 0; i < m; ++i)
        prefix[i + 1] = prefix[i] + 2.0 * sigma[i];
    }
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t c : cuts) best = std::max(best, prefix[c]);
    sups.push_back(best / static_cast<double>(m));
  }
  return summarize(sups);
}

RademacherEstimate rademacher_list(const GammaEnumeration& gamma,
                                   const SampleSet& sample, int n_sign_draws,
                                   std::uint64_t seed, bool loss_mode) {
  const std::size_t m = sample.size();
  const std::size_t n = gamma.items.size();
  // Row per classifier: either the 0-1 losses or the +-1 outputs.
  std::vector<double> table(n * m);
  for (std::size_t h = 0; h < n; ++h)
    for (std::size_t i = 0; i < m; ++i) {
      const int pred = gamma.items[h]->predict(sample.x(i));
      if (loss_mode) {
        table[h * m + i] = pred == sample.ys[i] ? 0.0 : 1.0;
      } else {
        require(pred == 0 || pred == 1,
                "sign-output Rademacher needs binary non-abstaining classifiers");
        table[h * m + i] = pred == 1 ? 1.0 : -1.0;
      }
    }

  std::vector<double> sups;
  sups.reserve(static_cast<std::size_t>(n_sign_draws));
  std::vector<double> sigma(m);
  for (int draw = 0; draw < n_sign_draws; ++draw) {
    Rng rng(Rng::derive(seed, static_cast<std::uint64_t>(draw)));
    for (std::size_t i = 0; i < m; ++i)
      sigma[i] = (rng.next_u64() & 1u) ? 1.0 : -1.0;
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t h = 0; h < n; ++h)
      best = std::max(best, kernels::dot(table.data() + h * m, sigma.data(), m));
    sups.push_back(best / static_cast<double>(m));
  }
  return summarize(sups);
}

RademacherEstimate rademacher_impl(const HypothesisSpec& spec,
                                   const SampleSet& sample, int n_sign_draws,
                                   std::uint64_t seed, bool loss_mode) {
  require(n_sign_draws >= 1, "need at least one sign draw");
  sample.validate();
  const auto gamma = enumerate_gamma(spec, {});
  require(gamma.size() > 0, "empty hypothesis enumeration");
  if (gamma.thresholds()) {
    require(sample.dim == 1, "the threshold family needs 1D samples");
    return rademacher_thresholds(gamma, sample, n_sign_draws, seed, loss_mode);
  }
  return rademacher_list(gamma, sample, n_sign_draws, seed, loss_mode);
}

}  // namespace

RademacherEstimate empirical_rademacher(const HypothesisSpec& gamma,
                                        const SampleSet& sample,
                                        int n_sign_draws, std::uint64_t seed) {
  return rademacher_impl(gamma, sample, n_sign_draws, seed, /*loss_mode=*/true);
}

RademacherEstimate empirical_rademacher_signs(const HypothesisSpec& gamma,
                                              const SampleSet& sample,
                                              int n_sign_draws,
                                              std::uint64_t seed) {
  return rademacher_impl(gamma, sample, n_sign_draws, seed, /*loss_mode=*/false);
}

BoundSlacks rademacher_bound_value(const BoundInputs& inputs) {
  require(inputs.m >= 1 && inputs.k >= 1, "sample counts must be positive");
  require(inputs.confidence > 0.0 && inputs.confidence < 1.0,
          "confidence must lie in (0, 1)");
  require(inputs.r_m >= 0.0 && inputs.r_k >= 0.0,
          "Rademacher estimates must be nonnegative");
  const double log_term = std::log(4.0 / inputs.confidence);
  const double dev_m = std::sqrt(log_term / (2.0 * static_cast<double>(inputs.m)));
  const double dev_k = std::sqrt(log_term / (2.0 * static_cast<double>(inputs.k)));
  BoundSlacks out;
  out.one_sided = 4.0 * inputs.r_m + 4.0 * inputs.r_k + 2.0 * dev_m + 2.0 * dev_k;
  out.symmetric = out.one_sided;
  out.realizable = 2.0 * inputs.r_m + 2.0 * inputs.r_k + dev_m + dev_k;
  return out;
}

double vc_bound_value(int d, std::size_t m) {
  require(d >= 1 && m >= 1, "VC bound needs d >= 1 and m >= 1");
  const double dm = static_cast<double>(m);
  if (m >= static_cast<std::size_t>(d)) {
    const double dd = static_cast<double>(d);
    return std::sqrt(2.0 * dd / dm * std::log(std::exp(1.0) * dm / dd));
  }
  // log of sum_{i<=d} C(m, i) via log-sum-exp of lgamma terms.
  double max_log = -std::numeric_limits<double>::infinity();
  std::vector<double> logs;
  for (int i = 0; i <= d && i <= static_cast<int>(m); ++i) {
    const double lg = std::lgamma(dm + 1.0) - std::lgamma(i + 1.0) -
                      std::lgamma(dm - i + 1.0);
    logs.push_back(lg);
    max_log = std::max(max_log, lg);
  }
  double acc = 0.0;
  for (double lg : logs) acc += std::exp(lg - max_log);
  const double log_sum = max_log + std::log(acc);
  return std::sqrt(2.0 / dm * log_sum);
}

double natarajan_bound_value(int d, int num_labels, std::size_t m,
                             double confidence, double c) {
  require(d >= 1 && num_labels >= 2 && m >= 1, "bad Natarajan bound inputs");
  require(confidence > 0.0 && confidence < 1.0, "confidence must lie in (0, 1)");
  require(c > 0.0, "the Natarajan constant must be positive");
  return c * std::sqrt((static_cast<double>(d) * std::log(num_labels) +
                        std::log(1.0 / confidence)) /
                       static_cast<double>(m));
}

BoundSlacks natarajan_two_domain_slacks(int d, int num_labels, std::size_t m,
                                        std::size_t k, double confidence,
                                        double c) {
  // Each per-domain term carries log(2/delta) from the union bound.
  const double term_m = natarajan_bound_value(d, num_labels, m, confidence / 2.0, c);
  const double term_k = natarajan_bound_value(d, num_labels, k, confidence / 2.0, c);
  BoundSlacks out;
  out.one_sided = 2.0 * term_m + 2.0 * term_k;
  out.symmetric = out.one_sided;
  out.realizable = term_m + term_k;
  return out;
}

std::vector<EstimationCheck> estimation_reduction_check(
    const LabeledJoint& s, const LabeledJoint& t, const HypothesisSpec& gamma,
    std::span<const std::size_t> m_values, std::uint64_t seed) {
  // One shared enumeration for every sup; the reduction inequality is an
  // identity over a common Gamma, so all four risk tables must use it.
  std::vector<double> kinks = domain_kinks(s);
  {
    const auto kt = domain_kinks(t);
    kinks.insert(kinks.end(), kt.begin(), kt.end());
    std::sort(kinks.begin(), kinks.end());
    kinks.erase(std::unique(kinks.begin(), kinks.end()), kinks.end());
  }
  const auto enumeration = enumerate_gamma(gamma, kinks);
  const LossKind loss = LossKind::zero_one();
  const auto risks_s = enumeration_risks(enumeration, s, loss);
  const auto risks_t = enumeration_risks(enumeration, t, loss);
  const TransferReport truth = measures_from_risks(risks_s, risks_t, enumeration, loss);

  std::vector<EstimationCheck> checks;
  checks.reserve(m_values.size());
  for (std::size_t idx = 0; idx < m_values.size(); ++idx) {
    const std::size_t m = m_values[idx];
    const SampleSet s_hat = sample(s, m, Rng::derive(seed, 2 * idx), 1);
    const SampleSet t_hat = sample(t, m, Rng::derive(seed, 2 * idx + 1), 0);
    const auto risks_s_hat = enumeration_risks(enumeration, s_hat, loss);
    const auto risks_t_hat = enumeration_risks(enumeration, t_hat, loss);
    const TransferReport hat =
        measures_from_risks(risks_s_hat, risks_t_hat, enumeration, loss);

    double est_s = 0.0, est_t = 0.0;
    for (std::size_t i = 0; i < enumeration.size(); ++i) {
      est_s = std::max(est_s, std::abs(risks_s[i] - risks_s_hat[i]));
      est_t = std::max(est_t, std::abs(risks_t[i] - risks_t_hat[i]));
    }

    EstimationCheck check;
    check.m = m;
    check.t_true_one_sided = truth.t_one_sided_st;
    check.t_hat_one_sided = hat.t_one_sided_st;
    check.est_s = est_s;
    check.est_t = est_t;
    check.slack_one_sided = hat.t_one_sided_st + 2.0 * est_s + 2.0 * est_t -
                            truth.t_one_sided_st;
    check.slack_symmetric =
        hat.t_symmetric + 2.0 * est_s + 2.0 * est_t - truth.t_symmetric;
    check.slack_realizable = hat.t_realizable + est_s + est_t - truth.t_realizable;
    checks.push_back(check);
  }
  return checks;
}

double coverage_experiment(const LabeledJoint& s, const LabeledJoint& t,
                           const HypothesisSpec& gamma, std::size_t m,
                           std::size_t k, int n_trials, double confidence,
                           int n_sign_draws, std::uint64_t seed) {
  require(n_trials >= 1, "coverage experiment needs at least one trial");
  const LossKind loss = LossKind::zero_one();
  const TransferReport truth = transfer_measures(s, t, gamma, loss);

  int covered = 0;
  for (int trial = 0; trial < n_trials; ++trial) {
    const std::uint64_t trial_seed = Rng::derive(seed, static_cast<std::uint64_t>(trial));
    const SampleSet s_hat = sample(s, m, Rng::derive(trial_seed, 1), 1);
    const SampleSet t_hat = sample(t, k, Rng::derive(trial_seed, 2), 0);
    const TransferReport hat = transfer_measures(s_hat, t_hat, gamma, loss);

    BoundInputs inputs;
    inputs.m = m;
    inputs.k = k;
    inputs.confidence = confidence;
    const auto rm = empirical_rademacher(gamma, s_hat, n_sign_draws,
                                         Rng::derive(trial_seed, 3));
    const auto rk = empirical_rademacher(gamma, t_hat, n_sign_draws,
                                         Rng::derive(trial_seed, 4));
    inputs.r_m = rm.estimate;
    inputs.r_k = rk.estimate;
    const BoundSlacks slack = rademacher_bound_value(inputs);
    if (truth.t_one_sided_st <= hat.t_one_sided_st + slack.one_sided) ++covered;
  }
  return static_cast<double>(covered) / static_cast<double>(n_trials);
}

}  // namespace transfer
