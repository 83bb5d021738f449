#include "transfer/measures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace transfer {

namespace {

SupWitness argmax_witness(const std::vector<double>& values,
                          const GammaEnumeration& gamma) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] > values[best]) best = i;  // ties resolve to the smallest rho
  return {values[best], best, gamma.describe(best)};
}

std::vector<double> merged_kinks(const LabeledJoint& s, const LabeledJoint& t) {
  std::vector<double> kinks = domain_kinks(s);
  const std::vector<double> kt = domain_kinks(t);
  kinks.insert(kinks.end(), kt.begin(), kt.end());
  std::sort(kinks.begin(), kinks.end());
  kinks.erase(std::unique(kinks.begin(), kinks.end()), kinks.end());
  return kinks;
}

std::vector<double> sample_kinks(const SampleSet& s, const SampleSet& t) {
  std::vector<double> kinks;
  if (s.dim == 1) {
    kinks.insert(kinks.end(), s.xs.begin(), s.xs.end());
    kinks.insert(kinks.end(), t.xs.begin(), t.xs.end());
    std::sort(kinks.begin(), kinks.end());
    kinks.erase(std::unique(kinks.begin(), kinks.end()), kinks.end());
  }
  return kinks;
}

}  // namespace

TransferReport measures_from_risks(const std::vector<double>& risks_s,
                                   const std::vector<double>& risks_t,
                                   const GammaEnumeration& gamma,
                                   const LossKind& loss) {
  require(!risks_s.empty() && risks_s.size() == risks_t.size(),
          "transfer measures need matching nonempty risk tables");
  TransferReport report;
  report.loss = loss;
  report.eps_star_s = *std::min_element(risks_s.begin(), risks_s.end());
  report.eps_star_t = *std::min_element(risks_t.begin(), risks_t.end());

  std::vector<double> st(risks_s.size()), ts(risks_s.size()), re(risks_s.size());
  for (std::size_t i = 0; i < risks_s.size(); ++i) {
    const double exc_s = risks_s[i] - report.eps_star_s;
    const double exc_t = risks_t[i] - report.eps_star_t;
    st[i] = exc_t - exc_s;
    ts[i] = exc_s - exc_t;
    re[i] = std::abs(risks_s[i] - risks_t[i]);
  }
  report.witness_st = argmax_witness(st, gamma);
  report.witness_ts = argmax_witness(ts, gamma);
  report.witness_realizable = argmax_witness(re, gamma);
  report.t_one_sided_st = report.witness_st.value;
  report.t_one_sided_ts = report.witness_ts.value;
  report.t_symmetric = std::max(report.t_one_sided_st, report.t_one_sided_ts);
  report.t_realizable = report.witness_realizable.value;

  internal_check(report.t_symmetric <= 2.0 * report.t_realizable + 1e-12,
                 "symmetric transfer measure exceeded twice the realizable one");
  internal_check(report.t_symmetric >= -1e-12 && report.t_realizable >= 0.0,
                 "negative transfer measure");
  return report;
}

TransferReport transfer_measures(const LabeledJoint& s, const LabeledJoint& t,
                                 const HypothesisSpec& gamma,
                                 const LossKind& loss) {
  require(s.num_labels() == t.num_labels(),
          "transfer measures need matching label counts");
  const auto enumeration = enumerate_gamma(gamma, merged_kinks(s, t));
  require(enumeration.size() > 0, "empty hypothesis enumeration");
  const auto risks_s = enumeration_risks(enumeration, s, loss);
  const auto risks_t = enumeration_risks(enumeration, t, loss);
  TransferReport report = measures_from_risks(risks_s, risks_t, enumeration, loss);
  report.gamma = gamma.describe();
  return report;
}

TransferReport transfer_measures(const SampleSet& s, const SampleSet& t,
                                 const HypothesisSpec& gamma,
                                 const LossKind& loss) {
  require(s.num_labels == t.num_labels,
          "transfer measures need matching label counts");
  const auto enumeration = enumerate_gamma(gamma, sample_kinks(s, t));
  require(enumeration.size() > 0, "empty hypothesis enumeration");
  const auto risks_s = enumeration_risks(enumeration, s, loss);
  const auto risks_t = enumeration_risks(enumeration, t, loss);
  TransferReport report = measures_from_risks(risks_s, risks_t, enumeration, loss);
  report.gamma = gamma.describe();
  return report;
}

double tv_unnormalized(const LabeledJoint& s, const LabeledJoint& t) {
  const RefinedPair pair = refine_pair(s, t);
  double acc = 0.0;
  for (std::size_t i = 0; i < pair.mass_a.size(); ++i)
    acc += std::abs(pair.mass_a[i] - pair.mass_b[i]);
  return acc;
}

ExtremalResult extremal_classifiers(const LabeledJoint& s, const LabeledJoint& t) {
  require(s.num_labels() == 2 && t.num_labels() == 2,
          "extremal classifiers are defined for binary labels");
  const RefinedPair pair = refine_pair(s, t);
  const std::size_t regions = pair.num_regions();
  require(regions > 0, "empty support");

  std::vector<int> plus(regions), minus(regions);
  double gap_plus = 0.0, gap_minus = 0.0;
  for (std::size_t r = 0; r < regions; ++r) {
    // d1 / d0 are the mass differences of the paper's labels +1 / -1.
    const double d1 = pair.mass(true, r, 1) - pair.mass(false, r, 1);
    const double d0 = pair.mass(true, r, 0) - pair.mass(false, r, 0);
    // h_plus: sign-region rules for maximizing eps_S - eps_T.
    if (d1 >= 0.0 && d0 >= 0.0) {
      plus[r] = kAbstain;
      gap_plus += d1 + d0;
    } else if (d1 >= 0.0) {  // d0 < 0
      plus[r] = 0;
      gap_plus += d1;
    } else if (d0 >= 0.0) {  // d1 < 0
      plus[r] = 1;
      gap_plus += d0;
    } else if (d1 < d0) {
      plus[r] = 1;
      gap_plus += d0;
    } else {
      plus[r] = 0;
      gap_plus += d1;
    }
    // h_minus: mirrored rules for maximizing eps_T - eps_S.
    if (d1 < 0.0 && d0 < 0.0) {
      minus[r] = kAbstain;
      gap_minus += -d1 - d0;
    } else if (d1 < 0.0) {  // d0 >= 0
      minus[r] = 0;
      gap_minus += -d1;
    } else if (d0 < 0.0) {  // d1 >= 0
      minus[r] = 1;
      gap_minus += -d0;
    } else if (d1 < d0) {
      minus[r] = 0;
      gap_minus += -d1;
    } else {
      minus[r] = 1;
      gap_minus += -d0;
    }
  }

  auto build = [&](std::vector<int> assignment) {
    if (pair.variant == JointVariant::kDiscreteCells)
      return CellwiseClassifier::atoms(pair.atoms, std::move(assignment));
    return CellwiseClassifier::piecewise(pair.breaks, std::move(assignment));
  };
  ExtremalResult result{build(plus), build(minus), gap_plus, gap_minus};

  // The greedy gaps must agree with the integrated risks of the witnesses.
  const LossKind zo = LossKind::zero_one();
  const double check_plus =
      risk(result.h_plus, s, zo) - risk(result.h_plus, t, zo);
  const double check_minus =
      risk(result.h_minus, t, zo) - risk(result.h_minus, s, zo);
  internal_check(std::abs(check_plus - gap_plus) <= 1e-12 &&
                     std::abs(check_minus - gap_minus) <= 1e-12,
                 "extremal gap mismatch against integrated risks");
  return result;
}

SandwichResult check_tv_sandwich(const LabeledJoint& s, const LabeledJoint& t,
                                 double tol) {
  SandwichResult out;
  out.t_realizable_all = extremal_classifiers(s, t).realizable_all();
  out.tv = tv_unnormalized(s, t);
  out.slack_lower = out.tv - out.t_realizable_all;
  out.slack_upper = 4.0 * out.t_realizable_all - out.tv;
  out.lhs_ok = out.slack_lower >= -tol;
  out.rhs_ok = out.slack_upper >= -tol;
  return out;
}

BoundCertificate target_bound(const LabeledJoint& s, const LabeledJoint& t,
                              const HypothesisSpec& gamma, const Classifier& h,
                              const LossKind& loss) {
  // Membership: a threshold inside the grid interval, or a listed item.
  if (const auto* grid = std::get_if<ThresholdGrid>(&gamma.shape)) {
    const auto* threshold = dynamic_cast<const ThresholdClassifier*>(&h);
    require(threshold != nullptr && threshold->rho() >= grid->lo &&
                threshold->rho() <= grid->hi,
            "classifier is not a member of the hypothesis family");
  } else if (const auto* list = std::get_if<ExplicitList>(&gamma.shape)) {
    bool found = false;
    for (const auto& item : list->items)
      if (item.get() == &h || item->describe() == h.describe()) found = true;
    require(found, "classifier is not a member of the hypothesis family");
  } else {
    throw ValidationError("target bound needs an enumerable hypothesis family");
  }

  const TransferReport report = transfer_measures(s, t, gamma, loss);
  BoundCertificate cert;
  cert.eps_t_h = risk(h, t, loss);
  cert.eps_s_h = risk(h, s, loss);
  cert.eps_star_s = report.eps_star_s;
  cert.eps_star_t = report.eps_star_t;
  cert.t_one_sided = report.t_one_sided_st;
  cert.t_symmetric = report.t_symmetric;
  cert.rhs_one_sided =
      cert.eps_s_h + cert.eps_star_t - cert.eps_star_s + cert.t_one_sided;
  cert.rhs_symmetric =
      cert.eps_s_h + cert.eps_star_t - cert.eps_star_s + cert.t_symmetric;
  cert.slack_one_sided = cert.rhs_one_sided - cert.eps_t_h;
  cert.slack_symmetric = cert.rhs_symmetric - cert.rhs_one_sided;
  return cert;
}

namespace {

// Insert the rho values where the piecewise-linear risk curve crosses
// `level`, so minimal-set boundaries become exact enumeration members.
void insert_level_crossings(std::vector<double>& rhos,
                            std::vector<double>& risks, double level) {
  std::vector<double> new_rhos;
  for (std::size_t i = 0; i + 1 < rhos.size(); ++i) {
    const double a = risks[i], b = risks[i + 1];
    if ((a < level && b > level) || (a > level && b < level)) {
      const double t = (level - a) / (b - a);
      const double rho = rhos[i] + t * (rhos[i + 1] - rhos[i]);
      if (rho > rhos[i] && rho < rhos[i + 1]) new_rhos.push_back(rho);
    }
  }
  rhos.insert(rhos.end(), new_rhos.begin(), new_rhos.end());
  std::sort(rhos.begin(), rhos.end());
  rhos.erase(std::unique(rhos.begin(), rhos.end()), rhos.end());
  risks.clear();  // caller recomputes
}

}  // namespace

CertificateResult transferability_certificate(const LabeledJoint& s,
                                              const LabeledJoint& t,
                                              const HypothesisSpec& hypothesis_space,
                                              double delta_s,
                                              const LossKind& loss) {
  require(delta_s >= 0.0, "delta_S must be nonnegative");
  require(hypothesis_space.enumerable(),
          "transferability certificate needs an enumerable family");

  GammaEnumeration gamma = enumerate_gamma(hypothesis_space, merged_kinks(s, t));
  require(gamma.size() > 0, "empty hypothesis enumeration");
  std::vector<double> risks_s = enumeration_risks(gamma, s, loss);

  const double eps_star_s = *std::min_element(risks_s.begin(), risks_s.end());
  const double level = eps_star_s + delta_s;
  if (gamma.thresholds()) {
    // Threshold risks are piecewise linear between enumerated candidates, so
    // the minimal-set boundary points can be added exactly.
    insert_level_crossings(gamma.rhos, risks_s, level);
    risks_s = enumeration_risks(gamma, s, loss);
  }
  const std::vector<double> risks_t = enumeration_risks(gamma, t, loss);
  const double eps_star_t = *std::min_element(risks_t.begin(), risks_t.end());

  CertificateResult out;
  out.eps_star_s = eps_star_s;
  out.eps_star_t = eps_star_t;

  const double member_tol = 1e-12;
  double best = -1.0;
  double min_target_risk_on_members = std::numeric_limits<double>::infinity();
  std::size_t best_index = 0;
  bool any_member = false;
  for (std::size_t i = 0; i < risks_s.size(); ++i) {
    if (risks_s[i] > level + member_tol) continue;
    any_member = true;
    const double excess_t = risks_t[i] - eps_star_t;
    if (excess_t > best) {
      best = excess_t;
      best_index = i;
    }
    min_target_risk_on_members = std::min(min_target_risk_on_members, risks_t[i]);
  }
  internal_check(any_member, "delta_S-minimal set is empty");
  out.delta_t_min = best;
  out.witness = {best, best_index, gamma.describe(best_index)};
  out.gamma_covers_target_optimum =
      min_target_risk_on_members <= eps_star_t + 1e-12;

  // Re-verify the containment with delta_T = delta_t_min.
  out.containment_ok = true;
  for (std::size_t i = 0; i < risks_s.size(); ++i) {
    if (risks_s[i] > level + member_tol) continue;
    if (risks_t[i] > eps_star_t + out.delta_t_min + 1e-9) out.containment_ok = false;
  }
  return out;
}

double hdh_divergence_1d(const LabeledJoint& s, const LabeledJoint& t,
                         double rho_lo, double rho_hi) {
  require(s.variant() == JointVariant::kPiecewiseUniform1D &&
              t.variant() == JointVariant::kPiecewiseUniform1D,
          "HdH divergence needs 1D piecewise-uniform joints");
  require(rho_lo < rho_hi, "threshold range must satisfy lo < hi");
  const RefinedPair pair = refine_pair(s, t);
  const std::size_t regions = pair.num_regions();

  // Candidate thresholds: region boundaries clipped to the family range.
  std::vector<double> candidates = {rho_lo, rho_hi};
  for (double b : pair.breaks)
    if (b >= rho_lo && b <= rho_hi) candidates.push_back(b);
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()),
                   candidates.end());

  // Marginal CDF difference G(t) = F_S(t) - F_T(t), piecewise linear.
  auto diff_cdf = [&](double x) {
    double acc = 0.0;
    for (std::size_t r = 0; r < regions; ++r) {
      const double lo = pair.breaks[r], hi = pair.breaks[r + 1];
      double region_mass = 0.0;
      for (int y = 0; y < pair.num_labels; ++y)
        region_mass += pair.mass(true, r, y) - pair.mass(false, r, y);
      if (x >= hi)
        acc += region_mass;
      else if (x > lo)
        acc += region_mass * (x - lo) / (hi - lo);
    }
    return acc;
  };

  std::vector<double> g(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) g[i] = diff_cdf(candidates[i]);

  // sup over pairs rho < rho' of |G(rho') - G(rho)| = max(G) - min(G).
  const auto [lo_it, hi_it] = std::minmax_element(g.begin(), g.end());
  return 2.0 * (*hi_it - *lo_it);
}

PseudoMetricReport pseudo_metric_suite(std::span<const LabeledJoint> domains,
                                       const HypothesisSpec& gamma,
                                       const LossKind& loss) {
  require(domains.size() >= 3, "pseudo-metric suite needs at least 3 domains");
  std::vector<double> kinks;
  for (const LabeledJoint& d : domains) {
    const auto dk = domain_kinks(d);
    kinks.insert(kinks.end(), dk.begin(), dk.end());
  }
  std::sort(kinks.begin(), kinks.end());
  kinks.erase(std::unique(kinks.begin(), kinks.end()), kinks.end());
  const auto enumeration = enumerate_gamma(gamma, kinks);
  require(enumeration.size() > 0, "empty hypothesis enumeration");

  const std::size_t n = domains.size();
  std::vector<std::vector<double>> risks(n);
  std::vector<std::vector<double>> excess(n);
  for (std::size_t i = 0; i < n; ++i) {
    risks[i] = enumeration_risks(enumeration, domains[i], loss);
    const double star = *std::min_element(risks[i].begin(), risks[i].end());
    excess[i] = risks[i];
    for (double& e : excess[i]) e -= star;
  }

  PseudoMetricReport report;
  report.n = n;
  report.realizable.assign(n * n, 0.0);
  report.one_sided.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double re = 0.0, os = 0.0;
      for (std::size_t h = 0; h < enumeration.size(); ++h) {
        re = std::max(re, std::abs(risks[i][h] - risks[j][h]));
        os = std::max(os, excess[j][h] - excess[i][h]);
      }
      report.realizable[i * n + j] = re;
      report.one_sided[i * n + j] = os;
    }

  report.max_self_distance = 0.0;
  report.max_asymmetry = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    report.max_self_distance =
        std::max(report.max_self_distance, report.realizable[i * n + i]);
    for (std::size_t j = 0; j < n; ++j)
      report.max_asymmetry =
          std::max(report.max_asymmetry, std::abs(report.realizable[i * n + j] -
                                                  report.realizable[j * n + i]));
  }
  report.worst_triangle_slack = std::numeric_limits<double>::infinity();
  report.worst_one_sided_slack = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t j = 0; j < n; ++j) {
        if (i == p || p == j || i == j) continue;
        report.worst_triangle_slack =
            std::min(report.worst_triangle_slack,
                     report.realizable[i * n + p] + report.realizable[p * n + j] -
                         report.realizable[i * n + j]);
        report.worst_one_sided_slack =
            std::min(report.worst_one_sided_slack,
                     report.one_sided[i * n + p] + report.one_sided[p * n + j] -
                         report.one_sided[i * n + j]);
      }
  return report;
}

double realizable_measure_ipm_route(const LabeledJoint& s, const LabeledJoint& t,
                                    const HypothesisSpec& gamma) {
  const RefinedPair pair = refine_pair(s, t);
  const auto enumeration = enumerate_gamma(gamma, merged_kinks(s, t));
  require(enumeration.thresholds(),
          "IPM route implemented for threshold enumerations");
  const std::size_t regions = pair.num_regions();

  double sup = 0.0;
  for (double rho : enumeration.rhos) {
    double signed_integral = 0.0;
    for (std::size_t r = 0; r < regions; ++r) {
      // Fraction of the region where h_rho predicts label 1.
      double frac1;
      if (pair.variant == JointVariant::kPiecewiseUniform1D) {
        const double lo = pair.breaks[r], hi = pair.breaks[r + 1];
        frac1 = std::clamp((rho - lo) / (hi - lo), 0.0, 1.0);
      } else {
        frac1 = static_cast<double>(pair.atoms[r]) < rho ? 1.0 : 0.0;
      }
      for (int y = 0; y < pair.num_labels; ++y) {
        // Indicator weight E[1(h(x) != y) | region] under the uniform cell law.
        double weight;
        if (y == 1)
          weight = 1.0 - frac1;
        else if (y == 0)
          weight = frac1;
        else
          weight = 1.0;
        signed_integral +=
            weight * (pair.mass(true, r, y) - pair.mass(false, r, y));
      }
    }
    sup = std::max(sup, std::abs(signed_integral));
  }
  return sup;
}

}  // namespace transfer
