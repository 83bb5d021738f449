#include "transfer/hypotheses.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace transfer {

std::string LossKind::describe() const {
  if (kind == kZeroOne) return "zero_one";
  std::ostringstream os;
  os << "cross_entropy_base2(clamp=" << clamp << ")";
  return os.str();
}

double point_loss(int pred, int y, const LossKind& loss) {
  if (loss.kind == LossKind::kZeroOne) return pred == y ? 0.0 : 1.0;
  require(pred != kAbstain, "cross entropy is undefined for abstentions");
  const double p = pred == y ? 1.0 - loss.clamp : loss.clamp;
  return -std::log2(p);
}

std::vector<PredictionPiece> ThresholdClassifier::prediction_pieces(
    double lo, double hi) const {
  const double cut = std::clamp(rho_, lo, hi);
  std::vector<PredictionPiece> pieces;
  if (cut > lo) pieces.push_back({(cut - lo) / (hi - lo), 1});
  if (cut < hi) pieces.push_back({(hi - cut) / (hi - lo), 0});
  return pieces;
}

std::string ThresholdClassifier::describe() const {
  std::ostringstream os;
  os << "h_rho(rho=" << rho_ << ")";
  return os.str();
}

CellwiseClassifier CellwiseClassifier::piecewise(std::vector<double> breaks,
                                                 std::vector<int> assignments) {
  require(breaks.size() >= 2, "piecewise classifier needs >= 2 breakpoints");
  require(assignments.size() + 1 == breaks.size(),
          "piecewise classifier needs one assignment per region");
  require(std::is_sorted(breaks.begin(), breaks.end()),
          "piecewise classifier breakpoints must be sorted");
  CellwiseClassifier c;
  c.discrete_ = false;
  c.breaks_ = std::move(breaks);
  c.assignments_ = std::move(assignments);
  return c;
}

CellwiseClassifier CellwiseClassifier::atoms(std::vector<int> atoms,
                                             std::vector<int> assignments) {
  require(!atoms.empty(), "atom classifier needs atoms");
  require(atoms.size() == assignments.size(),
          "atom classifier needs one assignment per atom");
  require(std::is_sorted(atoms.begin(), atoms.end()),
          "atom classifier atoms must be sorted");
  CellwiseClassifier c;
  c.discrete_ = true;
  c.atoms_ = std::move(atoms);
  c.assignments_ = std::move(assignments);
  return c;
}

int CellwiseClassifier::predict(std::span<const double> x) const {
  if (discrete_) {
    const int atom = static_cast<int>(std::lround(x[0]));
    const auto it = std::lower_bound(atoms_.begin(), atoms_.end(), atom);
    if (it == atoms_.end() || *it != atom) return kAbstain;
    return assignments_[static_cast<std::size_t>(it - atoms_.begin())];
  }
  // Region r covers [breaks[r], breaks[r+1]); clamp outside points inward.
  const auto it = std::upper_bound(breaks_.begin(), breaks_.end(), x[0]);
  std::size_t r = it == breaks_.begin()
                      ? 0
                      : static_cast<std::size_t>(it - breaks_.begin()) - 1;
  if (r >= assignments_.size()) r = assignments_.size() - 1;
  return assignments_[r];
}

std::vector<PredictionPiece> CellwiseClassifier::prediction_pieces(
    double lo, double hi) const {
  require(!discrete_, "prediction pieces need the piecewise form");
  std::vector<PredictionPiece> pieces;
  const double width = hi - lo;
  double cursor = lo;
  while (cursor < hi) {
    const auto it = std::upper_bound(breaks_.begin(), breaks_.end(), cursor);
    std::size_t r = it == breaks_.begin()
                        ? 0
                        : static_cast<std::size_t>(it - breaks_.begin()) - 1;
    if (r >= assignments_.size()) r = assignments_.size() - 1;
    const double region_end =
        r + 1 < breaks_.size() ? std::min(breaks_[r + 1], hi) : hi;
    const double end = region_end > cursor ? region_end : hi;
    pieces.push_back({(end - cursor) / width, assignments_[r]});
    cursor = end;
  }
  return pieces;
}

std::string CellwiseClassifier::describe() const {
  std::ostringstream os;
  os << (discrete_ ? "atom_classifier[" : "cellwise_classifier[");
  for (std::size_t i = 0; i < assignments_.size(); ++i) {
    if (i) os << ",";
    os << assignments_[i];
  }
  os << "]";
  return os.str();
}

double risk(const Classifier& h, const LabeledJoint& domain,
            const LossKind& loss) {
  double acc = 0.0;
  if (domain.variant() == JointVariant::kDiscreteCells) {
    for (const Cell& c : domain.cells()) {
      const double x = static_cast<double>(c.atom);
      acc += c.mass * point_loss(h.predict({&x, 1}), c.label, loss);
    }
    return acc;
  }
  for (const Cell& c : domain.cells()) {
    for (const PredictionPiece& piece : h.prediction_pieces(c.lo, c.hi))
      acc += c.mass * piece.fraction * point_loss(piece.label, c.label, loss);
  }
  return acc;
}

double risk(const Classifier& h, const SampleSet& sample, const LossKind& loss) {
  sample.validate();
  require(sample.dim == 1, "threshold and cell-wise classifiers need 1D inputs");
  double acc = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i)
    acc += point_loss(h.predict(sample.x(i)), sample.ys[i], loss);
  return acc / static_cast<double>(sample.size());
}

HypothesisSpec HypothesisSpec::grid(double lo, double hi, int n) {
  require(lo < hi, "grid interval must satisfy lo < hi");
  require(n >= 2, "grid needs at least two points");
  return {ThresholdGrid{lo, hi, n}};
}

HypothesisSpec HypothesisSpec::ball(std::vector<double> center, double radius) {
  require(radius >= 0.0, "ball radius must be nonnegative");
  return {ParamBall{std::move(center), radius}};
}

HypothesisSpec HypothesisSpec::list(
    std::vector<std::shared_ptr<const Classifier>> items) {
  require(!items.empty(), "explicit list must be nonempty");
  return {ExplicitList{std::move(items)}};
}

bool HypothesisSpec::enumerable() const {
  return !std::holds_alternative<ParamBall>(shape);
}

std::string HypothesisSpec::describe() const {
  if (const auto* g = std::get_if<ThresholdGrid>(&shape)) {
    std::ostringstream os;
    os << "threshold_grid[" << g->lo << "," << g->hi << ";n=" << g->n << "]";
    return os.str();
  }
  if (const auto* b = std::get_if<ParamBall>(&shape)) {
    std::ostringstream os;
    os << "param_ball[dim=" << b->center.size() << ",radius=" << b->radius << "]";
    return os.str();
  }
  std::ostringstream os;
  os << "explicit_list[n=" << std::get<ExplicitList>(shape).items.size() << "]";
  return os.str();
}

std::string GammaEnumeration::describe(std::size_t i) const {
  if (thresholds()) {
    std::ostringstream os;
    os << "h_rho(rho=" << rhos[i] << ")";
    return os.str();
  }
  return items[i]->describe();
}

GammaEnumeration enumerate_gamma(const HypothesisSpec& spec,
                                 std::span<const double> kinks) {
  if (const auto* list = std::get_if<ExplicitList>(&spec.shape)) {
    GammaEnumeration gamma;
    gamma.items = list->items;
    return gamma;
  }
  const auto* grid = std::get_if<ThresholdGrid>(&spec.shape);
  require(grid != nullptr, "hypothesis spec is not enumerable (param ball)");

  std::set<double> candidates;
  const double step = (grid->hi - grid->lo) / static_cast<double>(grid->n - 1);
  for (int i = 0; i < grid->n; ++i)
    candidates.insert(i + 1 == grid->n ? grid->hi : grid->lo + i * step);
  for (double k : kinks)
    if (k >= grid->lo && k <= grid->hi) candidates.insert(k);

  std::vector<double> sorted(candidates.begin(), candidates.end());
  GammaEnumeration gamma;
  gamma.rhos.reserve(sorted.size() * 2);
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    gamma.rhos.push_back(sorted[i]);
    // Midpoints make sups exact for risks with jumps at the kinks.
    if (i + 1 < sorted.size()) {
      const double mid = 0.5 * (sorted[i] + sorted[i + 1]);
      if (mid > sorted[i] && mid < sorted[i + 1]) gamma.rhos.push_back(mid);
    }
  }
  return gamma;
}

std::vector<double> domain_kinks(const LabeledJoint& domain) {
  std::vector<double> kinks;
  if (domain.variant() == JointVariant::kPiecewiseUniform1D) {
    kinks = domain.breakpoints();
  } else {
    for (int a : domain.atoms()) kinks.push_back(static_cast<double>(a));
  }
  return kinks;
}

namespace {

// 0-1 risks of h_rho for every rho, via one sort and prefix label counts.
std::vector<double> threshold_zero_one_risks(const SampleSet& sample,
                                             std::span<const double> rhos) {
  const std::size_t m = sample.size();
  std::vector<double> xs(m);
  std::vector<int> ys(m);
  std::vector<std::size_t> order(m);
  for (std::size_t i = 0; i < m; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return sample.xs[a] < sample.xs[b];
  });
  for (std::size_t i = 0; i < m; ++i) {
    xs[i] = sample.xs[order[i]];
    ys[i] = sample.ys[order[i]];
  }
  // pre1[c] = #{i < c : y_i == 1}, pre0[c] = #{i < c : y_i == 0}.
  std::vector<std::size_t> pre1(m + 1, 0), pre0(m + 1, 0);
  for (std::size_t i = 0; i < m; ++i) {
    pre1[i + 1] = pre1[i] + (ys[i] == 1 ? 1 : 0);
    pre0[i + 1] = pre0[i] + (ys[i] == 0 ? 1 : 0);
  }
  std::vector<double> risks(rhos.size());
  for (std::size_t j = 0; j < rhos.size(); ++j) {
    const std::size_t c = static_cast<std::size_t>(
        std::lower_bound(xs.begin(), xs.end(), rhos[j]) - xs.begin());
    // Predict 1 on the strict prefix (x < rho), 0 on the suffix.
    const std::size_t errors = (c - pre1[c]) + ((m - c) - (pre0[m] - pre0[c]));
    risks[j] = static_cast<double>(errors) / static_cast<double>(m);
  }
  return risks;
}

}  // namespace

std::vector<double> enumeration_risks(const GammaEnumeration& gamma,
                                      const LabeledJoint& domain,
                                      const LossKind& loss) {
  std::vector<double> risks(gamma.size());
  if (gamma.thresholds()) {
    for (std::size_t i = 0; i < gamma.rhos.size(); ++i)
      risks[i] = risk(ThresholdClassifier(gamma.rhos[i]), domain, loss);
  } else {
    for (std::size_t i = 0; i < gamma.items.size(); ++i)
      risks[i] = risk(*gamma.items[i], domain, loss);
  }
  return risks;
}

std::vector<double> enumeration_risks(const GammaEnumeration& gamma,
                                      const SampleSet& sample,
                                      const LossKind& loss) {
  if (!gamma.thresholds()) {
    std::vector<double> risks(gamma.size());
    for (std::size_t i = 0; i < gamma.items.size(); ++i)
      risks[i] = risk(*gamma.items[i], sample, loss);
    return risks;
  }
  sample.validate();
  require(sample.dim == 1, "threshold risk curves need 1D samples");
  std::vector<double> risks = threshold_zero_one_risks(sample, gamma.rhos);
  if (loss.kind == LossKind::kCrossEntropy) {
    // Hard predictions make CE affine in the 0-1 risk.
    const double correct = -std::log2(1.0 - loss.clamp);
    const double wrong = -std::log2(loss.clamp);
    for (double& r : risks) r = correct + (wrong - correct) * r;
  }
  return risks;
}

namespace {

MinimalSet minimal_set_from_risks(std::string base_spec, const LossKind& loss,
                                  double delta, GammaEnumeration gamma,
                                  const std::vector<double>& risks) {
  require(delta >= 0.0, "minimal-set slack must be nonnegative");
  MinimalSet out;
  out.base_spec = std::move(base_spec);
  out.loss = loss;
  out.delta = delta;
  out.enumeration = std::move(gamma);
  out.eps_star = *std::min_element(risks.begin(), risks.end());
  for (std::size_t i = 0; i < risks.size(); ++i)
    if (risks[i] <= out.eps_star + delta) out.members.push_back(i);
  return out;
}

}  // namespace

MinimalSet delta_minimal_set(const HypothesisSpec& spec,
                             const LabeledJoint& domain, const LossKind& loss,
                             double delta) {
  require(spec.enumerable(),
          "delta-minimal set needs an enumerable hypothesis spec");
  auto gamma = enumerate_gamma(spec, domain_kinks(domain));
  require(gamma.size() > 0, "empty hypothesis enumeration");
  const auto risks = enumeration_risks(gamma, domain, loss);
  return minimal_set_from_risks(spec.describe(), loss, delta, std::move(gamma), risks);
}

MinimalSet delta_minimal_set(const HypothesisSpec& spec, const SampleSet& sample,
                             const LossKind& loss, double delta) {
  require(spec.enumerable(),
          "delta-minimal set needs an enumerable hypothesis spec");
  auto gamma = enumerate_gamma(spec, {});
  require(gamma.size() > 0, "empty hypothesis enumeration");
  const auto risks = enumeration_risks(gamma, sample, loss);
  return minimal_set_from_risks(spec.describe(), loss, delta, std::move(gamma), risks);
}

bool surrogate_dominates_zero_one(const Classifier& h, const LabeledJoint& domain,
                                  double clamp) {
  return risk(h, domain, LossKind::cross_entropy(clamp)) >=
         risk(h, domain, LossKind::zero_one());
}

bool surrogate_dominates_zero_one(const Classifier& h, const SampleSet& sample,
                                  double clamp) {
  return risk(h, sample, LossKind::cross_entropy(clamp)) >=
         risk(h, sample, LossKind::zero_one());
}

}  // namespace transfer
