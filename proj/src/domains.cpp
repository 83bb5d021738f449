#include "transfer/domains.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace transfer {

namespace {

constexpr double kMassTol = 1e-12;

void validate_cells(JointVariant variant, int num_labels,
                    const std::vector<Cell>& cells) {
  require(num_labels >= 2, "joint needs at least two labels");
  double total = 0.0;
  for (const Cell& c : cells) {
    require(c.mass >= 0.0, "cell mass must be nonnegative");
    require(c.label >= 0 && c.label < num_labels, "cell label out of range");
    if (variant == JointVariant::kPiecewiseUniform1D)
      require(c.lo < c.hi, "cell interval must satisfy lo < hi");
    total += c.mass;
  }
  require(std::abs(total - 1.0) <= kMassTol, "cell masses must sum to 1");
  if (variant == JointVariant::kPiecewiseUniform1D) {
    // Intervals of one label must be pairwise disjoint.
    std::map<int, std::vector<std::pair<double, double>>> by_label;
    for (const Cell& c : cells) by_label[c.label].push_back({c.lo, c.hi});
    for (auto& [label, intervals] : by_label) {
      std::sort(intervals.begin(), intervals.end());
      for (std::size_t i = 1; i < intervals.size(); ++i)
        require(intervals[i].first >= intervals[i - 1].second - 1e-15,
                "overlapping intervals for one label");
    }
  } else {
    std::set<std::pair<int, int>> seen;
    for (const Cell& c : cells)
      require(seen.insert({c.atom, c.label}).second,
              "duplicate (atom, label) cell");
  }
}

}  // namespace

LabeledJoint::LabeledJoint(JointVariant variant, int num_labels,
                           std::vector<Cell> cells)
    : variant_(variant), num_labels_(num_labels), cells_(std::move(cells)) {
  validate_cells(variant_, num_labels_, cells_);
}

LabeledJoint LabeledJoint::piecewise_uniform(int num_labels,
                                             std::vector<Cell> cells) {
  return LabeledJoint(JointVariant::kPiecewiseUniform1D, num_labels,
                      std::move(cells));
}

LabeledJoint LabeledJoint::discrete(int num_labels, std::vector<Cell> cells) {
  return LabeledJoint(JointVariant::kDiscreteCells, num_labels,
                      std::move(cells));
}

std::vector<double> LabeledJoint::label_marginal() const {
  std::vector<double> p(static_cast<std::size_t>(num_labels_), 0.0);
  for (const Cell& c : cells_) p[static_cast<std::size_t>(c.label)] += c.mass;
  return p;
}

std::vector<double> LabeledJoint::breakpoints() const {
  require(variant_ == JointVariant::kPiecewiseUniform1D,
          "breakpoints only defined for the piecewise-uniform variant");
  std::vector<double> b;
  b.reserve(cells_.size() * 2);
  for (const Cell& c : cells_) {
    b.push_back(c.lo);
    b.push_back(c.hi);
  }
  std::sort(b.begin(), b.end());
  b.erase(std::unique(b.begin(), b.end()), b.end());
  return b;
}

std::vector<int> LabeledJoint::atoms() const {
  require(variant_ == JointVariant::kDiscreteCells,
          "atoms only defined for the discrete variant");
  std::vector<int> a;
  a.reserve(cells_.size());
  for (const Cell& c : cells_) a.push_back(c.atom);
  std::sort(a.begin(), a.end());
  a.erase(std::unique(a.begin(), a.end()), a.end());
  return a;
}

void SampleSet::validate() const {
  require(!ys.empty(), "sample set must be nonempty");
  require(dim >= 1, "sample dimension must be positive");
  require(xs.size() == ys.size() * static_cast<std::size_t>(dim),
          "xs size does not match ys size and dim");
  for (int y : ys)
    require(y >= 0 && y < num_labels, "sample label out of range");
}

std::pair<LabeledJoint, LabeledJoint> example1_pair(double intensity) {
  require(intensity > 0.0 && intensity < 0.5,
          "example1 intensity must lie in (0, 0.5)");
  const double p = intensity;
  auto source = LabeledJoint::piecewise_uniform(
      2, {{-1.0, 0.0, 0, 1, p}, {0.0, 1.0, 0, 0, 1.0 - p}});
  auto target = LabeledJoint::piecewise_uniform(
      2, {{-1.0, 0.0, 0, 1, 1.0 - p}, {0.0, 1.0, 0, 0, p}});
  return {std::move(source), std::move(target)};
}

LabeledJoint mixture(std::span<const LabeledJoint> domains,
                     const MixtureSpec& spec) {
  require(!domains.empty(), "mixture needs at least one domain");
  require(spec.weights.size() == domains.size(),
          "mixture weight count must match domain count");
  double total = 0.0;
  for (double w : spec.weights) {
    require(w >= 0.0, "mixture weights must be nonnegative");
    total += w;
  }
  require(std::abs(total - 1.0) <= kMassTol, "mixture weights must sum to 1");
  const JointVariant variant = domains[0].variant();
  const int num_labels = domains[0].num_labels();
  for (const LabeledJoint& d : domains) {
    require(d.variant() == variant, "mixture domains must share variant");
    require(d.num_labels() == num_labels,
            "mixture domains must share label count");
  }

  if (variant == JointVariant::kDiscreteCells) {
    std::map<std::pair<int, int>, double> mass;
    for (std::size_t i = 0; i < domains.size(); ++i)
      for (const Cell& c : domains[i].cells())
        mass[{c.atom, c.label}] += spec.weights[i] * c.mass;
    std::vector<Cell> cells;
    cells.reserve(mass.size());
    for (const auto& [key, m] : mass)
      cells.push_back({0.0, 0.0, key.first, key.second, m});
    return LabeledJoint::discrete(num_labels, std::move(cells));
  }

  // Piecewise-uniform: accumulate on the common elementary grid so intervals
  // of one label stay disjoint.
  std::vector<double> breaks;
  for (const LabeledJoint& d : domains)
    for (const Cell& c : d.cells()) {
      breaks.push_back(c.lo);
      breaks.push_back(c.hi);
    }
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

  std::map<std::pair<std::size_t, int>, double> mass;  // (region, label)
  for (std::size_t i = 0; i < domains.size(); ++i)
    for (const Cell& c : domains[i].cells()) {
      const auto first = std::lower_bound(breaks.begin(), breaks.end(), c.lo) -
                         breaks.begin();
      for (std::size_t r = static_cast<std::size_t>(first);
           r + 1 < breaks.size() && breaks[r] < c.hi; ++r) {
        const double frac = (breaks[r + 1] - breaks[r]) / (c.hi - c.lo);
        mass[{r, c.label}] += spec.weights[i] * c.mass * frac;
      }
    }
  std::vector<Cell> cells;
  cells.reserve(mass.size());
  for (const auto& [key, m] : mass) {
    if (m == 0.0) continue;
    cells.push_back({breaks[key.first], breaks[key.first + 1], 0, key.second, m});
  }
  return LabeledJoint::piecewise_uniform(num_labels, std::move(cells));
}

SampleSet sample(const LabeledJoint& domain, std::size_t m, std::uint64_t seed,
                 int domain_id) {
  require(m >= 1, "sample count must be at least 1");
  Rng rng(seed);
  const auto& cells = domain.cells();
  std::vector<double> weights(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) weights[i] = cells[i].mass;

  SampleSet out;
  out.domain_id = domain_id;
  out.seed = seed;
  out.dim = 1;
  out.num_labels = domain.num_labels();
  out.xs.reserve(m);
  out.ys.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t c = rng.categorical(weights);
    const Cell& cell = cells[c];
    if (domain.variant() == JointVariant::kPiecewiseUniform1D)
      out.xs.push_back(rng.uniform(cell.lo, cell.hi));
    else
      out.xs.push_back(static_cast<double>(cell.atom));
    out.ys.push_back(cell.label);
  }
  return out;
}

std::vector<SampleSet> rotated_gaussian_suite(std::span<const double> angles,
                                              std::size_t n_per,
                                              std::uint64_t seed,
                                              const RotatedGaussianConfig& cfg) {
  require(!angles.empty(), "suite needs at least one domain angle");
  require(n_per >= 1, "suite needs at least one sample per domain");
  require(cfg.num_labels >= 2, "suite needs at least two classes");
  require(cfg.sigma > 0.0, "suite sigma must be positive");

  const int k = cfg.num_labels;
  std::vector<SampleSet> out;
  out.reserve(angles.size());
  for (std::size_t d = 0; d < angles.size(); ++d) {
    // Independent stream per domain; no RNG state is shared across domains.
    Rng rng(Rng::derive(seed, d));
    SampleSet s;
    s.domain_id = static_cast<int>(d);
    s.seed = seed;
    s.dim = 2;
    s.num_labels = k;
    s.xs.reserve(2 * n_per);
    s.ys.reserve(n_per);
    for (std::size_t i = 0; i < n_per; ++i) {
      const int label = static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(k));
      const double theta =
          angles[d] + 2.0 * M_PI * static_cast<double>(label) / static_cast<double>(k);
      const double mx = cfg.mean_radius * std::cos(theta);
      const double my = cfg.mean_radius * std::sin(theta);
      s.xs.push_back(mx + cfg.sigma * rng.normal());
      s.xs.push_back(my + cfg.sigma * rng.normal());
      s.ys.push_back(label);
    }
    out.push_back(std::move(s));
  }
  return out;
}

double label_marginal_tv(const LabeledJoint& a, const LabeledJoint& b) {
  require(a.num_labels() == b.num_labels(),
          "label-shift TV needs matching label counts");
  const auto pa = a.label_marginal();
  const auto pb = b.label_marginal();
  double acc = 0.0;
  for (std::size_t y = 0; y < pa.size(); ++y) acc += std::abs(pa[y] - pb[y]);
  return 0.5 * acc;
}

double label_marginal_tv(const SampleSet& a, const SampleSet& b) {
  require(a.num_labels == b.num_labels,
          "label-shift TV needs matching label counts");
  a.validate();
  b.validate();
  std::vector<double> pa(static_cast<std::size_t>(a.num_labels), 0.0);
  std::vector<double> pb(pa.size(), 0.0);
  for (int y : a.ys) pa[static_cast<std::size_t>(y)] += 1.0 / static_cast<double>(a.size());
  for (int y : b.ys) pb[static_cast<std::size_t>(y)] += 1.0 / static_cast<double>(b.size());
  double acc = 0.0;
  for (std::size_t y = 0; y < pa.size(); ++y) acc += std::abs(pa[y] - pb[y]);
  return 0.5 * acc;
}

RefinedPair refine_pair(const LabeledJoint& a, const LabeledJoint& b) {
  require(a.variant() == b.variant(), "refinement needs matching variants");
  require(a.num_labels() == b.num_labels(),
          "refinement needs matching label counts");
  RefinedPair out;
  out.variant = a.variant();
  out.num_labels = a.num_labels();
  const std::size_t k = static_cast<std::size_t>(out.num_labels);

  if (out.variant == JointVariant::kDiscreteCells) {
    std::set<int> atom_set;
    for (const Cell& c : a.cells()) atom_set.insert(c.atom);
    for (const Cell& c : b.cells()) atom_set.insert(c.atom);
    out.atoms.assign(atom_set.begin(), atom_set.end());
    out.mass_a.assign(out.atoms.size() * k, 0.0);
    out.mass_b.assign(out.atoms.size() * k, 0.0);
    auto index_of = [&](int atom) {
      return static_cast<std::size_t>(
          std::lower_bound(out.atoms.begin(), out.atoms.end(), atom) -
          out.atoms.begin());
    };
    for (const Cell& c : a.cells())
      out.mass_a[index_of(c.atom) * k + static_cast<std::size_t>(c.label)] += c.mass;
    for (const Cell& c : b.cells())
      out.mass_b[index_of(c.atom) * k + static_cast<std::size_t>(c.label)] += c.mass;
    return out;
  }

  std::set<double> break_set;
  for (const Cell& c : a.cells()) {
    break_set.insert(c.lo);
    break_set.insert(c.hi);
  }
  for (const Cell& c : b.cells()) {
    break_set.insert(c.lo);
    break_set.insert(c.hi);
  }
  out.breaks.assign(break_set.begin(), break_set.end());
  const std::size_t regions = out.num_regions();
  out.mass_a.assign(regions * k, 0.0);
  out.mass_b.assign(regions * k, 0.0);
  auto deposit = [&](const LabeledJoint& d, std::vector<double>& mass) {
    for (const Cell& c : d.cells()) {
      const auto first =
          std::lower_bound(out.breaks.begin(), out.breaks.end(), c.lo) -
          out.breaks.begin();
      for (std::size_t r = static_cast<std::size_t>(first);
           r + 1 < out.breaks.size() && out.breaks[r] < c.hi; ++r) {
        const double frac = (out.breaks[r + 1] - out.breaks[r]) / (c.hi - c.lo);
        mass[r * k + static_cast<std::size_t>(c.label)] += c.mass * frac;
      }
    }
  };
  deposit(a, out.mass_a);
  deposit(b, out.mass_b);
  return out;
}

LabeledJoint random_discrete_joint(int num_atoms, int num_labels, Rng& rng) {
  require(num_atoms >= 1 && num_labels >= 2, "bad random joint shape");
  std::vector<Cell> cells;
  cells.reserve(static_cast<std::size_t>(num_atoms * num_labels));
  double total = 0.0;
  for (int a = 0; a < num_atoms; ++a)
    for (int y = 0; y < num_labels; ++y) {
      const double w = -std::log(1.0 - rng.uniform01());
      cells.push_back({0.0, 0.0, a, y, w});
      total += w;
    }
  for (Cell& c : cells) c.mass /= total;
  // Renormalize exactly enough for the 1e-12 sum invariant.
  double s = 0.0;
  for (const Cell& c : cells) s += c.mass;
  cells.back().mass += 1.0 - s;
  return LabeledJoint::discrete(num_labels, std::move(cells));
}

LabeledJoint random_piecewise_joint(int max_cells, int num_labels, Rng& rng) {
  require(max_cells >= 1 && num_labels >= 2, "bad random joint shape");
  const int pieces = 1 + static_cast<int>(rng.next_u64() %
                                          static_cast<std::uint64_t>(max_cells));
  std::vector<double> cuts = {-1.0, 1.0};
  for (int i = 1; i < pieces; ++i) cuts.push_back(rng.uniform(-1.0, 1.0));
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  std::vector<Cell> cells;
  double total = 0.0;
  for (std::size_t r = 0; r + 1 < cuts.size(); ++r)
    for (int y = 0; y < num_labels; ++y) {
      if (rng.uniform01() < 0.25) continue;  // sparse support
      const double w = -std::log(1.0 - rng.uniform01());
      cells.push_back({cuts[r], cuts[r + 1], 0, y, w});
      total += w;
    }
  if (cells.empty()) {
    cells.push_back({cuts[0], cuts[1], 0, 0, 1.0});
    total = 1.0;
  }
  for (Cell& c : cells) c.mass /= total;
  double s = 0.0;
  for (const Cell& c : cells) s += c.mass;
  cells.back().mass += 1.0 - s;
  return LabeledJoint::piecewise_uniform(num_labels, std::move(cells));
}

}  // namespace transfer
