#include "transfer/nnet.hpp"

#include <algorithm>
#include <cmath>

#include "transfer/kernels.hpp"

namespace transfer {

namespace {

constexpr double kLn2 = 0.6931471805599453094172321214582;

void dense_forward(const double* w, const double* b, int in, int out,
                   const double* x, double* z) {
  for (int r = 0; r < out; ++r)
    z[r] = kernels::dot(w + static_cast<std::size_t>(r) * in, x,
                        static_cast<std::size_t>(in)) + b[r];
}

void softmax_clamped(std::span<const double> z, double clamp,
                     std::span<double> probs) {
  const double zmax = *std::max_element(z.begin(), z.end());
  double total = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    probs[i] = std::exp(z[i] - zmax);
    total += probs[i];
  }
  for (std::size_t i = 0; i < z.size(); ++i)
    probs[i] = std::clamp(probs[i] / total, clamp, 1.0 - clamp);
}

}  // namespace

MlpModel::MlpModel(MlpArchitecture arch, std::uint64_t seed)
    : arch_(std::move(arch)) {
  require(arch_.input_dim >= 1 && arch_.feature_dim >= 1, "bad architecture dims");
  require(arch_.num_labels >= 2, "architecture needs at least two labels");
  require(arch_.clamp > 0.0 && arch_.clamp < 0.5, "clamp must lie in (0, 0.5)");
  Rng rng(seed);
  auto init_dense = [&](int in, int out) {
    Dense d;
    d.in = in;
    d.out = out;
    d.w.resize(static_cast<std::size_t>(in) * out);
    d.b.resize(static_cast<std::size_t>(out));
    const double bound = std::sqrt(6.0 / static_cast<double>(in + out));
    for (double& w : d.w) w = rng.uniform(-bound, bound);
    // Small nonzero biases keep rectifier pre-activations off the exact
    // kink and avoid fully dead units at initialization.
    for (double& b : d.b) b = rng.uniform(-0.05, 0.05);
    return d;
  };
  int prev = arch_.input_dim;
  for (int h : arch_.hidden) {
    require(h >= 1, "hidden width must be positive");
    featurizer_.push_back(init_dense(prev, h));
    prev = h;
  }
  featurizer_.push_back(init_dense(prev, arch_.feature_dim));
  head_ = init_dense(arch_.feature_dim, arch_.num_labels);
}

std::size_t MlpModel::head_param_count() const {
  return head_.w.size() + head_.b.size();
}

std::size_t MlpModel::featurizer_param_count() const {
  std::size_t n = 0;
  for (const Dense& d : featurizer_) n += d.w.size() + d.b.size();
  return n;
}

std::vector<double> MlpModel::head_params() const {
  std::vector<double> theta;
  theta.reserve(head_param_count());
  theta.insert(theta.end(), head_.w.begin(), head_.w.end());
  theta.insert(theta.end(), head_.b.begin(), head_.b.end());
  return theta;
}

std::vector<double> MlpModel::featurizer_params() const {
  std::vector<double> theta;
  theta.reserve(featurizer_param_count());
  for (const Dense& d : featurizer_) {
    theta.insert(theta.end(), d.w.begin(), d.w.end());
    theta.insert(theta.end(), d.b.begin(), d.b.end());
  }
  return theta;
}

void MlpModel::set_head_params(std::span<const double> theta) {
  require(theta.size() == head_param_count(), "head parameter size mismatch");
  std::copy_n(theta.begin(), head_.w.size(), head_.w.begin());
  std::copy_n(theta.begin() + head_.w.size(), head_.b.size(), head_.b.begin());
}

void MlpModel::set_featurizer_params(std::span<const double> theta_g) {
  require(theta_g.size() == featurizer_param_count(),
          "featurizer parameter size mismatch");
  std::size_t offset = 0;
  for (Dense& d : featurizer_) {
    std::copy_n(theta_g.begin() + offset, d.w.size(), d.w.begin());
    offset += d.w.size();
    std::copy_n(theta_g.begin() + offset, d.b.size(), d.b.begin());
    offset += d.b.size();
  }
}

void MlpModel::features(std::span<const double> x, std::span<double> out) const {
  require(static_cast<int>(x.size()) == arch_.input_dim,
          "input dimension mismatch");
  std::vector<double> buf_a(x.begin(), x.end());
  std::vector<double> buf_b;
  for (const Dense& d : featurizer_) {
    buf_b.assign(static_cast<std::size_t>(d.out), 0.0);
    dense_forward(d.w.data(), d.b.data(), d.in, d.out, buf_a.data(), buf_b.data());
    kernels::relu(buf_b.data(), buf_b.data(), buf_b.size());
    buf_a.swap(buf_b);
  }
  std::copy(buf_a.begin(), buf_a.end(), out.begin());
}

void MlpModel::head_forward(std::span<const double> feature,
                            std::span<double> probs) const {
  std::vector<double> z(static_cast<std::size_t>(head_.out));
  dense_forward(head_.w.data(), head_.b.data(), head_.in, head_.out,
                feature.data(), z.data());
  softmax_clamped(z, arch_.clamp, probs);
}

void MlpModel::forward(std::span<const double> x, std::span<double> probs) const {
  std::vector<double> f(static_cast<std::size_t>(arch_.feature_dim));
  features(x, f);
  head_forward(f, probs);
}

int MlpModel::predict(std::span<const double> x) const {
  std::vector<double> probs(static_cast<std::size_t>(arch_.num_labels));
  forward(x, probs);
  return static_cast<int>(std::max_element(probs.begin(), probs.end()) -
                          probs.begin());
}

double model_risk(const MlpModel& model, const SampleSet& sample,
                  const LossKind& loss) {
  sample.validate();
  require(sample.dim == model.arch().input_dim, "input dimension mismatch");
  std::vector<double> probs(static_cast<std::size_t>(model.num_labels()));
  double acc = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    model.forward(sample.x(i), probs);
    if (loss.kind == LossKind::kZeroOne) {
      const int pred = static_cast<int>(
          std::max_element(probs.begin(), probs.end()) - probs.begin());
      acc += pred == sample.ys[i] ? 0.0 : 1.0;
    } else {
      acc += -std::log2(probs[static_cast<std::size_t>(sample.ys[i])]);
    }
  }
  return acc / static_cast<double>(sample.size());
}

std::vector<double> compute_features(const MlpModel& model,
                                     const SampleSet& sample) {
  sample.validate();
  require(sample.dim == model.arch().input_dim, "input dimension mismatch");
  const std::size_t f = static_cast<std::size_t>(model.feature_dim());
  std::vector<double> out(sample.size() * f);
  for (std::size_t i = 0; i < sample.size(); ++i)
    model.features(sample.x(i), {out.data() + i * f, f});
  return out;
}

double head_risk(const MlpModel& model, const std::vector<double>& features,
                 const std::vector<int>& ys, const LossKind& loss) {
  const std::size_t f = static_cast<std::size_t>(model.feature_dim());
  const std::size_t m = ys.size();
  require(features.size() == m * f, "feature matrix shape mismatch");
  std::vector<double> probs(static_cast<std::size_t>(model.num_labels()));
  double acc = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    model.head_forward({features.data() + i * f, f}, probs);
    if (loss.kind == LossKind::kZeroOne) {
      const int pred = static_cast<int>(
          std::max_element(probs.begin(), probs.end()) - probs.begin());
      acc += pred == ys[i] ? 0.0 : 1.0;
    } else {
      acc += -std::log2(probs[static_cast<std::size_t>(ys[i])]);
    }
  }
  return acc / static_cast<double>(m);
}

namespace {

// dL/dz for one point of the clamped base-2 CE after softmax. Returns false
// (zero gradient) when the true-label probability sits in a clamped region.
bool ce_head_delta(std::span<const double> probs_unclamped, int y, double clamp,
                   std::span<double> dz) {
  const double py = probs_unclamped[static_cast<std::size_t>(y)];
  if (py <= clamp || py >= 1.0 - clamp) {
    std::fill(dz.begin(), dz.end(), 0.0);
    return false;
  }
  for (std::size_t j = 0; j < probs_unclamped.size(); ++j)
    dz[j] = (probs_unclamped[j] - (static_cast<int>(j) == y ? 1.0 : 0.0)) / kLn2;
  return true;
}

void softmax_raw(std::span<const double> z, std::span<double> probs) {
  const double zmax = *std::max_element(z.begin(), z.end());
  double total = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    probs[i] = std::exp(z[i] - zmax);
    total += probs[i];
  }
  for (std::size_t i = 0; i < z.size(); ++i) probs[i] /= total;
}

}  // namespace

std::pair<double, std::vector<double>> loss_and_grad(const MlpModel& model,
                                                     const SampleSet& sample,
                                                     const LossKind& loss,
                                                     bool include_featurizer) {
  require(loss.kind == LossKind::kCrossEntropy,
          "the 0-1 loss has no gradient; use the CE surrogate");
  sample.validate();
  require(sample.dim == model.arch().input_dim, "input dimension mismatch");

  const std::size_t head_n = model.head_param_count();
  const std::size_t feat_n = model.featurizer_param_count();
  std::vector<double> grad(include_featurizer ? head_n + feat_n : head_n, 0.0);
  double* ghead_w = grad.data();
  double* ghead_b = grad.data() + model.head_.w.size();

  const std::size_t layers = model.featurizer_.size();
  // Per-layer activation caches (post-relu) plus the input.
  std::vector<std::vector<double>> act(layers + 1);
  std::vector<std::vector<double>> pre(layers);
  const int k = model.num_labels();
  std::vector<double> z(static_cast<std::size_t>(k));
  std::vector<double> p(static_cast<std::size_t>(k));
  std::vector<double> dz(static_cast<std::size_t>(k));

  std::vector<std::size_t> offsets(layers);
  {
    std::size_t off = 0;
    for (std::size_t l = 0; l < layers; ++l) {
      offsets[l] = off;
      off += model.featurizer_[l].w.size() + model.featurizer_[l].b.size();
    }
  }
  std::vector<double> da, dzl, da_prev;

  double total_loss = 0.0;
  const double clamp = model.arch().clamp;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const auto x = sample.x(i);
    act[0].assign(x.begin(), x.end());
    for (std::size_t l = 0; l < layers; ++l) {
      const auto& d = model.featurizer_[l];
      pre[l].assign(static_cast<std::size_t>(d.out), 0.0);
      dense_forward(d.w.data(), d.b.data(), d.in, d.out, act[l].data(),
                    pre[l].data());
      act[l + 1].resize(pre[l].size());
      kernels::relu(pre[l].data(), act[l + 1].data(), pre[l].size());
    }
    const auto& feat = act[layers];
    dense_forward(model.head_.w.data(), model.head_.b.data(), model.head_.in,
                  model.head_.out, feat.data(), z.data());
    softmax_raw(z, p);
    const double py = std::clamp(p[static_cast<std::size_t>(sample.ys[i])],
                                 clamp, 1.0 - clamp);
    total_loss += -std::log2(py);

    if (!ce_head_delta(p, sample.ys[i], clamp, dz)) continue;
    // Head gradients.
    for (int r = 0; r < k; ++r) {
      kernels::axpy(dz[static_cast<std::size_t>(r)], feat.data(),
                    ghead_w + static_cast<std::size_t>(r) * model.head_.in,
                    static_cast<std::size_t>(model.head_.in));
      ghead_b[r] += dz[static_cast<std::size_t>(r)];
    }
    if (!include_featurizer) continue;
    // Backprop into the featurizer stack.
    da.assign(static_cast<std::size_t>(model.head_.in), 0.0);
    for (int r = 0; r < k; ++r)
      kernels::axpy(dz[static_cast<std::size_t>(r)],
                    model.head_.w.data() + static_cast<std::size_t>(r) * model.head_.in,
                    da.data(), da.size());
    double* gfeat = grad.data() + head_n;
    for (std::size_t l = layers; l-- > 0;) {
      const auto& d = model.featurizer_[l];
      dzl.resize(static_cast<std::size_t>(d.out));
      kernels::relu_backward(pre[l].data(), da.data(), dzl.data(), dzl.size());
      double* gw = gfeat + offsets[l];
      double* gb = gw + d.w.size();
      for (int r = 0; r < d.out; ++r) {
        kernels::axpy(dzl[static_cast<std::size_t>(r)], act[l].data(),
                      gw + static_cast<std::size_t>(r) * d.in,
                      static_cast<std::size_t>(d.in));
        gb[r] += dzl[static_cast<std::size_t>(r)];
      }
      if (l > 0) {
        da_prev.assign(static_cast<std::size_t>(d.in), 0.0);
        for (int r = 0; r < d.out; ++r)
          kernels::axpy(dzl[static_cast<std::size_t>(r)],
                        d.w.data() + static_cast<std::size_t>(r) * d.in,
                        da_prev.data(), da_prev.size());
        da.swap(da_prev);
      }
    }
  }

  const double inv_m = 1.0 / static_cast<double>(sample.size());
  kernels::scale(inv_m, grad.data(), grad.size());
  return {total_loss * inv_m, std::move(grad)};
}

double head_ce_risk_and_grad(const MlpModel& model,
                             const std::vector<double>& features,
                             const std::vector<int>& ys,
                             std::span<double> grad_accum, double weight) {
  const std::size_t f = static_cast<std::size_t>(model.feature_dim());
  const std::size_t m = ys.size();
  require(features.size() == m * f, "feature matrix shape mismatch");
  require(grad_accum.size() == model.head_param_count(),
          "head gradient size mismatch");
  const int k = model.num_labels();
  const double clamp = model.arch().clamp;
  std::vector<double> z(static_cast<std::size_t>(k));
  std::vector<double> p(static_cast<std::size_t>(k));
  std::vector<double> dz(static_cast<std::size_t>(k));
  std::vector<double> grad(grad_accum.size(), 0.0);
  double* gw = grad.data();
  double* gb = grad.data() + model.head_.w.size();

  double total_loss = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double* feat = features.data() + i * f;
    dense_forward(model.head_.w.data(), model.head_.b.data(), model.head_.in,
                  model.head_.out, feat, z.data());
    softmax_raw(z, p);
    const double py =
        std::clamp(p[static_cast<std::size_t>(ys[i])], clamp, 1.0 - clamp);
    total_loss += -std::log2(py);
    if (!ce_head_delta(p, ys[i], clamp, dz)) continue;
    for (int r = 0; r < k; ++r) {
      kernels::axpy(dz[static_cast<std::size_t>(r)], feat,
                    gw + static_cast<std::size_t>(r) * model.head_.in,
                    static_cast<std::size_t>(model.head_.in));
      gb[r] += dz[static_cast<std::size_t>(r)];
    }
  }
  const double inv_m = 1.0 / static_cast<double>(m);
  kernels::axpy(weight * inv_m, grad.data(), grad_accum.data(), grad.size());
  return total_loss * inv_m;
}

std::vector<double> featurizer_grad_for_head(const MlpModel& model,
                                             std::span<const double> head_theta,
                                             const SampleSet& sample) {
  MlpModel swapped = model;
  swapped.set_head_params(head_theta);
  auto [loss, grad] = loss_and_grad(swapped, sample, LossKind::cross_entropy(
                                        model.arch().clamp), true);
  (void)loss;
  return {grad.begin() + static_cast<std::ptrdiff_t>(model.head_param_count()),
          grad.end()};
}

std::vector<double> project_to_ball(std::span<const double> theta,
                                    const BallConstraint& ball) {
  require(theta.size() == ball.center.size(), "projection dimension mismatch");
  require(ball.radius >= 0.0, "ball radius must be nonnegative");
  const double dist2 =
      kernels::sq_dist(theta.data(), ball.center.data(), theta.size());
  std::vector<double> out(theta.begin(), theta.end());
  const double dist = std::sqrt(dist2);
  // The (1 + 1e-12) margin absorbs rescaling roundoff and makes the
  // projection exactly idempotent.
  if (dist <= ball.radius * (1.0 + 1e-12)) return out;
  if (dist == 0.0) return std::vector<double>(ball.center.begin(), ball.center.end());
  const double scale = ball.radius / dist;
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = ball.center[i] + scale * (out[i] - ball.center[i]);
  return out;
}

Optimizer::Optimizer(const OptimizerSpec& spec, std::size_t dim, bool maximize)
    : spec_(spec) {
  require(spec.lr > 0.0, "learning rate must be positive");
  if (spec.kind == OptimizerSpec::kGradientAscent)
    require(maximize, "a plain ascent optimizer can only maximize");
  if (spec.kind == OptimizerSpec::kGradientDescent)
    require(!maximize, "a plain descent optimizer can only minimize");
  direction_ = maximize ? 1.0 : -1.0;
  if (spec.kind == OptimizerSpec::kAdam) {
    m_.assign(dim, 0.0);
    v_.assign(dim, 0.0);
  }
}

void Optimizer::step(std::span<double> params, std::span<const double> grad) {
  require(params.size() == grad.size(), "optimizer dimension mismatch");
  if (spec_.kind != OptimizerSpec::kAdam) {
    kernels::axpy(direction_ * spec_.lr, grad.data(), params.data(), params.size());
    return;
  }
  require(params.size() == m_.size(), "optimizer state dimension mismatch");
  ++t_;
  const double bc1 = 1.0 - std::pow(spec_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(spec_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = spec_.beta1 * m_[i] + (1.0 - spec_.beta1) * grad[i];
    v_[i] = spec_.beta2 * v_[i] + (1.0 - spec_.beta2) * grad[i] * grad[i];
    const double mhat = m_[i] / bc1;
    const double vhat = v_[i] / bc2;
    params[i] += direction_ * spec_.lr * mhat / (std::sqrt(vhat) + spec_.eps);
  }
}

double head_function_l1_distance(const MlpModel& model,
                                 std::span<const double> theta_a,
                                 std::span<const double> theta_b,
                                 const SampleSet& mu) {
  MlpModel work = model;
  const std::vector<double> features = compute_features(model, mu);
  const std::size_t f = static_cast<std::size_t>(model.feature_dim());
  const std::size_t k = static_cast<std::size_t>(model.num_labels());
  const std::size_t m = mu.size();
  std::vector<double> pa(m * k), pb(m * k);
  work.set_head_params(theta_a);
  for (std::size_t i = 0; i < m; ++i)
    work.head_forward({features.data() + i * f, f}, {pa.data() + i * k, k});
  work.set_head_params(theta_b);
  for (std::size_t i = 0; i < m; ++i)
    work.head_forward({features.data() + i * f, f}, {pb.data() + i * k, k});
  double acc = 0.0;
  for (std::size_t i = 0; i < m; ++i)
    acc += std::sqrt(kernels::sq_dist(pa.data() + i * k, pb.data() + i * k, k));
  return acc / static_cast<double>(m);
}

double param_lipschitz_probe(const MlpModel& model, const SampleSet& mu,
                             int n_pairs, std::uint64_t seed,
                             double perturbation_scale) {
  require(n_pairs >= 1, "probe needs at least one pair");
  Rng rng(seed);
  const std::vector<double> theta = model.head_params();
  double best = -1.0;
  int valid = 0;
  for (int pair = 0; pair < n_pairs; ++pair) {
    std::vector<double> a = theta, b = theta;
    for (double& x : a) x += perturbation_scale * rng.normal();
    for (double& x : b) x += perturbation_scale * rng.normal();
    const double dist =
        std::sqrt(kernels::sq_dist(a.data(), b.data(), a.size()));
    if (dist <= 1e-14) continue;  // degenerate pair, skipped
    ++valid;
    best = std::max(best, head_function_l1_distance(model, a, b, mu) / dist);
  }
  require(valid > 0, "all probe pairs were degenerate");
  return best;
}

CeProbeReport ce_functional_probes(const SampleSet& mu, double clamp,
                                   int n_pairs, std::uint64_t seed) {
  require(clamp > 0.0 && clamp < 0.5, "clamp must lie in (0, 0.5)");
  require(n_pairs >= 1, "probes need at least one pair");
  mu.validate();
  const std::size_t m = mu.size();
  const std::size_t k = static_cast<std::size_t>(mu.num_labels);
  Rng rng(seed);

  auto random_table = [&]() {
    std::vector<double> table(m * k);
    std::vector<double> z(k);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < k; ++j) z[j] = 3.0 * rng.normal();
      softmax_clamped(z, clamp, {table.data() + i * k, k});
    }
    return table;
  };
  auto ce_risk = [&](const std::vector<double>& table) {
    double acc = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double py = std::clamp(
          table[i * k + static_cast<std::size_t>(mu.ys[i])], clamp, 1.0 - clamp);
      acc += -std::log2(py);
    }
    return acc / static_cast<double>(m);
  };

  CeProbeReport report;
  report.n_pairs = n_pairs;
  report.lipschitz_constant = 1.0 / (kLn2 * clamp);
  report.lambda = k == 2 ? 1.0 / (4.0 * kLn2) : 1.0 / kLn2;
  report.worst_lipschitz_slack = std::numeric_limits<double>::infinity();
  report.worst_convexity_slack = std::numeric_limits<double>::infinity();

  const double alphas[] = {0.25, 0.5, 0.75};
  std::vector<double> mix(m * k);
  for (int pair = 0; pair < n_pairs; ++pair) {
    const auto ta = random_table();
    const auto tb = random_table();
    const double ea = ce_risk(ta);
    const double eb = ce_risk(tb);

    // Lipschitz: |e(a) - e(b)| <= L * mean ||a_i - b_i||_2.
    double l1 = 0.0;
    for (std::size_t i = 0; i < m; ++i)
      l1 += std::sqrt(kernels::sq_dist(ta.data() + i * k, tb.data() + i * k, k));
    l1 /= static_cast<double>(m);
    report.worst_lipschitz_slack =
        std::min(report.worst_lipschitz_slack,
                 report.lipschitz_constant * l1 - std::abs(ea - eb));

    // Strong convexity in the scalar coordinate the loss actually reads:
    // the +-1 output for binary labels, the true-class probability otherwise.
    double norm2 = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      double sa, sb;
      if (k == 2) {
        sa = ta[i * k + 1] - ta[i * k];
        sb = tb[i * k + 1] - tb[i * k];
      } else {
        sa = ta[i * k + static_cast<std::size_t>(mu.ys[i])];
        sb = tb[i * k + static_cast<std::size_t>(mu.ys[i])];
      }
      norm2 += (sa - sb) * (sa - sb);
    }
    norm2 /= static_cast<double>(m);

    for (double alpha : alphas) {
      for (std::size_t i = 0; i < m * k; ++i)
        mix[i] = alpha * ta[i] + (1.0 - alpha) * tb[i];
      const double lhs = ce_risk(mix);
      const double rhs = alpha * ea + (1.0 - alpha) * eb -
                         0.5 * report.lambda * alpha * (1.0 - alpha) * norm2;
      report.worst_convexity_slack =
          std::min(report.worst_convexity_slack, rhs - lhs);
    }
  }
  return report;
}

}  // namespace transfer
