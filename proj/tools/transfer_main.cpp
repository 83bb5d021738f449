// Command-line front end: generate domains, train, attack, measure, bound
// and merge reports. One JSON config file drives each subcommand; a few
// flags override config fields. All randomness flows from the config seed.
#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>

#include "transfer/bounds.hpp"
#include "transfer/dgalgo.hpp"
#include "transfer/io.hpp"
#include "transfer/measures.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace transfer;

namespace {

constexpr int kSchemaVersion = 1;

struct CommonOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> algo;
  std::vector<double> deltas;
};

void reject_unknown_keys(const json& object, const std::set<std::string>& allowed,
                         const std::string& where) {
  for (const auto& [key, value] : object.items()) {
    (void)value;
    require(allowed.contains(key), "unknown key '" + key + "' in " + where);
  }
}

json load_config(const CommonOptions& opts, const std::string& command) {
  require(!opts.config_path.empty(), "--config is required");
  json config = io::read_json(opts.config_path);
  reject_unknown_keys(config,
                      {"schema_version", "seed", "out", "gen", "train", "attack",
                       "measure", "bound", "report"},
                      "config");
  require(config.contains("schema_version") &&
              config.at("schema_version").get<int>() == kSchemaVersion,
          "config schema_version must be 1");
  require(config.contains(command),
          "config has no '" + command + "' block");
  if (opts.seed) config["seed"] = *opts.seed;
  if (opts.out) config["out"] = *opts.out;
  return config;
}

std::uint64_t required_seed(const json& config) {
  require(config.contains("seed"), "a seed is mandatory (config or --seed)");
  return config.at("seed").get<std::uint64_t>();
}

fs::path required_out(const json& config) {
  require(config.contains("out"), "an output directory is mandatory (config or --out)");
  return fs::path(config.at("out").get<std::string>());
}

fs::path resolve_rel(const fs::path& config_path, const std::string& path) {
  const fs::path p(path);
  if (p.is_absolute()) return p;
  return config_path.parent_path() / p;
}

OptimizerSpec optimizer_from_json(const json& j, int default_steps) {
  reject_unknown_keys(j, {"kind", "lr", "beta1", "beta2", "eps", "steps"},
                      "optimizer");
  OptimizerSpec opt;
  const std::string kind = j.value("kind", std::string("adam"));
  if (kind == "adam")
    opt.kind = OptimizerSpec::kAdam;
  else if (kind == "gradient_ascent")
    opt.kind = OptimizerSpec::kGradientAscent;
  else if (kind == "gradient_descent")
    opt.kind = OptimizerSpec::kGradientDescent;
  else
    throw ValidationError("unknown optimizer kind '" + kind + "'");
  opt.lr = j.value("lr", 0.01);
  opt.beta1 = j.value("beta1", 0.9);
  opt.beta2 = j.value("beta2", 0.999);
  opt.eps = j.value("eps", 1e-8);
  opt.steps = j.value("steps", default_steps);
  return opt;
}

MlpArchitecture arch_from_json(const json& j) {
  reject_unknown_keys(j, {"input_dim", "hidden", "feature_dim", "classes", "clamp"},
                      "arch");
  MlpArchitecture arch;
  arch.input_dim = j.value("input_dim", 2);
  arch.hidden = j.value("hidden", std::vector<int>{64, 64});
  arch.feature_dim = j.value("feature_dim", 16);
  arch.num_labels = j.value("classes", 2);
  arch.clamp = j.value("clamp", 1e-6);
  return arch;
}

HypothesisSpec gamma_from_json(const json& j) {
  reject_unknown_keys(j, {"lo", "hi", "n", "example1_delta"}, "gamma");
  if (j.contains("example1_delta")) {
    const double delta = j.at("example1_delta").get<double>();
    return HypothesisSpec::grid(-delta / 0.8, delta / 0.8, j.value("n", 4001));
  }
  return HypothesisSpec::grid(j.value("lo", -1.0), j.value("hi", 1.0),
                              j.value("n", 4001));
}

std::vector<SampleSet> load_domain_files(const fs::path& config_path,
                                         const std::vector<std::string>& files) {
  std::vector<SampleSet> domains;
  int max_label = 2;
  for (const std::string& file : files)
    domains.push_back(io::read_sample_csv(resolve_rel(config_path, file)));
  for (const SampleSet& d : domains) max_label = std::max(max_label, d.num_labels);
  for (SampleSet& d : domains) d.num_labels = max_label;
  return domains;
}

std::vector<SampleSet> domains_from_manifest(const fs::path& config_path,
                                             const std::string& manifest_path,
                                             bool exclude_target) {
  const fs::path resolved = resolve_rel(config_path, manifest_path);
  const json manifest = io::read_json(resolved);
  std::vector<SampleSet> domains;
  int max_label = 2;
  for (const json& entry : manifest.at("domains")) {
    if (exclude_target && entry.at("id").get<int>() == 0) continue;
    const fs::path file = resolved.parent_path() / entry.at("file").get<std::string>();
    domains.push_back(io::read_sample_csv(file));
  }
  require(!domains.empty(), "manifest lists no usable domains");
  for (const SampleSet& d : domains) max_label = std::max(max_label, d.num_labels);
  for (SampleSet& d : domains) d.num_labels = max_label;
  return domains;
}

std::string delta_tag(double delta) {
  std::ostringstream os;
  os << delta;
  std::string tag = os.str();
  for (char& c : tag)
    if (c == '.') c = 'p';
  return tag;
}

int cmd_gen(const CommonOptions& opts) {
  const json config = load_config(opts, "gen");
  const json& block = config.at("gen");
  reject_unknown_keys(block,
                      {"kind", "angles_deg", "n_per", "sigma", "classes",
                       "mean_radius", "intensity", "sample_m"},
                      "gen");
  const fs::path out = required_out(config);
  const io::DirectoryLock lock(out);
  const std::string kind = block.at("kind").get<std::string>();

  json manifest;
  manifest["schema_version"] = kSchemaVersion;
  manifest["kind"] = kind;

  if (kind == "example1") {
    const double intensity = block.value("intensity", 0.1);
    const auto [s, t] = example1_pair(intensity);
    io::write_joint_json(out / "source.json", s);
    io::write_joint_json(out / "target.json", t);
    manifest["intensity"] = intensity;
    manifest["files"] = {"source.json", "target.json"};
    // Optional finite draws from the analytic pair.
    if (block.contains("sample_m")) {
      const std::size_t m = block.at("sample_m").get<std::size_t>();
      const std::uint64_t seed = required_seed(config);
      io::write_sample_csv(out / "source.csv", sample(s, m, Rng::derive(seed, 1), 1));
      io::write_sample_csv(out / "target.csv", sample(t, m, Rng::derive(seed, 2), 0));
      manifest["sample_m"] = m;
      manifest["seed"] = seed;
      manifest["files"].push_back("source.csv");
      manifest["files"].push_back("target.csv");
    }
    io::write_json(out / "manifest.json", manifest);
    std::cout << "wrote analytic pair to " << out << "\n";
    return 0;
  }

  require(kind == "rotated_gaussians", "unknown gen kind '" + kind + "'");
  const std::uint64_t seed = required_seed(config);
  const auto angles_deg = block.at("angles_deg").get<std::vector<double>>();
  const std::size_t n_per = block.value("n_per", 2000);
  RotatedGaussianConfig rg;
  rg.sigma = block.value("sigma", 0.3);
  rg.num_labels = block.value("classes", 2);
  rg.mean_radius = block.value("mean_radius", 1.0);
  std::vector<double> angles;
  for (double deg : angles_deg) angles.push_back(deg * M_PI / 180.0);

  const auto suite = rotated_gaussian_suite(angles, n_per, seed, rg);
  manifest["seed"] = seed;
  manifest["n_per"] = n_per;
  manifest["sigma"] = rg.sigma;
  manifest["classes"] = rg.num_labels;
  json domains = json::array();
  for (const SampleSet& domain : suite) {
    const std::string file = "domain_" + std::to_string(domain.domain_id) + ".csv";
    io::write_sample_csv(out / file, domain);
    domains.push_back({{"id", domain.domain_id},
                       {"file", file},
                       {"n", domain.size()},
                       {"angle_deg", angles_deg[static_cast<std::size_t>(domain.domain_id)]},
                       {"seed", seed}});
  }
  manifest["domains"] = std::move(domains);
  io::write_json(out / "manifest.json", manifest);
  std::cout << "wrote " << suite.size() << " domains to " << out << "\n";
  return 0;
}

int cmd_train(const CommonOptions& opts) {
  json config = load_config(opts, "train");
  json& block = config.at("train");
  reject_unknown_keys(block,
                      {"algo", "sources", "manifest", "arch", "optimizer",
                       "transfer"},
                      "train");
  if (opts.algo) block["algo"] = *opts.algo;
  const fs::path out = required_out(config);
  const io::DirectoryLock lock(out);
  const std::uint64_t seed = required_seed(config);

  std::vector<SampleSet> sources;
  if (block.contains("sources"))
    sources = load_domain_files(opts.config_path,
                                block.at("sources").get<std::vector<std::string>>());
  else if (block.contains("manifest"))
    sources = domains_from_manifest(opts.config_path,
                                    block.at("manifest").get<std::string>(), true);
  else
    throw ValidationError("train needs 'sources' or 'manifest'");

  MlpArchitecture arch = arch_from_json(block.value("arch", json::object()));
  arch.input_dim = sources.front().dim;
  arch.num_labels = sources.front().num_labels;

  const std::string algo = block.value("algo", std::string("erm"));
  json result_json;
  if (algo == "erm") {
    const OptimizerSpec opt =
        optimizer_from_json(block.value("optimizer", json::object()), 200);
    const ErmResult result = erm_train(sources, arch, opt, seed);
    io::write_checkpoint(out / "checkpoint.json", result.model);
    result_json = {{"algo", "erm"}, {"objective", result.objective}};
  } else if (algo == "transfer") {
    const json tblock = block.value("transfer", json::object());
    reject_unknown_keys(tblock,
                        {"radius", "inner_steps", "lambda", "epochs", "ascent",
                         "descent"},
                        "train.transfer");
    TransferTrainConfig cfg;
    cfg.radius = tblock.value("radius", 10.0);
    cfg.inner_steps = tblock.value("inner_steps", 40);
    cfg.lambda_weight = tblock.value("lambda", 1.0);
    cfg.epochs = tblock.value("epochs", 200);
    cfg.ascent = optimizer_from_json(
        tblock.value("ascent", json{{"kind", "adam"}, {"lr", 0.05}}), 1);
    cfg.descent = optimizer_from_json(
        tblock.value("descent", json{{"kind", "adam"}, {"lr", 0.01}}), 1);
    const TrainResult result = transfer_train(sources, arch, cfg, seed);
    io::write_checkpoint(out / "checkpoint.json", result.model);
    result_json = io::to_json(result);
    result_json["algo"] = "transfer";
  } else {
    throw ValidationError("unknown algo '" + algo + "'");
  }
  io::write_json(out / "train_result.json", result_json);
  std::cout << "trained " << algo << "; checkpoint in " << out << "\n";
  return 0;
}

int cmd_attack(const CommonOptions& opts) {
  json config = load_config(opts, "attack");
  json& block = config.at("attack");
  reject_unknown_keys(block,
                      {"checkpoint", "domains", "manifest", "deltas",
                       "iterations", "steps_per_selection", "ascent"},
                      "attack");
  const fs::path out = required_out(config);
  const io::DirectoryLock lock(out);
  const std::uint64_t seed = required_seed(config);

  const MlpModel model = io::read_checkpoint(
      resolve_rel(opts.config_path, block.at("checkpoint").get<std::string>()));

  std::vector<SampleSet> domains;
  if (block.contains("domains"))
    domains = load_domain_files(opts.config_path,
                                block.at("domains").get<std::vector<std::string>>());
  else if (block.contains("manifest"))
    domains = domains_from_manifest(opts.config_path,
                                    block.at("manifest").get<std::string>(), false);
  else
    throw ValidationError("attack needs 'domains' or 'manifest'");

  std::vector<double> deltas = opts.deltas;
  if (deltas.empty()) deltas = block.value("deltas", std::vector<double>{1.0});

  AttackConfig cfg;
  cfg.iterations = block.value("iterations", 60);
  cfg.steps_per_selection = block.value("steps_per_selection", 1);
  cfg.ascent = optimizer_from_json(
      block.value("ascent", json{{"kind", "adam"}, {"lr", 0.01}}), 1);

  for (double delta : deltas) {
    cfg.radius = delta;
    const AttackResult result = attack_transferability(model, domains, cfg, seed);
    json j = io::to_json(result);
    j["delta"] = delta;
    const std::string tag = delta_tag(delta);
    io::write_json(out / ("attack_" + tag + ".json"), j);
    io::write_trajectory_csv(out / ("attack_" + tag + "_trajectory.csv"), result);
    std::cout << "delta " << delta << ": best gap " << result.best_gap
              << " (domains " << result.best_max_index << " vs "
              << result.best_min_index << ")\n";
  }
  return 0;
}

int cmd_measure(const CommonOptions& opts) {
  const json config = load_config(opts, "measure");
  const json& block = config.at("measure");
  reject_unknown_keys(block,
                      {"source", "target", "source_csv", "target_csv", "gamma",
                       "loss", "clamp", "hdh", "delta_s"},
                      "measure");
  const fs::path out = required_out(config);
  const io::DirectoryLock lock(out);

  const HypothesisSpec gamma = gamma_from_json(block.value("gamma", json::object()));
  LossKind loss = LossKind::zero_one();
  if (block.value("loss", std::string("zero_one")) == "cross_entropy")
    loss = LossKind::cross_entropy(block.value("clamp", 1e-6));

  json report;
  report["gamma"] = gamma.describe();
  report["loss"] = loss.describe();

  if (block.contains("source") && block.contains("target")) {
    const LabeledJoint s = io::read_joint_json(
        resolve_rel(opts.config_path, block.at("source").get<std::string>()));
    const LabeledJoint t = io::read_joint_json(
        resolve_rel(opts.config_path, block.at("target").get<std::string>()));
    const TransferReport measures = transfer_measures(s, t, gamma, loss);
    report["measures"] = io::to_json(measures);
    report["tv_unnormalized"] = tv_unnormalized(s, t);
    report["tv_half"] = tv_half(s, t);
    report["label_shift_tv"] = label_marginal_tv(s, t);
    if (block.value("hdh", true) &&
        s.variant() == JointVariant::kPiecewiseUniform1D)
      report["hdh_divergence"] = hdh_divergence_1d(s, t);
    if (s.num_labels() == 2) {
      const SandwichResult sandwich = check_tv_sandwich(s, t);
      report["sandwich"] = {{"t_realizable_all", sandwich.t_realizable_all},
                            {"tv", sandwich.tv},
                            {"slack_lower", sandwich.slack_lower},
                            {"slack_upper", sandwich.slack_upper},
                            {"ok", sandwich.lhs_ok && sandwich.rhs_ok}};
    }
    if (block.contains("delta_s")) {
      const CertificateResult cert = transferability_certificate(
          s, t, gamma, block.at("delta_s").get<double>(), loss);
      report["certificate"] = {{"delta_t_min", cert.delta_t_min},
                               {"containment_ok", cert.containment_ok},
                               {"covers_target_optimum",
                                cert.gamma_covers_target_optimum}};
    }
  } else if (block.contains("source_csv") && block.contains("target_csv")) {
    const SampleSet s = io::read_sample_csv(
        resolve_rel(opts.config_path, block.at("source_csv").get<std::string>()));
    const SampleSet t = io::read_sample_csv(
        resolve_rel(opts.config_path, block.at("target_csv").get<std::string>()));
    require(s.dim == 1 && t.dim == 1,
            "threshold measures on samples need 1D inputs");
    const TransferReport measures = transfer_measures(s, t, gamma, loss);
    report["measures"] = io::to_json(measures);
    report["label_shift_tv"] = label_marginal_tv(s, t);
  } else {
    throw ValidationError("measure needs source/target JSONs or CSVs");
  }

  io::write_json(out / "measure_report.json", report);

  // Fixed-column summary table.
  const json& m = report.at("measures");
  std::printf("%-18s %14s\n", "quantity", "value");
  const auto row = [](const char* name, double value) {
    std::printf("%-18s %14.9f\n", name, value);
  };
  row("T(S||T)", m.at("t_one_sided_st").get<double>());
  row("T(T||S)", m.at("t_one_sided_ts").get<double>());
  row("T_sym", m.at("t_symmetric").get<double>());
  row("T_realizable", m.at("t_realizable").get<double>());
  row("eps*_S", m.at("eps_star_s").get<double>());
  row("eps*_T", m.at("eps_star_t").get<double>());
  if (report.contains("tv_unnormalized")) {
    row("tv_unnormalized", report.at("tv_unnormalized").get<double>());
    row("tv_half", report.at("tv_half").get<double>());
  }
  row("label_shift_tv", report.at("label_shift_tv").get<double>());
  if (report.contains("hdh_divergence"))
    row("hdh_divergence", report.at("hdh_divergence").get<double>());
  return 0;
}

int cmd_bound(const CommonOptions& opts) {
  const json config = load_config(opts, "bound");
  const json& block = config.at("bound");
  reject_unknown_keys(block,
                      {"m", "k", "confidence", "d_vc", "d_nat", "classes", "C",
                       "r_m", "r_k", "rademacher"},
                      "bound");
  const fs::path out = required_out(config);
  const io::DirectoryLock lock(out);

  BoundInputs inputs;
  inputs.m = block.at("m").get<std::size_t>();
  inputs.k = block.at("k").get<std::size_t>();
  inputs.confidence = block.value("confidence", 0.05);
  inputs.num_labels = block.value("classes", 2);
  inputs.natarajan_const = block.value("C", 1.0);

  json result;
  result["log_base"] = "natural";
  if (block.contains("rademacher")) {
    const json& rj = block.at("rademacher");
    reject_unknown_keys(rj, {"source_csv", "target_csv", "gamma", "n_sign_draws"},
                        "bound.rademacher");
    const std::uint64_t seed = required_seed(config);
    const HypothesisSpec gamma = gamma_from_json(rj.value("gamma", json::object()));
    const int draws = rj.value("n_sign_draws", 256);
    const SampleSet s = io::read_sample_csv(
        resolve_rel(opts.config_path, rj.at("source_csv").get<std::string>()));
    const SampleSet t = io::read_sample_csv(
        resolve_rel(opts.config_path, rj.at("target_csv").get<std::string>()));
    const auto rm = empirical_rademacher(gamma, s, draws, Rng::derive(seed, 1));
    const auto rk = empirical_rademacher(gamma, t, draws, Rng::derive(seed, 2));
    inputs.r_m = rm.estimate;
    inputs.r_k = rk.estimate;
    result["rademacher_m"] = io::to_json(rm);
    result["rademacher_k"] = io::to_json(rk);
  } else {
    inputs.r_m = block.value("r_m", 0.0);
    inputs.r_k = block.value("r_k", 0.0);
  }

  result["inputs"] = {{"m", inputs.m},
                      {"k", inputs.k},
                      {"confidence", inputs.confidence},
                      {"r_m", inputs.r_m},
                      {"r_k", inputs.r_k}};
  result["rademacher_slack"] = io::to_json(rademacher_bound_value(inputs));
  if (block.contains("d_vc"))
    result["vc_bound"] = {{"d", block.at("d_vc").get<int>()},
                          {"r_m", vc_bound_value(block.at("d_vc").get<int>(), inputs.m)},
                          {"r_k", vc_bound_value(block.at("d_vc").get<int>(), inputs.k)}};
  if (block.contains("d_nat")) {
    const int d = block.at("d_nat").get<int>();
    result["natarajan"] = {
        {"d", d},
        {"C", inputs.natarajan_const},
        {"caveat", "the absolute constant C is caller-supplied"},
        {"single_domain_m",
         natarajan_bound_value(d, inputs.num_labels, inputs.m, inputs.confidence,
                               inputs.natarajan_const)},
        {"two_domain_slack",
         io::to_json(natarajan_two_domain_slacks(d, inputs.num_labels, inputs.m,
                                                 inputs.k, inputs.confidence,
                                                 inputs.natarajan_const))}};
  }
  io::write_json(out / "bound.json", result);
  std::cout << result.dump(2) << "\n";
  return 0;
}

int cmd_report(const CommonOptions& opts) {
  const json config = load_config(opts, "report");
  const json& block = config.at("report");
  reject_unknown_keys(block, {"attacks", "measure_reports"}, "report");
  const fs::path out = required_out(config);
  const io::DirectoryLock lock(out);

  require(block.contains("attacks") && !block.at("attacks").empty(),
          "report needs at least one attack result set");

  std::ofstream csv(out / "accuracy_vs_delta.csv");
  if (!csv) throw IoError("cannot write accuracy_vs_delta.csv");
  csv << "name,delta,domain_id,reference_accuracy,attacked_accuracy,drop\n";
  json summary;
  summary["curves"] = json::array();
  for (const json& entry : block.at("attacks")) {
    const std::string name = entry.at("name").get<std::string>();
    for (const std::string& file :
         entry.at("files").get<std::vector<std::string>>()) {
      const json result = io::read_json(resolve_rel(opts.config_path, file));
      const double delta = result.at("delta").get<double>();
      const json& best = result.at("best_domains");
      const json& reference = result.at("reference_accuracy");
      for (std::size_t d = 0; d < best.size(); ++d) {
        const double ref = reference[d].get<double>();
        const double atk = best[d].at("accuracy").get<double>();
        csv << name << "," << io::format_double(delta) << "," << d << ","
            << io::format_double(ref) << "," << io::format_double(atk) << ","
            << io::format_double(ref - atk) << "\n";
      }
      summary["curves"].push_back({{"name", name},
                                   {"delta", delta},
                                   {"best_gap", result.at("best_gap")},
                                   {"target_drop",
                                    reference[0].get<double>() -
                                        best[0].at("accuracy").get<double>()}});
    }
  }

  // Per-inequality slack table gathered from measure reports.
  json slacks = json::array();
  for (const std::string& file :
       block.value("measure_reports", std::vector<std::string>())) {
    const json report = io::read_json(resolve_rel(opts.config_path, file));
    if (report.contains("sandwich")) {
      slacks.push_back({{"source", file},
                        {"inequality", "realizable <= tv"},
                        {"slack", report.at("sandwich").at("slack_lower")}});
      slacks.push_back({{"source", file},
                        {"inequality", "tv <= 4 * realizable"},
                        {"slack", report.at("sandwich").at("slack_upper")}});
    }
    if (report.contains("measures")) {
      const json& m = report.at("measures");
      slacks.push_back({{"source", file},
                        {"inequality", "t_symmetric <= 2 * t_realizable"},
                        {"slack", 2.0 * m.at("t_realizable").get<double>() -
                                      m.at("t_symmetric").get<double>()}});
    }
  }
  summary["inequality_slacks"] = std::move(slacks);
  io::write_json(out / "summary.json", summary);
  std::cout << "report written to " << out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"transferability measures, bounds and adversarial evaluation"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand name

  CommonOptions opts;
  app.add_option("--config", opts.config_path, "experiment config JSON")
      ->required();
  std::uint64_t seed_value = 0;
  auto* seed_opt = app.add_option("--seed", seed_value, "override config seed");
  std::string out_value;
  auto* out_opt = app.add_option("--out", out_value, "override output directory");
  std::string algo_value;
  auto* algo_opt = app.add_option("--algo", algo_value, "override train algo");
  std::string delta_value;
  auto* delta_opt =
      app.add_option("--delta", delta_value, "override attack deltas (comma list)");

  auto* gen = app.add_subcommand("gen", "generate domains");
  auto* train = app.add_subcommand("train", "train a model on source domains");
  auto* attack = app.add_subcommand("attack", "adversarial transferability evaluation");
  auto* measure = app.add_subcommand("measure", "transfer measures and divergences");
  auto* bound = app.add_subcommand("bound", "estimation-error bound values");
  auto* report = app.add_subcommand("report", "merge results into plot data");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*seed_opt) opts.seed = seed_value;
    if (*out_opt) opts.out = out_value;
    if (*algo_opt) opts.algo = algo_value;
    if (*delta_opt) {
      std::stringstream ss(delta_value);
      std::string field;
      while (std::getline(ss, field, ',')) opts.deltas.push_back(std::stod(field));
    }
    if (gen->parsed()) return cmd_gen(opts);
    if (train->parsed()) return cmd_train(opts);
    if (attack->parsed()) return cmd_attack(opts);
    if (measure->parsed()) return cmd_measure(opts);
    if (bound->parsed()) return cmd_bound(opts);
    if (report->parsed()) return cmd_report(opts);
    return 1;
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 1;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 2;
  } catch (const InternalError& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
}
