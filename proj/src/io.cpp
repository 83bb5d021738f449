#include "transfer/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace transfer::io {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_double(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

void write_sample_csv(const fs::path& path, const SampleSet& sample) {
  sample.validate();
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << "domain_id,y";
  for (int d = 1; d <= sample.dim; ++d) out << ",x" << d;
  out << "\n";
  for (std::size_t i = 0; i < sample.size(); ++i) {
    out << sample.domain_id << "," << sample.ys[i];
    for (double v : sample.x(i)) out << "," << format_double(v);
    out << "\n";
  }
  if (!out) throw IoError("write failed: " + path.string());
}

SampleSet read_sample_csv(const fs::path& path, int num_labels) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open for reading: " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty CSV: " + path.string());

  int dim = 0;
  {
    std::stringstream header(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(header, field, ',')) fields.push_back(field);
    require(fields.size() >= 3 && fields[0] == "domain_id" && fields[1] == "y",
            "bad CSV header in " + path.string());
    dim = static_cast<int>(fields.size()) - 2;
  }

  SampleSet sample;
  sample.dim = dim;
  bool first = true;
  int max_label = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream row(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(row, field, ',')) fields.push_back(field);
    require(static_cast<int>(fields.size()) == dim + 2,
            "bad CSV row in " + path.string());
    try {
      const int domain_id = std::stoi(fields[0]);
      if (first) {
        sample.domain_id = domain_id;
        first = false;
      } else {
        require(domain_id == sample.domain_id,
                "mixed domain ids in " + path.string());
      }
      const int y = std::stoi(fields[1]);
      require(y >= 0, "negative label in " + path.string());
      max_label = std::max(max_label, y);
      sample.ys.push_back(y);
      for (int d = 0; d < dim; ++d) sample.xs.push_back(std::stod(fields[2 + d]));
    } catch (const std::invalid_argument&) {
      throw IoError("unparsable CSV value in " + path.string());
    } catch (const std::out_of_range&) {
      throw IoError("out-of-range CSV value in " + path.string());
    }
  }
  sample.num_labels = num_labels > 0 ? num_labels : max_label + 1;
  sample.num_labels = std::max(sample.num_labels, 2);
  sample.validate();
  return sample;
}

json joint_to_json(const LabeledJoint& joint) {
  json cells = json::array();
  const bool discrete = joint.variant() == JointVariant::kDiscreteCells;
  for (const Cell& c : joint.cells()) {
    json cell;
    if (discrete)
      cell["region"] = c.atom;
    else
      cell["region"] = {c.lo, c.hi};
    cell["label"] = c.label;
    cell["mass"] = c.mass;
    cells.push_back(std::move(cell));
  }
  return {{"variant", discrete ? "discrete_cells" : "piecewise_uniform_1d"},
          {"K", joint.num_labels()},
          {"cells", std::move(cells)}};
}

LabeledJoint joint_from_json(const json& j) {
  require(j.contains("variant") && j.contains("K") && j.contains("cells"),
          "joint JSON needs variant, K, cells");
  const std::string variant = j.at("variant").get<std::string>();
  const int k = j.at("K").get<int>();
  std::vector<Cell> cells;
  for (const json& cj : j.at("cells")) {
    Cell c;
    c.label = cj.at("label").get<int>();
    c.mass = cj.at("mass").get<double>();
    if (variant == "discrete_cells") {
      c.atom = cj.at("region").get<int>();
    } else {
      const auto region = cj.at("region");
      require(region.is_array() && region.size() == 2,
              "interval region must be [lo, hi]");
      c.lo = region[0].get<double>();
      c.hi = region[1].get<double>();
    }
    cells.push_back(c);
  }
  if (variant == "discrete_cells") return LabeledJoint::discrete(k, std::move(cells));
  require(variant == "piecewise_uniform_1d", "unknown joint variant " + variant);
  return LabeledJoint::piecewise_uniform(k, std::move(cells));
}

void write_joint_json(const fs::path& path, const LabeledJoint& joint) {
  write_json(path, joint_to_json(joint));
}

LabeledJoint read_joint_json(const fs::path& path) {
  return joint_from_json(read_json(path));
}

json checkpoint_to_json(const MlpModel& model) {
  const MlpArchitecture& arch = model.arch();
  std::vector<int> dims = {arch.input_dim};
  dims.insert(dims.end(), arch.hidden.begin(), arch.hidden.end());
  dims.push_back(arch.feature_dim);
  return {{"arch",
           {{"dims", dims},
            {"nonlinearity", "relu"},
            {"K", arch.num_labels},
            {"clamp", arch.clamp}}},
          {"theta_g", model.featurizer_params()},
          {"theta", model.head_params()}};
}

MlpModel checkpoint_from_json(const json& j) {
  require(j.contains("arch") && j.contains("theta") && j.contains("theta_g"),
          "checkpoint JSON needs arch, theta, theta_g");
  const json& aj = j.at("arch");
  const auto dims = aj.at("dims").get<std::vector<int>>();
  require(dims.size() >= 2, "checkpoint dims need input and feature sizes");
  require(aj.at("nonlinearity").get<std::string>() == "relu",
          "unsupported nonlinearity");
  MlpArchitecture arch;
  arch.input_dim = dims.front();
  arch.hidden.assign(dims.begin() + 1, dims.end() - 1);
  arch.feature_dim = dims.back();
  arch.num_labels = aj.at("K").get<int>();
  arch.clamp = aj.at("clamp").get<double>();
  MlpModel model(arch, 0);
  model.set_head_params(j.at("theta").get<std::vector<double>>());
  model.set_featurizer_params(j.at("theta_g").get<std::vector<double>>());
  return model;
}

void write_checkpoint(const fs::path& path, const MlpModel& model) {
  write_json(path, checkpoint_to_json(model));
}

MlpModel read_checkpoint(const fs::path& path) {
  return checkpoint_from_json(read_json(path));
}

namespace {

json witness_to_json(const SupWitness& witness) {
  return {{"value", witness.value},
          {"index", witness.index},
          {"classifier", witness.descriptor}};
}

}  // namespace

json to_json(const TransferReport& report) {
  return {{"t_one_sided_st", report.t_one_sided_st},
          {"t_one_sided_ts", report.t_one_sided_ts},
          {"t_symmetric", report.t_symmetric},
          {"t_realizable", report.t_realizable},
          {"eps_star_s", report.eps_star_s},
          {"eps_star_t", report.eps_star_t},
          {"witness_st", witness_to_json(report.witness_st)},
          {"witness_ts", witness_to_json(report.witness_ts)},
          {"witness_realizable", witness_to_json(report.witness_realizable)},
          {"gamma", report.gamma},
          {"loss", report.loss.describe()}};
}

json to_json(const BoundCertificate& cert) {
  return {{"eps_t_h", cert.eps_t_h},
          {"eps_s_h", cert.eps_s_h},
          {"eps_star_s", cert.eps_star_s},
          {"eps_star_t", cert.eps_star_t},
          {"t_one_sided", cert.t_one_sided},
          {"t_symmetric", cert.t_symmetric},
          {"rhs_one_sided", cert.rhs_one_sided},
          {"rhs_symmetric", cert.rhs_symmetric},
          {"slack_one_sided", cert.slack_one_sided},
          {"slack_symmetric", cert.slack_symmetric},
          {"ok", cert.ok()}};
}

json to_json(const MinimalSet& set) {
  json members = json::array();
  for (std::size_t index : set.members) {
    members.push_back({{"index", index},
                       {"classifier", set.enumeration.describe(index)}});
  }
  return {{"base_spec", set.base_spec},
          {"loss", set.loss.describe()},
          {"delta", set.delta},
          {"eps_star", set.eps_star},
          {"size", set.members.size()},
          {"members", std::move(members)}};
}

namespace {

json metrics_to_json(const std::vector<DomainMetrics>& metrics) {
  json out = json::array();
  for (std::size_t i = 0; i < metrics.size(); ++i)
    out.push_back({{"domain_id", i},
                   {"loss", metrics[i].loss},
                   {"accuracy", metrics[i].accuracy}});
  return out;
}

}  // namespace

json to_json(const AttackResult& result) {
  json trajectory = json::array();
  for (const AttackIterate& it : result.trajectory)
    trajectory.push_back({{"iter", it.iter},
                          {"max_index", it.max_index},
                          {"min_index", it.min_index},
                          {"gap", it.gap},
                          {"domains", metrics_to_json(it.domains)}});
  return {{"best_gap", result.best_gap},
          {"best_max_index", result.best_max_index},
          {"best_min_index", result.best_min_index},
          {"best_theta", result.best_theta},
          {"best_domains", metrics_to_json(result.best_domains)},
          {"reference_loss", result.reference_loss},
          {"reference_accuracy", result.reference_accuracy},
          {"radius", result.radius},
          {"trajectory", std::move(trajectory)}};
}

json to_json(const TrainResult& result) {
  json epochs = json::array();
  for (const EpochRecord& e : result.epochs)
    epochs.push_back({{"epoch", e.epoch},
                      {"mean_loss", e.mean_loss},
                      {"max_loss", e.max_loss},
                      {"min_loss", e.min_loss},
                      {"gap_after_inner", e.gap_after_inner},
                      {"objective", e.objective},
                      {"domain_loss", e.domain_loss},
                      {"domain_accuracy", e.domain_accuracy}});
  return {{"eta", result.eta}, {"epochs", std::move(epochs)}};
}

json to_json(const GuaranteeCertificate& cert) {
  return {{"eta_train", cert.eta_train},
          {"eta_empirical", cert.eta_empirical},
          {"eta_is_empirical_lower_bound", cert.eta_is_empirical_lower_bound},
          {"l_loss", cert.l_loss},
          {"l_theta", cert.l_theta},
          {"radius", cert.radius},
          {"worst_realizable_slack", cert.worst_realizable_slack},
          {"worst_source_slack", cert.worst_source_slack},
          {"worst_target_slack", cert.worst_target_slack},
          {"worst_mixture_primitive_slack", cert.worst_mixture_primitive_slack},
          {"n_checks", cert.n_checks},
          {"ok", cert.ok()}};
}

json to_json(const RademacherEstimate& estimate) {
  return {{"estimate", estimate.estimate},
          {"std_err", estimate.std_err},
          {"n_draws", estimate.n_draws}};
}

json to_json(const BoundSlacks& slacks) {
  return {{"one_sided", slacks.one_sided},
          {"symmetric", slacks.symmetric},
          {"realizable", slacks.realizable}};
}

void write_trajectory_csv(const fs::path& path, const AttackResult& result) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << "iter,domain_id,loss,acc\n";
  for (const AttackIterate& it : result.trajectory)
    for (std::size_t d = 0; d < it.domains.size(); ++d)
      out << it.iter << "," << d << "," << format_double(it.domains[d].loss)
          << "," << format_double(it.domains[d].accuracy) << "\n";
  if (!out) throw IoError("write failed: " + path.string());
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << j.dump(2) << "\n";
  if (!out) throw IoError("write failed: " + path.string());
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open for reading: " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw IoError("bad JSON in " + path.string() + ": " + e.what());
  }
  return j;
}

DirectoryLock::DirectoryLock(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  lock_path_ = dir / ".lock";
  // O_EXCL-style acquisition: fail when another invocation holds the lock.
  std::FILE* f = std::fopen(lock_path_.c_str(), "wx");
  if (f == nullptr)
    throw IoError("output directory is locked by another run: " + dir.string());
  std::fclose(f);
}

DirectoryLock::~DirectoryLock() {
  std::error_code ec;
  fs::remove(lock_path_, ec);
}

}  // namespace transfer::io
