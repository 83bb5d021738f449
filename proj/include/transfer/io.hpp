#pragma once

#include <filesystem>
#include <json.hpp>

#include "transfer/bounds.hpp"
#include "transfer/dgalgo.hpp"
#include "transfer/measures.hpp"

namespace transfer::io {

// 17 significant digits: enough to round-trip any double bit-exactly.
std::string format_double(double value);

// SampleSet CSV: header `domain_id,y,x1,...,xd`, one row per point.
void write_sample_csv(const std::filesystem::path& path, const SampleSet& sample);
// num_labels <= 0 infers the label count as max(y) + 1.
SampleSet read_sample_csv(const std::filesystem::path& path, int num_labels = 0);

// LabeledJoint JSON: {variant, K, cells:[{region, label, mass}]}.
nlohmann::json joint_to_json(const LabeledJoint& joint);
LabeledJoint joint_from_json(const nlohmann::json& j);
void write_joint_json(const std::filesystem::path& path, const LabeledJoint& joint);
LabeledJoint read_joint_json(const std::filesystem::path& path);

// Checkpoint JSON: {arch:{dims, nonlinearity, K, clamp}, theta_g, theta}.
nlohmann::json checkpoint_to_json(const MlpModel& model);
MlpModel checkpoint_from_json(const nlohmann::json& j);
void write_checkpoint(const std::filesystem::path& path, const MlpModel& model);
MlpModel read_checkpoint(const std::filesystem::path& path);

// Report serializations.
nlohmann::json to_json(const TransferReport& report);
nlohmann::json to_json(const BoundCertificate& cert);
nlohmann::json to_json(const MinimalSet& set);
nlohmann::json to_json(const AttackResult& result);
nlohmann::json to_json(const TrainResult& result);
nlohmann::json to_json(const GuaranteeCertificate& cert);
nlohmann::json to_json(const RademacherEstimate& estimate);
nlohmann::json to_json(const BoundSlacks& slacks);

// Per-iteration trajectories as CSV rows `iter,domain_id,loss,acc`.
void write_trajectory_csv(const std::filesystem::path& path,
                          const AttackResult& result);

void write_json(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& path);

// Advisory lock on an output directory; released on destruction.
class DirectoryLock {
 public:
  explicit DirectoryLock(const std::filesystem::path& dir);
  ~DirectoryLock();
  DirectoryLock(const DirectoryLock&) = delete;
  DirectoryLock& operator=(const DirectoryLock&) = delete;

 private:
  std::filesystem::path lock_path_;
};

}  // namespace transfer::io
