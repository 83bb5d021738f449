// Drives the installed CLI binary end to end: file outputs, byte-identical
// reruns, exit codes, and schema round trips.
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string g_binary;
int g_failures = 0;

void expect(bool ok, const std::string& what) {
  if (ok) {
    std::printf("[ ok ] %s\n", what.c_str());
  } else {
    std::printf("[FAIL] %s\n", what.c_str());
    ++g_failures;
  }
}

int run(const std::string& args) {
  const std::string cmd = g_binary + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: cli_tests <transfer-binary>\n";
    return 2;
  }
  g_binary = argv[1];
  const fs::path dir = fs::temp_directory_path() / "transfer_cli_tests";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string d = dir.string();

  // --- gen: rotated suite, determinism across reruns ---------------------
  write_file(dir / "gen.json", R"({
    "schema_version": 1, "seed": 5, "out": ")" + d + R"(/suite",
    "gen": {"kind": "rotated_gaussians", "angles_deg": [0, 20, 40], "n_per": 40}
  })");
  expect(run("gen --config " + d + "/gen.json") == 0, "gen rotated suite");
  expect(fs::exists(dir / "suite/domain_0.csv") &&
             fs::exists(dir / "suite/domain_2.csv") &&
             fs::exists(dir / "suite/manifest.json"),
         "gen wrote CSVs and manifest");
  const std::string first = slurp(dir / "suite/domain_1.csv");
  fs::remove_all(dir / "suite");
  expect(run("gen --config " + d + "/gen.json") == 0, "gen rerun");
  expect(slurp(dir / "suite/domain_1.csv") == first,
         "rerun outputs are byte-identical");

  // --- gen: analytic pair -------------------------------------------------
  write_file(dir / "gen1.json", R"({
    "schema_version": 1, "out": ")" + d + R"(/ex1",
    "gen": {"kind": "example1", "intensity": 0.1}
  })");
  expect(run("gen --config " + d + "/gen1.json") == 0, "gen example1");
  expect(fs::exists(dir / "ex1/source.json") && fs::exists(dir / "ex1/target.json"),
         "gen wrote the analytic pair");

  // --- measure: paper value and report schema ----------------------------
  write_file(dir / "measure.json", R"({
    "schema_version": 1, "out": ")" + d + R"(/measure",
    "measure": {"source": ")" + d + R"(/ex1/source.json",
                "target": ")" + d + R"(/ex1/target.json",
                "gamma": {"example1_delta": 0.008}}
  })");
  expect(run("measure --config " + d + "/measure.json") == 0, "measure example1");
  {
    const json report = json::parse(slurp(dir / "measure/measure_report.json"));
    expect(std::abs(report.at("measures").at("t_symmetric").get<double>() - 0.008) < 1e-9,
           "measure reports the symmetric value 0.008");
    expect(report.at("measures").contains("witness_realizable") &&
               report.contains("tv_unnormalized") && report.contains("tv_half"),
           "measure report carries witnesses and both TV conventions");
  }

  // --- measure on identical CSVs: all measures vanish --------------------
  {
    std::ofstream csv(dir / "flat.csv");
    csv << "domain_id,y,x1\n";
    for (int i = 0; i < 50; ++i)
      csv << "3," << i % 2 << "," << (i % 2 ? 0.4 + 0.01 * i : -0.4 - 0.01 * i)
          << "\n";
  }
  write_file(dir / "measure_csv.json", R"({
    "schema_version": 1, "out": ")" + d + R"(/measure_csv",
    "measure": {"source_csv": ")" + d + R"(/flat.csv",
                "target_csv": ")" + d + R"(/flat.csv"}
  })");
  expect(run("measure --config " + d + "/measure_csv.json") == 0,
         "measure identical CSVs");
  {
    const json report = json::parse(slurp(dir / "measure_csv/measure_report.json"));
    expect(report.at("measures").at("t_realizable").get<double>() == 0.0 &&
               report.at("label_shift_tv").get<double>() == 0.0,
           "identical domains have zero measures");
  }

  // --- train: ERM and determinism -----------------------------------------
  write_file(dir / "train.json", R"({
    "schema_version": 1, "seed": 9, "out": ")" + d + R"(/erm",
    "train": {"algo": "erm", "manifest": ")" + d + R"(/suite/manifest.json",
              "arch": {"hidden": [8], "feature_dim": 4},
              "optimizer": {"kind": "adam", "lr": 0.02, "steps": 12}}
  })");
  expect(run("train --config " + d + "/train.json") == 0, "train erm");
  const std::string checkpoint = slurp(dir / "erm/checkpoint.json");
  fs::remove_all(dir / "erm");
  expect(run("train --config " + d + "/train.json") == 0, "train erm rerun");
  expect(slurp(dir / "erm/checkpoint.json") == checkpoint,
         "checkpoints are byte-identical across reruns");

  // --- train: transfer dispatch via --algo --------------------------------
  write_file(dir / "train_t.json", R"({
    "schema_version": 1, "seed": 9, "out": ")" + d + R"(/trf",
    "train": {"algo": "erm", "manifest": ")" + d + R"(/suite/manifest.json",
              "arch": {"hidden": [8], "feature_dim": 4},
              "transfer": {"radius": 2.0, "inner_steps": 4, "epochs": 6}}
  })");
  expect(run("train --config " + d + "/train_t.json --algo transfer") == 0,
         "train transfer via --algo override");
  {
    const json result = json::parse(slurp(dir / "trf/train_result.json"));
    expect(result.at("algo") == "transfer" && result.at("epochs").size() == 6,
           "transfer result carries the gap trajectory");
  }

  // --- attack: delta sweep, static delta=0, trajectories ------------------
  write_file(dir / "attack.json", R"({
    "schema_version": 1, "seed": 9, "out": ")" + d + R"(/atk",
    "attack": {"checkpoint": ")" + d + R"(/erm/checkpoint.json",
               "manifest": ")" + d + R"(/suite/manifest.json",
               "deltas": [0, 0.5], "iterations": 8,
               "ascent": {"kind": "adam", "lr": 0.02}}
  })");
  expect(run("attack --config " + d + "/attack.json") == 0, "attack sweep");
  expect(fs::exists(dir / "atk/attack_0.json") &&
             fs::exists(dir / "atk/attack_0p5.json") &&
             fs::exists(dir / "atk/attack_0p5_trajectory.csv"),
         "attack wrote results and trajectories per delta");
  {
    const json zero = json::parse(slurp(dir / "atk/attack_0.json"));
    double max_ref = -1e300, min_ref = 1e300;
    for (const json& value : zero.at("reference_loss")) {
      max_ref = std::max(max_ref, value.get<double>());
      min_ref = std::min(min_ref, value.get<double>());
    }
    expect(std::abs(zero.at("best_gap").get<double>() - (max_ref - min_ref)) < 1e-12,
           "delta=0 reproduces the static gap");
  }

  // --- report --------------------------------------------------------------
  write_file(dir / "report.json", R"({
    "schema_version": 1, "out": ")" + d + R"(/rep",
    "report": {"attacks": [{"name": "erm",
                            "files": [")" + d + R"(/atk/attack_0.json",
                                      ")" + d + R"(/atk/attack_0p5.json"]}],
               "measure_reports": [")" + d + R"(/measure/measure_report.json"]}
  })");
  expect(run("report --config " + d + "/report.json") == 0, "report");
  expect(fs::exists(dir / "rep/accuracy_vs_delta.csv") &&
             fs::exists(dir / "rep/summary.json"),
         "report wrote merged CSV and summary");
  {
    const json summary = json::parse(slurp(dir / "rep/summary.json"));
    expect(!summary.at("inequality_slacks").empty(),
           "summary carries the inequality slack table");
  }

  // --- bound ----------------------------------------------------------------
  write_file(dir / "bound.json", R"({
    "schema_version": 1, "seed": 3, "out": ")" + d + R"(/bnd",
    "bound": {"m": 1000, "k": 1000, "confidence": 0.05, "d_vc": 1,
              "r_m": 0.05, "r_k": 0.05}
  })");
  expect(run("bound --config " + d + "/bound.json") == 0, "bound");
  {
    const json bound = json::parse(slurp(dir / "bnd/bound.json"));
    expect(std::abs(bound.at("rademacher_slack").at("one_sided").get<double>() -
                    0.5872330448328795) < 1e-12,
           "bound reports the assembled slack");
  }

  // --- flag overrides --------------------------------------------------------
  expect(run("attack --config " + d + "/attack.json --out " + d +
             "/atk2 --delta 0.25") == 0,
         "attack with --out and --delta overrides");
  expect(fs::exists(dir / "atk2/attack_0p25.json") &&
             !fs::exists(dir / "atk2/attack_0.json"),
         "--delta override replaces the config sweep");
  expect(run("gen --config " + d + "/gen.json --seed 6 --out " + d + "/suite6") == 0,
         "gen with --seed override");
  expect(slurp(dir / "suite6/domain_1.csv") != slurp(dir / "suite/domain_1.csv"),
         "--seed override changes the draws");

  // --- error paths and exit codes -------------------------------------------
  write_file(dir / "bad_key.json", R"({
    "schema_version": 1, "out": ")" + d + R"(/x1",
    "gen": {"kind": "example1", "intensityy": 0.1}
  })");
  expect(run("gen --config " + d + "/bad_key.json") == 1,
         "unknown config key exits with 1");

  write_file(dir / "bad_seed.json", R"({
    "schema_version": 1, "out": ")" + d + R"(/x2",
    "gen": {"kind": "rotated_gaussians", "angles_deg": [0], "n_per": 5}
  })");
  expect(run("gen --config " + d + "/bad_seed.json") == 1,
         "missing mandatory seed exits with 1");

  write_file(dir / "bad_ckpt.json", R"({
    "schema_version": 1, "seed": 1, "out": ")" + d + R"(/x3",
    "attack": {"checkpoint": ")" + d + R"(/nope.json",
               "manifest": ")" + d + R"(/suite/manifest.json", "deltas": [0]}
  })");
  expect(run("attack --config " + d + "/bad_ckpt.json") == 2,
         "missing checkpoint exits with 2");

  write_file(dir / "empty_report.json", R"({
    "schema_version": 1, "out": ")" + d + R"(/x4",
    "report": {"attacks": []}
  })");
  expect(run("report --config " + d + "/empty_report.json") == 1,
         "empty report input exits with 1");

  expect(run("measure --config " + d + "/does_not_exist.json") == 2,
         "missing config exits with 2");

  write_file(dir / "garbled.csv", "domain_id,y,x1\n0,zero,0.1\n");
  write_file(dir / "measure_garbled.json", R"({
    "schema_version": 1, "out": ")" + d + R"(/x5",
    "measure": {"source_csv": ")" + d + R"(/garbled.csv",
                "target_csv": ")" + d + R"(/garbled.csv"}
  })");
  expect(run("measure --config " + d + "/measure_garbled.json") == 2,
         "unparsable CSV exits with 2");

  // Round trip: every JSON the CLI writes is re-readable (parsed above) and
  // the checkpoint loads back through the attack path (exercised already).
  fs::remove_all(dir);
  if (g_failures == 0) {
    std::printf("cli_tests: all checks passed\n");
    return 0;
  }
  std::printf("cli_tests: %d failures\n", g_failures);
  return 1;
}
