// Black-box checks of the installed CLI; the binary path arrives in
// FFATTN_CLI (set by ctest).
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;

namespace {

std::string cli_path() {
  const char* p = std::getenv("FFATTN_CLI");
  REQUIRE_MESSAGE(p != nullptr, "FFATTN_CLI must point at the CLI binary");
  return p;
}

int run(const std::string& args) {
  const std::string cmd = cli_path() + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  REQUIRE_MESSAGE(in.good(), "missing file: ", path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  return dir;
}

const std::string kTinyTrain =
    " --t0 6 --dim 8 --batch 8 --updates-per-epoch 5 --epochs 2 --test-size 20"
    " --lr 0.003 --seed 3 --workers 1";

}  // namespace

TEST_CASE("train writes the artifact trio") {
  const auto dir = fresh_dir("ffattn_cli_train");
  REQUIRE(run("train --task addition" + kTinyTrain + " --out " + dir.string()) == 0);

  const auto csv = slurp(dir / "epochs.csv");
  const auto lines = split(csv, '\n');
  REQUIRE(lines.size() >= 2);
  CHECK(lines[0] ==
        "epoch,task,pooling,length_spec,lr,seed,train_loss,test_accuracy,wall_seconds");
  const auto fields = split(lines[1], ',');
  REQUIRE(fields.size() == 9);
  CHECK(fields[0] == "1");
  CHECK(fields[1] == "addition");
  CHECK(fields[2] == "attention");
  CHECK(fields[3] == "fixed:6");
  CHECK(fields[4] == "0.003");
  CHECK(fields[5] == "3");

  const auto result = nlohmann::json::parse(slurp(dir / "result.json"));
  CHECK(result["config"]["dim"] == 8);
  CHECK(result["epochs"].size() == lines.size() - 1);  // minus the header

  const auto ckpt = nlohmann::json::parse(slurp(dir / "checkpoint.json"));
  CHECK(ckpt["D"] == 8);
  CHECK(ckpt.contains("W_xh"));
  CHECK(ckpt.contains("adam"));
  fs::remove_all(dir);
}

TEST_CASE("identical flags give identical numeric columns") {
  const auto dir_a = fresh_dir("ffattn_cli_det_a");
  const auto dir_b = fresh_dir("ffattn_cli_det_b");
  const std::string flags = "train --task multiplication" + kTinyTrain;
  REQUIRE(run(flags + " --out " + dir_a.string()) == 0);
  REQUIRE(run(flags + " --out " + dir_b.string()) == 0);
  const auto rows_a = split(slurp(dir_a / "epochs.csv"), '\n');
  const auto rows_b = split(slurp(dir_b / "epochs.csv"), '\n');
  REQUIRE(rows_a.size() == rows_b.size());
  for (std::size_t i = 0; i < rows_a.size(); ++i) {
    auto fa = split(rows_a[i], ',');
    auto fb = split(rows_b[i], ',');
    REQUIRE(fa.size() == fb.size());
    for (std::size_t j = 0; j + 1 < fa.size(); ++j) {  // last column is wall time
      CHECK(fa[j] == fb[j]);
    }
  }
  fs::remove_all(dir_a);
  fs::remove_all(dir_b);
}

TEST_CASE("epochs 0 leaves an empty body and a null solve") {
  const auto dir = fresh_dir("ffattn_cli_zero");
  REQUIRE(run("train --task addition --t0 6 --dim 8 --batch 4 --updates-per-epoch 2"
              " --epochs 0 --test-size 5 --workers 1 --out " +
              dir.string()) == 0);
  const auto lines = split(slurp(dir / "epochs.csv"), '\n');
  REQUIRE(lines.size() == 1);  // header only
  const auto result = nlohmann::json::parse(slurp(dir / "result.json"));
  CHECK(result["solved_at_epoch"].is_null());
  fs::remove_all(dir);
}

TEST_CASE("the --max-epochs alias works") {
  const auto dir = fresh_dir("ffattn_cli_alias");
  REQUIRE(run("train --task addition --t0 6 --dim 8 --batch 4 --updates-per-epoch 2"
              " --max-epochs 0 --test-size 5 --workers 1 --out " +
              dir.string()) == 0);
  CHECK(split(slurp(dir / "epochs.csv"), '\n').size() == 1);
  fs::remove_all(dir);
}

TEST_CASE("usage errors exit 1") {
  CHECK(run("train --task bogus --out /tmp/ffattn_cli_bogus") == 1);
  CHECK(run("definitely-not-a-command") == 1);
  CHECK(run("sweep --lr-grid") == 1);
}

TEST_CASE("gradcheck exits 0 on pass") {
  CHECK(run("gradcheck --configs 4 --seed 5") == 0);
}

TEST_CASE("dump writes line-delimited records") {
  const auto dir = fresh_dir("ffattn_cli_dump");
  REQUIRE(run("dump --task multiplication --t0 8 --count 7 --seed 2 --out " + dir.string()) == 0);
  const auto lines = split(slurp(dir / "dataset.jsonl"), '\n');
  REQUIRE(lines.size() == 7);
  for (const auto& line : lines) {
    CHECK(nlohmann::json::parse(line)["kind"] == "multiplication");
  }
  fs::remove_all(dir);
}

TEST_CASE("bench writes bench.json") {
  const auto dir = fresh_dir("ffattn_cli_bench");
  REQUIRE(run("bench --t0 16 --batch 4 --dim 8 --worker-counts 1,2 --reps 1 --out " +
              dir.string()) == 0);
  const auto doc = nlohmann::json::parse(slurp(dir / "bench.json"));
  REQUIRE(doc["entries"].size() == 2);
  CHECK(doc["entries"][0]["workers"] == 1);
  CHECK(doc["entries"][0]["speedup"] == 1.0);
  CHECK(doc["entries"][1]["max_output_delta"] == 0.0);
  fs::remove_all(dir);
}

TEST_CASE("table1 covers the task x length x pooling grid") {
  const auto dir = fresh_dir("ffattn_cli_table1");
  REQUIRE(run("table1 --t0-list 6 --lr-grid 0.003 --dim 8 --batch 6 --updates-per-epoch 4"
              " --epochs 1 --test-size 10 --seed 2 --workers 1 --out " +
              dir.string()) == 0);
  const auto lines = split(slurp(dir / "table1.csv"), '\n');
  REQUIRE(lines.size() == 5);  // header + 2 tasks x 1 T0 x 2 poolings
  CHECK(lines[0] == "task,t0,pooling,seed,best_lr,solved_epoch,final_accuracy");
  int attention_rows = 0, mean_rows = 0;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto fields = split(lines[i], ',');
    REQUIRE(fields.size() == 7);
    CHECK(fields[1] == "6");
    if (fields[2] == "attention") ++attention_rows;
    if (fields[2] == "mean") ++mean_rows;
  }
  CHECK(attention_rows == 2);
  CHECK(mean_rows == 2);
  CHECK(fs::exists(dir / "table1.json"));
  CHECK(fs::exists(dir / "epochs.csv"));
  fs::remove_all(dir);
}

TEST_CASE("varlen runs both pooling modes on request") {
  const auto dir = fresh_dir("ffattn_cli_varlen");
  REQUIRE(run("varlen --task addition --len-lo 4 --len-hi 8 --pooling both --dim 8 --batch 6"
              " --updates-per-epoch 4 --epochs 1 --test-size 10 --lr 0.003 --seed 2"
              " --workers 1 --out " +
              dir.string()) == 0);
  const auto doc = nlohmann::json::parse(slurp(dir / "varlen.json"));
  REQUIRE(doc.contains("attention"));
  REQUIRE(doc.contains("mean"));
  CHECK(doc["attention"]["length_spec"] == "range:4-8");
  CHECK(fs::exists(dir / "attention" / "epochs.csv"));
  CHECK(fs::exists(dir / "mean" / "checkpoint.json"));
  fs::remove_all(dir);
}

TEST_CASE("sweep picks a best run and writes artifacts") {
  const auto dir = fresh_dir("ffattn_cli_sweep");
  REQUIRE(run("sweep --task addition --lr-grid 0.003,0.001 --t0 6 --dim 8 --batch 8"
              " --updates-per-epoch 5 --epochs 2 --test-size 20 --seed 3 --workers 1 --out " +
              dir.string()) == 0);
  const auto sweep = nlohmann::json::parse(slurp(dir / "sweep.json"));
  CHECK(sweep["grid"].size() == 2);
  CHECK(sweep["runs"].size() == 2);
  CHECK(sweep.contains("best_lr"));
  CHECK(fs::exists(dir / "epochs.csv"));
  CHECK(fs::exists(dir / "result.json"));
  CHECK(fs::exists(dir / "checkpoint.json"));
  fs::remove_all(dir);
}
