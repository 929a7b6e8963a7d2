#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "fixtures.hpp"
#include "learn/results.hpp"

using namespace learn;
using namespace learn::testing;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::size_t error_lines(const std::string& err) {
  std::size_t n = 0;
  std::istringstream in(err);
  for (std::string line; std::getline(in, line);) n += line.rfind("error: ", 0) == 0 ? 1 : 0;
  return n;
}

const char* kTask = R"({"name": "cli", "problem_type": "image_classification",
  "stages": [{"name": "base", "dataset": "tgt", "seed_budgets": [1, 2, 5, 10], "label_budget": [40, 60]},
             {"name": "adapt", "dataset": "tgt2", "seed_budgets": [1, 2, 5, 10], "label_budget": []}],
  "whitelist": ["src"], "results_file": "res.jsonl"})";

std::string write(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
  return p.string();
}

std::string replaced(std::string text, const std::string& from, const std::string& to) {
  return text.replace(text.find(from), from.size(), to);
}

class Workspace {
 public:
  Workspace() : dir_("cli") {
    const auto r = run({"synth", "--out", data().string(), "--classes", "3", "--dim", "4", "--train", "25",
                        "--test", "5", "--seed", "3", "--domain", "src", "--domain", "tgt:40:1",
                        "--domain", "tgt2:-30/20:0.5"});
    REQUIRE(r.code == 0);
  }
  fs::path data() const { return dir_.path() / "data"; }
  fs::path path(const std::string& name) const { return dir_.path() / name; }

 private:
  ScratchDir dir_;
};

}  // namespace

TEST_CASE("synth writes manifests and is reproducible") {
  ScratchDir dir("cli_synth");
  auto synth = [&](const std::string& out) {
    return run({"synth", "--out", (dir.path() / out).string(), "--classes", "5", "--dim", "16", "--train", "40",
                "--test", "20", "--seed", "9", "--domain", "a", "--domain", "b:0:0"});
  };
  REQUIRE(synth("x").code == 0);
  REQUIRE(synth("y").code == 0);
  std::size_t manifests = 0, csvs = 0;
  for (const auto& e : fs::directory_iterator(dir.path() / "x")) {
    manifests += e.path().extension() == ".json";
    csvs += e.path().extension() == ".csv";
  }
  CHECK(manifests == 2);
  CHECK(csvs == 4);
  CHECK(read_file(dir.path() / "x" / "a_train.csv") == read_file(dir.path() / "y" / "a_train.csv"));
  // A zero-severity second domain has the first domain's features.
  CHECK(read_file(dir.path() / "x" / "a_train.csv") == read_file(dir.path() / "x" / "b_train.csv"));

  const auto bad = run({"synth", "--out", (dir.path() / "z").string(), "--classes", "1", "--domain", "a"});
  CHECK(bad.code == cli::kExitConfig);
  CHECK(bad.err.rfind("error: InvalidSpec: ", 0) == 0);
}

TEST_CASE("validate") {
  Workspace ws;
  const auto task = write(ws.path("task.json"), kTask);
  CHECK(run({"validate", "--task", task}).code == 0);
  const auto ok = run({"validate", "--task", task, "--data", ws.data().string()});
  CHECK(ok.code == 0);
  CHECK(ok.out.rfind("ok: cli", 0) == 0);

  const auto order = run({"validate", "--task", write(ws.path("order.json"), replaced(kTask, "[1, 2, 5, 10]", "[10, 5]"))});
  CHECK(order.code == cli::kExitConfig);
  CHECK(error_lines(order.err) == 1);
  CHECK(order.err.find("SchemaViolation") != std::string::npos);

  const auto missing = run({"validate", "--task", write(ws.path("missing.json"),
                                                         replaced(kTask, ", \"results_file\": \"res.jsonl\"", ""))});
  CHECK(missing.code == cli::kExitConfig);
  CHECK(error_lines(missing.err) == 1);

  const auto det = run({"validate", "--task",
                        write(ws.path("det.json"), replaced(kTask, "image_classification", "object_detection")),
                        "--data", ws.data().string()});
  CHECK(det.code == cli::kExitConfig);
  CHECK(det.err.find("UnsupportedProblemType") != std::string::npos);
  CHECK(det.err.find("problem_type") != std::string::npos);
}

TEST_CASE("run, then report") {
  Workspace ws;
  const auto task = write(ws.path("task.json"), kTask);
  const auto out_dir = ws.path("out").string();
  const auto r = run({"run", "--task", task, "--algorithm", "consistency", "--data", ws.data().string(),
                      "--output-dir", out_dir, "--frozen-clock", "--seed", "4", "--set", "algorithm_params.rounds=2"});
  REQUIRE(r.code == 0);
  const auto results = (fs::path(out_dir) / "res.jsonl").string();
  CHECK(r.out == results + "\n");
  const auto records = read_results_file(results);
  CHECK(records.size() == 10);
  CHECK(records[0].algorithm == "consistency");

  const auto rep = run({"report", "--results", results, "--format", "csv"});
  REQUIRE(rep.code == 0);
  const auto csv = read_file(results + ".csv");
  CHECK(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')) == records.size() + 1);
  CHECK(csv.find("consistency,0:base,10-shot,") != std::string::npos);
  CHECK(csv.find("0:base,0.53N") != std::string::npos);
  REQUIRE(run({"report", "--results", results, "--format", "svg", "--out", ws.path("p.svg").string()}).code == 0);
  CHECK(read_file(ws.path("p.svg")).rfind("<svg", 0) == 0);
}

TEST_CASE("failure paths print one error line and map to exit codes") {
  Workspace ws;
  const auto task = write(ws.path("task.json"), kTask);

  const auto alg = run({"run", "--task", task, "--algorithm", "svm", "--data", ws.data().string()});
  CHECK(alg.code == cli::kExitConfig);
  CHECK(error_lines(alg.err) == 1);
  CHECK(alg.err.find("centroid") != std::string::npos);
  CHECK(alg.err.find("mme") != std::string::npos);

  const auto key = run({"run", "--task", task, "--algorithm", "mme", "--data", ws.data().string(), "--set", "nope=1"});
  CHECK(key.code == cli::kExitConfig);
  CHECK(key.err.rfind("error: UnknownKey: ", 0) == 0);

  const auto data = run({"run", "--task", task, "--algorithm", "mme", "--data", ws.path("absent").string()});
  CHECK(data.code == cli::kExitData);
  CHECK(error_lines(data.err) == 1);

  const auto usage = run({"run", "--task", task});
  CHECK(usage.code == cli::kExitConfig);
  CHECK(usage.err.rfind("error: UsageError: ", 0) == 0);

  const auto no_results = run({"report", "--results", ws.path("none.jsonl").string()});
  CHECK(no_results.code == cli::kExitData);
  CHECK(no_results.err.rfind("error: MissingFile: ", 0) == 0);

  write(ws.path("bad.jsonl"), "{\"schema_version\": 9}\n");
  const auto schema = run({"report", "--results", ws.path("bad.jsonl").string()});
  CHECK(schema.code == cli::kExitData);
  CHECK(schema.err.rfind("error: SchemaMismatch: ", 0) == 0);

  const auto unknown = run({"frobnicate"});
  CHECK(unknown.code == cli::kExitConfig);
  CHECK(error_lines(unknown.err) == 1);
}

TEST_CASE("select-source ranks candidates") {
  Workspace ws;
  const auto r = run({"select-source", "--target", "tgt", "--data", ws.data().string(), "--whitelist", "src,tgt2"});
  REQUIRE(r.code == 0);
  CHECK(r.out.rfind("name,score\n", 0) == 0);
  CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 3);
}
