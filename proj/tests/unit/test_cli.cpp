#include <gtest/gtest.h>

#include <initializer_list>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "support/temp_dir.hpp"

using testing_support::read_bytes;
using testing_support::TempDir;
using testing_support::write_bytes;

namespace {

int run(std::initializer_list<std::string> args) {
  std::vector<std::string> storage{"prcut"};
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : storage) argv.push_back(s.data());
  argv.push_back(nullptr);
  return prcut::cli_main(static_cast<int>(storage.size()), argv.data());
}

}  // namespace

TEST(Cli, UsageErrorsExitOne) {
  EXPECT_EQ(run({}), 1);
  EXPECT_EQ(run({"cluster"}), 1);
  EXPECT_EQ(run({"spectral", "--k"}), 1);
  EXPECT_EQ(run({"--help"}), 0);
}

TEST(Cli, MissingConfigExitsOne) {
  TempDir dir("cli-missing");
  EXPECT_EQ(run({"train", "--config", dir.file("missing.json"), "--output", dir.file("out")}), 1);
}

TEST(Cli, InvalidConfigExitsOne) {
  TempDir dir("cli-invalid");
  write_bytes(dir.file("c.json"), R"({"train": {"unknown_key": 1}})");
  EXPECT_EQ(run({"train", "--config", dir.file("c.json"), "--output", dir.file("out")}), 1);
  write_bytes(dir.file("bad.json"), "{not json");
  EXPECT_EQ(run({"train", "--config", dir.file("bad.json"), "--output", dir.file("out")}), 1);
}

TEST(Cli, SynthIsByteReproducible) {
  TempDir dir("cli-synth");
  ASSERT_EQ(run({"synth", "--kind", "two-moons", "--n", "300", "--noise", "0.1", "--seed", "4",
                 "-o", dir.file("a.csv")}),
            0);
  ASSERT_EQ(run({"synth", "--kind", "two-moons", "--n", "300", "--noise", "0.1", "--seed", "4",
                 "-o", dir.file("b.csv")}),
            0);
  const std::string a = read_bytes(dir.file("a.csv"));
  EXPECT_FALSE(a.empty());
  EXPECT_EQ(a, read_bytes(dir.file("b.csv")));
  EXPECT_EQ(run({"synth", "--kind", "spirals", "-o", dir.file("c.csv")}), 1);
}

TEST(Cli, BaselinesGraphAndMetricsPipeline) {
  TempDir dir("cli-pipe");
  ASSERT_EQ(run({"synth", "--kind", "blobs", "--n", "150", "--classes", "3", "--seed", "1",
                 "-o", dir.file("d.csv")}),
            0);
  ASSERT_EQ(run({"knn-graph", "-i", dir.file("d.csv"), "--knn-k", "8", "-o", dir.file("g.txt")}),
            0);
  ASSERT_EQ(run({"spectral", "--graph", dir.file("g.txt"), "--k", "3", "-o",
                 dir.file("s.csv")}),
            0);
  ASSERT_EQ(run({"kmeans", "-i", dir.file("d.csv"), "--k", "3", "-o", dir.file("km.csv")}), 0);
  ASSERT_EQ(run({"metrics", "--data", dir.file("d.csv"), "--pred", dir.file("s.csv"), "--graph",
                 dir.file("g.txt"), "-o", dir.file("m.json")}),
            0);
  const auto m = nlohmann::json::parse(read_bytes(dir.file("m.json")));
  EXPECT_GE(m["acc"].get<double>(), 0.99);
  EXPECT_FALSE(m["rcut"].is_null());
}

TEST(Cli, TrainAndPredict) {
  TempDir dir("cli-train");
  write_bytes(dir.file("c.json"), R"({
    "data": {"source": "synthetic", "synthetic": {"kind": "blobs", "n": 200, "classes": 2,
             "separation": 10, "noise": 0.5, "seed": 3}},
    "train": {"k": 2, "batch_size": 32, "steps": 300,
              "kernel": {"kind": "label"},
              "optimizer": {"kind": "adam", "lr": 0.01}}
  })");
  ASSERT_EQ(run({"train", "--config", dir.file("c.json"), "--output", dir.file("run")}), 0);
  for (const char* f : {"resolved_config.json", "history.jsonl", "model.ckpt", "assignments.csv",
                        "metrics.json", "status.json", "timing.json"}) {
    EXPECT_FALSE(read_bytes(dir.file(std::string("run/") + f)).empty()) << f;
  }
  const auto m = nlohmann::json::parse(read_bytes(dir.file("run/metrics.json")));
  EXPECT_DOUBLE_EQ(m["acc"].get<double>(), 1.0);

  ASSERT_EQ(run({"synth", "--kind", "blobs", "--n", "200", "--classes", "2", "--noise", "0.5",
                 "--seed", "3", "-o", dir.file("d.csv")}),
            0);
  ASSERT_EQ(run({"predict", "--model", dir.file("run/model.ckpt"), "-i", dir.file("d.csv"), "-o",
                 dir.file("p.csv")}),
            0);
  EXPECT_EQ(read_bytes(dir.file("p.csv")), read_bytes(dir.file("run/assignments.csv")));
}

TEST(Cli, VerifyPasses) {
  EXPECT_EQ(run({"verify"}), 0);
}
