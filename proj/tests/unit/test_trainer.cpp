#include <gtest/gtest.h>

#include <cmath>

#include "prcut/error.hpp"
#include "prcut/metrics.hpp"
#include "prcut/trainer.hpp"

using namespace prcut;

namespace {

Dataset two_blobs(std::size_t n, std::uint64_t seed) {
  SyntheticSpec spec;
  spec.n = n;
  spec.classes = 2;
  spec.dim = 2;
  spec.separation = 10.0;
  spec.noise = 0.5;
  spec.seed = seed;
  return make_synthetic(spec);
}

TrainConfig label_config() {
  TrainConfig cfg;
  cfg.k = 2;
  cfg.batch_size = 32;
  cfg.steps = 500;
  cfg.kernel.kind = KernelKind::label_equality;
  cfg.optimizer.kind = OptimizerKind::adam;
  cfg.optimizer.lr = 1e-2;
  cfg.seed = 7;
  return cfg;
}

}  // namespace

TEST(TrainConfig, Validation) {
  TrainConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  auto bad = [&](auto mutate) {
    TrainConfig c;
    mutate(c);
    EXPECT_THROW(c.validate(), ValidationError);
  };
  bad([](TrainConfig& c) { c.batch_size = 1; });
  bad([](TrainConfig& c) { c.k = 1; });
  bad([](TrainConfig& c) { c.beta = 0.0; });
  bad([](TrainConfig& c) { c.beta = 1.5; });
  bad([](TrainConfig& c) { c.gamma = -1.0; });
  bad([](TrainConfig& c) { c.steps = 0; });
  bad([](TrainConfig& c) { c.optimizer.lr = -1.0; });
  bad([](TrainConfig& c) { c.kernel.k_neighbors = 0; });
}

TEST(Train, SeparatesDisconnectedComponents) {
  const auto data = two_blobs(200, 1);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto cfg = label_config();
    cfg.seed = seed;
    const auto result = train(data, cfg);
    EXPECT_EQ(result.status, TrainStatus::completed);
    EXPECT_EQ(result.history.records.size(), 500u);
    const auto pred = predict(result.model, data.features);
    EXPECT_DOUBLE_EQ(unsupervised_accuracy(*data.labels, pred.partition.labels, 2), 1.0)
        << "seed " << seed;
    EXPECT_LT(result.history.records.back().lrc, result.history.records.front().lrc);
  }
}

TEST(Train, KnnKernelWithPrecomputedGraph) {
  const auto data = two_blobs(200, 2);
  auto cfg = label_config();
  cfg.kernel.kind = KernelKind::knn_adjacency;
  cfg.kernel.k_neighbors = 10;
  const auto graph = knn_graph(data.features, 10);
  TrainOptions options;
  options.graph = &graph;
  const auto a = train(data, cfg, options);
  const auto b = train(data, cfg);
  EXPECT_EQ(a.history.to_jsonl(), b.history.to_jsonl());
  const auto pred = predict(a.model, data.features);
  EXPECT_DOUBLE_EQ(unsupervised_accuracy(*data.labels, pred.partition.labels, 2), 1.0);
}

TEST(Train, DeterministicPerSeed) {
  const auto data = two_blobs(120, 3);
  auto cfg = label_config();
  cfg.steps = 50;
  cfg.hidden = {8};
  const auto a = train(data, cfg);
  const auto b = train(data, cfg);
  EXPECT_EQ(a.history.to_jsonl(), b.history.to_jsonl());
  cfg.seed = 8;
  EXPECT_NE(train(data, cfg).history.to_jsonl(), a.history.to_jsonl());
}

TEST(Train, ReportsCollapse) {
  const auto data = two_blobs(100, 4);
  auto cfg = label_config();
  cfg.gamma = 0.0;
  cfg.beta = 1.0;
  cfg.weight_norm = false;
  MlpModel model = init_mlp(cfg.model_spec(2), 0);
  model.params.layers[0].weight.setZero();
  model.params.layers[0].bias << 30.0, 0.0;
  TrainOptions options;
  options.initial_model = model;
  const auto result = train(data, cfg, options);
  EXPECT_EQ(result.status, TrainStatus::collapsed);
  EXPECT_LT(result.history.records.size(), 500u);
  EXPECT_FALSE(result.message.empty());
}

TEST(Train, RejectsMismatchedInputs) {
  auto data = two_blobs(100, 5);
  auto cfg = label_config();
  cfg.batch_size = 101;
  EXPECT_THROW(train(data, cfg), ValidationError);
  cfg = label_config();
  data.labels.reset();
  EXPECT_THROW(train(data, cfg), ValidationError);
}

TEST(Train, HistoryJsonl) {
  const auto data = two_blobs(80, 6);
  auto cfg = label_config();
  cfg.steps = 3;
  const auto result = train(data, cfg);
  const std::string text = result.history.to_jsonl();
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 3);
  EXPECT_NE(text.find("\"step\":1"), std::string::npos);
  EXPECT_EQ(result.history.final_pbar.size(), 2u);
  double total = 0.0;
  for (double v : result.history.final_pbar) total += v;
  EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST(Predict, ArgmaxTiesToSmallestIndex) {
  Matrix p(3, 3);
  p << 0.2, 0.4, 0.4, 0.5, 0.25, 0.25, 1.0 / 3, 1.0 / 3, 1.0 / 3;
  const auto part = argmax_partition(p);
  EXPECT_EQ(part.labels, (std::vector<int>{1, 0, 0}));
  EXPECT_EQ(part.k, 3);
}

TEST(Predict, UsesModelOutput) {
  MlpModel model = init_mlp(MlpSpec::linear(1, 2, false), 0);
  model.params.layers[0].weight << 1.0, -1.0;
  model.params.layers[0].bias.setZero();
  Matrix x(2, 1);
  x << 2.0, -3.0;
  const auto pred = predict(model, x);
  EXPECT_EQ(pred.partition.labels, (std::vector<int>{0, 1}));
  EXPECT_NEAR(pred.assignments.matrix()(0, 0), 1.0 / (1.0 + std::exp(-4.0)), 1e-15);
}

TEST(Train, EarlyStopAfterTwoFlatWindows) {
  const auto data = two_blobs(100, 7);
  auto cfg = label_config();
  cfg.early_stop = true;
  cfg.early_stop_window = 20;
  cfg.early_stop_tolerance = 1e9;
  const auto result = train(data, cfg);
  EXPECT_EQ(result.status, TrainStatus::early_stopped);
  EXPECT_EQ(result.history.records.size(), 40u);
  cfg.early_stop_tolerance = 0.0;
  EXPECT_EQ(train(data, cfg).status, TrainStatus::completed);
}
