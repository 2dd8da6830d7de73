#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "prcut/checkpoint.hpp"
#include "prcut/error.hpp"
#include "prcut/neural_model.hpp"
#include "prcut/optimizer.hpp"
#include "support/oracles.hpp"

using namespace prcut;

namespace {

Matrix random_matrix(std::mt19937_64& gen, int r, int c) {
  std::normal_distribution<double> z(0.0, 1.0);
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = z(gen);
  return m;
}

bool same_parameters(const MlpParameters& a, const MlpParameters& b) {
  const auto ba = a.blocks();
  const auto bb = b.blocks();
  if (ba.size() != bb.size()) return false;
  for (std::size_t i = 0; i < ba.size(); ++i) {
    if (!std::equal(ba[i].begin(), ba[i].end(), bb[i].begin(), bb[i].end())) return false;
  }
  return true;
}

}  // namespace

TEST(MlpSpec, FactoriesAndValidation) {
  const auto lin = MlpSpec::linear(5, 3);
  EXPECT_EQ(lin.layer_widths, (std::vector<int>{5, 3}));
  EXPECT_EQ(lin.layer_count(), 1u);
  EXPECT_TRUE(lin.layer_is_weight_normalized(0));
  const auto mlp = MlpSpec::mlp(4, 8, 3, 2);
  EXPECT_EQ(mlp.layer_widths, (std::vector<int>{4, 8, 8, 8, 2}));
  EXPECT_TRUE(mlp.layer_is_weight_normalized(0));
  EXPECT_FALSE(mlp.layer_is_weight_normalized(1));
  EXPECT_TRUE(mlp.layer_is_weight_normalized(3));
  EXPECT_THROW(MlpSpec::linear(5, 1).validate(), ValidationError);
  EXPECT_THROW((MlpSpec{{5, 0, 3}, true}).validate(), ValidationError);
  EXPECT_THROW((MlpSpec{{5}, true}).validate(), ValidationError);
  EXPECT_THROW(init_mlp(MlpSpec{{3, 0, 2}, false}, 1), ValidationError);
}

TEST(InitMlp, DeterministicPerSeed) {
  const auto spec = MlpSpec::mlp(6, 10, 2, 4);
  EXPECT_TRUE(same_parameters(init_mlp(spec, 42).params, init_mlp(spec, 42).params));
  EXPECT_FALSE(same_parameters(init_mlp(spec, 42).params, init_mlp(spec, 43).params));
}

TEST(InitMlp, ScaledUniformWeightsZeroBiases) {
  const auto model = init_mlp(MlpSpec::mlp(50, 40, 1, 3, false), 9);
  for (const auto& layer : model.params.layers) {
    const double bound = std::sqrt(6.0 / static_cast<double>(layer.weight.cols()));
    EXPECT_LE(layer.weight.cwiseAbs().maxCoeff(), bound);
    EXPECT_GT(layer.weight.cwiseAbs().maxCoeff(), 0.8 * bound);
    EXPECT_EQ(layer.bias.norm(), 0.0);
  }
  const auto wn = init_mlp(MlpSpec::linear(7, 3, true), 9);
  const auto& l = wn.params.layers[0];
  EXPECT_LT((l.effective_weight() - l.weight).norm(), 1e-14);
}

TEST(InitMlp, SingleLinearLayerBuilds) {
  const auto model = init_mlp(MlpSpec::linear(12, 4), 0);
  ASSERT_EQ(model.params.layers.size(), 1u);
  EXPECT_EQ(model.params.parameter_count(), 12u * 4u + 4u + 4u);
}

TEST(Forward, RowsAreProbabilityVectors) {
  std::mt19937_64 gen(1);
  const auto model = init_mlp(MlpSpec::mlp(5, 16, 2, 4), 3);
  const Matrix x = 3.0 * random_matrix(gen, 30, 5);
  const Matrix p = forward(model, x);
  ASSERT_EQ(p.rows(), 30);
  ASSERT_EQ(p.cols(), 4);
  for (int i = 0; i < 30; ++i) {
    EXPECT_NEAR(p.row(i).sum(), 1.0, 1e-9);
    EXPECT_GT(p.row(i).minCoeff(), 0.0);
    EXPECT_LT(p.row(i).maxCoeff(), 1.0);
  }
}

TEST(Forward, ZeroLastLayerGivesUniformRows) {
  std::mt19937_64 gen(2);
  auto model = init_mlp(MlpSpec::mlp(3, 5, 1, 4, false), 3);
  model.params.layers.back().weight.setZero();
  const Matrix p = forward(model, random_matrix(gen, 6, 3));
  EXPECT_LT((p - Matrix::Constant(6, 4, 0.25)).norm(), 1e-15);
}

TEST(Forward, LargeLogitsStayFinite) {
  auto model = init_mlp(MlpSpec::linear(2, 3, false), 1);
  model.params.layers[0].bias << 800.0, 0.0, -800.0;
  Matrix x = Matrix::Zero(1, 2);
  const Matrix p = forward(model, x);
  EXPECT_TRUE(p.allFinite());
  EXPECT_NEAR(p(0, 0), 1.0, 1e-15);
}

TEST(Forward, RejectsBadInput) {
  const auto model = init_mlp(MlpSpec::linear(3, 2), 0);
  EXPECT_THROW(forward(model, Matrix::Zero(2, 4)), ValidationError);
  Matrix x = Matrix::Zero(2, 3);
  x(1, 1) = std::numeric_limits<double>::infinity();
  EXPECT_THROW(forward(model, x), ValidationError);
}

TEST(Gelu, ValuesAndDerivative) {
  EXPECT_EQ(gelu(0.0), 0.0);
  EXPECT_NEAR(gelu(1.0), 0.8413447460685429, 1e-15);
  EXPECT_NEAR(gelu(-1.0), -0.15865525393145707, 1e-15);
  for (double x : {-3.0, -0.7, 0.0, 0.4, 2.5}) {
    const double h = 1e-6;
    EXPECT_NEAR(gelu_derivative(x), (gelu(x + h) - gelu(x - h)) / (2 * h), 1e-9);
  }
}

TEST(Backward, MatchesFiniteDifferences) {
  std::mt19937_64 gen(4);
  const std::vector<MlpSpec> specs = {MlpSpec::linear(5, 3, true), MlpSpec::linear(5, 3, false),
                                      MlpSpec::mlp(5, 6, 1, 3, true),
                                      MlpSpec::mlp(5, 4, 3, 3, false)};
  for (const auto& spec : specs) {
    MlpModel model = init_mlp(spec, 11);
    for (auto& layer : model.params.layers) layer.bias = 0.2 * Vector::Random(layer.bias.size());
    const Matrix x = random_matrix(gen, 4, 5);
    const Matrix dp = random_matrix(gen, 4, 3);
    ForwardCache cache;
    forward(model, x, &cache);
    const MlpParameters grads = backward(model, cache, dp);
    auto blocks = model.params.blocks();
    const auto gblocks = grads.blocks();
    double num = 0.0, den = 0.0;
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      for (std::size_t i = 0; i < blocks[b].size(); ++i) {
        const double saved = blocks[b][i];
        const double h = 1e-6;
        blocks[b][i] = saved + h;
        const double fp = forward(model, x).cwiseProduct(dp).sum();
        blocks[b][i] = saved - h;
        const double fm = forward(model, x).cwiseProduct(dp).sum();
        blocks[b][i] = saved;
        const double fd = (fp - fm) / (2 * h);
        num += (gblocks[b][i] - fd) * (gblocks[b][i] - fd);
        den += fd * fd;
      }
    }
    EXPECT_LT(std::sqrt(num / den), 1e-5);
  }
}

TEST(Backward, ZeroUpstreamGivesZeroGradients) {
  std::mt19937_64 gen(5);
  const auto model = init_mlp(MlpSpec::mlp(3, 5, 2, 2), 1);
  ForwardCache cache;
  forward(model, random_matrix(gen, 7, 3), &cache);
  const auto grads = backward(model, cache, Matrix::Zero(7, 2));
  for (auto block : grads.blocks()) {
    for (double v : block) EXPECT_EQ(v, 0.0);
  }
}

TEST(Backward, InvariantUnderRowPermutation) {
  std::mt19937_64 gen(6);
  const auto model = init_mlp(MlpSpec::mlp(3, 5, 1, 2), 1);
  const Matrix x = random_matrix(gen, 6, 3);
  const Matrix dp = random_matrix(gen, 6, 2);
  Eigen::PermutationMatrix<Eigen::Dynamic> perm(6);
  perm.setIdentity();
  std::shuffle(perm.indices().data(), perm.indices().data() + 6, gen);
  ForwardCache c1, c2;
  forward(model, x, &c1);
  forward(model, perm * x, &c2);
  const auto g1 = backward(model, c1, dp).blocks();
  const auto g2 = backward(model, c2, perm * dp).blocks();
  for (std::size_t b = 0; b < g1.size(); ++b) {
    for (std::size_t i = 0; i < g1[b].size(); ++i) EXPECT_NEAR(g1[b][i], g2[b][i], 1e-12);
  }
}

TEST(Backward, ShapeMismatchThrows) {
  const auto model = init_mlp(MlpSpec::linear(3, 2), 1);
  ForwardCache cache;
  forward(model, Matrix::Zero(4, 3), &cache);
  EXPECT_THROW(backward(model, cache, Matrix::Zero(4, 3)), ValidationError);
}

TEST(Optimizer, SgdUnitStepSubtractsGradient) {
  auto model = init_mlp(MlpSpec::linear(3, 2, false), 1);
  const MlpParameters before = model.params;
  MlpParameters grads = model.params.zeros_like();
  grads.layers[0].weight.setConstant(0.25);
  grads.layers[0].bias << 1.0, -2.0;
  OptimizerConfig cfg;
  cfg.kind = OptimizerKind::sgd;
  cfg.lr = 1.0;
  cfg.weight_decay = 0.0;
  Optimizer opt(cfg, model.params);
  opt.step(model.params, grads);
  EXPECT_EQ(model.params.layers[0].weight, (before.layers[0].weight.array() - 0.25).matrix());
  EXPECT_EQ(model.params.layers[0].bias[0], -1.0);
  EXPECT_EQ(model.params.layers[0].bias[1], 2.0);
  EXPECT_EQ(opt.steps(), 1);
}

TEST(Optimizer, AdamFirstStepMovesByLearningRate) {
  auto model = init_mlp(MlpSpec::linear(4, 3, true), 1);
  const MlpParameters before = model.params;
  MlpParameters grads = model.params.zeros_like();
  for (auto block : grads.blocks()) {
    for (auto& v : block) v = 0.37;
  }
  OptimizerConfig cfg;
  cfg.kind = OptimizerKind::adam;
  cfg.lr = 1e-3;
  cfg.weight_decay = 0.0;
  Optimizer opt(cfg, model.params);
  opt.step(model.params, grads);
  const auto a = before.blocks();
  const auto b = model.params.blocks();
  for (std::size_t k = 0; k < a.size(); ++k) {
    for (std::size_t i = 0; i < a[k].size(); ++i) {
      EXPECT_NEAR(a[k][i] - b[k][i], 1e-3 * 0.37 / (0.37 + 1e-8), 1e-15);
    }
  }
}

TEST(Optimizer, RmspropFirstStepClosedForm) {
  auto model = init_mlp(MlpSpec::linear(2, 2, false), 1);
  const double w0 = model.params.layers[0].weight(0, 0);
  MlpParameters grads = model.params.zeros_like();
  grads.layers[0].weight(0, 0) = 2.0;
  OptimizerConfig cfg;
  cfg.kind = OptimizerKind::rmsprop;
  cfg.lr = 0.01;
  cfg.weight_decay = 0.0;
  Optimizer opt(cfg, model.params);
  opt.step(model.params, grads);
  const double expected = w0 - 0.01 * 2.0 / (std::sqrt(0.01 * 4.0) + 1e-8);
  EXPECT_NEAR(model.params.layers[0].weight(0, 0), expected, 1e-15);
}

TEST(Optimizer, ZeroGradientsAndNoDecayLeaveParametersUnchanged) {
  for (auto kind : {OptimizerKind::sgd, OptimizerKind::rmsprop, OptimizerKind::adam}) {
    auto model = init_mlp(MlpSpec::mlp(3, 4, 1, 2), 2);
    const MlpParameters before = model.params;
    OptimizerConfig cfg;
    cfg.kind = kind;
    cfg.weight_decay = 0.0;
    Optimizer opt(cfg, model.params);
    for (int i = 0; i < 3; ++i) opt.step(model.params, model.params.zeros_like());
    EXPECT_TRUE(same_parameters(before, model.params));
  }
}

TEST(Optimizer, DecoupledWeightDecay) {
  auto model = init_mlp(MlpSpec::linear(2, 2, false), 3);
  const Matrix w0 = model.params.layers[0].weight;
  OptimizerConfig cfg;
  cfg.kind = OptimizerKind::adam;
  cfg.lr = 0.1;
  cfg.weight_decay = 0.5;
  Optimizer opt(cfg, model.params);
  opt.step(model.params, model.params.zeros_like());
  EXPECT_LT((model.params.layers[0].weight - 0.95 * w0).norm(), 1e-15);
}

TEST(Optimizer, NonFiniteGradientIsRejectedWithoutUpdate) {
  auto model = init_mlp(MlpSpec::linear(2, 2), 3);
  const MlpParameters before = model.params;
  MlpParameters grads = model.params.zeros_like();
  grads.layers[0].bias[1] = std::numeric_limits<double>::quiet_NaN();
  Optimizer opt(OptimizerConfig{}, model.params);
  EXPECT_THROW(opt.step(model.params, grads), NumericalError);
  EXPECT_TRUE(same_parameters(before, model.params));
}

TEST(Optimizer, ConfigValidation) {
  OptimizerConfig cfg;
  cfg.lr = 0.0;
  EXPECT_THROW(cfg.validate(), ValidationError);
  cfg.lr = 1e-3;
  cfg.weight_decay = -1.0;
  EXPECT_THROW(cfg.validate(), ValidationError);
  EXPECT_EQ(parse_optimizer_kind("rmsprop"), OptimizerKind::rmsprop);
  EXPECT_THROW(parse_optimizer_kind("lbfgs"), ValidationError);
}

TEST(Checkpoint, RoundTripIsBitExact) {
  Checkpoint ck{init_mlp(MlpSpec::mlp(5, 7, 2, 3), 8), 1234, 99};
  std::stringstream ss;
  write_checkpoint(ss, ck);
  const Checkpoint back = read_checkpoint(ss);
  EXPECT_EQ(back.model.spec, ck.model.spec);
  EXPECT_EQ(back.seed, 1234u);
  EXPECT_EQ(back.step, 99);
  EXPECT_TRUE(same_parameters(back.model.params, ck.model.params));
}

TEST(Checkpoint, RejectsCorruptFiles) {
  Checkpoint ck{init_mlp(MlpSpec::linear(3, 2), 1), 0, 0};
  std::stringstream ss;
  write_checkpoint(ss, ck);
  const std::string bytes = ss.str();

  std::stringstream truncated(bytes.substr(0, bytes.size() - 3));
  EXPECT_THROW(read_checkpoint(truncated), ValidationError);
  std::stringstream trailing(bytes + "x");
  EXPECT_THROW(read_checkpoint(trailing), ValidationError);
  std::string bad_magic = bytes;
  bad_magic[0] = 'X';
  std::stringstream magic(bad_magic);
  EXPECT_THROW(read_checkpoint(magic), ValidationError);
  EXPECT_THROW(load_checkpoint("/nonexistent/model.ckpt"), ValidationError);
}
