#include "prcut/neural_model.hpp"

#include <cmath>
#include <numbers>

#include "prcut/error.hpp"
#include "prcut/random.hpp"

namespace prcut {

MlpSpec MlpSpec::linear(int input_dim, int clusters, bool weight_norm) {
  return MlpSpec{{input_dim, clusters}, weight_norm};
}

MlpSpec MlpSpec::mlp(int input_dim, int hidden_width, int depth, int clusters,
                     bool weight_norm) {
  MlpSpec spec;
  spec.layer_widths.push_back(input_dim);
  for (int i = 0; i < depth; ++i) spec.layer_widths.push_back(hidden_width);
  spec.layer_widths.push_back(clusters);
  spec.weight_norm_first_last = weight_norm;
  return spec;
}

bool MlpSpec::layer_is_weight_normalized(std::size_t layer) const {
  return weight_norm_first_last && (layer == 0 || layer + 1 == layer_count());
}

void MlpSpec::validate() const {
  if (layer_widths.size() < 2) throw ValidationError("MLP needs at least one layer");
  for (int w : layer_widths) {
    if (w < 1) throw ValidationError("MLP layer widths must be positive");
  }
  if (output_dim() < 2) throw ValidationError("MLP output width (clusters) must be >= 2");
}

Matrix LinearLayer::effective_weight() const {
  if (!weight_norm) return weight;
  Matrix w = weight;
  for (Eigen::Index r = 0; r < w.rows(); ++r) {
    const double norm = weight.row(r).norm();
    if (norm == 0.0) throw NumericalError("weight-normalized layer has a zero direction row");
    w.row(r) *= scale[r] / norm;
  }
  return w;
}

std::vector<std::span<double>> MlpParameters::blocks() {
  std::vector<std::span<double>> out;
  for (auto& layer : layers) {
    out.emplace_back(layer.weight.data(), static_cast<std::size_t>(layer.weight.size()));
    if (layer.weight_norm) {
      out.emplace_back(layer.scale.data(), static_cast<std::size_t>(layer.scale.size()));
    }
    out.emplace_back(layer.bias.data(), static_cast<std::size_t>(layer.bias.size()));
  }
  return out;
}

std::vector<std::span<const double>> MlpParameters::blocks() const {
  std::vector<std::span<const double>> out;
  for (const auto& layer : layers) {
    out.emplace_back(layer.weight.data(), static_cast<std::size_t>(layer.weight.size()));
    if (layer.weight_norm) {
      out.emplace_back(layer.scale.data(), static_cast<std::size_t>(layer.scale.size()));
    }
    out.emplace_back(layer.bias.data(), static_cast<std::size_t>(layer.bias.size()));
  }
  return out;
}

std::size_t MlpParameters::parameter_count() const {
  std::size_t total = 0;
  for (auto block : blocks()) total += block.size();
  return total;
}

MlpParameters MlpParameters::zeros_like() const {
  MlpParameters z;
  z.layers.reserve(layers.size());
  for (const auto& layer : layers) {
    LinearLayer l;
    l.weight = Matrix::Zero(layer.weight.rows(), layer.weight.cols());
    l.scale = Vector::Zero(layer.scale.size());
    l.bias = Vector::Zero(layer.bias.size());
    l.weight_norm = layer.weight_norm;
    z.layers.push_back(std::move(l));
  }
  return z;
}

bool MlpParameters::all_finite() const {
  for (auto block : blocks()) {
    for (double v : block) {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

MlpModel init_mlp(const MlpSpec& spec, std::uint64_t seed) {
  spec.validate();
  Rng rng(seed);
  MlpModel model;
  model.spec = spec;
  for (std::size_t l = 0; l < spec.layer_count(); ++l) {
    const int fan_in = spec.layer_widths[l];
    const int fan_out = spec.layer_widths[l + 1];
    const double bound = std::sqrt(6.0 / fan_in);
    LinearLayer layer;
    layer.weight.resize(fan_out, fan_in);
    for (Eigen::Index r = 0; r < fan_out; ++r) {
      for (Eigen::Index c = 0; c < fan_in; ++c) layer.weight(r, c) = rng.uniform(-bound, bound);
    }
    layer.bias = Vector::Zero(fan_out);
    layer.weight_norm = spec.layer_is_weight_normalized(l);
    if (layer.weight_norm) layer.scale = layer.weight.rowwise().norm();
    model.params.layers.push_back(std::move(layer));
  }
  return model;
}

double gelu(double x) {
  return 0.5 * x * std::erfc(-x / std::numbers::sqrt2);
}

double gelu_derivative(double x) {
  const double cdf = 0.5 * std::erfc(-x / std::numbers::sqrt2);
  const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
  return cdf + x * pdf;
}

namespace {

void softmax_rows(Matrix& z) {
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    const double top = z.row(i).maxCoeff();
    z.row(i) = (z.row(i).array() - top).exp().matrix();
    z.row(i) /= z.row(i).sum();
  }
}

}  // namespace

Matrix forward(const MlpModel& model, const Matrix& x, ForwardCache* cache) {
  if (x.cols() != model.spec.input_dim()) {
    throw ValidationError("forward: input width " + std::to_string(x.cols()) +
                          " does not match model input " +
                          std::to_string(model.spec.input_dim()));
  }
  if (!x.allFinite()) throw ValidationError("forward: non-finite input");
  if (cache != nullptr) {
    cache->inputs.clear();
    cache->pre_activations.clear();
  }
  Matrix h = x;
  const std::size_t layers = model.params.layers.size();
  for (std::size_t l = 0; l < layers; ++l) {
    const LinearLayer& layer = model.params.layers[l];
    Matrix z = (h * layer.effective_weight().transpose()).rowwise() + layer.bias.transpose();
    if (cache != nullptr) {
      cache->inputs.push_back(std::move(h));
      cache->pre_activations.push_back(z);
    }
    if (l + 1 < layers) {
      h = z.unaryExpr([](double v) { return gelu(v); });
    } else {
      softmax_rows(z);
      h = std::move(z);
    }
  }
  if (cache != nullptr) cache->output = h;
  return h;
}

MlpParameters backward(const MlpModel& model, const ForwardCache& cache, const Matrix& d_output) {
  const std::size_t layers = model.params.layers.size();
  if (cache.inputs.size() != layers || cache.pre_activations.size() != layers) {
    throw ValidationError("backward: cache does not match model");
  }
  if (d_output.rows() != cache.output.rows() || d_output.cols() != cache.output.cols()) {
    throw ValidationError("backward: output gradient shape mismatch");
  }
  const Matrix& p = cache.output;
  // Softmax Jacobian-vector product, row by row.
  const Vector inner = d_output.cwiseProduct(p).rowwise().sum();
  Matrix dz = p.cwiseProduct(d_output.colwise() - inner);

  MlpParameters grads = model.params.zeros_like();
  for (std::size_t step = 0; step < layers; ++step) {
    const std::size_t l = layers - 1 - step;
    const LinearLayer& layer = model.params.layers[l];
    LinearLayer& g = grads.layers[l];
    const Matrix w_eff = layer.effective_weight();
    const Matrix d_weight = dz.transpose() * cache.inputs[l];
    g.bias = dz.colwise().sum().transpose();
    if (layer.weight_norm) {
      for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
        const double norm = layer.weight.row(r).norm();
        const auto unit = layer.weight.row(r) / norm;
        const double proj = d_weight.row(r).dot(unit);
        g.scale[r] = proj;
        g.weight.row(r) = (layer.scale[r] / norm) * (d_weight.row(r) - proj * unit);
      }
    } else {
      g.weight = d_weight;
    }
    if (l > 0) {
      const Matrix dh = dz * w_eff;
      dz = dh.cwiseProduct(
          cache.pre_activations[l - 1].unaryExpr([](double v) { return gelu_derivative(v); }));
    }
  }
  return grads;
}

}  // namespace prcut
