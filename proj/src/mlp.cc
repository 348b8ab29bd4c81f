// Copyright 2026 The TissueRetract Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "tissue_retract/nn/mlp.h"

#include <cmath>
#include <random>
#include <string>

#include "tissue_retract/common/error.h"

namespace tissue_retract::nn {

std::string ActivationName(Activation activation) {
  switch (activation) {
    case Activation::kIdentity: return "identity";
    case Activation::kRelu: return "relu";
    case Activation::kTanh: return "tanh";
  }
  return "identity";
}

Activation ParseActivation(const std::string& name) {
  if (name == "identity") return Activation::kIdentity;
  if (name == "relu") return Activation::kRelu;
  if (name == "tanh") return Activation::kTanh;
  throw Error(ErrorCode::kParseError, "unknown activation '" + name + "'");
}

namespace {

void Activate(Activation activation, Matrix& z) {
  switch (activation) {
    case Activation::kIdentity: break;
    case Activation::kRelu: z = z.cwiseMax(0.0); break;
    case Activation::kTanh: z = z.array().tanh(); break;
  }
}

// Multiplies `grad` in place by the activation derivative, expressed through
// the activation output y.
void ApplyDerivative(Activation activation, const Matrix& y, Matrix& grad) {
  switch (activation) {
    case Activation::kIdentity: break;
    case Activation::kRelu:
      grad = (y.array() > 0.0).select(grad, 0.0);
      break;
    case Activation::kTanh:
      grad.array() *= 1.0 - y.array().square();
      break;
  }
}

}  // namespace

Mlp::Mlp(std::vector<int> dims, Activation hidden, Activation output)
    : dims_(std::move(dims)), hidden_(hidden), output_(output) {
  Require(dims_.size() >= 2, ErrorCode::kInvalidArgument,
          "a network needs at least input and output dims");
  for (int d : dims_) {
    Require(d > 0, ErrorCode::kInvalidArgument, "layer dims must be positive");
  }
  for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
    layers_.push_back({Matrix::Zero(dims_[l + 1], dims_[l]),
                       Vector::Zero(dims_[l + 1])});
  }
}

Mlp Mlp::Initialized(std::vector<int> dims, Activation hidden,
                     Activation output, Rng& rng, double final_layer_scale) {
  Mlp net(std::move(dims), hidden, output);
  for (std::size_t l = 0; l < net.layers_.size(); ++l) {
    DenseLayer& layer = net.layers_[l];
    const double bound = 1.0 / std::sqrt(static_cast<double>(layer.weight.cols()));
    const double scale = l + 1 == net.layers_.size() ? final_layer_scale : 1.0;
    std::uniform_real_distribution<double> u(-bound, bound);
    for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) {
      for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
        layer.weight(r, c) = scale * u(rng);
      }
    }
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r) {
      layer.bias[r] = scale * u(rng);
    }
  }
  return net;
}

Matrix Mlp::Forward(const Matrix& input, ForwardCache* cache) const {
  Require(input.rows() == input_dim(), ErrorCode::kInvalidArgument,
          "network input has " + std::to_string(input.rows()) +
              " rows, expected " + std::to_string(input_dim()));
  if (cache) {
    cache->inputs.resize(layers_.size());
    cache->outputs.resize(layers_.size());
  }
  Matrix x = input;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const DenseLayer& layer = layers_[l];
    Matrix z(layer.weight.rows(), x.cols());
    z.noalias() = layer.weight * x;
    z.colwise() += layer.bias;
    Activate(l + 1 == layers_.size() ? output_ : hidden_, z);
    if (cache) cache->inputs[l] = std::move(x);
    x = std::move(z);
    if (cache) cache->outputs[l] = x;
  }
  return x;
}

Gradients Mlp::Backward(const ForwardCache& cache, const Matrix& output_grad,
                        bool with_params) const {
  Require(!cache.empty(), ErrorCode::kInvalidState,
          "backward called without a forward cache");
  Require(cache.inputs.size() == layers_.size(), ErrorCode::kInvalidState,
          "forward cache belongs to a different network");
  Require(output_grad.rows() == output_dim() &&
              output_grad.cols() == cache.outputs.back().cols(),
          ErrorCode::kInvalidArgument, "output gradient shape mismatch");

  Gradients grads;
  if (with_params) grads.layers.resize(layers_.size());
  Matrix delta = output_grad;
  for (std::size_t l = layers_.size(); l-- > 0;) {
    ApplyDerivative(l + 1 == layers_.size() ? output_ : hidden_,
                    cache.outputs[l], delta);
    if (with_params) {
      grads.layers[l].weight.noalias() = delta * cache.inputs[l].transpose();
      grads.layers[l].bias = delta.rowwise().sum();
    }
    Matrix upstream(layers_[l].weight.cols(), delta.cols());
    upstream.noalias() = layers_[l].weight.transpose() * delta;
    delta = std::move(upstream);
  }
  grads.input = std::move(delta);
  return grads;
}

std::size_t DenseParameterCount(const std::vector<int>& dims) {
  std::size_t total = 0;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    total += static_cast<std::size_t>(dims[l]) * dims[l + 1] + dims[l + 1];
  }
  return total;
}

std::size_t Mlp::ParameterCount() const {
  std::size_t total = 0;
  for (const DenseLayer& layer : layers_) {
    total += layer.weight.size() + layer.bias.size();
  }
  return total;
}

bool Mlp::AllFinite() const {
  for (const DenseLayer& layer : layers_) {
    if (!layer.weight.allFinite() || !layer.bias.allFinite()) return false;
  }
  return true;
}

bool Mlp::SameArchitecture(const Mlp& other) const {
  return dims_ == other.dims_ && hidden_ == other.hidden_ &&
         output_ == other.output_;
}

void SoftUpdate(Mlp& target, const Mlp& online, double tau) {
  Require(target.dims() == online.dims(), ErrorCode::kInvalidArgument,
          "soft update between different architectures");
  if (tau == 1.0) {
    target.layers() = online.layers();
    return;
  }
  for (std::size_t l = 0; l < online.layers().size(); ++l) {
    DenseLayer& t = target.layers()[l];
    const DenseLayer& o = online.layers()[l];
    t.weight = tau * o.weight + (1.0 - tau) * t.weight;
    t.bias = tau * o.bias + (1.0 - tau) * t.bias;
  }
}

Gradients ZeroGradients(const Mlp& net) {
  Gradients grads;
  for (const DenseLayer& layer : net.layers()) {
    grads.layers.push_back(
        {Matrix::Zero(layer.weight.rows(), layer.weight.cols()),
         Vector::Zero(layer.bias.size())});
  }
  grads.input = Matrix::Zero(net.input_dim(), 0);
  return grads;
}

Adam::Adam(const Mlp& net, AdamConfig config) : config_(config) {
  const Gradients zero = ZeroGradients(net);
  m_ = zero.layers;
  v_ = zero.layers;
}

void Adam::Step(Mlp& net, const Gradients& grads) {
  Require(grads.layers.size() == net.layers().size() &&
              m_.size() == net.layers().size(),
          ErrorCode::kInvalidArgument, "gradient/optimizer shape mismatch");
  for (const DenseLayer& g : grads.layers) {
    Require(g.weight.allFinite() && g.bias.allFinite(),
            ErrorCode::kOptimizerDiverged, "non-finite gradient");
  }
  ++step_;
  const double b1 = config_.beta1, b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(step_));
  const double step_size = config_.lr / c1;
  const double eps = config_.eps;
  for (std::size_t l = 0; l < grads.layers.size(); ++l) {
    DenseLayer& p = net.layers()[l];
    const DenseLayer& g = grads.layers[l];
    Require(g.weight.rows() == p.weight.rows() &&
                g.weight.cols() == p.weight.cols() &&
                g.bias.size() == p.bias.size(),
            ErrorCode::kInvalidArgument, "gradient shape mismatch");
    auto update = [&](auto& param, const auto& grad, auto& m, auto& v) {
      m = b1 * m + (1.0 - b1) * grad;
      v = b2 * v + (1.0 - b2) * grad.cwiseProduct(grad);
      param.array() -=
          step_size * m.array() / ((v.array() / c2).sqrt() + eps);
    };
    update(p.weight, g.weight, m_[l].weight, v_[l].weight);
    update(p.bias, g.bias, m_[l].bias, v_[l].bias);
  }
}

Normalizer::Normalizer(int dim, double eps, double clip)
    : sum_(Vector::Zero(dim)),
      sum_sq_(Vector::Zero(dim)),
      eps_(eps),
      clip_(clip),
      mean_(Vector::Zero(dim)),
      std_(Vector::Ones(dim)) {}

void Normalizer::Update(const Matrix& samples) {
  Require(samples.rows() == dim(), ErrorCode::kInvalidArgument,
          "normalizer sample dimension mismatch");
  sum_ += samples.rowwise().sum();
  sum_sq_ += samples.array().square().matrix().rowwise().sum();
  count_ += static_cast<double>(samples.cols());
  if (count_ <= 0.0) return;
  mean_ = sum_ / count_;
  const Vector var = sum_sq_ / count_ - mean_.cwiseProduct(mean_);
  std_ = var.cwiseMax(eps_ * eps_).cwiseSqrt();
}

Matrix Normalizer::Normalize(const Matrix& x) const {
  Require(x.rows() == dim(), ErrorCode::kInvalidArgument,
          "normalizer input dimension mismatch");
  Matrix out = (x.colwise() - mean_).array().colwise() / std_.array();
  return out.cwiseMax(-clip_).cwiseMin(clip_);
}

Vector Normalizer::Mean() const { return mean_; }
Vector Normalizer::Std() const { return std_; }

namespace {

nlohmann::json VectorToJson(const Vector& v) {
  return nlohmann::json(std::vector<double>(v.data(), v.data() + v.size()));
}

Vector VectorFromJson(const nlohmann::json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(values.data(),
                                  static_cast<Eigen::Index>(values.size()));
}

}  // namespace

nlohmann::json Normalizer::ToJson() const {
  return {{"sum", VectorToJson(sum_)},
          {"sum_sq", VectorToJson(sum_sq_)},
          {"count", count_},
          {"eps", eps_},
          {"clip", clip_}};
}

Normalizer Normalizer::FromJson(const nlohmann::json& j) {
  Normalizer n;
  n.sum_ = VectorFromJson(j.at("sum"));
  n.sum_sq_ = VectorFromJson(j.at("sum_sq"));
  Require(n.sum_.size() == n.sum_sq_.size(), ErrorCode::kParseError,
          "normalizer moment sizes differ");
  n.count_ = j.at("count").get<double>();
  n.eps_ = j.at("eps").get<double>();
  n.clip_ = j.at("clip").get<double>();
  n.mean_ = Vector::Zero(n.sum_.size());
  n.std_ = Vector::Ones(n.sum_.size());
  if (n.count_ > 0.0) {
    n.mean_ = n.sum_ / n.count_;
    const Vector var = n.sum_sq_ / n.count_ - n.mean_.cwiseProduct(n.mean_);
    n.std_ = var.cwiseMax(n.eps_ * n.eps_).cwiseSqrt();
  }
  return n;
}

nlohmann::json MlpToJson(const Mlp& net) {
  nlohmann::json layers = nlohmann::json::array();
  for (const DenseLayer& layer : net.layers()) {
    std::vector<double> weight;
    weight.reserve(layer.weight.size());
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) {
        weight.push_back(layer.weight(r, c));
      }
    }
    layers.push_back({{"weight", weight}, {"bias", VectorToJson(layer.bias)}});
  }
  return {{"dims", net.dims()},
          {"hidden_activation", ActivationName(net.hidden_activation())},
          {"output_activation", ActivationName(net.output_activation())},
          {"layers", layers}};
}

Mlp MlpFromJson(const nlohmann::json& j) {
  Mlp net(j.at("dims").get<std::vector<int>>(),
          ParseActivation(j.at("hidden_activation").get<std::string>()),
          ParseActivation(j.at("output_activation").get<std::string>()));
  const nlohmann::json& layers = j.at("layers");
  Require(layers.size() == net.layers().size(), ErrorCode::kParseError,
          "layer count does not match dims");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    DenseLayer& layer = net.layers()[l];
    const auto weight = layers[l].at("weight").get<std::vector<double>>();
    Require(weight.size() == static_cast<std::size_t>(layer.weight.size()),
            ErrorCode::kParseError, "weight array has the wrong length");
    std::size_t k = 0;
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) {
        layer.weight(r, c) = weight[k++];
      }
    }
    layer.bias = VectorFromJson(layers[l].at("bias"));
    Require(layer.bias.size() == layer.weight.rows(), ErrorCode::kParseError,
            "bias array has the wrong length");
  }
  return net;
}

}  // namespace tissue_retract::nn
