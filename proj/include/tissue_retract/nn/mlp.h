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

#ifndef TISSUE_RETRACT_NN_MLP_H_
#define TISSUE_RETRACT_NN_MLP_H_

// Dense feed-forward networks with explicit reverse-mode gradients.
// Batches are column-major: one column per sample.

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "json.hpp"
#include "tissue_retract/common/types.h"

namespace tissue_retract::nn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class Activation { kIdentity, kRelu, kTanh };

std::string ActivationName(Activation activation);
Activation ParseActivation(const std::string& name);

struct DenseLayer {
  Matrix weight;  // out x in
  Vector bias;    // out
};

// Intermediates recorded by Forward and consumed by Backward.
struct ForwardCache {
  std::vector<Matrix> inputs;   // input of each layer
  std::vector<Matrix> outputs;  // post-activation output of each layer
  bool empty() const { return inputs.empty(); }
};

struct Gradients {
  std::vector<DenseLayer> layers;  // same shapes as the network
  Matrix input;                    // d(loss)/d(input), in x batch
};

class Mlp {
 public:
  Mlp() = default;
  // Zero-initialized network; dims = {input, hidden..., output}.
  Mlp(std::vector<int> dims, Activation hidden, Activation output);

  // Weights and biases uniform in +-1/sqrt(fan_in); the last layer is
  // additionally multiplied by final_layer_scale.
  static Mlp Initialized(std::vector<int> dims, Activation hidden,
                         Activation output, Rng& rng,
                         double final_layer_scale = 1.0);

  // Throws invalid-argument when input.rows() != input_dim().
  Matrix Forward(const Matrix& input, ForwardCache* cache = nullptr) const;

  // Reverse pass for d(loss)/d(output) = output_grad. ReLU'(0) is taken as
  // 0. Throws invalid-state when `cache` is empty and invalid-argument on a
  // shape mismatch. With with_params = false only the input gradient is
  // produced.
  Gradients Backward(const ForwardCache& cache, const Matrix& output_grad,
                     bool with_params = true) const;

  int input_dim() const { return dims_.front(); }
  int output_dim() const { return dims_.back(); }
  const std::vector<int>& dims() const { return dims_; }
  Activation hidden_activation() const { return hidden_; }
  Activation output_activation() const { return output_; }
  std::vector<DenseLayer>& layers() { return layers_; }
  const std::vector<DenseLayer>& layers() const { return layers_; }

  std::size_t ParameterCount() const;
  bool AllFinite() const;
  bool SameArchitecture(const Mlp& other) const;

 private:
  std::vector<int> dims_;
  Activation hidden_ = Activation::kRelu;
  Activation output_ = Activation::kIdentity;
  std::vector<DenseLayer> layers_;
};

// Parameter count of a dense chain: sum of (in * out + out) per layer.
std::size_t DenseParameterCount(const std::vector<int>& dims);

// target <- tau * online + (1 - tau) * target. Throws invalid-argument on
// an architecture mismatch.
void SoftUpdate(Mlp& target, const Mlp& online, double tau);

// Gradients shaped like `net`, all zero.
Gradients ZeroGradients(const Mlp& net);

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Bias-corrected Adam, minimizing.
class Adam {
 public:
  Adam() = default;
  Adam(const Mlp& net, AdamConfig config);

  // Throws optimizer-diverged on a non-finite gradient (parameters are left
  // untouched) and invalid-argument on a shape mismatch.
  void Step(Mlp& net, const Gradients& grads);

  std::int64_t step() const { return step_; }
  const AdamConfig& config() const { return config_; }

 private:
  AdamConfig config_;
  std::vector<DenseLayer> m_;
  std::vector<DenseLayer> v_;
  std::int64_t step_ = 0;
};

// Running mean / variance over observation vectors, used to standardize
// network inputs: clip((x - mean) / max(std, eps), -clip, clip).
class Normalizer {
 public:
  Normalizer() = default;
  explicit Normalizer(int dim, double eps = 1e-2, double clip = 5.0);

  void Update(const Matrix& samples);  // columns are samples
  Matrix Normalize(const Matrix& x) const;

  int dim() const { return static_cast<int>(sum_.size()); }
  double count() const { return count_; }
  Vector Mean() const;
  Vector Std() const;

  nlohmann::json ToJson() const;
  static Normalizer FromJson(const nlohmann::json& j);

 private:
  Vector sum_;
  Vector sum_sq_;
  double count_ = 0.0;
  double eps_ = 1e-2;
  double clip_ = 5.0;
  Vector mean_;
  Vector std_;
};

// Checkpoint representation: dims, activation tags, and each layer's
// row-major weight followed by its bias, as decimal float64 arrays.
nlohmann::json MlpToJson(const Mlp& net);
Mlp MlpFromJson(const nlohmann::json& j);

}  // namespace tissue_retract::nn

#endif  // TISSUE_RETRACT_NN_MLP_H_
