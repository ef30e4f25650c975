#pragma once

#include <cmath>
#include <vector>

#include "mlh/tensor.hpp"

namespace mlh {

struct SgdConfig {
  double learning_rate = 0.01;
  double momentum = 0.9;
  int epochs = 20;
  int batch_size = 8;
  int decay_epoch = 10;       // learning rate multiplies by decay_factor every decay_epoch epochs
  double decay_factor = 0.1;

  void validate() const {
    if (learning_rate < 0 || momentum < 0 || epochs <= 0 || batch_size <= 0 ||
        decay_epoch <= 0 || decay_epoch >= epochs || decay_factor <= 0) {
      throw ConfigInvalid("bad SGD configuration");
    }
  }
};

/// Stepped schedule: lr * factor^(epoch / decay_epoch) with the default
/// 0.01 * 0.1^(epoch / 10). Epochs are 0-based.
inline double lr_at_epoch(const SgdConfig& config, int epoch) {
  return config.learning_rate * std::pow(config.decay_factor, epoch / config.decay_epoch);
}

/// SGD with classical momentum: v <- mu * v + g, theta <- theta - lr(epoch) * v.
/// Velocity buffers are lazily shaped after the parameter list of the first
/// step and must stay aligned with it.
template <typename T>
class SgdOptimizer {
 public:
  explicit SgdOptimizer(SgdConfig config) : config_(config) { config_.validate(); }

  const SgdConfig& config() const { return config_; }

  void step(const std::vector<Tensor<T>*>& params, const std::vector<const Tensor<T>*>& grads,
            int epoch) {
    if (params.size() != grads.size()) {
      throw ShapeMismatch("sgd: parameter and gradient lists differ in length");
    }
    if (velocity_.empty()) {
      velocity_.reserve(params.size());
      for (const Tensor<T>* p : params) velocity_.emplace_back(p->shape);
    }
    if (velocity_.size() != params.size()) {
      throw ShapeMismatch("sgd: parameter list changed between steps");
    }
    const T lr = static_cast<T>(lr_at_epoch(config_, epoch));
    const T mu = static_cast<T>(config_.momentum);
    for (std::size_t i = 0; i < params.size(); ++i) {
      Tensor<T>& theta = *params[i];
      const Tensor<T>& g = *grads[i];
      Tensor<T>& v = velocity_[i];
      require_same_shape(theta, g, "sgd step");
      require_same_shape(theta, v, "sgd velocity");
      for (std::size_t j = 0; j < theta.numel(); ++j) {
        v[j] = mu * v[j] + g[j];
        theta[j] -= lr * v[j];
      }
    }
  }

 private:
  SgdConfig config_;
  std::vector<Tensor<T>> velocity_;
};

}  // namespace mlh
