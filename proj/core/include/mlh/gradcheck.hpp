#pragma once

#include <algorithm>
#include <functional>

#include "mlh/layers.hpp"
#include "mlh/multiview.hpp"

namespace mlh {

template <typename T>
struct GradCheckResult {
  T max_rel_error{};
  std::size_t checked = 0;
};

/// Central-difference check of one tensor against its analytic gradient.
/// relative error = |a - n| / max(|a|, |n|, 1e-12). The loss closure must
/// re-evaluate the model with the tensor's current contents.
template <typename T>
void gradcheck_tensor(const std::function<T()>& loss, Tensor<T>& theta, const Tensor<T>& analytic,
                      T eps, GradCheckResult<T>& result) {
  require_same_shape(theta, analytic, "gradcheck");
  for (std::size_t i = 0; i < theta.numel(); ++i) {
    const T saved = theta[i];
    theta[i] = saved + eps;
    const T loss_plus = loss();
    theta[i] = saved - eps;
    const T loss_minus = loss();
    theta[i] = saved;
    const T numeric = (loss_plus - loss_minus) / (T(2) * eps);
    const T a = analytic[i];
    const T denom = std::max({std::abs(a), std::abs(numeric), T(1e-12)});
    result.max_rel_error = std::max(result.max_rel_error, std::abs(a - numeric) / denom);
    ++result.checked;
  }
}

/// Checks every parameter of a sequential net plus the input itself against
/// central finite differences of the cross-entropy loss.
template <typename T>
GradCheckResult<T> finite_diff_gradcheck(Sequential<T>& net, Tensor<T> input,
                                         const std::vector<std::size_t>& labels,
                                         T eps = T(1e-5)) {
  // Analytic gradients at the unperturbed point.
  auto out = net.forward(input, true);
  auto loss_result = softmax_cross_entropy(out, labels);
  Tensor<T> input_grad = net.backward(loss_result.grad_logits);
  std::vector<Tensor<T>> analytic;
  for (Tensor<T>* g : net.grads()) analytic.push_back(*g);

  const std::function<T()> loss = [&]() {
    return softmax_cross_entropy(net.forward(input, true), labels).loss;
  };

  GradCheckResult<T> result;
  auto params = net.params();
  for (std::size_t i = 0; i < params.size(); ++i) {
    gradcheck_tensor(loss, *params[i], analytic[i], eps, result);
  }
  gradcheck_tensor(loss, input, input_grad, eps, result);
  return result;
}

/// End-to-end check of a multi-view network: every parameter group and all
/// three view inputs. Tied (shared) groups compare the summed analytic
/// gradient because perturbing one replica set perturbs them all.
template <typename T>
GradCheckResult<T> finite_diff_gradcheck_multiview(MultiViewNetwork<T>& net,
                                                   std::array<Tensor<T>, 3> views,
                                                   const std::vector<std::size_t>& labels,
                                                   T eps = T(1e-5)) {
  auto logits = net.forward(views, true);
  auto loss_result = softmax_cross_entropy(logits, labels);
  const std::array<Tensor<T>, 3> view_grads = net.backward(loss_result.grad_logits);

  auto groups = net.param_groups();
  std::vector<Tensor<T>> analytic;
  analytic.reserve(groups.size());
  for (const auto& group : groups) {
    Tensor<T> sum = *group.grads[0];
    for (std::size_t i = 1; i < group.grads.size(); ++i) {
      for (std::size_t j = 0; j < sum.numel(); ++j) sum[j] += (*group.grads[i])[j];
    }
    analytic.push_back(std::move(sum));
  }

  const std::function<T()> loss = [&]() {
    return softmax_cross_entropy(net.forward(views, true), labels).loss;
  };

  GradCheckResult<T> result;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    auto& group = groups[g];
    Tensor<T>& master = *group.replicas[0];
    require_same_shape(master, analytic[g], "multiview gradcheck");
    for (std::size_t i = 0; i < master.numel(); ++i) {
      const T saved = master[i];
      const auto set_all = [&](T value) {
        for (Tensor<T>* replica : group.replicas) (*replica)[i] = value;
      };
      set_all(saved + eps);
      const T loss_plus = loss();
      set_all(saved - eps);
      const T loss_minus = loss();
      set_all(saved);
      const T numeric = (loss_plus - loss_minus) / (T(2) * eps);
      const T a = analytic[g][i];
      const T denom = std::max({std::abs(a), std::abs(numeric), T(1e-12)});
      result.max_rel_error = std::max(result.max_rel_error, std::abs(a - numeric) / denom);
      ++result.checked;
    }
  }
  for (std::size_t v = 0; v < 3; ++v) {
    gradcheck_tensor(loss, views[v], view_grads[v], eps, result);
  }
  return result;
}

}  // namespace mlh
